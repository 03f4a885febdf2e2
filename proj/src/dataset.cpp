#include "bsp/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "bsp/errors.hpp"

namespace bsp {

std::vector<ChainInstance> parse_dataset(std::istream& in, const LabelAlphabet& alphabet, const std::string& source) {
  std::vector<ChainInstance> data;
  ChainInstance current;
  Labeling labels;
  bool labeled = false;
  std::size_t line_no = 0;

  auto fail = [&](const std::string& what) {
    throw DataError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  auto flush = [&] {
    if (current.tokens.empty()) return;
    if (labeled) current.gold = std::move(labels);
    data.push_back(std::move(current));
    current = {};
    labels.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    const bool has_label = tab != std::string::npos;
    if (current.tokens.empty()) {
      labeled = has_label;
    } else if (has_label != labeled) {
      fail("sequence mixes labeled and unlabeled tokens");
    }
    std::string token = line.substr(0, tab);
    if (token.empty()) fail("empty token");
    if (has_label) {
      const std::string label = line.substr(tab + 1);
      if (label.find('\t') != std::string::npos) fail("expected 'token<TAB>label', found extra columns");
      const auto index = alphabet.find(label);
      if (!index) fail("unknown label '" + label + "'");
      labels.push_back(*index);
    }
    current.tokens.push_back(std::move(token));
  }
  flush();
  if (data.empty()) throw DataError(source + ": no sequences found");
  return data;
}

std::vector<ChainInstance> read_dataset(const std::filesystem::path& path, const LabelAlphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return parse_dataset(in, alphabet, path.string());
}

void write_dataset(std::ostream& out, std::span<const ChainInstance> data, const LabelAlphabet& alphabet) {
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& x = data[k];
    if (k > 0) out << '\n';
    for (std::size_t i = 0; i < x.size(); ++i) {
      out << x.tokens[i];
      if (x.gold) out << '\t' << alphabet.symbol((*x.gold)[i]);
      out << '\n';
    }
  }
}

void write_dataset(const std::filesystem::path& path, std::span<const ChainInstance> data,
                   const LabelAlphabet& alphabet) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset " + path.string());
  write_dataset(out, data, alphabet);
}

}  // namespace bsp
