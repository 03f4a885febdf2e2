#include "bsp/checkpoint.hpp"

#include <array>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bsp/errors.hpp"

namespace bsp {

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'S', 'P', 'C', 'K', 'P', 'T', '\0'};
constexpr std::string_view kTextHeader = "bsp-checkpoint";

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw DataError("truncated checkpoint");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

void write_binary(std::ostream& out, const Checkpoint& checkpoint) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, checkpoint.t);
  put_le<std::uint64_t>(out, checkpoint.weights.size());
  for (const auto& [id, value] : checkpoint.weights) {
    put_le<std::uint64_t>(out, id);
    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(value));
  }
}

Checkpoint read_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw DataError("not a binary checkpoint");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  get_le<std::uint32_t>(in);
  Checkpoint checkpoint;
  checkpoint.t = get_le<std::uint64_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  FeatureId previous = 0;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto id = get_le<std::uint64_t>(in);
    const double value = std::bit_cast<double>(get_le<std::uint64_t>(in));
    if (k > 0 && id <= previous) throw DataError("checkpoint entries out of order");
    if (value == 0.0) throw DataError("checkpoint stores an explicit zero");
    checkpoint.weights.set(id, value);
    previous = id;
  }
  return checkpoint;
}

std::string hex_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%a", value);
  return buffer;
}

void write_text(std::ostream& out, const Checkpoint& checkpoint) {
  out << kTextHeader << ' ' << kCheckpointVersion << '\n';
  out << "iteration " << checkpoint.t << '\n';
  out << "entries " << checkpoint.weights.size() << '\n';
  for (const auto& [id, value] : checkpoint.weights) out << id << '\t' << hex_double(value) << '\n';
}

Checkpoint read_text(std::istream& in) {
  std::string line;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw DataError(std::string("truncated text checkpoint: missing ") + what);
    return std::istringstream(line);
  };
  std::string word;
  std::uint32_t version = 0;
  if (!(next("header") >> word >> version) || word != kTextHeader) throw DataError("not a text checkpoint");
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint checkpoint;
  std::uint64_t count = 0;
  if (!(next("iteration") >> word >> checkpoint.t) || word != "iteration") throw DataError("bad iteration line");
  if (!(next("entries") >> word >> count) || word != "entries") throw DataError("bad entries line");
  for (std::uint64_t k = 0; k < count; ++k) {
    auto fields = next("entry");
    FeatureId id = 0;
    std::string value_text;
    if (!(fields >> id >> value_text)) throw DataError("malformed checkpoint entry: " + line);
    char* end = nullptr;
    const double value = std::strtod(value_text.c_str(), &end);
    if (end == value_text.c_str() || *end != '\0') throw DataError("malformed checkpoint weight: " + value_text);
    checkpoint.weights.set(id, value);
  }
  return checkpoint;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint, CheckpointFormat format) {
  if (format == CheckpointFormat::Binary) {
    write_binary(out, checkpoint);
  } else {
    write_text(out, checkpoint);
  }
  if (!out) throw DataError("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  const int first = in.peek();
  if (first == kMagic[0]) return read_binary(in);
  return read_text(in);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint, CheckpointFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(out, checkpoint, format);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace bsp
