#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bsp/model.hpp"

namespace bsp {

/// CoNLL-style TSV: one "token<TAB>label" per line, blank lines between
/// sequences. A sequence may also be unlabeled ("token" only), in which case
/// it carries no gold labeling; mixing the two inside a sequence is an error.
std::vector<ChainInstance> parse_dataset(std::istream& in, const LabelAlphabet& alphabet,
                                         const std::string& source = "<stream>");
std::vector<ChainInstance> read_dataset(const std::filesystem::path& path, const LabelAlphabet& alphabet);

void write_dataset(std::ostream& out, std::span<const ChainInstance> data, const LabelAlphabet& alphabet);
void write_dataset(const std::filesystem::path& path, std::span<const ChainInstance> data,
                   const LabelAlphabet& alphabet);

}  // namespace bsp
