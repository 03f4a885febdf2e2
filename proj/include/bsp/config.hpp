#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bsp/checkpoint.hpp"
#include "bsp/feedback.hpp"
#include "bsp/model.hpp"
#include "bsp/trainer.hpp"

namespace bsp {

/// Everything a `train` run needs. Field names double as config-file keys
/// and CLI flags (`clip_k` in a file, `--clip-k` on the command line).
struct RunConfig {
  std::filesystem::path train;
  std::filesystem::path dev;
  std::filesystem::path test;             ///< optional
  std::filesystem::path report;           ///< optional; JSON report output
  std::filesystem::path checkpoint;       ///< optional; selected weights output
  std::filesystem::path init_checkpoint;  ///< optional warm start, w_0 = 0 otherwise
  CheckpointFormat checkpoint_format = CheckpointFormat::Binary;
  std::vector<std::string> labels = {"B-NP", "I-NP", "O"};
  LossKind loss = LossKind::Hamming;
  TemplateSet templates;
  TrainerConfig trainer;
  std::size_t lipschitz_pairs = 500;
};

/// Ordered key/value pairs as they appeared in a file or on the command line.
using Settings = std::vector<std::pair<std::string, std::string>>;

/// "key = value" lines; '#' starts a comment. Throws ConfigError on malformed
/// lines or repeated keys.
Settings parse_settings(std::istream& in, const std::string& source = "<config>");
Settings load_settings(const std::filesystem::path& path);

/// Known keys, in canonical (underscore) spelling.
const std::vector<std::string>& config_keys();

/// Applies one setting. Relative paths are resolved against `base_dir`.
/// Throws ConfigError for unknown keys or unparsable values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir);

/// default < config file < command line. File paths resolve against the
/// file's directory, command-line paths against `cli_base_dir`.
RunConfig resolve_config(const Settings& file_settings, const std::filesystem::path& file_dir,
                         const Settings& cli_settings, const std::filesystem::path& cli_base_dir);

/// Serializes back to "key = value" form (all keys, canonical order).
std::string format_settings(const RunConfig& config);

}  // namespace bsp
