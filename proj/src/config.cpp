#include "bsp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "bsp/errors.hpp"

namespace bsp {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string canonical_key(std::string_view key) {
  std::string k = trim(key);
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const std::string s = trim(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("invalid value '" + s + "' for " + std::string(key));
  }
  return value;
}

double parse_real(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(value)) {
    throw ConfigError("invalid value '" + s + "' for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("invalid boolean '" + s + "' for " + std::string(key));
}

std::filesystem::path parse_path(std::string_view text, const std::filesystem::path& base_dir) {
  std::filesystem::path p(trim(text));
  if (p.empty() || p.is_absolute()) return p;
  return (base_dir / p).lexically_normal();
}

std::vector<std::string> parse_labels(std::string_view text) {
  std::vector<std::string> labels;
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) labels.push_back(item);
  }
  return labels;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "train",     "dev",        "test",       "report",       "checkpoint",  "init_checkpoint",
      "checkpoint_format",       "labels",     "loss",         "objective",   "gamma",
      "iterations", "clip_k",    "lambda",     "seed",         "epoch_size",  "eval_every",
      "schedule",  "snapshots",  "lipschitz_pairs",            "window",      "bias",
      "transitions"};
  return keys;
}

Settings parse_settings(std::istream& in, const std::string& source) {
  Settings settings;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = canonical_key(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": key '" + key + "' set twice");
    }
    settings.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return settings;
}

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_settings(in, path.string());
}

void apply_setting(RunConfig& config, std::string_view raw_key, std::string_view value,
                   const std::filesystem::path& base_dir) {
  const std::string key = canonical_key(raw_key);
  auto& t = config.trainer;
  if (key == "train") {
    config.train = parse_path(value, base_dir);
  } else if (key == "dev") {
    config.dev = parse_path(value, base_dir);
  } else if (key == "test") {
    config.test = parse_path(value, base_dir);
  } else if (key == "report") {
    config.report = parse_path(value, base_dir);
  } else if (key == "checkpoint") {
    config.checkpoint = parse_path(value, base_dir);
  } else if (key == "init_checkpoint") {
    config.init_checkpoint = parse_path(value, base_dir);
  } else if (key == "checkpoint_format") {
    const std::string v = trim(value);
    if (v == "binary") {
      config.checkpoint_format = CheckpointFormat::Binary;
    } else if (v == "text") {
      config.checkpoint_format = CheckpointFormat::Text;
    } else {
      throw ConfigError("checkpoint_format must be 'binary' or 'text'");
    }
  } else if (key == "labels") {
    config.labels = parse_labels(value);
    if (config.labels.size() < 2) throw ConfigError("labels needs at least two comma-separated symbols");
  } else if (key == "loss") {
    config.loss = parse_loss(trim(value));
  } else if (key == "objective") {
    t.objective = parse_objective(trim(value));
  } else if (key == "gamma") {
    t.gamma = parse_real(key, value);
  } else if (key == "iterations") {
    t.iterations = parse_number<std::size_t>(key, value);
  } else if (key == "clip_k") {
    t.clip_k = parse_real(key, value);
  } else if (key == "lambda") {
    t.lambda = parse_real(key, value);
  } else if (key == "seed") {
    t.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "epoch_size") {
    t.epoch_size = parse_number<std::size_t>(key, value);
  } else if (key == "eval_every") {
    t.eval_every = parse_number<std::size_t>(key, value);
  } else if (key == "schedule") {
    t.schedule = std::string(value);
  } else if (key == "snapshots") {
    t.snapshot_count = parse_number<std::size_t>(key, value);
  } else if (key == "lipschitz_pairs") {
    config.lipschitz_pairs = parse_number<std::size_t>(key, value);
  } else if (key == "window") {
    config.templates.window = parse_number<int>(key, value);
  } else if (key == "bias") {
    config.templates.bias = parse_bool(key, value);
  } else if (key == "transitions") {
    config.templates.transitions = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(raw_key) + "'");
  }
}

RunConfig resolve_config(const Settings& file_settings, const std::filesystem::path& file_dir,
                         const Settings& cli_settings, const std::filesystem::path& cli_base_dir) {
  RunConfig config;
  for (const auto& [key, value] : file_settings) apply_setting(config, key, value, file_dir);
  for (const auto& [key, value] : cli_settings) apply_setting(config, key, value, cli_base_dir);
  config.trainer.validate();
  return config;
}

std::string format_settings(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  std::string labels;
  for (const auto& l : c.labels) labels += (labels.empty() ? "" : ",") + l;
  out << "train = " << c.train.string() << "\n"
      << "dev = " << c.dev.string() << "\n"
      << "test = " << c.test.string() << "\n"
      << "report = " << c.report.string() << "\n"
      << "checkpoint = " << c.checkpoint.string() << "\n"
      << "init_checkpoint = " << c.init_checkpoint.string() << "\n"
      << "checkpoint_format = " << (c.checkpoint_format == CheckpointFormat::Binary ? "binary" : "text") << "\n"
      << "labels = " << labels << "\n"
      << "loss = " << to_string(c.loss) << "\n"
      << "objective = " << to_string(c.trainer.objective) << "\n"
      << "gamma = " << c.trainer.gamma << "\n"
      << "iterations = " << c.trainer.iterations << "\n"
      << "clip_k = " << c.trainer.clip_k << "\n"
      << "lambda = " << c.trainer.lambda << "\n"
      << "seed = " << c.trainer.seed << "\n"
      << "epoch_size = " << c.trainer.epoch_size << "\n"
      << "eval_every = " << c.trainer.eval_every << "\n"
      << "schedule = " << c.trainer.schedule << "\n"
      << "snapshots = " << c.trainer.snapshot_count << "\n"
      << "lipschitz_pairs = " << c.lipschitz_pairs << "\n"
      << "window = " << c.templates.window << "\n"
      << "bias = " << (c.templates.bias ? "true" : "false") << "\n"
      << "transitions = " << (c.templates.transitions ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace bsp
