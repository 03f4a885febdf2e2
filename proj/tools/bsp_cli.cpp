#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bsp/checkpoint.hpp"
#include "bsp/config.hpp"
#include "bsp/dataset.hpp"
#include "bsp/diagnostics.hpp"
#include "bsp/errors.hpp"
#include "bsp/inference.hpp"
#include "bsp/objectives.hpp"
#include "bsp/report.hpp"
#include "bsp/run.hpp"
#include "bsp/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kSuccess = 0, kUsage = 1, kData = 2, kNumeric = 3 };

std::string flag_name(const std::string& key) {
  std::string name = key;
  for (char& c : name) {
    if (c == '_') c = '-';
  }
  return "--" + name;
}

/// Every config key as a command-line flag; values override the config file.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config_file, "Config file of key = value lines")->check(CLI::ExistingFile);
    for (const auto& key : bsp::config_keys()) app.add_option(flag_name(key), values[key]);
  }

  bsp::RunConfig resolve(const CLI::App& app) const {
    bsp::Settings file;
    fs::path file_dir;
    if (!config_file.empty()) {
      file = bsp::load_settings(config_file);
      file_dir = fs::absolute(config_file).parent_path();
    }
    bsp::Settings cli;
    for (const auto& key : bsp::config_keys()) {
      if (app.count(flag_name(key)) > 0) cli.emplace_back(key, values.at(key));
    }
    return bsp::resolve_config(file, file_dir, cli, fs::current_path());
  }
};

void print_report(const bsp::RunReport& report) {
  const auto& c = report.convergence;
  std::printf("objective        %s\n", std::string(bsp::to_string(c.objective)).c_str());
  std::printf("gamma            %g\n", c.gamma);
  std::printf("iterations       %zu (D = %zu, K = %zu)\n", c.T, c.D, c.K);
  std::printf("dev loss at t=0  %.6f\n", report.dev_curve.front().loss);
  std::printf("best dev loss    %.6f at t = %zu\n", report.best_dev_loss, report.selected_t);
  if (report.test_loss) std::printf("test loss        %.6f\n", *report.test_loss);
  std::printf("||gamma s_T||^2  %.6e\n", c.grad_norm_sq_at_T);
  std::printf("lipschitz est    %.6e\n", c.lipschitz_est);
  std::printf("variance est     %.6e\n", c.variance_est);
}

int cmd_train(const CLI::App& app, const ConfigFlags& flags, bool quiet) {
  const bsp::RunConfig config = flags.resolve(app);
  const auto result = bsp::run_train(config);
  if (!quiet) print_report(result.report);
  return kSuccess;
}

struct EvalOptions {
  std::string weights;
  std::string data;
  std::string predictions;
};

int cmd_eval(const CLI::App& app, const ConfigFlags& flags, const EvalOptions& options) {
  const bsp::RunConfig config = flags.resolve(app);
  const fs::path weights = options.weights.empty() ? config.checkpoint : fs::path(options.weights);
  const fs::path data_path = options.data.empty() ? config.test : fs::path(options.data);
  if (weights.empty()) throw bsp::ConfigError("eval needs --weights or a checkpoint setting");
  if (data_path.empty()) throw bsp::ConfigError("eval needs --data or a test setting");

  const bsp::LabelAlphabet alphabet(config.labels);
  const bsp::ChainModel model(alphabet, config.templates);
  const auto checkpoint = bsp::load_checkpoint(weights);
  auto data = bsp::read_dataset(data_path, alphabet);

  if (!options.predictions.empty()) {
    std::vector<bsp::ChainInstance> predicted;
    predicted.reserve(data.size());
    for (const auto& x : data) predicted.push_back({x.tokens, bsp::map_decode(model, checkpoint.weights, x)});
    bsp::write_dataset(fs::path(options.predictions), predicted, alphabet);
  }
  for (const auto& x : data) {
    if (!x.gold) {
      if (options.predictions.empty()) throw bsp::DataError(data_path.string() + ": unlabeled sequences cannot be scored");
      return kSuccess;
    }
  }
  std::printf("%.6f\n", bsp::evaluate(model, checkpoint.weights, data, config.loss));
  return kSuccess;
}

int cmd_diagnose(const std::vector<std::string>& paths, const std::string& require) {
  std::vector<bsp::ConvergenceReport> reports;
  for (const auto& path : paths) reports.push_back(bsp::load_report(path).convergence);
  const auto comparison = bsp::compare_runs(reports);
  std::cout << comparison.summary();
  if (require == "pr-below-ce") {
    if (!comparison.variance_pr_below_ce_each_seed.value_or(false)) return kNumeric;
  } else if (require == "pr-el-ce") {
    if (!comparison.variance_pr_el_ce.value_or(false)) return kNumeric;
  }
  return kSuccess;
}

int cmd_oracle_check(std::uint64_t seed, std::size_t fixtures) {
  bsp::OracleCheckOptions options;
  options.seed = seed;
  options.fixtures = fixtures;
  const auto result = bsp::run_oracle_check(options);
  std::cout << result.format();
  return result.passed() ? kSuccess : kNumeric;
}

struct SampleOptions {
  std::string weights;
  std::string data;
  std::size_t count = 1;
  std::uint64_t seed = 1;
  bool pairs = false;
  bool map = false;
};

std::string join_labels(const bsp::LabelAlphabet& alphabet, const bsp::Labeling& y) {
  std::string out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i > 0) out += ' ';
    out += alphabet.symbol(y[i]);
  }
  return out;
}

int cmd_sample(const CLI::App& app, const ConfigFlags& flags, const SampleOptions& options) {
  const bsp::RunConfig config = flags.resolve(app);
  const fs::path data_path = options.data.empty() ? config.dev : fs::path(options.data);
  if (data_path.empty()) throw bsp::ConfigError("sample needs --data or a dev setting");
  const bsp::LabelAlphabet alphabet(config.labels);
  const bsp::ChainModel model(alphabet, config.templates);
  bsp::SparseVector w;
  if (!options.weights.empty()) w = bsp::load_checkpoint(options.weights).weights;
  const auto data = bsp::read_dataset(data_path, alphabet);

  bsp::Rng rng(options.seed);
  for (std::size_t index = 0; index < data.size(); ++index) {
    const auto& x = data[index];
    if (options.map) {
      std::printf("%zu\tmap\t%s\n", index, join_labels(alphabet, bsp::map_decode(model, w, x)).c_str());
    }
    const bsp::ChainPosterior positive(bsp::build_lattice(model, w, x));
    if (options.pairs) {
      const bsp::ChainPosterior negative(bsp::build_lattice(model, w, x, -1.0));
      for (std::size_t k = 0; k < options.count; ++k) {
        const auto pair = bsp::pr_sample_pair(positive, negative, rng);
        std::printf("%zu\t%s\t%s\n", index, join_labels(alphabet, pair.first).c_str(),
                    join_labels(alphabet, pair.second).c_str());
      }
    } else {
      for (std::size_t k = 0; k < options.count; ++k) {
        const auto y = positive.sample(rng);
        std::printf("%zu\t%s\t%.6e\n", index, join_labels(alphabet, y).c_str(), positive.prob(y));
      }
    }
  }
  return kSuccess;
}

int cmd_generate(const std::string& out_dir, const bsp::SyntheticOptions& options) {
  const auto task = bsp::make_synthetic_chunking(options);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  bsp::write_dataset(dir / "train.tsv", task.train, task.alphabet);
  bsp::write_dataset(dir / "dev.tsv", task.dev, task.alphabet);
  bsp::write_dataset(dir / "test.tsv", task.test, task.alphabet);
  return kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured prediction from bandit feedback"};
  app.require_subcommand(1);

  ConfigFlags train_flags;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train, select on dev, write report and checkpoint");
  train_flags.attach(*train);
  train->add_flag("-q,--quiet", quiet, "Do not print the summary");

  ConfigFlags eval_flags;
  EvalOptions eval_options;
  auto* eval = app.add_subcommand("eval", "Mean task loss of MAP predictions");
  eval_flags.attach(*eval);
  eval->add_option("-w,--weights", eval_options.weights, "Checkpoint (default: checkpoint setting)");
  eval->add_option("-d,--data", eval_options.data, "Dataset (default: test setting)");
  eval->add_option("-p,--predictions", eval_options.predictions, "Write MAP labelings as TSV");

  std::vector<std::string> report_paths;
  std::string require;
  auto* diagnose = app.add_subcommand("diagnose", "Rank convergence estimates across run reports");
  diagnose->add_option("reports", report_paths, "Report files")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--require", require, "Exit 3 unless the ordering holds")
      ->check(CLI::IsMember({"pr-below-ce", "pr-el-ce"}));

  std::uint64_t oracle_seed = bsp::OracleCheckOptions{}.seed;
  std::size_t oracle_fixtures = bsp::OracleCheckOptions{}.fixtures;
  auto* oracle = app.add_subcommand("oracle-check", "Certify inference and gradients against enumeration");
  oracle->add_option("--seed", oracle_seed, "Fixture seed");
  oracle->add_option("--fixtures", oracle_fixtures, "Number of fixtures")->check(CLI::Range(1, 10000));

  ConfigFlags sample_flags;
  SampleOptions sample_options;
  auto* sample = app.add_subcommand("sample", "Draw structures (or pairs) from the model");
  sample_flags.attach(*sample);
  sample->add_option("-w,--weights", sample_options.weights, "Checkpoint (default: zero weights)");
  sample->add_option("-d,--data", sample_options.data, "Dataset (default: dev setting)");
  sample->add_option("-n,--count", sample_options.count, "Draws per sequence");
  sample->add_option("--sample-seed", sample_options.seed, "Sampler seed");
  sample->add_flag("--pairs", sample_options.pairs, "Draw (y ~ p_w, y' ~ p_-w) pairs");
  sample->add_flag("--map", sample_options.map, "Also print the MAP labeling");

  std::string generate_dir;
  bsp::SyntheticOptions synthetic;
  auto* generate = app.add_subcommand("generate", "Write the synthetic chunking task as TSV");
  generate->add_option("dir", generate_dir, "Output directory")->required();
  generate->add_option("--seed", synthetic.seed);
  generate->add_option("--train-size", synthetic.train_size);
  generate->add_option("--dev-size", synthetic.dev_size);
  generate->add_option("--test-size", synthetic.test_size);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (train->parsed()) return cmd_train(*train, train_flags, quiet);
    if (eval->parsed()) return cmd_eval(*eval, eval_flags, eval_options);
    if (diagnose->parsed()) return cmd_diagnose(report_paths, require);
    if (oracle->parsed()) return cmd_oracle_check(oracle_seed, oracle_fixtures);
    if (sample->parsed()) return cmd_sample(*sample, sample_flags, sample_options);
    if (generate->parsed()) return cmd_generate(generate_dir, synthetic);
  } catch (const bsp::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const bsp::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
