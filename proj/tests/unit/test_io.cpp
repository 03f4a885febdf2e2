#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bsp/checkpoint.hpp"
#include "bsp/config.hpp"
#include "bsp/dataset.hpp"
#include "bsp/errors.hpp"
#include "bsp/report.hpp"
#include "bsp/run.hpp"
#include "bsp/synthetic.hpp"

using namespace bsp;
namespace fs = std::filesystem;

namespace {

const LabelAlphabet kBio({"B-NP", "I-NP", "O"});

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bsp-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<ChainInstance> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, kBio, "test.tsv");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

RunConfig synthetic_config(const fs::path& dir, ObjectiveKind kind, std::uint64_t seed) {
  SyntheticOptions options;
  options.train_size = 60;
  options.dev_size = 30;
  options.test_size = 30;
  const auto task = make_synthetic_chunking(options);
  write_dataset(dir / "train.tsv", task.train, task.alphabet);
  write_dataset(dir / "dev.tsv", task.dev, task.alphabet);
  write_dataset(dir / "test.tsv", task.test, task.alphabet);
  RunConfig c;
  c.train = dir / "train.tsv";
  c.dev = dir / "dev.tsv";
  c.test = dir / "test.tsv";
  c.trainer.objective = kind;
  c.trainer.seed = seed;
  c.trainer.gamma = 0.01;
  c.trainer.iterations = 2000;
  c.trainer.epoch_size = 100;
  c.trainer.clip_k = 0.1;
  return c;
}

}  // namespace

TEST_CASE("dataset: blocks, trailing blank lines and CRLF") {
  const auto data = parse("the\tB-NP\ndog\tI-NP\n\nruns\tO\r\n\n\n\n");
  REQUIRE(data.size() == 2);
  CHECK(data[0].tokens == std::vector<std::string>{"the", "dog"});
  CHECK(*data[0].gold == Labeling{0, 1});
  CHECK(*data[1].gold == Labeling{2});

  const auto unlabeled = parse("a\nb\n\nc\tO\n");
  CHECK_FALSE(unlabeled[0].gold.has_value());
  CHECK(unlabeled[1].gold.has_value());
}

TEST_CASE("dataset: errors carry line numbers") {
  CHECK(error_of("a\tO\nb\tX-NP\n").find("test.tsv:2:") != std::string::npos);
  CHECK(error_of("a\tO\nb\tO\tO\n").find("test.tsv:2:") != std::string::npos);
  CHECK(error_of("a\tO\nb\n").find("test.tsv:2:") != std::string::npos);
  CHECK(error_of("a\tO\n\n\tO\n").find("test.tsv:3:") != std::string::npos);
  CHECK_FALSE(error_of("").empty());
  CHECK_FALSE(error_of("\n\n").empty());
  CHECK_THROWS_AS(read_dataset("/nonexistent/file.tsv", kBio), DataError);
}

TEST_CASE("dataset: CoNLL-style sample round-trips") {
  const std::string text =
      "Confidence\tB-NP\nin\tO\nthe\tB-NP\npound\tI-NP\nis\tO\nwidely\tO\nexpected\tO\n\n"
      "Chancellor\tO\nof\tO\nthe\tB-NP\nExchequer\tI-NP\nNigel\tB-NP\nLawson\tI-NP\n";
  const auto data = parse(text);
  std::ostringstream out;
  write_dataset(out, data, kBio);
  CHECK(out.str() == text);
  const auto again = parse(out.str());
  REQUIRE(again.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(again[i].tokens == data[i].tokens);
    CHECK(again[i].gold == data[i].gold);
  }
}

TEST_CASE("checkpoint: binary write-read-write is byte-identical") {
  const Checkpoint ckpt{12345, SparseVector{{1, 0.1}, {0xffffffffffffffffULL, -3e-300}, {42, 1.0 / 3.0}}};
  std::ostringstream first;
  write_checkpoint(first, ckpt, CheckpointFormat::Binary);
  std::istringstream in(first.str());
  const Checkpoint read = read_checkpoint(in);
  CHECK(read.t == ckpt.t);
  CHECK(read.weights == ckpt.weights);
  std::ostringstream second;
  write_checkpoint(second, read, CheckpointFormat::Binary);
  CHECK(first.str() == second.str());
  CHECK(first.str().substr(0, 7) == "BSPCKPT");
  CHECK(first.str().size() == 8 + 4 + 4 + 8 + 8 + 3 * 16);
}

TEST_CASE("checkpoint: text form is exact") {
  const Checkpoint ckpt{7, SparseVector{{3, 0.1}, {9, -2.5e-17}}};
  std::ostringstream out;
  write_checkpoint(out, ckpt, CheckpointFormat::Text);
  CHECK(out.str().rfind("bsp-checkpoint 1\n", 0) == 0);
  std::istringstream in(out.str());
  const Checkpoint read = read_checkpoint(in);
  CHECK(read.t == 7);
  CHECK(read.weights == ckpt.weights);
}

TEST_CASE("checkpoint: corrupt input is rejected") {
  std::istringstream garbage("not a checkpoint");
  CHECK_THROWS_AS(read_checkpoint(garbage), DataError);

  std::ostringstream out;
  write_checkpoint(out, Checkpoint{1, SparseVector{{1, 1.0}}}, CheckpointFormat::Binary);
  std::istringstream truncated(out.str().substr(0, out.str().size() - 3));
  CHECK_THROWS_AS(read_checkpoint(truncated), DataError);

  std::string bad_version = out.str();
  bad_version[8] = 9;
  std::istringstream version(bad_version);
  CHECK_THROWS_AS(read_checkpoint(version), DataError);
}

TEST_CASE("config: parsing") {
  std::istringstream in("# comment\ngamma = 0.5   # trailing\n\nobjective=pr-cont\nlabels = B, I, O\n");
  const Settings s = parse_settings(in);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == std::pair<std::string, std::string>{"gamma", "0.5"});

  std::istringstream dup("gamma = 1\ngamma = 2\n");
  CHECK_THROWS_AS(parse_settings(dup), ConfigError);
  std::istringstream malformed("gamma 1\n");
  CHECK_THROWS_AS(parse_settings(malformed), ConfigError);

  RunConfig c;
  CHECK_THROWS_AS(apply_setting(c, "gama", "1", "."), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "gamma", "fast", "."), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "iterations", "-5", "."), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "bias", "maybe", "."), ConfigError);
  apply_setting(c, "--clip-k", "0.25", ".");
  CHECK(c.trainer.clip_k == 0.25);
  apply_setting(c, "labels", "B, I, O", ".");
  CHECK(c.labels == std::vector<std::string>{"B", "I", "O"});
}

TEST_CASE("config: command line over file over defaults") {
  const RunConfig defaults;
  const Settings file{{"gamma", "0.5"}, {"iterations", "300"}, {"train", "data/train.tsv"}, {"seed", "9"}};
  const Settings cli{{"gamma", "0.25"}, {"train", "other.tsv"}};
  const RunConfig c = resolve_config(file, "/cfg", cli, "/work");

  CHECK(c.trainer.gamma == 0.25);                              // command line
  CHECK(c.trainer.iterations == 300);                          // file
  CHECK(c.trainer.seed == 9);                                  // file
  CHECK(c.trainer.epoch_size == defaults.trainer.epoch_size);  // default
  CHECK(c.trainer.objective == defaults.trainer.objective);    // default
  CHECK(c.train == fs::path("/work/other.tsv"));

  const RunConfig file_only = resolve_config(file, "/cfg", {}, "/work");
  CHECK(file_only.train == fs::path("/cfg/data/train.tsv"));
  CHECK(file_only.trainer.gamma == 0.5);

  CHECK_THROWS_AS(resolve_config({{"clip_k", "2"}}, "/", {}, "/"), ConfigError);
  CHECK_THROWS_AS(resolve_config({{"schedule", "inverse"}}, "/", {}, "/"), ConfigError);
}

TEST_CASE("config: every key is accepted and formatted settings parse back") {
  RunConfig c;
  c.trainer.objective = ObjectiveKind::CE;
  c.trainer.gamma = 0.125;
  c.trainer.lambda = 2.0;
  c.loss = LossKind::ChunkF1;
  c.templates.window = 2;
  c.train = "/data/train.tsv";
  std::istringstream in(format_settings(c));
  const Settings s = parse_settings(in);
  CHECK(s.size() == config_keys().size());
  const RunConfig back = resolve_config(s, "/", {}, "/");
  CHECK(back.trainer.objective == ObjectiveKind::CE);
  CHECK(back.trainer.gamma == 0.125);
  CHECK(back.trainer.lambda == 2.0);
  CHECK(back.loss == LossKind::ChunkF1);
  CHECK(back.templates == c.templates);
  CHECK(back.train == c.train);
}

TEST_CASE("run_train: reports are deterministic and internally consistent") {
  const fs::path dir = scratch_dir("run");
  RunConfig c = synthetic_config(dir, ObjectiveKind::PR_CONT, 3);
  c.report = dir / "a.json";
  c.checkpoint = dir / "a.ckpt";
  const auto first = run_train(c);
  const std::string report_bytes = slurp(c.report);
  const std::string checkpoint_bytes = slurp(c.checkpoint);
  run_train(c);
  CHECK(slurp(c.report) == report_bytes);
  CHECK(slurp(c.checkpoint) == checkpoint_bytes);

  const RunReport report = load_report(dir / "a.json");
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < report.dev_curve.size(); ++i) {
    if (report.dev_curve[i].loss < report.dev_curve[argmin].loss) argmin = i;
  }
  CHECK(report.selected_t == report.dev_curve[argmin].t);
  CHECK(report.best_dev_loss == report.dev_curve[argmin].loss);
  CHECK(report.test_loss.has_value());
  CHECK(load_checkpoint(dir / "a.ckpt").weights == first.selection.weights);
  CHECK(load_checkpoint(dir / "a.ckpt").t == report.selected_t);

  const auto doc = nlohmann::json::parse(slurp(dir / "a.json"));
  CHECK(doc["schema"] == kReportSchema);
  CHECK(doc["summary"]["iterations_to_best"] == report.selected_t);
}

TEST_CASE("run_train: errors") {
  const fs::path dir = scratch_dir("run-errors");
  RunConfig c = synthetic_config(dir, ObjectiveKind::EL, 1);
  c.train = dir / "missing.tsv";
  CHECK_THROWS_AS(run_train(c), DataError);
  c = synthetic_config(dir, ObjectiveKind::EL, 1);
  c.train.clear();
  CHECK_THROWS_AS(run_train(c), ConfigError);
  c = synthetic_config(dir, ObjectiveKind::EL, 1);
  c.trainer.iterations = 150;
  CHECK_THROWS_AS(run_train(c), ConfigError);
}

TEST_CASE("report: JSON round trip and validation") {
  const fs::path dir = scratch_dir("report");
  RunConfig c = synthetic_config(dir, ObjectiveKind::CE, 2);
  const RunReport report = run_train(c).report;
  const auto doc = report_to_json(report);
  const RunReport back = report_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(report_to_json(back).dump() == doc.dump());

  auto broken = nlohmann::json::parse(doc.dump());
  broken["schema_version"] = 99;
  CHECK_THROWS_AS(report_from_json(broken), DataError);
  broken = nlohmann::json::parse(doc.dump());
  broken["summary"]["iterations_to_best"] = 999999;
  CHECK_THROWS_AS(report_from_json(broken), DataError);
  broken = nlohmann::json::parse(doc.dump());
  broken["convergence"].erase("variance_est");
  CHECK_THROWS_AS(report_from_json(broken), DataError);
}

TEST_CASE("three-seed PR versus CE runs produce a comparison summary") {
  const fs::path dir = scratch_dir("compare");
  std::vector<ConvergenceReport> reports;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (const auto kind : {ObjectiveKind::PR_BIN, ObjectiveKind::CE}) {
      RunConfig c = synthetic_config(dir, kind, seed);
      c.report = dir / ("seed" + std::to_string(seed) + "-" + std::string(to_string(kind)) + ".json");
      run_train(c);
      reports.push_back(load_report(c.report).convergence);
    }
  }
  const auto comparison = compare_runs(reports);
  CHECK(comparison.variance_pr_below_ce_each_seed.has_value());
  CHECK(comparison.summary().find("variance:") != std::string::npos);
}
