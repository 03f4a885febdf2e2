#include "bsp/report.hpp"

#include <fstream>

#include "bsp/errors.hpp"

namespace bsp {

using nlohmann::json;
using nlohmann::ordered_json;

nlohmann::ordered_json report_to_json(const RunReport& r) {
  const auto& c = r.convergence;
  ordered_json doc;
  doc["schema"] = kReportSchema;
  doc["schema_version"] = kReportSchemaVersion;
  doc["run"] = {
      {"objective", std::string(to_string(c.objective))},
      {"seed", c.seed},
      {"gamma", c.gamma},
      {"lambda", c.lambda},
      {"clip_k", c.clip_k},
      {"iterations", c.T},
      {"epoch_size", c.D},
      {"eval_every", r.eval_every},
      {"loss", std::string(to_string(r.loss))},
      {"labels", r.labels},
      {"templates",
       {{"window", r.templates.window}, {"bias", r.templates.bias}, {"transitions", r.templates.transitions}}},
      {"feature_norm_bound", r.feature_norm_bound},
  };
  doc["convergence"] = {
      {"grad_norm_sq_at_T", c.grad_norm_sq_at_T},
      {"lipschitz_est", c.lipschitz_est},
      {"variance_est", c.variance_est},
      {"T", c.T},
      {"D", c.D},
      {"K", c.K},
  };
  ordered_json curve = ordered_json::array();
  for (const auto& s : r.dev_curve) curve.push_back({{"t", s.t}, {"loss", s.loss}});
  doc["dev_curve"] = std::move(curve);
  doc["selected"] = {
      {"index", r.selected_index},
      {"t", r.selected_t},
      {"dev_loss", r.best_dev_loss},
      {"checkpoint", r.checkpoint_path},
  };
  doc["summary"] = {
      {"iterations_to_best", r.selected_t},
      {"best_dev_loss", r.best_dev_loss},
      {"test_loss", r.test_loss ? json(*r.test_loss) : json(nullptr)},
      {"gamma", c.gamma},
      {"lambda", c.lambda},
      {"k", c.clip_k},
  };
  return doc;
}

namespace {

const json& field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) throw DataError(std::string("report: missing field '") + name + "'");
  return obj.at(name);
}

template <typename T>
T get(const json& obj, const char* name) {
  try {
    return field(obj, name).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("report: bad field '") + name + "': " + e.what());
  }
}

}  // namespace

RunReport report_from_json(const json& doc) {
  if (get<std::string>(doc, "schema") != kReportSchema) throw DataError("report: wrong schema tag");
  if (get<int>(doc, "schema_version") != kReportSchemaVersion) throw DataError("report: unsupported schema version");
  RunReport r;
  const json& run = field(doc, "run");
  auto& c = r.convergence;
  try {
    c.objective = parse_objective(get<std::string>(run, "objective"));
    r.loss = parse_loss(get<std::string>(run, "loss"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  c.seed = get<std::uint64_t>(run, "seed");
  c.gamma = get<double>(run, "gamma");
  c.lambda = get<double>(run, "lambda");
  c.clip_k = get<double>(run, "clip_k");
  r.eval_every = get<std::size_t>(run, "eval_every");
  r.labels = get<std::vector<std::string>>(run, "labels");
  const json& templates = field(run, "templates");
  r.templates.window = get<int>(templates, "window");
  r.templates.bias = get<bool>(templates, "bias");
  r.templates.transitions = get<bool>(templates, "transitions");
  r.feature_norm_bound = get<double>(run, "feature_norm_bound");

  const json& conv = field(doc, "convergence");
  c.grad_norm_sq_at_T = get<double>(conv, "grad_norm_sq_at_T");
  c.lipschitz_est = get<double>(conv, "lipschitz_est");
  c.variance_est = get<double>(conv, "variance_est");
  c.T = get<std::size_t>(conv, "T");
  c.D = get<std::size_t>(conv, "D");
  c.K = get<std::size_t>(conv, "K");
  if (c.D == 0 || c.K != c.T / c.D) throw DataError("report: K is not floor(T / D)");

  const json& curve = field(doc, "dev_curve");
  if (!curve.is_array() || curve.empty()) throw DataError("report: dev_curve must be a nonempty array");
  for (const auto& point : curve) r.dev_curve.push_back({get<std::size_t>(point, "t"), get<double>(point, "loss")});

  const json& selected = field(doc, "selected");
  r.selected_index = get<std::size_t>(selected, "index");
  r.selected_t = get<std::size_t>(selected, "t");
  r.best_dev_loss = get<double>(selected, "dev_loss");
  r.checkpoint_path = get<std::string>(selected, "checkpoint");
  if (r.selected_index >= r.dev_curve.size() || r.dev_curve[r.selected_index].t != r.selected_t) {
    throw DataError("report: selected checkpoint is not on the dev curve");
  }

  const json& summary = field(doc, "summary");
  if (get<std::size_t>(summary, "iterations_to_best") != r.selected_t) {
    throw DataError("report: iterations_to_best disagrees with the selected checkpoint");
  }
  const json& test = field(summary, "test_loss");
  if (!test.is_null()) r.test_loss = get<double>(summary, "test_loss");
  return r;
}

void save_report(const std::filesystem::path& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report " + path.string());
  out << report_to_json(report).dump(2) << '\n';
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("report " + path.string() + ": " + e.what());
  }
  return report_from_json(doc);
}

}  // namespace bsp
