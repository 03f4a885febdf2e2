#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsp/diagnostics.hpp"
#include "bsp/feedback.hpp"
#include "bsp/model.hpp"
#include "bsp/trainer.hpp"

namespace bsp {

inline constexpr const char* kReportSchema = "bsp-report";
inline constexpr int kReportSchemaVersion = 1;

/// One training run: convergence estimates, the dev curve, the selected
/// checkpoint and a summary row (iterations to best, best score, γ, λ, k).
struct RunReport {
  ConvergenceReport convergence;
  LossKind loss = LossKind::Hamming;
  std::vector<std::string> labels;
  TemplateSet templates;
  std::size_t eval_every = 0;
  std::vector<DevScore> dev_curve;
  std::size_t selected_index = 0;
  std::size_t selected_t = 0;
  double best_dev_loss = 0.0;
  std::optional<double> test_loss;
  double feature_norm_bound = 0.0;
  std::string checkpoint_path;
};

nlohmann::ordered_json report_to_json(const RunReport& report);
/// Validates the schema tag, version and every required field; throws DataError.
RunReport report_from_json(const nlohmann::json& doc);

void save_report(const std::filesystem::path& path, const RunReport& report);
RunReport load_report(const std::filesystem::path& path);

}  // namespace bsp
