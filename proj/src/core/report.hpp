#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/ensemble.hpp"
#include "core/metrics.hpp"
#include "core/mlp.hpp"
#include "core/rbf.hpp"
#include "core/svm.hpp"

namespace beatfuse {

inline constexpr int kNumSystems = 5;  // MLP, RBF, SVM, voting, weighted
extern const std::array<std::string, kNumSystems> kSystemNames;

struct SystemResult {
  std::string name;
  std::array<ConfusionCounts, kNumTrainable> cells{};
  std::array<ClassMetrics, kNumTrainable> per_class{};
  double overall_accuracy = 0.0;   // multiclass argmax accuracy
  double macro_sensitivity = 0.0;  // mean of per-class sensitivities
  double macro_specificity = 0.0;
};

struct RunMetadata {
  std::string config_digest;
  std::string config_text;  // canonical config; re-running it reproduces the report
  std::size_t train_size = 0;
  std::size_t calibration_size = 0;
  std::size_t test_size = 0;
  std::size_t excluded_other = 0;
};

struct EvaluationReport {
  std::array<SystemResult, kNumSystems> systems{};
  RunMetadata metadata;
};

struct PipelineResult {
  EvaluationReport report;
  MlpModel mlp;
  RbfModel rbf;
  SvmOvaModel svm;
  FusionModel fusion;
};

// split -> train the three classifiers -> fit fusion on the calibration
// partition -> evaluate all five systems on the test partition.
PipelineResult run_pipeline(const RunConfig& cfg);

// Score all five systems over `test` with frozen models.
EvaluationReport evaluate_systems(const MlpModel& mlp, const RbfModel& rbf,
                                  const SvmOvaModel& svm, const FusionModel& fusion,
                                  const Dataset& test);

ClassifierOutputs classifier_outputs(const MlpModel& mlp, const RbfModel& rbf,
                                     const SvmOvaModel& svm, const FeatureVector& x);

enum class TableFormat { kMarkdown, kCsv };

// Tables 2-6-shaped per-system tables plus a summary table; rendering
// only rounds, never recomputes.
std::string render_tables(const EvaluationReport& report, TableFormat format);

// Deterministic JSON round trip for stored reports.
std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

}  // namespace beatfuse
