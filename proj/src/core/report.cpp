#include "core/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace beatfuse {

const std::array<std::string, kNumSystems> kSystemNames = {
    "BP MLP", "RBF NN", "SVM", "Majority Voting Ensemble", "Weighted Sum Ensemble"};

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const UsageError& e) {
    throw UsageError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what());
  }
}

int argmax5(const std::array<double, kNumTrainable>& v) {
  int best = 0;
  for (int j = 1; j < kNumTrainable; ++j)
    if (v[j] > v[best]) best = j;
  return best;
}

std::string pct(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", ratio * 100.0);
  return buf;
}

}  // namespace

ClassifierOutputs classifier_outputs(const MlpModel& mlp, const RbfModel& rbf,
                                     const SvmOvaModel& svm, const FeatureVector& x) {
  ClassifierOutputs out;
  const Eigen::VectorXd m = mlp_forward(mlp, x);
  const Eigen::VectorXd r = rbf_forward(rbf, x);
  const Eigen::VectorXd s = svm_scores(svm, x);
  for (int j = 0; j < kNumTrainable; ++j) {
    out.scores[0][j] = m[j];
    out.scores[1][j] = r[j];
    out.scores[2][j] = s[j];
  }
  return out;
}

EvaluationReport evaluate_systems(const MlpModel& mlp, const RbfModel& rbf,
                                  const SvmOvaModel& svm, const FusionModel& fusion,
                                  const Dataset& test) {
  if (test.empty()) throw DataError("evaluate: empty test set");
  EvaluationReport rep;
  for (int s = 0; s < kNumSystems; ++s) rep.systems[s].name = kSystemNames[s];

  std::array<std::size_t, kNumSystems> correct{};
  std::size_t n_eval = 0;
  for (const auto& beat : test.beats()) {
    if (beat.label == BeatClass::Other) {
      ++rep.metadata.excluded_other;
      continue;
    }
    ++n_eval;
    const int truth = static_cast<int>(beat.label);
    const auto outputs = classifier_outputs(mlp, rbf, svm, beat.features);

    std::array<std::array<int, kNumTrainable>, kNumSystems> bits{};
    std::array<int, kNumSystems> finals{};
    for (int i = 0; i < kNumClassifiers; ++i) {
      for (int j = 0; j < kNumTrainable; ++j)
        bits[i][j] = outputs.scores[i][j] >= fusion.vote_thresholds[i][j];
      finals[i] = argmax5(outputs.scores[i]);
    }
    const VoteDecision vote = majority_vote(outputs, fusion);
    bits[3] = vote.bits;
    finals[3] = vote.final_class;
    const WeightedDecision weighted = predict_weighted(outputs, fusion);
    bits[4] = weighted.bits;
    finals[4] = weighted.final_class;

    for (int s = 0; s < kNumSystems; ++s) {
      correct[s] += finals[s] == truth;
      for (int j = 0; j < kNumTrainable; ++j) {
        auto& c = rep.systems[s].cells[j];
        const bool p = bits[s][j] != 0;
        const bool t = truth == j;
        if (p && t)
          ++c.tp;
        else if (p && !t)
          ++c.fp;
        else if (!p && t)
          ++c.fn;
        else
          ++c.tn;
      }
    }
  }
  if (n_eval == 0) throw DataError("evaluate: test set contains only OTHER beats");

  for (int s = 0; s < kNumSystems; ++s) {
    auto& sys = rep.systems[s];
    double sens = 0.0, spec = 0.0;
    for (int j = 0; j < kNumTrainable; ++j) {
      sys.per_class[j] = class_metrics(sys.cells[j]);
      sens += sys.per_class[j].sensitivity;
      spec += sys.per_class[j].specificity;
    }
    sys.overall_accuracy = static_cast<double>(correct[s]) / static_cast<double>(n_eval);
    sys.macro_sensitivity = sens / kNumTrainable;
    sys.macro_specificity = spec / kNumTrainable;
  }
  return rep;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();

  Dataset data = stage("data", [&] {
    if (cfg.source == DataSource::kCsv) return parse_feature_csv_file(cfg.csv_path);
    return synth_generate(cfg.synth_counts, cfg.synth_seed, cfg.synth_separation);
  });

  SplitResult parts = stage("split", [&] { return split(data, cfg.split); });

  PipelineResult out;
  out.mlp = stage("mlp", [&] {
    const MlpModel init = mlp_init(FeatureVector::kDim, cfg.mlp_hidden_dim, kNumTrainable,
                                   cfg.mlp.seed);
    LmResult lm = mlp_train_lm(init, parts.train, cfg.mlp);
    if (lm.status == LmStatus::kStalled)
      throw NumericError("LM training stalled with singular normal equations");
    return lm.model;
  });
  out.rbf = stage("rbf", [&] {
    RbfConfig rc = cfg.rbf;
    rc.n_centers = std::min<int>(rc.n_centers, static_cast<int>(parts.train.size()));
    return rbf_build(parts.train, rc);
  });
  out.svm = stage("svm", [&] { return svm_train_ova(parts.train, cfg.svm_kernel, cfg.svm); });

  out.fusion = stage("fusion", [&] {
    const Dataset& cal = parts.calibration.empty() ? parts.train : parts.calibration;
    std::vector<ClassifierOutputs> cal_outputs;
    std::vector<BeatClass> cal_truth;
    cal_outputs.reserve(cal.size());
    for (const auto& beat : cal.beats()) {
      cal_outputs.push_back(classifier_outputs(out.mlp, out.rbf, out.svm, beat.features));
      cal_truth.push_back(beat.label);
    }
    return fit_fusion(cal_outputs, cal_truth, cfg.mi_denominator);
  });

  out.report = stage("evaluate", [&] {
    return evaluate_systems(out.mlp, out.rbf, out.svm, out.fusion, parts.test);
  });
  out.report.metadata.config_digest = config_digest(cfg);
  out.report.metadata.config_text = canonical_config(cfg);
  out.report.metadata.train_size = parts.train.size();
  out.report.metadata.calibration_size = parts.calibration.size();
  out.report.metadata.test_size = parts.test.size();
  out.report.metadata.excluded_other = data.count(BeatClass::Other);
  return out;
}

std::string render_tables(const EvaluationReport& report, TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::kCsv) {
    out << "model,class,accuracy_pct,sensitivity_pct,specificity_pct,fpr_pct,fnr_pct\n";
    for (const auto& sys : report.systems) {
      for (int j = 0; j < kNumTrainable; ++j) {
        const auto& m = sys.per_class[j];
        out << sys.name << ',' << class_label(static_cast<BeatClass>(j)) << ','
            << pct(m.accuracy) << ',' << pct(m.sensitivity) << ',' << pct(m.specificity)
            << ',' << pct(m.fpr) << ',' << pct(m.fnr) << "\n";
      }
      out << sys.name << ",overall," << pct(sys.overall_accuracy) << ','
          << pct(sys.macro_sensitivity) << ',' << pct(sys.macro_specificity) << ",,\n";
    }
    return out.str();
  }

  for (const auto& sys : report.systems) {
    out << "## " << sys.name << "\n\n";
    out << "| Class | Accuracy % | Sensitivity % | Specificity % | False Positive Rate % | "
           "False Negative Rate % |\n";
    out << "|---|---|---|---|---|---|\n";
    for (int j = 0; j < kNumTrainable; ++j) {
      const auto& m = sys.per_class[j];
      out << "| " << class_label(static_cast<BeatClass>(j)) << " | " << pct(m.accuracy)
          << "% | " << pct(m.sensitivity) << "% | " << pct(m.specificity) << "% | "
          << pct(m.fpr) << "% | " << pct(m.fnr) << "% |\n";
    }
    out << "\n";
  }
  out << "## Summary\n\n";
  out << "| Measure |";
  for (const auto& sys : report.systems) out << ' ' << sys.name << " |";
  out << "\n|---|";
  for (int s = 0; s < kNumSystems; ++s) out << "---|";
  out << "\n| Accuracy % |";
  for (const auto& sys : report.systems) out << ' ' << pct(sys.overall_accuracy) << "% |";
  out << "\n| Sensitivity % |";
  for (const auto& sys : report.systems) out << ' ' << pct(sys.macro_sensitivity) << "% |";
  out << "\n| Specificity % |";
  for (const auto& sys : report.systems) out << ' ' << pct(sys.macro_specificity) << "% |";
  out << "\n";
  return out.str();
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "beatfuse-report";
  j["version"] = 1;
  j["metadata"] = {
      {"config_digest", report.metadata.config_digest},
      {"config_text", report.metadata.config_text},
      {"train_size", report.metadata.train_size},
      {"calibration_size", report.metadata.calibration_size},
      {"test_size", report.metadata.test_size},
      {"excluded_other", report.metadata.excluded_other},
  };
  j["systems"] = nlohmann::ordered_json::array();
  for (const auto& sys : report.systems) {
    nlohmann::ordered_json js;
    js["name"] = sys.name;
    js["overall_accuracy"] = sys.overall_accuracy;
    js["macro_sensitivity"] = sys.macro_sensitivity;
    js["macro_specificity"] = sys.macro_specificity;
    js["classes"] = nlohmann::ordered_json::array();
    for (int c = 0; c < kNumTrainable; ++c) {
      const auto& m = sys.per_class[c];
      const auto& cc = sys.cells[c];
      js["classes"].push_back({
          {"label", class_label(static_cast<BeatClass>(c))},
          {"accuracy", m.accuracy},
          {"sensitivity", m.sensitivity},
          {"specificity", m.specificity},
          {"fpr", m.fpr},
          {"fnr", m.fnr},
          {"tp", cc.tp},
          {"tn", cc.tn},
          {"fp", cc.fp},
          {"fn", cc.fn},
      });
    }
    j["systems"].push_back(std::move(js));
  }
  return j.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report file: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "beatfuse-report" || j.at("version") != 1)
      throw DataError("report file: unknown format or version");
    EvaluationReport rep;
    const auto& md = j.at("metadata");
    rep.metadata.config_digest = md.at("config_digest");
    rep.metadata.config_text = md.at("config_text");
    rep.metadata.train_size = md.at("train_size");
    rep.metadata.calibration_size = md.at("calibration_size");
    rep.metadata.test_size = md.at("test_size");
    rep.metadata.excluded_other = md.at("excluded_other");
    const auto& systems = j.at("systems");
    if (systems.size() != kNumSystems) throw DataError("report file: wrong system count");
    for (int s = 0; s < kNumSystems; ++s) {
      auto& sys = rep.systems[s];
      const auto& js = systems[s];
      sys.name = js.at("name");
      sys.overall_accuracy = js.at("overall_accuracy");
      sys.macro_sensitivity = js.at("macro_sensitivity");
      sys.macro_specificity = js.at("macro_specificity");
      const auto& classes = js.at("classes");
      if (classes.size() != kNumTrainable) throw DataError("report file: wrong class count");
      for (int c = 0; c < kNumTrainable; ++c) {
        const auto& jc = classes[c];
        sys.per_class[c] = {jc.at("accuracy"), jc.at("sensitivity"), jc.at("specificity"),
                            jc.at("fpr"), jc.at("fnr")};
        sys.cells[c] = {jc.at("tp"), jc.at("tn"), jc.at("fp"), jc.at("fn")};
      }
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report file: missing or mistyped field: ") + e.what());
  }
}

}  // namespace beatfuse
