#include "beatfuse/beatfuse.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/ensemble.hpp"
#include "core/errors.hpp"
#include "core/report.hpp"

namespace fs = std::filesystem;
using namespace beatfuse;

struct bf_dataset {
  Dataset data;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
bf_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return BF_OK;
  } catch (const UsageError& e) {
    g_last_error = e.what();
    return BF_ERR_USAGE;
  } catch (const DataError& e) {
    g_last_error = e.what();
    return BF_ERR_DATA;
  } catch (const NumericError& e) {
    g_last_error = e.what();
    return BF_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BF_ERR_NUMERIC;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw UsageError(what);
}

TableFormat parse_format(const char* format) {
  const std::string f = format ? format : "markdown";
  if (f == "markdown") return TableFormat::kMarkdown;
  if (f == "csv") return TableFormat::kCsv;
  throw UsageError("format must be markdown or csv");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

void write_report_outputs(const fs::path& dir, const EvaluationReport& report,
                          TableFormat format) {
  write_file(dir / "report.json", report_to_json(report));
  const char* name = format == TableFormat::kCsv ? "tables.csv" : "tables.md";
  write_file(dir / name, render_tables(report, format));
}

void save_models(const fs::path& dir, const PipelineResult& result) {
  {
    std::ofstream out(dir / "mlp.model", std::ios::binary);
    if (!out) throw DataError("cannot write mlp.model");
    mlp_save(result.mlp, out);
  }
  {
    std::ofstream out(dir / "rbf.model", std::ios::binary);
    if (!out) throw DataError("cannot write rbf.model");
    rbf_save(result.rbf, out);
  }
  {
    std::ofstream out(dir / "svm.model", std::ios::binary);
    if (!out) throw DataError("cannot write svm.model");
    svm_save(result.svm, out);
  }
  {
    std::ofstream out(dir / "fusion.model", std::ios::binary);
    if (!out) throw DataError("cannot write fusion.model");
    fusion_save(result.fusion, out);
  }
}

fs::path ensure_dir(const char* dir) {
  require(dir != nullptr, "output directory is required");
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create output directory " + p.string());
  return p;
}

template <typename T>
T load_model(const fs::path& path, T (*loader)(std::istream&)) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  return loader(in);
}

}  // namespace

extern "C" {

const char* bf_version(void) { return "0.1.0"; }

const char* bf_last_error(void) { return g_last_error.c_str(); }

bf_status bf_dataset_parse_csv(const char* path, bf_dataset** out) {
  return guarded([&] {
    require(path && out, "bf_dataset_parse_csv: path and out are required");
    *out = new bf_dataset{parse_feature_csv_file(path)};
  });
}

bf_status bf_dataset_synth(const char* counts_spec, uint64_t seed, double separation,
                           bf_dataset** out) {
  return guarded([&] {
    require(counts_spec && out, "bf_dataset_synth: counts_spec and out are required");
    *out = new bf_dataset{synth_generate(parse_class_counts(counts_spec), seed, separation)};
  });
}

bf_status bf_dataset_write_csv(const bf_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds && path, "bf_dataset_write_csv: dataset and path are required");
    write_feature_csv_file(ds->data, path);
  });
}

size_t bf_dataset_size(const bf_dataset* ds) { return ds ? ds->data.size() : 0; }

size_t bf_dataset_class_count(const bf_dataset* ds, const char* label) {
  if (!ds || !label) return static_cast<size_t>(-1);
  const auto cls = class_from_label(label);
  if (!cls) return static_cast<size_t>(-1);
  return ds->data.count(*cls);
}

void bf_dataset_free(bf_dataset* ds) { delete ds; }

bf_status bf_extract_features(const char* signal_path, const char* fiducial_path,
                              const char* record_id, const char* out_csv,
                              const char* exclusions_path) {
  return guarded([&] {
    require(signal_path && fiducial_path && record_id && out_csv,
            "bf_extract_features: signal, fiducials, record id and output are required");
    std::ifstream sig(signal_path);
    if (!sig) throw DataError(std::string("cannot open signal file ") + signal_path);
    double fs_hz = 0.0;
    const auto samples = parse_signal_file(sig, &fs_hz);
    std::ifstream fid(fiducial_path);
    if (!fid) throw DataError(std::string("cannot open fiducial file ") + fiducial_path);
    const auto annotations = parse_fiducial_file(fid);

    const auto result = extract_features(samples, annotations, fs_hz);
    std::vector<BeatRecord> beats;
    beats.reserve(result.beats.size());
    for (const auto& b : result.beats)
      beats.push_back({record_id, static_cast<std::uint64_t>(b.beat_index), b.features, b.label});
    write_feature_csv_file(Dataset(std::move(beats)), out_csv);

    if (exclusions_path) {
      std::ofstream ex(exclusions_path);
      if (!ex) throw DataError(std::string("cannot write exclusion report ") + exclusions_path);
      ex << "beat_index\treason\n";
      for (const auto& e : result.excluded) ex << e.beat_index << '\t' << e.reason << "\n";
    }
  });
}

bf_status bf_train(const char* config_path, const char* out_dir) {
  return guarded([&] {
    require(config_path != nullptr, "bf_train: config path is required");
    const fs::path dir = ensure_dir(out_dir);
    const RunConfig cfg = parse_config_file(config_path);
    const PipelineResult result = run_pipeline(cfg);
    save_models(dir, result);
    write_file(dir / "config.canonical", canonical_config(cfg));
  });
}

bf_status bf_evaluate(const char* model_dir, const char* data_csv, const char* out_dir,
                      const char* format) {
  return guarded([&] {
    require(model_dir && data_csv, "bf_evaluate: model directory and data CSV are required");
    const TableFormat fmt = parse_format(format);
    const fs::path mdir(model_dir);
    const MlpModel mlp = load_model<MlpModel>(mdir / "mlp.model", mlp_load);
    const RbfModel rbf = load_model<RbfModel>(mdir / "rbf.model", rbf_load);
    const SvmOvaModel svm = load_model<SvmOvaModel>(mdir / "svm.model", svm_load);
    const FusionModel fusion = load_model<FusionModel>(mdir / "fusion.model", fusion_load);
    const Dataset data = parse_feature_csv_file(data_csv);
    EvaluationReport report = evaluate_systems(mlp, rbf, svm, fusion, data);
    report.metadata.test_size = data.size() - report.metadata.excluded_other;
    const fs::path dir = ensure_dir(out_dir);
    write_report_outputs(dir, report, fmt);
  });
}

bf_status bf_run(const char* config_path, const char* out_dir, const char* format) {
  return guarded([&] {
    require(config_path != nullptr, "bf_run: config path is required");
    const TableFormat fmt = parse_format(format);
    const fs::path dir = ensure_dir(out_dir);
    const RunConfig cfg = parse_config_file(config_path);
    const PipelineResult result = run_pipeline(cfg);
    save_models(dir, result);
    write_file(dir / "config.canonical", canonical_config(cfg));
    write_report_outputs(dir, result.report, fmt);
  });
}

bf_status bf_render_report(const char* report_path, const char* format, const char* out_path) {
  return guarded([&] {
    require(report_path != nullptr, "bf_render_report: report path is required");
    const TableFormat fmt = parse_format(format);
    std::ifstream in(report_path, std::ios::binary);
    if (!in) throw DataError(std::string("cannot open report ") + report_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const EvaluationReport report = report_from_json(buf.str());
    const std::string text = render_tables(report, fmt);
    if (out_path)
      write_file(out_path, text);
    else
      std::cout << text;
  });
}

}  // extern "C"
