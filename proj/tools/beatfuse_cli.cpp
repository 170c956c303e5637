// Command-line front end; talks to the core only through the C API.
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "beatfuse/beatfuse.h"

namespace {

int finish(bf_status status) {
  if (status != BF_OK) std::fprintf(stderr, "error: %s\n", bf_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beatfuse: ECG beat classifier-fusion toolkit"};
  app.require_subcommand(1);

  // synth
  std::string synth_counts = "N=754,PVC=68,APB=24,RBBB=73,LBBB=81";
  std::uint64_t synth_seed = 0;
  double synth_separation = 3.0;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic feature CSV");
  synth->add_option("--counts", synth_counts, "Comma-separated LABEL=COUNT pairs");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--separation", synth_separation, "Class separation factor");
  synth->add_option("--out", synth_out, "Output CSV path")->required();

  // extract
  std::string ex_signal, ex_fiducials, ex_record = "rec", ex_out, ex_exclusions;
  auto* extract = app.add_subcommand("extract", "Signal + fiducials -> feature CSV");
  extract->add_option("--signal", ex_signal, "Signal file (fs header + one sample per line)")
      ->required();
  extract->add_option("--fiducials", ex_fiducials, "Tab-separated fiducial annotation file")
      ->required();
  extract->add_option("--record-id", ex_record, "Record id for the output rows");
  extract->add_option("--out", ex_out, "Output CSV path")->required();
  extract->add_option("--exclusions", ex_exclusions, "Exclusion report path");

  // train
  std::string train_config, train_out;
  auto* train = app.add_subcommand("train", "Fit and serialize models + fusion");
  train->add_option("--config", train_config, "Run configuration file")->required();
  train->add_option("--out", train_out, "Output directory")->required();

  // evaluate
  std::string eval_models, eval_data, eval_out, eval_format = "markdown";
  auto* evaluate = app.add_subcommand("evaluate", "Score a CSV with stored models");
  evaluate->add_option("--models", eval_models, "Directory holding the serialized models")
      ->required();
  evaluate->add_option("--data", eval_data, "Feature CSV to score")->required();
  evaluate->add_option("--out", eval_out, "Output directory")->required();
  evaluate->add_option("--format", eval_format, "markdown or csv");

  // run
  std::string run_config, run_out, run_format = "markdown";
  auto* run = app.add_subcommand("run", "End-to-end train + evaluate");
  run->add_option("--config", run_config, "Run configuration file")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--format", run_format, "markdown or csv");

  // report
  std::string rep_path, rep_out, rep_format = "markdown";
  auto* report = app.add_subcommand("report", "Re-render a stored report");
  report->add_option("--report", rep_path, "report.json path")->required();
  report->add_option("--format", rep_format, "markdown or csv");
  report->add_option("--out", rep_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (synth->parsed()) {
    bf_dataset* ds = nullptr;
    bf_status st = bf_dataset_synth(synth_counts.c_str(), synth_seed, synth_separation, &ds);
    if (st == BF_OK) {
      st = bf_dataset_write_csv(ds, synth_out.c_str());
      bf_dataset_free(ds);
    }
    return finish(st);
  }
  if (extract->parsed()) {
    return finish(bf_extract_features(ex_signal.c_str(), ex_fiducials.c_str(), ex_record.c_str(),
                                      ex_out.c_str(),
                                      ex_exclusions.empty() ? nullptr : ex_exclusions.c_str()));
  }
  if (train->parsed()) {
    return finish(bf_train(train_config.c_str(), train_out.c_str()));
  }
  if (evaluate->parsed()) {
    return finish(bf_evaluate(eval_models.c_str(), eval_data.c_str(), eval_out.c_str(),
                              eval_format.c_str()));
  }
  if (run->parsed()) {
    return finish(bf_run(run_config.c_str(), run_out.c_str(), run_format.c_str()));
  }
  if (report->parsed()) {
    return finish(bf_render_report(rep_path.c_str(), rep_format.c_str(),
                                   rep_out.empty() ? nullptr : rep_out.c_str()));
  }
  return 1;
}
