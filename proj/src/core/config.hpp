#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "core/dataset.hpp"
#include "core/metrics.hpp"
#include "core/mlp.hpp"
#include "core/rbf.hpp"
#include "core/svm.hpp"

namespace beatfuse {

enum class DataSource { kUnset, kCsv, kSynthetic };

// Full run configuration. Parsed from line-oriented `key = value` text
// with one [section] per module; unknown sections or keys are errors.
struct RunConfig {
  // [data]
  DataSource source = DataSource::kUnset;
  std::string csv_path;
  std::map<BeatClass, std::size_t> synth_counts;
  double synth_separation = 3.0;
  std::uint64_t synth_seed = 0;
  // [split]
  SplitSpec split;
  // [mlp]
  int mlp_hidden_dim = 35;
  LmConfig mlp;
  // [rbf]
  RbfConfig rbf;
  // [svm]
  PolyKernel svm_kernel;
  SmoConfig svm;
  // [metrics]
  MiDenominator mi_denominator = MiDenominator::kTruth;

  void validate() const;
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

// Canonical text form: every key in a fixed order. Reparsing it yields
// an equivalent configuration.
std::string canonical_config(const RunConfig& cfg);

// FNV-1a 64 over the canonical form, hex encoded.
std::string config_digest(const RunConfig& cfg);

// "N=100,PVC=50" style class-count list.
std::map<BeatClass, std::size_t> parse_class_counts(const std::string& text);

}  // namespace beatfuse
