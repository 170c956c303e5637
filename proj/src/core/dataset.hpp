#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace beatfuse {

enum class BeatClass : int { Normal = 0, PVC, APB, RBBB, LBBB, Other };

inline constexpr int kNumClasses = 6;
// The five trainable classes; Other is excluded from training and the
// 5-class evaluation.
inline constexpr int kNumTrainable = 5;

const std::string& class_label(BeatClass c);
std::optional<BeatClass> class_from_label(const std::string& label);

// One heartbeat's feature vector. Widths in seconds, amplitudes in
// millivolts. The CSV on disk stores widths in milliseconds.
struct FeatureVector {
  double pr_width = 0.0;
  double qrs_width = 0.0;
  double qt_width = 0.0;
  double rr_width = 0.0;
  double qrs_amplitude = 0.0;
  double qrs_mean = 0.0;
  double qrs_std = 0.0;
  double qt_mean = 0.0;
  double qt_std = 0.0;
  double rr_mean = 0.0;
  double rr_std = 0.0;

  static constexpr int kDim = 11;
  std::array<double, kDim> values() const;
  static FeatureVector from_values(const std::array<double, kDim>& v);

  // Empty string if valid, otherwise names the offending field.
  std::string validate() const;

  bool operator==(const FeatureVector&) const = default;
};

struct BeatRecord {
  std::string record_id;
  std::uint64_t beat_index = 0;
  FeatureVector features;
  BeatClass label = BeatClass::Normal;

  bool operator==(const BeatRecord&) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<BeatRecord> beats);

  const std::vector<BeatRecord>& beats() const { return beats_; }
  std::size_t size() const { return beats_.size(); }
  bool empty() const { return beats_.empty(); }
  const std::map<BeatClass, std::size_t>& class_counts() const { return class_counts_; }
  std::size_t count(BeatClass c) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<BeatRecord> beats_;
  std::map<BeatClass, std::size_t> class_counts_;
};

// Fiducial sample indices for one beat; absent landmarks are nullopt.
struct FiducialAnnotation {
  std::int64_t beat_index = 0;
  std::optional<std::int64_t> p_onset;
  std::optional<std::int64_t> p_peak;
  std::optional<std::int64_t> qrs_onset;
  std::optional<std::int64_t> r_peak;
  std::optional<std::int64_t> qrs_offset;
  std::optional<std::int64_t> t_offset;
  BeatClass label = BeatClass::Normal;
};

struct SplitSpec {
  double train_fraction = 0.04;
  double calibration_fraction_of_train = 0.25;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct SplitResult {
  Dataset train;
  Dataset calibration;
  Dataset test;
};

struct ExcludedBeat {
  std::int64_t beat_index = 0;
  std::string reason;
};

struct ExtractedBeat {
  std::int64_t beat_index = 0;
  FeatureVector features;
  BeatClass label = BeatClass::Normal;
};

struct ExtractionResult {
  std::vector<ExtractedBeat> beats;
  std::vector<ExcludedBeat> excluded;
};

// CSV I/O. parse fails on the first malformed row (no silent drops).
Dataset parse_feature_csv(std::istream& in);
Dataset parse_feature_csv_file(const std::string& path);
void write_feature_csv(const Dataset& ds, std::ostream& out);
void write_feature_csv_file(const Dataset& ds, const std::string& path);

// Interval and amplitude-statistics features from one record's signal
// and fiducial annotations. Beats missing a required fiducial (or the
// first beat, which has no previous R peak) land in the exclusion list.
ExtractionResult extract_features(const std::vector<double>& signal,
                                  const std::vector<FiducialAnnotation>& annotations,
                                  double sampling_rate_hz);

// Annotation file: one beat per line, tab-separated
// beat_index, p_onset, p_peak, qrs_onset, r_peak, qrs_offset, t_offset, label
// with "-" for absent fiducials.
std::vector<FiducialAnnotation> parse_fiducial_file(std::istream& in);
// Signal file: one-line header "fs <rate>" then one sample (mV) per line.
std::vector<double> parse_signal_file(std::istream& in, double* sampling_rate_hz);

// Seeded split into train / calibration / test. Other-labelled beats are
// dropped before partitioning.
SplitResult split(const Dataset& ds, const SplitSpec& spec);

// Synthetic fixture: one 11-D Gaussian per class, class means separated
// proportionally to `separation`.
Dataset synth_generate(const std::map<BeatClass, std::size_t>& n_per_class,
                       std::uint64_t seed, double separation);

// Per-class mean feature vectors used by synth_generate (exposed for
// oracle checks in tests).
std::array<double, FeatureVector::kDim> synth_class_mean(BeatClass c, double separation);

}  // namespace beatfuse
