#include "core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "core/errors.hpp"
#include "core/textnum.hpp"

namespace beatfuse {

namespace {

const std::array<std::string, kNumClasses> kLabels = {"N", "PVC", "APB", "RBBB", "LBBB", "OTHER"};

const char* kCsvHeader =
    "record_id,beat_index,pr_ms,qrs_ms,qt_ms,rr_ms,qrs_amp,qrs_mean,qrs_std,"
    "qt_mean,qt_std,rr_mean,rr_std,label";

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

const std::string& class_label(BeatClass c) { return kLabels[static_cast<int>(c)]; }

std::optional<BeatClass> class_from_label(const std::string& label) {
  for (int i = 0; i < kNumClasses; ++i)
    if (kLabels[i] == label) return static_cast<BeatClass>(i);
  return std::nullopt;
}

std::array<double, FeatureVector::kDim> FeatureVector::values() const {
  return {pr_width, qrs_width, qt_width,  rr_width, qrs_amplitude, qrs_mean,
          qrs_std,  qt_mean,   qt_std,    rr_mean,  rr_std};
}

FeatureVector FeatureVector::from_values(const std::array<double, kDim>& v) {
  FeatureVector f;
  f.pr_width = v[0];
  f.qrs_width = v[1];
  f.qt_width = v[2];
  f.rr_width = v[3];
  f.qrs_amplitude = v[4];
  f.qrs_mean = v[5];
  f.qrs_std = v[6];
  f.qt_mean = v[7];
  f.qt_std = v[8];
  f.rr_mean = v[9];
  f.rr_std = v[10];
  return f;
}

std::string FeatureVector::validate() const {
  static const std::array<const char*, kDim> names = {
      "pr_ms", "qrs_ms", "qt_ms", "rr_ms", "qrs_amp", "qrs_mean",
      "qrs_std", "qt_mean", "qt_std", "rr_mean", "rr_std"};
  const auto v = values();
  for (int i = 0; i < kDim; ++i) {
    if (!std::isfinite(v[i])) return std::string("non-finite value in ") + names[i];
  }
  for (int i = 0; i < 4; ++i) {
    if (v[i] <= 0.0) return std::string("non-positive width in ") + names[i];
  }
  if (qrs_std < 0.0) return "negative qrs_std";
  if (qt_std < 0.0) return "negative qt_std";
  if (rr_std < 0.0) return "negative rr_std";
  return {};
}

Dataset::Dataset(std::vector<BeatRecord> beats) : beats_(std::move(beats)) {
  for (const auto& b : beats_) ++class_counts_[b.label];
}

std::size_t Dataset::count(BeatClass c) const {
  auto it = class_counts_.find(c);
  return it == class_counts_.end() ? 0 : it->second;
}

Dataset parse_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input: missing CSV header");
  line = strip_cr(line);
  if (line != kCsvHeader) {
    const auto expected = split_line(kCsvHeader, ',');
    const auto got = split_line(line, ',');
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i >= got.size())
        throw DataError("malformed header: missing column '" + expected[i] + "'");
      if (got[i] != expected[i])
        throw DataError("malformed header: expected column '" + expected[i] +
                        "', found '" + got[i] + "'");
    }
    throw DataError("malformed header: extra column '" + got[expected.size()] + "'");
  }

  std::vector<BeatRecord> beats;
  std::set<std::pair<std::string, std::uint64_t>> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_line(line, ',');
    auto row_error = [&](const std::string& what) -> DataError {
      return DataError("row error at line " + std::to_string(lineno) + ": " + what);
    };
    if (fields.size() != 14)
      throw row_error("expected 14 fields, found " + std::to_string(fields.size()));

    BeatRecord rec;
    rec.record_id = fields[0];
    try {
      std::size_t pos = 0;
      if (!fields[1].empty() && fields[1][0] == '-') throw std::invalid_argument("negative");
      rec.beat_index = std::stoull(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw row_error("invalid beat_index '" + fields[1] + "'");
    }

    std::array<double, FeatureVector::kDim> v{};
    for (int i = 0; i < FeatureVector::kDim; ++i) {
      const int shift = i < 4 ? -3 : 0;  // ms columns -> seconds
      bool ok = false;
      v[i] = parse_scaled(fields[2 + i], shift, &ok);
      if (!ok) throw row_error("non-numeric field '" + fields[2 + i] + "'");
    }
    rec.features = FeatureVector::from_values(v);
    if (auto msg = rec.features.validate(); !msg.empty()) throw row_error(msg);

    const auto cls = class_from_label(fields[13]);
    if (!cls) throw row_error("unknown label '" + fields[13] + "'");
    rec.label = *cls;

    if (!seen.insert({rec.record_id, rec.beat_index}).second)
      throw row_error("duplicate (record_id, beat_index) pair");
    beats.push_back(std::move(rec));
  }
  return Dataset(std::move(beats));
}

Dataset parse_feature_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature CSV: " + path);
  return parse_feature_csv(in);
}

void write_feature_csv(const Dataset& ds, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& b : ds.beats()) {
    const auto v = b.features.values();
    out << b.record_id << ',' << b.beat_index;
    for (int i = 0; i < FeatureVector::kDim; ++i) {
      out << ',';
      out << (i < 4 ? format_scaled(v[i], 3) : format_double(v[i]));
    }
    out << ',' << class_label(b.label) << "\n";
  }
}

void write_feature_csv_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write feature CSV: " + path);
  write_feature_csv(ds, out);
}

namespace {

struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;
};

// Inclusive window [lo, hi]; population standard deviation.
WindowStats window_stats(const std::vector<double>& signal, std::int64_t lo, std::int64_t hi) {
  WindowStats s;
  const double n = static_cast<double>(hi - lo + 1);
  double sum = 0.0;
  for (std::int64_t i = lo; i <= hi; ++i) sum += signal[static_cast<std::size_t>(i)];
  s.mean = sum / n;
  double ss = 0.0;
  for (std::int64_t i = lo; i <= hi; ++i) {
    const double d = signal[static_cast<std::size_t>(i)] - s.mean;
    ss += d * d;
  }
  s.stddev = std::sqrt(ss / n);
  return s;
}

}  // namespace

ExtractionResult extract_features(const std::vector<double>& signal,
                                  const std::vector<FiducialAnnotation>& annotations,
                                  double sampling_rate_hz) {
  if (sampling_rate_hz <= 0.0) throw UsageError("sampling rate must be positive");
  ExtractionResult out;
  std::optional<std::int64_t> prev_r;
  for (const auto& ann : annotations) {
    auto check_bounds = [&](const std::optional<std::int64_t>& idx, const char* name) {
      if (idx && (*idx < 0 || *idx >= static_cast<std::int64_t>(signal.size())))
        throw DataError("beat " + std::to_string(ann.beat_index) + ": " + name +
                        " index " + std::to_string(*idx) + " out of signal range");
    };
    check_bounds(ann.p_onset, "p_onset");
    check_bounds(ann.p_peak, "p_peak");
    check_bounds(ann.qrs_onset, "qrs_onset");
    check_bounds(ann.r_peak, "r_peak");
    check_bounds(ann.qrs_offset, "qrs_offset");
    check_bounds(ann.t_offset, "t_offset");

    // present fiducials must be strictly increasing in anatomical order
    std::int64_t last = -1;
    for (const auto* idx : {&ann.p_onset, &ann.p_peak, &ann.qrs_onset, &ann.r_peak,
                            &ann.qrs_offset, &ann.t_offset}) {
      if (!idx->has_value()) continue;
      if (**idx <= last)
        throw DataError("beat " + std::to_string(ann.beat_index) +
                        ": fiducial indices not strictly increasing");
      last = **idx;
    }

    auto exclude = [&](const std::string& reason) {
      out.excluded.push_back({ann.beat_index, reason});
    };

    std::vector<std::string> missing;
    if (!ann.p_onset) missing.push_back("p_onset");
    if (!ann.qrs_onset) missing.push_back("qrs_onset");
    if (!ann.r_peak) missing.push_back("r_peak");
    if (!ann.qrs_offset) missing.push_back("qrs_offset");
    if (!ann.t_offset) missing.push_back("t_offset");
    if (!missing.empty()) {
      std::string reason = "missing " + missing[0];
      for (std::size_t i = 1; i < missing.size(); ++i) reason += ", " + missing[i];
      exclude(reason);
      if (ann.r_peak) prev_r = ann.r_peak;
      continue;
    }
    if (!prev_r) {
      exclude("no previous R peak");
      prev_r = ann.r_peak;
      continue;
    }

    FeatureVector f;
    f.pr_width = static_cast<double>(*ann.qrs_onset - *ann.p_onset) / sampling_rate_hz;
    f.qrs_width = static_cast<double>(*ann.qrs_offset - *ann.qrs_onset) / sampling_rate_hz;
    f.qt_width = static_cast<double>(*ann.t_offset - *ann.qrs_onset) / sampling_rate_hz;
    f.rr_width = static_cast<double>(*ann.r_peak - *prev_r) / sampling_rate_hz;

    double lo = signal[static_cast<std::size_t>(*ann.qrs_onset)];
    double hi = lo;
    for (std::int64_t i = *ann.qrs_onset; i <= *ann.qrs_offset; ++i) {
      lo = std::min(lo, signal[static_cast<std::size_t>(i)]);
      hi = std::max(hi, signal[static_cast<std::size_t>(i)]);
    }
    f.qrs_amplitude = hi - lo;

    const auto qrs = window_stats(signal, *ann.qrs_onset, *ann.qrs_offset);
    const auto qt = window_stats(signal, *ann.qrs_onset, *ann.t_offset);
    const auto rr = window_stats(signal, *prev_r, *ann.r_peak);
    f.qrs_mean = qrs.mean;
    f.qrs_std = qrs.stddev;
    f.qt_mean = qt.mean;
    f.qt_std = qt.stddev;
    f.rr_mean = rr.mean;
    f.rr_std = rr.stddev;

    prev_r = ann.r_peak;
    if (auto msg = f.validate(); !msg.empty()) {
      exclude(msg);
      continue;
    }
    out.beats.push_back({ann.beat_index, f, ann.label});
  }
  return out;
}

std::vector<FiducialAnnotation> parse_fiducial_file(std::istream& in) {
  std::vector<FiducialAnnotation> anns;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_line(line, '\t');
    if (fields.size() != 8)
      throw DataError("fiducial file line " + std::to_string(lineno) +
                      ": expected 8 tab-separated fields, found " +
                      std::to_string(fields.size()));
    auto field_index = [&](const std::string& s) -> std::optional<std::int64_t> {
      if (s == "-") return std::nullopt;
      try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw DataError("fiducial file line " + std::to_string(lineno) +
                        ": invalid index '" + s + "'");
      }
    };
    FiducialAnnotation a;
    auto bi = field_index(fields[0]);
    if (!bi)
      throw DataError("fiducial file line " + std::to_string(lineno) +
                      ": beat_index may not be absent");
    a.beat_index = *bi;
    a.p_onset = field_index(fields[1]);
    a.p_peak = field_index(fields[2]);
    a.qrs_onset = field_index(fields[3]);
    a.r_peak = field_index(fields[4]);
    a.qrs_offset = field_index(fields[5]);
    a.t_offset = field_index(fields[6]);
    const auto cls = class_from_label(fields[7]);
    if (!cls)
      throw DataError("fiducial file line " + std::to_string(lineno) +
                      ": unknown label '" + fields[7] + "'");
    a.label = *cls;
    anns.push_back(a);
  }
  return anns;
}

std::vector<double> parse_signal_file(std::istream& in, double* sampling_rate_hz) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty signal file");
  line = strip_cr(line);
  std::istringstream header(line);
  std::string tag;
  header >> tag >> *sampling_rate_hz;
  if (tag != "fs" || !(*sampling_rate_hz > 0.0))
    throw DataError("signal file: first line must be 'fs <rate>'");
  std::vector<double> samples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    bool ok = false;
    double v = parse_scaled(line, 0, &ok);
    if (!ok || !std::isfinite(v))
      throw DataError("signal file line " + std::to_string(lineno) + ": bad sample '" + line + "'");
    samples.push_back(v);
  }
  return samples;
}

namespace {

// Largest-remainder apportionment of `total` across groups proportional
// to their sizes; |share_i - exact_i| < 1 for every group.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, std::size_t total) {
  const double n = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
  std::vector<std::size_t> share(sizes.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double exact = n > 0 ? total * (sizes[i] / n) : 0.0;
    share[i] = static_cast<std::size_t>(std::floor(exact));
    share[i] = std::min(share[i], sizes[i]);
    assigned += share[i];
    remainder.push_back({exact - static_cast<double>(share[i]), i});
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [rem, i] : remainder) {
    if (assigned >= total) break;
    if (share[i] < sizes[i]) {
      ++share[i];
      ++assigned;
    }
  }
  return share;
}

}  // namespace

SplitResult split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw UsageError("train_fraction must be in (0,1)");
  if (!(spec.calibration_fraction_of_train >= 0.0 && spec.calibration_fraction_of_train < 1.0))
    throw UsageError("calibration_fraction_of_train must be in [0,1)");

  std::vector<std::size_t> included;
  for (std::size_t i = 0; i < ds.beats().size(); ++i)
    if (ds.beats()[i].label != BeatClass::Other) included.push_back(i);
  const std::size_t n = included.size();
  if (n == 0) throw DataError("no trainable beats in dataset");

  const std::size_t total_train =
      static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  const std::size_t total_cal = static_cast<std::size_t>(
      std::floor(spec.calibration_fraction_of_train * static_cast<double>(total_train)));

  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> cal_idx, train_idx, test_idx;

  if (spec.stratified) {
    std::vector<std::vector<std::size_t>> by_class(kNumTrainable);
    for (std::size_t i : included)
      by_class[static_cast<int>(ds.beats()[i].label)].push_back(i);

    std::vector<std::size_t> class_sizes;
    std::vector<int> class_ids;
    for (int c = 0; c < kNumTrainable; ++c) {
      if (!by_class[c].empty()) {
        class_sizes.push_back(by_class[c].size());
        class_ids.push_back(c);
      }
    }
    const auto train_share = apportion(class_sizes, total_train);
    const auto cal_share = apportion(train_share, total_cal);
    for (std::size_t k = 0; k < class_ids.size(); ++k) {
      const int c = class_ids[k];
      if (train_share[k] == cal_share[k])
        throw DataError("stratified split leaves class " +
                        class_label(static_cast<BeatClass>(c)) +
                        " with an empty train partition");
      auto& idxs = by_class[c];
      std::shuffle(idxs.begin(), idxs.end(), rng);
      for (std::size_t i = 0; i < idxs.size(); ++i) {
        if (i < cal_share[k])
          cal_idx.push_back(idxs[i]);
        else if (i < train_share[k])
          train_idx.push_back(idxs[i]);
        else
          test_idx.push_back(idxs[i]);
      }
    }
  } else {
    std::shuffle(included.begin(), included.end(), rng);
    for (std::size_t i = 0; i < included.size(); ++i) {
      if (i < total_cal)
        cal_idx.push_back(included[i]);
      else if (i < total_train)
        train_idx.push_back(included[i]);
      else
        test_idx.push_back(included[i]);
    }
    if (train_idx.empty()) throw DataError("split leaves an empty train partition");
  }

  auto gather = [&](std::vector<std::size_t>& idxs) {
    std::sort(idxs.begin(), idxs.end());  // keep original row order within partitions
    std::vector<BeatRecord> beats;
    beats.reserve(idxs.size());
    for (std::size_t i : idxs) beats.push_back(ds.beats()[i]);
    return Dataset(std::move(beats));
  };
  return {gather(train_idx), gather(cal_idx), gather(test_idx)};
}

namespace {

// Per-feature baseline (seconds / millivolts) and noise scale for the
// synthetic generator.
constexpr std::array<double, FeatureVector::kDim> kSynthBase = {
    0.16, 0.09, 0.40, 0.80, 1.50, 0.20, 0.40, 0.10, 0.25, 0.05, 0.20};
constexpr std::array<double, FeatureVector::kDim> kSynthSigma = {
    0.020, 0.010, 0.040, 0.080, 0.30, 0.05, 0.08, 0.04, 0.06, 0.03, 0.05};

// Fixed unit directions, one per class, along which class means are
// displaced in noise-normalized space.
const std::array<std::array<double, FeatureVector::kDim>, kNumClasses>& synth_directions() {
  static const auto dirs = [] {
    std::array<std::array<double, FeatureVector::kDim>, kNumClasses> d{};
    const double raw[kNumClasses][FeatureVector::kDim] = {
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},           // Normal: baseline
        {-1, 1, 1, -1, 1, 0, 1, 0, 1, 0, 0},         // PVC: wide QRS, high amplitude
        {1, 0, 0, -1, 0, -1, 0, 0, 0, -1, 1},        // APB: early beat, short RR
        {0, 1, 0, 0, 1, 1, 0, 1, 0, 0, -1},          // RBBB
        {0, 1, 1, 0, -1, -1, 1, -1, 1, 1, 0},        // LBBB
        {1, -1, -1, 1, 0, 1, -1, 1, -1, -1, -1},     // Other
    };
    for (int c = 0; c < kNumClasses; ++c) {
      double norm = 0.0;
      for (int f = 0; f < FeatureVector::kDim; ++f) norm += raw[c][f] * raw[c][f];
      norm = norm > 0 ? std::sqrt(norm) : 1.0;
      for (int f = 0; f < FeatureVector::kDim; ++f) d[c][f] = raw[c][f] / norm;
    }
    return d;
  }();
  return dirs;
}

}  // namespace

std::array<double, FeatureVector::kDim> synth_class_mean(BeatClass c, double separation) {
  std::array<double, FeatureVector::kDim> mean{};
  const auto& dir = synth_directions()[static_cast<int>(c)];
  for (int f = 0; f < FeatureVector::kDim; ++f)
    mean[f] = kSynthBase[f] + separation * kSynthSigma[f] * dir[f];
  return mean;
}

Dataset synth_generate(const std::map<BeatClass, std::size_t>& n_per_class,
                       std::uint64_t seed, double separation) {
  if (!(separation >= 0.0)) throw UsageError("separation must be non-negative");
  std::size_t nonzero = 0;
  for (const auto& [c, n] : n_per_class)
    if (n > 0) ++nonzero;
  if (nonzero == 0) throw UsageError("synthetic generation needs at least one non-empty class");
  if (nonzero < 2) throw UsageError("synthetic generation needs at least two non-empty classes");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<BeatRecord> beats;
  std::uint64_t beat_index = 0;
  for (int ci = 0; ci < kNumClasses; ++ci) {
    const auto c = static_cast<BeatClass>(ci);
    auto it = n_per_class.find(c);
    if (it == n_per_class.end() || it->second == 0) continue;
    const auto mean = synth_class_mean(c, separation);
    for (std::size_t k = 0; k < it->second; ++k) {
      std::array<double, FeatureVector::kDim> v{};
      for (int f = 0; f < FeatureVector::kDim; ++f)
        v[f] = mean[f] + kSynthSigma[f] * gauss(rng);
      for (int f = 0; f < 4; ++f) v[f] = std::max(v[f], 1e-4);   // widths > 0
      v[6] = std::max(v[6], 0.0);                                 // std fields >= 0
      v[8] = std::max(v[8], 0.0);
      v[10] = std::max(v[10], 0.0);
      beats.push_back({"synth", beat_index++, FeatureVector::from_values(v), c});
    }
  }
  return Dataset(std::move(beats));
}

}  // namespace beatfuse
