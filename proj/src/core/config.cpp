#include "core/config.hpp"

#include <fstream>
#include <sstream>

#include "core/errors.hpp"
#include "core/textnum.hpp"

namespace beatfuse {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  bool ok = false;
  const double v = parse_scaled(value, 0, &ok);
  if (!ok) throw UsageError("config: key '" + key + "' expects a number, got '" + value + "'");
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' expects an integer, got '" + value + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' expects an unsigned integer, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw UsageError("config: key '" + key + "' expects true or false, got '" + value + "'");
}

}  // namespace

std::map<BeatClass, std::size_t> parse_class_counts(const std::string& text) {
  std::map<BeatClass, std::size_t> counts;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw UsageError("class counts: expected LABEL=COUNT, got '" + item + "'");
    const std::string label = trim(item.substr(0, eq));
    const auto cls = class_from_label(label);
    if (!cls) throw UsageError("class counts: unknown label '" + label + "'");
    counts[*cls] = static_cast<std::size_t>(to_u64("counts", trim(item.substr(eq + 1))));
  }
  if (counts.empty()) throw UsageError("class counts: empty list");
  return counts;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (section != "data" && section != "split" && section != "mlp" &&
          section != "rbf" && section != "svm" && section != "metrics")
        throw UsageError("config line " + std::to_string(lineno) + ": unknown section [" +
                         section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "data.source") {
      if (value == "csv")
        cfg.source = DataSource::kCsv;
      else if (value == "synth")
        cfg.source = DataSource::kSynthetic;
      else
        throw UsageError("config: data.source must be csv or synth");
    } else if (qual == "data.csv_path") {
      cfg.csv_path = value;
    } else if (qual == "data.synth_counts") {
      cfg.synth_counts = parse_class_counts(value);
    } else if (qual == "data.synth_separation") {
      cfg.synth_separation = to_double(qual, value);
    } else if (qual == "data.synth_seed") {
      cfg.synth_seed = to_u64(qual, value);
    } else if (qual == "split.train_fraction") {
      cfg.split.train_fraction = to_double(qual, value);
    } else if (qual == "split.calibration_fraction") {
      cfg.split.calibration_fraction_of_train = to_double(qual, value);
    } else if (qual == "split.seed") {
      cfg.split.seed = to_u64(qual, value);
    } else if (qual == "split.stratified") {
      cfg.split.stratified = to_bool(qual, value);
    } else if (qual == "mlp.hidden_dim") {
      cfg.mlp_hidden_dim = static_cast<int>(to_int(qual, value));
    } else if (qual == "mlp.lambda_init") {
      cfg.mlp.lambda_init = to_double(qual, value);
    } else if (qual == "mlp.lambda_up") {
      cfg.mlp.lambda_up = to_double(qual, value);
    } else if (qual == "mlp.lambda_down") {
      cfg.mlp.lambda_down = to_double(qual, value);
    } else if (qual == "mlp.max_epochs") {
      cfg.mlp.max_epochs = static_cast<int>(to_int(qual, value));
    } else if (qual == "mlp.mse_goal") {
      cfg.mlp.mse_goal = to_double(qual, value);
    } else if (qual == "mlp.max_lambda") {
      cfg.mlp.max_lambda = to_double(qual, value);
    } else if (qual == "mlp.seed") {
      cfg.mlp.seed = to_u64(qual, value);
    } else if (qual == "rbf.n_centers") {
      cfg.rbf.n_centers = static_cast<int>(to_int(qual, value));
    } else if (qual == "rbf.spread") {
      cfg.rbf.spread = to_double(qual, value);
    } else if (qual == "rbf.ridge") {
      cfg.rbf.ridge = to_double(qual, value);
    } else if (qual == "rbf.scale_features") {
      cfg.rbf.scale_features = to_bool(qual, value);
    } else if (qual == "rbf.seed") {
      cfg.rbf.seed = to_u64(qual, value);
    } else if (qual == "svm.c") {
      cfg.svm.c = to_double(qual, value);
    } else if (qual == "svm.b0") {
      cfg.svm_kernel.b0 = to_double(qual, value);
    } else if (qual == "svm.kkt_tolerance") {
      cfg.svm.kkt_tolerance = to_double(qual, value);
    } else if (qual == "svm.max_passes") {
      cfg.svm.max_passes = static_cast<int>(to_int(qual, value));
    } else if (qual == "svm.seed") {
      cfg.svm.seed = to_u64(qual, value);
    } else if (qual == "metrics.mi_denominator") {
      if (value == "truth")
        cfg.mi_denominator = MiDenominator::kTruth;
      else if (value == "prediction")
        cfg.mi_denominator = MiDenominator::kPrediction;
      else
        throw UsageError("config: metrics.mi_denominator must be truth or prediction");
    } else {
      throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + qual + "'");
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  return parse_config(in);
}

void RunConfig::validate() const {
  if (source == DataSource::kUnset)
    throw UsageError("config: missing data.source (csv or synth)");
  if (source == DataSource::kCsv && csv_path.empty())
    throw UsageError("config: missing data.csv_path");
  if (source == DataSource::kSynthetic && synth_counts.empty())
    throw UsageError("config: missing data.synth_counts");
  if (mlp_hidden_dim < 1) throw UsageError("config: mlp.hidden_dim must be >= 1");
}

std::string canonical_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[data]\n";
  out << "source = "
      << (cfg.source == DataSource::kCsv ? "csv"
          : cfg.source == DataSource::kSynthetic ? "synth" : "unset")
      << "\n";
  if (!cfg.csv_path.empty()) out << "csv_path = " << cfg.csv_path << "\n";
  if (!cfg.synth_counts.empty()) {
    out << "synth_counts = ";
    bool first = true;
    for (const auto& [c, n] : cfg.synth_counts) {
      if (!first) out << ",";
      out << class_label(c) << "=" << n;
      first = false;
    }
    out << "\n";
    out << "synth_separation = " << format_double(cfg.synth_separation) << "\n";
    out << "synth_seed = " << cfg.synth_seed << "\n";
  }
  out << "[split]\n";
  out << "train_fraction = " << format_double(cfg.split.train_fraction) << "\n";
  out << "calibration_fraction = " << format_double(cfg.split.calibration_fraction_of_train)
      << "\n";
  out << "seed = " << cfg.split.seed << "\n";
  out << "stratified = " << (cfg.split.stratified ? "true" : "false") << "\n";
  out << "[mlp]\n";
  out << "hidden_dim = " << cfg.mlp_hidden_dim << "\n";
  out << "lambda_init = " << format_double(cfg.mlp.lambda_init) << "\n";
  out << "lambda_up = " << format_double(cfg.mlp.lambda_up) << "\n";
  out << "lambda_down = " << format_double(cfg.mlp.lambda_down) << "\n";
  out << "max_epochs = " << cfg.mlp.max_epochs << "\n";
  out << "mse_goal = " << format_double(cfg.mlp.mse_goal) << "\n";
  out << "max_lambda = " << format_double(cfg.mlp.max_lambda) << "\n";
  out << "seed = " << cfg.mlp.seed << "\n";
  out << "[rbf]\n";
  out << "n_centers = " << cfg.rbf.n_centers << "\n";
  out << "spread = " << format_double(cfg.rbf.spread) << "\n";
  out << "ridge = " << format_double(cfg.rbf.ridge) << "\n";
  out << "scale_features = " << (cfg.rbf.scale_features ? "true" : "false") << "\n";
  out << "seed = " << cfg.rbf.seed << "\n";
  out << "[svm]\n";
  out << "c = " << format_double(cfg.svm.c) << "\n";
  out << "b0 = " << format_double(cfg.svm_kernel.b0) << "\n";
  out << "kkt_tolerance = " << format_double(cfg.svm.kkt_tolerance) << "\n";
  out << "max_passes = " << cfg.svm.max_passes << "\n";
  out << "seed = " << cfg.svm.seed << "\n";
  out << "[metrics]\n";
  out << "mi_denominator = "
      << (cfg.mi_denominator == MiDenominator::kTruth ? "truth" : "prediction") << "\n";
  return out.str();
}

std::string config_digest(const RunConfig& cfg) {
  const std::string text = canonical_config(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace beatfuse
