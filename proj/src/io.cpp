#include "rfcpca/io.hpp"

#include "rfcpca/errors.hpp"
#include "rfcpca/rng.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace rfcpca {
namespace {

[[noreturn]] void io_fail(const fs::path& path, const std::string& what) {
  fail(ErrorCode::IoError, path.string() + ": " + what);
}

/// Reads an object's keys, then rejects whatever was not consumed.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) fail(ErrorCode::ConfigError, where_ + " must be a JSON object");
  }

  template <class T>
  bool get(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return false;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      fail(ErrorCode::ConfigError, where_ + "." + key + " has the wrong type");
    }
    return true;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() || it->is_null() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key()))
        fail(ErrorCode::ConfigError, "unknown key " + where_ + "." + it.key());
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string hex(const unsigned char* bytes, unsigned len) {
  static const char* digits = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned i = 0; i < len; ++i) {
    out[2 * i] = digits[bytes[i] >> 4];
    out[2 * i + 1] = digits[bytes[i] & 15];
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      fail(ErrorCode::IoError, "cannot initialize SHA-256");
  }
  void update(std::string_view bytes) {
    EVP_DigestUpdate(ctx_.get(), bytes.data(), bytes.size());
  }
  std::string hex_digest() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    return hex(md, len);
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

Contamination parse_contamination(const std::string& s) {
  if (s == "none") return Contamination::None;
  if (s == "burst") return Contamination::Burst;
  if (s == "eyeblink") return Contamination::EyeBlink;
  fail(ErrorCode::ConfigError, "unknown contamination '" + s + "'");
}

StopReason parse_stop(const std::string& s) {
  if (s == "tolerance") return StopReason::Tolerance;
  if (s == "patience") return StopReason::Patience;
  if (s == "cycle") return StopReason::Cycle;
  return StopReason::MaxIterations;
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_from(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

void read_filter(const json& doc, FilterSpec& f) {
  Fields in(doc, "filter");
  in.get("enabled", f.enabled);
  in.get("edge_factor", f.edge_factor);
  in.get("min_hz", f.min_hz);
  in.get("nyquist_fraction", f.nyquist_fraction);
  in.finish();
}

json filter_json(const FilterSpec& f) {
  return {{"enabled", f.enabled},
          {"edge_factor", f.edge_factor},
          {"min_hz", f.min_hz},
          {"nyquist_fraction", f.nyquist_fraction}};
}

void read_bands(const json& doc, std::vector<BandSpec>& bands) {
  if (!doc.is_array()) fail(ErrorCode::ConfigError, "bands must be an array");
  bands.clear();
  for (const auto& b : doc) {
    Fields in(b, "bands[]");
    BandSpec spec;
    in.get("name", spec.name);
    in.get("peak_hz", spec.peak_hz);
    in.get("sharpness", spec.sharpness);
    in.finish();
    bands.push_back(spec);
  }
}

json bands_json(const std::vector<BandSpec>& bands) {
  json out = json::array();
  for (const auto& b : bands)
    out.push_back({{"name", b.name}, {"peak_hz", b.peak_hz}, {"sharpness", b.sharpness}});
  return out;
}

void read_clean(Fields& in, CleanConfig& c) {
  in.get("per_group", c.per_group);
  in.get("channels", c.channels);
  in.get("length", c.length);
  std::vector<Eigen::Index> range;
  if (in.get("length_range", range)) {
    if (range.size() != 2 || range[0] > range[1])
      fail(ErrorCode::ConfigError, "length_range must be [lo, hi] with lo <= hi");
    c.length_range = std::make_pair(range[0], range[1]);
  }
  in.get("sampling_rate", c.sampling_rate);
  in.get("seed", c.seed);
  in.get("dominance", c.dominance);
  in.get("split_exponent", c.split_exponent);
  in.get("burn_in", c.burn_in);
  if (const json* f = in.child("filter")) read_filter(*f, c.filter);
  if (const json* b = in.child("bands")) read_bands(*b, c.bands);
}

json clean_json(const CleanConfig& c) {
  json out = {{"per_group", c.per_group},
              {"channels", c.channels},
              {"length", c.length},
              {"sampling_rate", c.sampling_rate},
              {"seed", c.seed},
              {"dominance", c.dominance},
              {"split_exponent", c.split_exponent},
              {"burn_in", c.burn_in},
              {"filter", filter_json(c.filter)},
              {"bands", bands_json(c.bands)}};
  out["length_range"] = c.length_range
                            ? json::array({c.length_range->first, c.length_range->second})
                            : json(nullptr);
  return out;
}

void read_burst(const json& doc, BurstConfig& b) {
  Fields in(doc, "burst");
  in.get("rate", b.rate);
  in.get("amplitude", b.amplitude);
  in.get("duration_seconds", b.duration_seconds);
  in.get("channel_fraction", b.channel_fraction);
  in.get("min_frequency", b.min_frequency);
  in.get("max_frequency", b.max_frequency);
  in.get("max_events", b.max_events);
  in.get("seed", b.seed);
  in.finish();
}

json burst_json(const BurstConfig& b) {
  return {{"rate", b.rate},
          {"amplitude", b.amplitude},
          {"duration_seconds", b.duration_seconds},
          {"channel_fraction", b.channel_fraction},
          {"min_frequency", b.min_frequency},
          {"max_frequency", b.max_frequency},
          {"max_events", b.max_events},
          {"seed", b.seed}};
}

void read_blink(const json& doc, BlinkConfig& b) {
  Fields in(doc, "blink");
  in.get("rate", b.rate);
  in.get("frontal_fraction", b.frontal_fraction);
  in.get("channel_fraction", b.channel_fraction);
  in.get("min_duration_seconds", b.min_duration_seconds);
  in.get("max_duration_seconds", b.max_duration_seconds);
  in.get("min_amplitude", b.min_amplitude);
  in.get("max_amplitude", b.max_amplitude);
  in.get("max_events", b.max_events);
  in.get("seed", b.seed);
  in.finish();
}

json blink_json(const BlinkConfig& b) {
  return {{"rate", b.rate},
          {"frontal_fraction", b.frontal_fraction},
          {"channel_fraction", b.channel_fraction},
          {"min_duration_seconds", b.min_duration_seconds},
          {"max_duration_seconds", b.max_duration_seconds},
          {"min_amplitude", b.min_amplitude},
          {"max_amplitude", b.max_amplitude},
          {"max_events", b.max_events},
          {"seed", b.seed}};
}

json axes_json(const SubspaceAxes& a) {
  return {{"axes", matrix_to_json(a.axes)},
          {"eigenvalues", std::vector<double>(a.eigenvalues.data(),
                                              a.eigenvalues.data() + a.eigenvalues.size())},
          {"explained", a.explained}};
}

SubspaceAxes axes_from_json(const json& doc) {
  SubspaceAxes a;
  a.axes = matrix_from_json(doc.at("axes"));
  const auto ev = doc.at("eigenvalues").get<std::vector<double>>();
  a.eigenvalues = Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
  a.explained = doc.at("explained").get<double>();
  return a;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_trial_csv(const fs::path& path, const Eigen::MatrixXd& x,
                     const std::vector<std::string>& channel_names) {
  if (static_cast<Eigen::Index>(channel_names.size()) != x.cols())
    fail(ErrorCode::DimensionMismatch, "one channel name per column required");
  std::string text;
  for (std::size_t j = 0; j < channel_names.size(); ++j) {
    if (j) text += ',';
    text += channel_names[j];
  }
  text += '\n';
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) text += ',';
      text += format_double(x(t, j));
    }
    text += '\n';
  }
  write_text_file(path, text);
}

TrialTable read_trial_csv(const fs::path& path) {
  const std::string text = read_text_file(path);
  TrialTable out;
  std::vector<double> values;
  std::size_t pos = 0, line_no = 0, rows = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (out.columns.empty()) {
      for (auto c : cells) out.columns.emplace_back(c);
      continue;
    }
    if (cells.size() != out.columns.size())
      io_fail(path, "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(out.columns.size()));
    for (auto c : cells) {
      while (!c.empty() && c.front() == ' ') c.remove_prefix(1);
      while (!c.empty() && c.back() == ' ') c.remove_suffix(1);
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size())
        io_fail(path, "line " + std::to_string(line_no) + ": bad number '" + std::string(c) + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (out.columns.empty()) io_fail(path, "empty file");
  const auto p = static_cast<Eigen::Index>(out.columns.size());
  out.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(rows), p);
  return out;
}

void write_dataset(const fs::path& dir, const MtsDataset& data) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) io_fail(dir, ec.message());
  for (std::size_t i = 0; i < data.size(); ++i) {
    char fallback[32];
    std::snprintf(fallback, sizeof fallback, "trial_%03zu", i);
    const std::string name = i < data.names.size() ? data.names[i] : fallback;
    std::vector<std::string> channels = data.channel_names;
    if (channels.empty())
      for (Eigen::Index j = 0; j < data.series[i].cols(); ++j)
        channels.push_back("ch" + std::to_string(j + 1));
    write_trial_csv(dir / (name + ".csv"), data.series[i], channels);
  }
}

std::vector<fs::path> trial_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) io_fail(dir, "not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  if (ec) io_fail(dir, ec.message());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

MtsDataset read_dataset(const fs::path& dir) {
  const auto files = trial_files(dir);
  if (files.empty()) io_fail(dir, "no .csv trial files");
  MtsDataset data;
  for (const auto& f : files) {
    TrialTable t = read_trial_csv(f);
    if (data.channel_names.empty()) {
      data.channel_names = t.columns;
    } else if (t.columns.size() != data.channel_names.size()) {
      fail(ErrorCode::InvalidShape, f.filename().string() + " has " +
                                        std::to_string(t.columns.size()) + " channels, expected " +
                                        std::to_string(data.channel_names.size()));
    }
    data.series.push_back(std::move(t.values));
    data.names.push_back(f.stem().string());
  }
  return data;
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex_digest();
}

std::string dataset_hash(const fs::path& dir) {
  Sha256 h;
  for (const auto& f : trial_files(dir)) {
    const std::string name = f.filename().string();
    h.update(name);
    h.update(std::string_view("\0", 1));
    h.update(read_text_file(f));
    h.update(std::string_view("\0", 1));
  }
  return "sha256:" + h.hex_digest();
}

std::string config_hash(const json& config) { return "sha256:" + sha256_hex(config.dump()); }

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) io_fail(path, "read failed");
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail(path, "cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) io_fail(path, "write failed");
}

json read_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

SimulateConfig parse_simulate_config(const json& doc) {
  SimulateConfig c;
  Fields in(doc, "config");
  int schema = kJsonSchemaVersion;
  in.get("schema_version", schema);
  if (schema != kJsonSchemaVersion)
    fail(ErrorCode::ConfigError, "unsupported schema_version " + std::to_string(schema));
  read_clean(in, c.clean);
  c.burst.seed = c.blink.seed = c.clean.seed;
  std::string contamination = "none";
  in.get("contamination", contamination);
  c.contamination = parse_contamination(contamination);
  if (const json* b = in.child("burst")) read_burst(*b, c.burst);
  if (const json* b = in.child("blink")) read_blink(*b, c.blink);
  in.finish();
  return c;
}

json to_json(const SimulateConfig& c) {
  json out = clean_json(c.clean);
  out["schema_version"] = kJsonSchemaVersion;
  out["contamination"] = std::string(contamination_name(c.contamination));
  out["burst"] = burst_json(c.burst);
  out["blink"] = blink_json(c.blink);
  return out;
}

FitConfig parse_fit_config(const json& doc) {
  FitConfig c;
  Fields in(doc, "config");
  int schema = kJsonSchemaVersion;
  in.get("schema_version", schema);
  if (schema != kJsonSchemaVersion)
    fail(ErrorCode::ConfigError, "unsupported schema_version " + std::to_string(schema));
  std::string variant;
  if (in.get("variant", variant)) {
    const auto v = parse_variant(variant);
    if (!v) fail(ErrorCode::ConfigError, "unknown variant '" + variant + "'");
    c.variant = *v;
  }
  in.get("auto", c.automatic);
  in.get("clusters", c.clusters);
  in.get("fuzziness", c.fuzziness);
  in.get("alpha", c.alpha);
  if (const json* l = in.child("lambda")) {
    if (l->is_string() && l->get<std::string>() == "auto")
      c.lambda.reset();
    else if (l->is_number())
      c.lambda = l->get<double>();
    else
      fail(ErrorCode::ConfigError, "config.lambda must be a number or \"auto\"");
  }
  in.get("variance", c.variance);
  in.get("max_iter", c.max_iter);
  in.get("tol", c.tol);
  in.get("restarts", c.restarts);
  in.get("max_lag", c.max_lag);
  std::string rule;
  if (in.get("subspace_rule", rule)) {
    const auto r = parse_subspace_rule(rule);
    if (!r) fail(ErrorCode::ConfigError, "unknown subspace_rule '" + rule + "'");
    c.subspace_rule = *r;
  }
  in.get("seed", c.seed);
  in.finish();
  return c;
}

json to_json(const FitConfig& c) {
  return {{"schema_version", kJsonSchemaVersion},
          {"variant", std::string(variant_name(c.variant))},
          {"auto", c.automatic},
          {"clusters", c.clusters},
          {"fuzziness", c.fuzziness},
          {"alpha", c.alpha},
          {"lambda", c.lambda ? json(*c.lambda) : json("auto")},
          {"variance", c.variance},
          {"max_iter", c.max_iter},
          {"tol", c.tol},
          {"restarts", c.restarts},
          {"max_lag", c.max_lag},
          {"subspace_rule", std::string(subspace_rule_name(c.subspace_rule))},
          {"seed", c.seed}};
}

json to_json(const Provenance& p) {
  return {{"tool_version", p.tool_version},
          {"config_hash", p.config_hash},
          {"dataset_hash", p.dataset_hash},
          {"seed", p.seed}};
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& doc) {
  if (!doc.is_array()) fail(ErrorCode::ConfigError, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(doc.size());
  const auto cols = rows ? static_cast<Eigen::Index>(doc.front().size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = doc[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.size()) != cols)
      fail(ErrorCode::ConfigError, "ragged matrix");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json to_json(const SimManifest& m) {
  json events = json::array();
  for (const auto& e : m.events)
    events.push_back({{"trial", e.trial},
                      {"start", e.start},
                      {"duration", e.duration},
                      {"frequency", e.frequency},
                      {"polarity", e.polarity},
                      {"amplitude", e.amplitude},
                      {"channels", e.channels},
                      {"channel_sd", e.channel_sd}});
  json mixing = json::array();
  for (const auto& a : m.mixing) mixing.push_back(matrix_to_json(a));
  json edges = json::array();
  for (const auto& [lo, hi] : m.filter_edges) edges.push_back({lo, hi});
  return {{"schema_version", m.schema_version},
          {"rng", {{"algorithm", Rng::kAlgorithm}, {"seed_derivation", Rng::kSeedDerivation}}},
          {"index_base", 0},
          {"clean", clean_json(m.clean)},
          {"lengths", m.lengths},
          {"labels", m.labels},
          {"mixing", mixing},
          {"filter_edges", edges},
          {"contamination", std::string(contamination_name(m.contamination))},
          {"burst", m.burst ? burst_json(*m.burst) : json(nullptr)},
          {"blink", m.blink ? blink_json(*m.blink) : json(nullptr)},
          {"contaminated", m.contaminated},
          {"events", events},
          {"dataset_hash", m.dataset_hash}};
}

SimManifest manifest_from_json(const json& doc) {
  try {
    SimManifest m;
    m.schema_version = doc.at("schema_version").get<int>();
    if (m.schema_version != kJsonSchemaVersion)
      fail(ErrorCode::ConfigError, "unsupported manifest schema_version");
    Fields clean(doc.at("clean"), "clean");
    read_clean(clean, m.clean);
    clean.finish();
    m.lengths = doc.at("lengths").get<std::vector<Eigen::Index>>();
    m.labels = doc.at("labels").get<std::vector<int>>();
    for (const auto& a : doc.at("mixing")) m.mixing.push_back(matrix_from_json(a));
    for (const auto& e : doc.at("filter_edges"))
      m.filter_edges.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    m.contamination = parse_contamination(doc.at("contamination").get<std::string>());
    if (!doc.at("burst").is_null()) {
      m.burst.emplace();
      read_burst(doc.at("burst"), *m.burst);
    }
    if (!doc.at("blink").is_null()) {
      m.blink.emplace();
      read_blink(doc.at("blink"), *m.blink);
    }
    m.contaminated = doc.at("contaminated").get<std::vector<std::size_t>>();
    for (const auto& e : doc.at("events")) {
      ArtifactEvent ev;
      ev.trial = e.at("trial").get<std::size_t>();
      ev.start = e.at("start").get<std::size_t>();
      ev.duration = e.at("duration").get<std::size_t>();
      ev.frequency = e.at("frequency").get<double>();
      ev.polarity = e.at("polarity").get<int>();
      ev.amplitude = e.at("amplitude").get<double>();
      ev.channels = e.at("channels").get<std::vector<std::size_t>>();
      ev.channel_sd = e.at("channel_sd").get<std::vector<double>>();
      m.events.push_back(std::move(ev));
    }
    m.dataset_hash = doc.value("dataset_hash", "");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("malformed manifest: ") + e.what());
  }
}

json to_json(const FitResult& fit) {
  json subspaces = json::array();
  for (const auto& lags : fit.subspaces.clusters) {
    json per_lag = json::array();
    for (const auto& a : lags) per_lag.push_back(axes_json(a));
    subspaces.push_back(std::move(per_lag));
  }
  return {{"variant", std::string(variant_name(fit.variant))},
          {"clusters", fit.clusters},
          {"fuzziness", fit.fuzziness},
          {"variance", fit.variance},
          {"max_lag", fit.max_lag},
          {"seed", fit.seed},
          {"memberships", matrix_to_json(fit.memberships)},
          {"errors", matrix_to_json(fit.errors)},
          {"objective_trace", fit.objective_trace},
          {"objective", fit.objective_trace.empty() ? json(nullptr) : json(fit.objective())},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"stop", std::string(stop_reason_name(fit.stop))},
          {"beta", opt(fit.beta)},
          {"delta2", opt(fit.delta2)},
          {"lambda", opt(fit.lambda)},
          {"alpha", opt(fit.alpha)},
          {"retained", fit.retained},
          {"subspaces", subspaces}};
}

FitResult fit_from_json(const json& doc) {
  try {
    FitResult fit;
    const auto v = parse_variant(doc.at("variant").get<std::string>());
    if (!v) fail(ErrorCode::ConfigError, "unknown variant in fit document");
    fit.variant = *v;
    fit.clusters = doc.at("clusters").get<int>();
    fit.fuzziness = doc.at("fuzziness").get<double>();
    fit.variance = doc.at("variance").get<double>();
    fit.max_lag = doc.at("max_lag").get<int>();
    fit.seed = doc.at("seed").get<std::uint64_t>();
    fit.memberships = matrix_from_json(doc.at("memberships"));
    fit.errors = matrix_from_json(doc.at("errors"));
    fit.objective_trace = doc.at("objective_trace").get<std::vector<double>>();
    fit.iterations = doc.at("iterations").get<int>();
    fit.converged = doc.at("converged").get<bool>();
    fit.stop = parse_stop(doc.at("stop").get<std::string>());
    fit.beta = opt_from<double>(doc, "beta");
    fit.delta2 = opt_from<double>(doc, "delta2");
    fit.lambda = opt_from<double>(doc, "lambda");
    fit.alpha = opt_from<double>(doc, "alpha");
    fit.retained = doc.at("retained").get<std::vector<std::size_t>>();
    for (const auto& lags : doc.at("subspaces")) {
      std::vector<SubspaceAxes> per_lag;
      for (const auto& a : lags) per_lag.push_back(axes_from_json(a));
      fit.subspaces.clusters.push_back(std::move(per_lag));
    }
    return fit;
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("malformed fit document: ") + e.what());
  }
}

json to_json(const SelectionReport& r) {
  json cands = json::array();
  for (const auto& c : r.candidates)
    cands.push_back({{"clusters", c.clusters},
                     {"fuzziness", c.fuzziness},
                     {"alpha", opt(c.alpha)},
                     {"seed", c.seed},
                     {"cvi", opt(c.cvi)},
                     {"objective", opt(c.objective)},
                     {"converged", c.converged},
                     {"iterations", c.iterations},
                     {"error", c.error.empty() ? json(nullptr) : json(c.error)}});
  return {{"variant", std::string(variant_name(r.variant))},
          {"restarts", r.restarts},
          {"winner", r.winner},
          {"candidates", cands}};
}

json to_json(const EvalReport& r) {
  return {{"variant", std::string(variant_name(r.variant))},
          {"rule", r.rule},
          {"acc_rand", opt(r.acc_rand)},
          {"acc_adjusted_rand", opt(r.acc_adjusted_rand)},
          {"outlier_recall", opt(r.outlier_recall)},
          {"flagged", r.flagged},
          {"unassigned", r.unassigned},
          {"scored", r.scored},
          {"false_positives", r.false_positives}};
}

json to_json(const ElbowResult& e) {
  json curve = json::array();
  for (const auto& p : e.curve)
    curve.push_back({{"lambda", p.lambda}, {"outlier_fraction", p.outlier_fraction}});
  return {{"lambda", e.lambda},
          {"no_elbow", e.no_elbow},
          {"monotonicity_violations", e.monotonicity_violations},
          {"curve", curve}};
}

}  // namespace rfcpca
