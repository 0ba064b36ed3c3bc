#include "rfcpca/simgen.hpp"

#include "rfcpca/errors.hpp"
#include "rfcpca/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

namespace rfcpca {
namespace {

// Stream tags for derive_seed; changing any of them changes every dataset.
constexpr std::uint64_t kLatentTag = 0x4C4154;   // "LAT"
constexpr std::uint64_t kMixingTag = 0x4D4958;   // "MIX"
constexpr std::uint64_t kLengthTag = 0x4C454E;   // "LEN"
constexpr std::uint64_t kBurstTag = 0x425253;    // "BRS"
constexpr std::uint64_t kBlinkTag = 0x424C4B;    // "BLK"

constexpr double kPi = std::numbers::pi;

struct Biquad {
  double b0, b1, b2, a1, a2;  // normalized by a0

  void run(std::vector<double>& x) const {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      v = out;
    }
  }
};

// Butterworth (Q = 1/sqrt 2) biquads from the audio-EQ cookbook.
Biquad butterworth(double cutoff, double fs, bool highpass) {
  const double w0 = 2.0 * kPi * cutoff / fs;
  const double c = std::cos(w0);
  const double alpha = std::sin(w0) / std::numbers::sqrt2;
  const double a0 = 1.0 + alpha;
  Biquad f{};
  if (highpass) {
    f.b0 = (1.0 + c) / 2.0 / a0;
    f.b1 = -(1.0 + c) / a0;
  } else {
    f.b0 = (1.0 - c) / 2.0 / a0;
    f.b1 = (1.0 - c) / a0;
  }
  f.b2 = f.b0;
  f.a1 = -2.0 * c / a0;
  f.a2 = (1.0 - alpha) / a0;
  return f;
}

void standardize(Eigen::Ref<Eigen::VectorXd> x) {
  const double mean = x.mean();
  x.array() -= mean;
  const double sd = std::sqrt(x.squaredNorm() / static_cast<double>(x.size() - 1));
  if (sd > 0.0) x /= sd;
}

std::size_t ceil_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

// Per-group trial selection shared by both injectors.
std::vector<std::size_t> pick_trials(const SimManifest& manifest, double rate, Rng& rng) {
  std::vector<std::size_t> picked;
  for (int group : {1, 2}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < manifest.labels.size(); ++i)
      if (manifest.labels[i] == group) members.push_back(i);
    const std::size_t k = std::min(members.size(), ceil_count(rate, members.size()));
    for (std::size_t j : rng.choose(members.size(), k)) picked.push_back(members[j]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

void require_clean(const SimulatedData& in) {
  if (in.manifest.contamination != Contamination::None)
    fail(ErrorCode::InvalidArgument, "dataset is already contaminated");
  if (in.manifest.labels.size() != in.data.size())
    fail(ErrorCode::InvalidShape, "manifest does not describe this dataset");
}

}  // namespace

std::vector<BandSpec> default_bands() {
  return {{"delta", 2.0, 0.05},
          {"theta", 6.0, 0.05},
          {"alpha", 10.0, 0.05},
          {"beta", 22.5, 0.08},
          {"gamma", 37.5, 0.10}};
}

Ar2Coefficients ar2_coefficients(double peak_hz, double sharpness, double sampling_rate) {
  if (!(sampling_rate > 0.0) || !(peak_hz > 0.0) || !(peak_hz < sampling_rate / 2.0))
    fail(ErrorCode::InvalidBand, "peak frequency must lie in (0, fs/2)");
  if (!(sharpness > 0.0)) fail(ErrorCode::InvalidBand, "sharpness must be positive");
  const double modulus = std::exp(sharpness);
  return {2.0 / modulus * std::cos(2.0 * kPi * peak_hz / sampling_rate),
          -1.0 / (modulus * modulus)};
}

std::pair<double, double> band_edges(const BandSpec& band, double sampling_rate,
                                     const FilterSpec& filter) {
  const double top = filter.nyquist_fraction * sampling_rate / 2.0;
  const double lo = std::clamp(band.peak_hz * (1.0 - filter.edge_factor), filter.min_hz, top);
  const double hi = std::clamp(band.peak_hz * (1.0 + filter.edge_factor), filter.min_hz, top);
  return {lo, hi};
}

Eigen::VectorXd bandpass_zero_phase(const Eigen::VectorXd& x, double low_hz, double high_hz,
                                    double sampling_rate) {
  const Biquad hp = butterworth(low_hz, sampling_rate, true);
  const Biquad lp = butterworth(high_hz, sampling_rate, false);
  std::vector<double> buf(x.data(), x.data() + x.size());
  hp.run(buf);
  lp.run(buf);
  std::reverse(buf.begin(), buf.end());
  hp.run(buf);
  lp.run(buf);
  std::reverse(buf.begin(), buf.end());
  return Eigen::Map<Eigen::VectorXd>(buf.data(), static_cast<Eigen::Index>(buf.size()));
}

Eigen::MatrixXd simulate_latents(Eigen::Index length, double sampling_rate,
                                 const std::vector<BandSpec>& bands, std::uint64_t seed,
                                 const FilterSpec& filter, int burn_in) {
  if (length < 64) fail(ErrorCode::InvalidArgument, "latents need at least 64 samples");
  Eigen::MatrixXd z(length, static_cast<Eigen::Index>(bands.size()));
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const auto coef = ar2_coefficients(bands[b].peak_hz, bands[b].sharpness, sampling_rate);
    const auto [lo, hi] = band_edges(bands[b], sampling_rate, filter);
    // Extra samples on both sides absorb the filter transients.
    const Eigen::Index pad =
        filter.enabled ? static_cast<Eigen::Index>(std::ceil(4.0 * sampling_rate / lo)) : 0;
    const Eigen::Index total = length + 2 * pad;

    Rng rng(derive_seed(seed, b));
    double x1 = 0.0, x2 = 0.0;
    for (int t = 0; t < burn_in; ++t) {
      const double x = coef.phi1 * x1 + coef.phi2 * x2 + rng.normal();
      x2 = x1;
      x1 = x;
    }
    Eigen::VectorXd series(total);
    for (Eigen::Index t = 0; t < total; ++t) {
      const double x = coef.phi1 * x1 + coef.phi2 * x2 + rng.normal();
      x2 = x1;
      x1 = x;
      series[t] = x;
    }
    standardize(series);
    if (filter.enabled) series = bandpass_zero_phase(series, lo, hi, sampling_rate);
    Eigen::VectorXd core = series.segment(pad, length);
    standardize(core);
    z.col(static_cast<Eigen::Index>(b)) = core;
  }
  return z;
}

std::vector<std::size_t> dominant_rows(int group) {
  if (group == 1) return {0, 1, 2, 4};  // delta, theta, alpha, gamma
  if (group == 2) return {1, 3};        // theta, beta
  fail(ErrorCode::InvalidArgument, "group must be 1 or 2");
}

Eigen::MatrixXd mixing_matrix(int group, Eigen::Index channels, std::uint64_t seed,
                              double dominance, double split_exponent, std::size_t bands) {
  if (channels < 2) fail(ErrorCode::InvalidArgument, "mixing needs at least two channels");
  if (bands != 5) fail(ErrorCode::InvalidArgument, "mixing is defined for five bands");
  if (!(dominance > 0.0 && dominance <= 1.0))
    fail(ErrorCode::InvalidArgument, "dominance must lie in (0, 1]");
  if (!(split_exponent > 0.0)) fail(ErrorCode::InvalidArgument, "split exponent must be positive");
  const auto rows = dominant_rows(group);
  const auto others = static_cast<double>(bands - rows.size());
  Rng rng(seed);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(bands), channels);
  for (Eigen::Index j = 0; j < channels; ++j) {
    a.col(j).setConstant((1.0 - dominance) / others);
    std::vector<double> w(rows.size());
    double sum = 0.0;
    for (double& v : w) {
      v = std::pow(-std::log(1.0 - rng.uniform()), split_exponent);
      sum += v;
    }
    for (std::size_t k = 0; k < rows.size(); ++k)
      a(static_cast<Eigen::Index>(rows[k]), j) = dominance * w[k] / sum;
  }
  return a;
}

std::string_view contamination_name(Contamination c) noexcept {
  switch (c) {
    case Contamination::None: return "none";
    case Contamination::Burst: return "burst";
    case Contamination::EyeBlink: return "eyeblink";
  }
  return "unknown";
}

SimulatedData generate_clean_dataset(const CleanConfig& config) {
  if (config.per_group < 1) fail(ErrorCode::InvalidArgument, "need at least one trial per group");
  if (config.bands.size() != 5) fail(ErrorCode::InvalidArgument, "generator uses five bands");
  SimulatedData out;
  SimManifest& man = out.manifest;
  man.clean = config;
  for (int group : {1, 2})
    man.mixing.push_back(mixing_matrix(group, config.channels,
                                       derive_seed(config.seed, kMixingTag, group),
                                       config.dominance, config.split_exponent));
  for (const auto& band : config.bands)
    man.filter_edges.push_back(band_edges(band, config.sampling_rate, config.filter));

  const std::size_t n = 2 * config.per_group;
  Rng length_rng(derive_seed(config.seed, kLengthTag));
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index len = config.length;
    if (config.length_range) {
      const auto [lo, hi] = *config.length_range;
      if (lo < 64 || hi < lo) fail(ErrorCode::InvalidArgument, "invalid length range");
      len = lo + static_cast<Eigen::Index>(length_rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
    const int group = i < config.per_group ? 1 : 2;
    const Eigen::MatrixXd z = simulate_latents(len, config.sampling_rate, config.bands,
                                               derive_seed(config.seed, kLatentTag, i),
                                               config.filter, config.burn_in);
    out.data.series.push_back(z * man.mixing[static_cast<std::size_t>(group - 1)]);
    out.data.labels.push_back(group);
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03zu", i);
    out.data.names.emplace_back(name);
    man.lengths.push_back(len);
    man.labels.push_back(group);
  }
  for (Eigen::Index j = 0; j < config.channels; ++j)
    out.data.channel_names.push_back("ch" + std::to_string(j + 1));
  return out;
}

Eigen::VectorXd channel_sd(const Eigen::MatrixXd& x) {
  Eigen::VectorXd sd(x.cols());
  const double denom = static_cast<double>(std::max<Eigen::Index>(x.rows() - 1, 1));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    sd[j] = std::sqrt((x.col(j).array() - mean).square().sum() / denom);
  }
  return sd;
}

double hann(std::size_t q, std::size_t tau) noexcept {
  if (tau < 2) return 0.0;
  return 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(q) / static_cast<double>(tau - 1)));
}

double half_sine(std::size_t q, std::size_t tau) noexcept {
  if (tau < 2) return 0.0;
  return std::sin(kPi * static_cast<double>(q) / static_cast<double>(tau - 1));
}

MtsDataset apply_artifacts(const MtsDataset& clean, const SimManifest& manifest) {
  MtsDataset out = clean;
  out.outliers = manifest.contaminated;
  if (manifest.contamination == Contamination::None) return out;
  const double fs = manifest.clean.sampling_rate;
  for (const auto& ev : manifest.events) {
    if (ev.trial >= clean.size()) fail(ErrorCode::InvalidShape, "event refers to a missing trial");
    const Eigen::MatrixXd& src = clean.series[ev.trial];
    Eigen::MatrixXd& dst = out.series[ev.trial];
    if (ev.start + ev.duration > static_cast<std::size_t>(src.rows()))
      fail(ErrorCode::InvalidShape, "event runs past the end of its trial");
    const Eigen::VectorXd sd = channel_sd(src);
    for (std::size_t q = 0; q < ev.duration; ++q) {
      double wave = 0.0;
      if (manifest.contamination == Contamination::Burst) {
        wave = std::sin(2.0 * kPi * ev.frequency * static_cast<double>(q) / fs) *
               hann(q, ev.duration);
      } else {
        wave = static_cast<double>(ev.polarity) * half_sine(q, ev.duration);
      }
      const auto t = static_cast<Eigen::Index>(ev.start + q);
      for (std::size_t j : ev.channels) {
        const auto c = static_cast<Eigen::Index>(j);
        dst(t, c) += ev.amplitude * sd[c] * wave;
      }
    }
  }
  return out;
}

SimulatedData inject_bursts(const SimulatedData& clean, const BurstConfig& config) {
  require_clean(clean);
  const double fs = clean.manifest.clean.sampling_rate;
  const auto tau = static_cast<std::size_t>(std::floor(config.duration_seconds * fs));
  Eigen::Index shortest = std::numeric_limits<Eigen::Index>::max();
  for (const auto& x : clean.data.series) shortest = std::min(shortest, x.rows());
  if (tau < 2 || static_cast<Eigen::Index>(tau) >= shortest)
    fail(ErrorCode::BurstTooLong, "burst of " + std::to_string(tau) +
                                      " samples does not fit the shortest trial");

  SimulatedData out{clean.data, clean.manifest};
  SimManifest& man = out.manifest;
  man.contamination = Contamination::Burst;
  man.burst = config;
  Rng rng(derive_seed(config.seed, kBurstTag));
  man.contaminated = pick_trials(man, config.rate, rng);

  const std::size_t p = static_cast<std::size_t>(clean.data.channels());
  const std::size_t width = std::max<std::size_t>(1, ceil_count(config.channel_fraction, p));
  for (std::size_t trial : man.contaminated) {
    const std::size_t len = static_cast<std::size_t>(clean.data.series[trial].rows());
    const Eigen::VectorXd sd = channel_sd(clean.data.series[trial]);
    const auto count = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.max_events)));
    for (int b = 0; b < count; ++b) {
      ArtifactEvent ev;
      ev.trial = trial;
      ev.duration = tau;
      ev.start = static_cast<std::size_t>(rng.below(len - tau));
      ev.frequency = rng.uniform(config.min_frequency, config.max_frequency);
      ev.amplitude = config.amplitude;
      ev.channels = rng.choose(p, width);
      for (std::size_t j : ev.channels) ev.channel_sd.push_back(sd[static_cast<Eigen::Index>(j)]);
      man.events.push_back(std::move(ev));
    }
  }
  out.data = apply_artifacts(clean.data, man);
  return out;
}

SimulatedData inject_eyeblinks(const SimulatedData& clean, const BlinkConfig& config) {
  require_clean(clean);
  const double fs = clean.manifest.clean.sampling_rate;
  const auto longest = static_cast<std::size_t>(std::floor(config.max_duration_seconds * fs));
  Eigen::Index shortest = std::numeric_limits<Eigen::Index>::max();
  for (const auto& x : clean.data.series) shortest = std::min(shortest, x.rows());
  if (static_cast<Eigen::Index>(longest) >= shortest)
    fail(ErrorCode::BlinkTooLong, "blinks up to " + std::to_string(longest) +
                                      " samples do not fit the shortest trial");

  SimulatedData out{clean.data, clean.manifest};
  SimManifest& man = out.manifest;
  man.contamination = Contamination::EyeBlink;
  man.blink = config;
  Rng rng(derive_seed(config.seed, kBlinkTag));
  man.contaminated = pick_trials(man, config.rate, rng);

  const std::size_t p = static_cast<std::size_t>(clean.data.channels());
  const std::size_t frontal = std::clamp<std::size_t>(ceil_count(config.frontal_fraction, p), 1, p);
  const std::size_t width =
      std::clamp<std::size_t>(ceil_count(config.channel_fraction, frontal), 1, frontal);
  for (std::size_t trial : man.contaminated) {
    const std::size_t len = static_cast<std::size_t>(clean.data.series[trial].rows());
    const Eigen::VectorXd sd = channel_sd(clean.data.series[trial]);
    const auto count = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.max_events)));
    for (int b = 0; b < count; ++b) {
      ArtifactEvent ev;
      ev.trial = trial;
      ev.duration = static_cast<std::size_t>(
          std::floor(rng.uniform(config.min_duration_seconds, config.max_duration_seconds) * fs));
      if (ev.duration < 2) fail(ErrorCode::BlinkTooLong, "blink shorter than two samples");
      ev.start = static_cast<std::size_t>(rng.below(len - ev.duration));
      ev.channels = rng.choose(frontal, width);
      ev.amplitude = rng.uniform(config.min_amplitude, config.max_amplitude);
      ev.polarity = rng.below(2) == 0 ? -1 : 1;
      for (std::size_t j : ev.channels) ev.channel_sd.push_back(sd[static_cast<Eigen::Index>(j)]);
      man.events.push_back(std::move(ev));
    }
  }
  out.data = apply_artifacts(clean.data, man);
  return out;
}

}  // namespace rfcpca
