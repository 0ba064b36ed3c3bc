#pragma once

#include "rfcpca/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rfcpca {

/// One latent oscillator: AR(2) with a spectral peak at `peak_hz`.
struct BandSpec {
  std::string name;
  double peak_hz = 10.0;
  double sharpness = 0.05;
};

/// delta, theta, alpha, beta, gamma at (2, 6, 10, 22.5, 37.5) Hz.
std::vector<BandSpec> default_bands();

struct Ar2Coefficients {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

/// phi1 = (2/M) cos(2 pi f / fs), phi2 = -1/M^2 with M = exp(kappa).
/// Throws InvalidBand unless 0 < f < fs/2 and kappa > 0.
Ar2Coefficients ar2_coefficients(double peak_hz, double sharpness, double sampling_rate);

/// Zero-phase band-pass applied to each latent: a 2nd-order Butterworth
/// high-pass and low-pass biquad pair (4th order overall) run forward and
/// backward. Edges are peak * (1 -/+ edge_factor), clamped to
/// (min_hz, nyquist_fraction * fs / 2).
struct FilterSpec {
  bool enabled = true;
  double edge_factor = 0.4;
  double min_hz = 0.5;
  double nyquist_fraction = 0.95;
};

std::pair<double, double> band_edges(const BandSpec& band, double sampling_rate,
                                     const FilterSpec& filter);

Eigen::VectorXd bandpass_zero_phase(const Eigen::VectorXd& x, double low_hz, double high_hz,
                                    double sampling_rate);

/// T x bands matrix of unit-variance latent oscillations.
Eigen::MatrixXd simulate_latents(Eigen::Index length, double sampling_rate,
                                 const std::vector<BandSpec>& bands, std::uint64_t seed,
                                 const FilterSpec& filter = {}, int burn_in = 200);

/// Band rows that dominate each group's channels.
std::vector<std::size_t> dominant_rows(int group);

/// bands x p nonnegative mixing matrix whose columns sum to one. Each column
/// puts `dominance` of its mass on the group's dominant rows and spreads the
/// rest evenly over the other rows. The dominant split is proportional to
/// E^split_exponent with E ~ Exp(1): exponent 1 is uniform on the simplex,
/// larger exponents concentrate each channel on fewer bands.
Eigen::MatrixXd mixing_matrix(int group, Eigen::Index channels, std::uint64_t seed,
                              double dominance = 0.85, double split_exponent = 3.0,
                              std::size_t bands = 5);

struct CleanConfig {
  std::size_t per_group = 10;
  Eigen::Index channels = 32;
  Eigen::Index length = 400;
  /// When set, each trial length is uniform on [first, second].
  std::optional<std::pair<Eigen::Index, Eigen::Index>> length_range;
  double sampling_rate = 100.0;
  std::uint64_t seed = 0;
  double dominance = 0.85;
  double split_exponent = 3.0;
  int burn_in = 200;
  FilterSpec filter;
  std::vector<BandSpec> bands = default_bands();
};

enum class Contamination { None, Burst, EyeBlink };
std::string_view contamination_name(Contamination c) noexcept;

struct BurstConfig {
  double rate = 0.20;
  double amplitude = 5.0;
  double duration_seconds = 0.25;
  double channel_fraction = 0.10;
  double min_frequency = 30.0;
  double max_frequency = 80.0;
  int max_events = 3;
  std::uint64_t seed = 0;
};

struct BlinkConfig {
  double rate = 0.40;
  double frontal_fraction = 0.25;  // frontal set = first ceil(fraction * p) channels
  double channel_fraction = 0.50;  // rho_chan
  double min_duration_seconds = 0.20;
  double max_duration_seconds = 0.40;
  double min_amplitude = 4.0;
  double max_amplitude = 8.0;
  int max_events = 2;
  std::uint64_t seed = 0;
};

/// One transient added to one trial. Burst events use `frequency`; blink
/// events use `polarity`. `channel_sd` is the clean trial's per-channel
/// standard deviation for the listed channels.
struct ArtifactEvent {
  std::size_t trial = 0;
  std::size_t start = 0;  // 0-based sample index
  std::size_t duration = 0;
  double frequency = 0.0;
  int polarity = 0;
  double amplitude = 0.0;
  std::vector<std::size_t> channels;
  std::vector<double> channel_sd;
};

struct SimManifest {
  int schema_version = 1;
  CleanConfig clean;
  std::vector<Eigen::Index> lengths;
  std::vector<int> labels;                // 1 or 2 per trial
  std::vector<Eigen::MatrixXd> mixing;    // per group
  std::vector<std::pair<double, double>> filter_edges;  // per band
  Contamination contamination = Contamination::None;
  std::optional<BurstConfig> burst;
  std::optional<BlinkConfig> blink;
  std::vector<std::size_t> contaminated;  // ascending, 0-based
  std::vector<ArtifactEvent> events;
  std::string dataset_hash;               // filled in when written to disk
};

struct SimulatedData {
  MtsDataset data;
  SimManifest manifest;
};

/// 2 * per_group trials, group 1 first; trial = latents * group mixing matrix.
SimulatedData generate_clean_dataset(const CleanConfig& config);

/// Contaminates ceil(rate * per_group) trials per group with Hann-windowed
/// tone bursts. Throws BurstTooLong if the burst does not fit a trial.
SimulatedData inject_bursts(const SimulatedData& clean, const BurstConfig& config);

/// Contaminates ceil(rate * per_group) trials per group with half-sine
/// deflections on frontal channels. Throws BlinkTooLong if a blink does not fit.
SimulatedData inject_eyeblinks(const SimulatedData& clean, const BlinkConfig& config);

/// Replays the manifest's events on a clean dataset. Injection itself goes
/// through this function, so replay reproduces the contaminated data exactly.
MtsDataset apply_artifacts(const MtsDataset& clean, const SimManifest& manifest);

/// Sample standard deviation (n - 1 denominator) of every column.
Eigen::VectorXd channel_sd(const Eigen::MatrixXd& x);

/// Hann window value h_q for a window of length tau.
double hann(std::size_t q, std::size_t tau) noexcept;
/// Half-sine value b_q for a window of length tau.
double half_sine(std::size_t q, std::size_t tau) noexcept;

}  // namespace rfcpca
