#pragma once

// Seeded Monte Carlo runs of the verification protocol.
//
// Every trial draws from its own generator derived from (seed, stream), so
// results do not depend on the number of worker threads.

#include "nqsv/hypothesis.hpp"
#include "nqsv/noise.hpp"
#include "nqsv/opcore.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace nqsv {

using Rng = std::mt19937_64;

/// Upper bound on N * repetitions for a single experiment.
inline constexpr std::uint64_t kMaxShots = 1'000'000'000;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Independent generator for one trial.
Rng trial_rng(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Uniform double in [0, 1) from the top 53 bits.
double uniform01(Rng& rng) noexcept;

/// Bernoulli draw with probability Tr(effect rho), clamped to [0, 1]. Throws if
/// the probability is outside [-1e-10, 1 + 1e-10].
bool sample_pass(const DensityMatrix& rho, const ComplexMatrix& effect, Rng& rng);

/// Per-test pass probabilities of one state, computed once.
class PassSampler {
 public:
  PassSampler(const NoisyStrategy& strategy, const DensityMatrix& rho);

  const std::vector<double>& test_pass_probabilities() const noexcept { return probs_; }
  /// sum_i w_i Tr(E_i rho).
  double pass_probability() const noexcept { return total_; }

  /// Pick a test by weight, then sample its outcome.
  bool draw(Rng& rng) const;
  std::uint64_t count_passes(std::uint64_t n, Rng& rng) const;

 private:
  std::vector<double> cumulative_;
  std::vector<double> probs_;
  double total_ = 0.0;
};

enum class Hypothesis { H0, H1 };

struct ProtocolResult {
  std::uint64_t passes = 0;
  double f = 0.0;
  Hypothesis decision = Hypothesis::H1;  // H0 iff passes >= ceil(f' N)
};

ProtocolResult run_protocol(const PassSampler& sampler, std::uint64_t n, double f_prime, Rng& rng);

/// State used for the bad-state hypothesis.
struct BadState {
  DensityMatrix rho;
  double pass_probability;
  bool from_witness;  // false: sqrt(1-eps)|psi> + sqrt(eps)|psi_1>
};

/// Distinguishable strategies use the second eigenvector; otherwise the worst-case
/// witness. Throws std::domain_error when lambda' <= p(eps).
BadState bad_state(const ComplexMatrix& omega, const StateVector& psi, double epsilon);

struct ConfidenceSetup {
  NoisyStrategy strategy;
  StateVector target;
  double epsilon;
  std::uint64_t n;
  std::uint64_t repetitions;
  std::uint64_t seed;
  double q_prior = 0.5;
  std::optional<double> f_prime;  // midpoint of the two pass probabilities if empty
  unsigned threads = 0;           // 0: hardware concurrency
};

struct ExperimentSummary {
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  std::uint64_t repetitions = 0;
  double q_prior = 0.5;
  double f_prime = 0.0;
  double h0 = 0.0;
  double h1 = 0.0;
  bool bad_state_from_witness = false;
  std::vector<std::uint64_t> pass_counts;
  std::vector<Hypothesis> truths;
  std::vector<Hypothesis> decisions;
  std::uint64_t h0_trials = 0;
  std::uint64_t h1_trials = 0;
  double empirical_type1 = 0.0;  // H0 trials rejected / H0 trials
  double empirical_type2 = 0.0;  // H1 trials accepted / H1 trials
  double empirical_confidence = 0.0;
  double theoretical_type1 = 0.0;
  double theoretical_type2 = 0.0;
  double theoretical_p_sym = 0.0;
  double theoretical_p_ave = 0.0;
};

ExperimentSummary simulate_confidence(const ConfidenceSetup& setup);

/// Pass counts of `repetitions` independent runs on streams offset, offset+1, ...
std::vector<std::uint64_t> run_ensemble(const PassSampler& sampler, std::uint64_t n,
                                        std::uint64_t repetitions, std::uint64_t seed,
                                        std::uint64_t stream_offset = 0, unsigned threads = 0);

struct Histogram {
  std::uint64_t n = 0;
  std::uint64_t bin_width = 1;       // in pass counts
  std::vector<double> bin_lower;     // lower edge as a frequency
  std::vector<std::uint64_t> h0_counts;
  std::vector<std::uint64_t> h1_counts;
  std::vector<double> h0_f;
  std::vector<double> h1_f;
  double h0_mean = 0.0;
  double h1_mean = 0.0;
};

/// Bins pass counts 0..N into ceil((N + 1) / max_bins)-wide bins.
Histogram histogram(const NoisyStrategy& strategy, const DensityMatrix& h0_state,
                    const DensityMatrix& h1_state, std::uint64_t n, std::uint64_t repetitions,
                    std::uint64_t seed, std::size_t max_bins = 100, unsigned threads = 0);

/// Target against the bad state of bad_state().
Histogram histogram(const ConfidenceSetup& setup, std::size_t max_bins = 100);

struct CurveSeries {
  double delta = 0.0;
  std::vector<std::uint64_t> n;
  std::vector<std::uint64_t> chernoff;
  std::vector<bool> feasible;
  double slope = 0.0;  // least-squares fit of ln N against ln eps
};

struct CurveTable {
  double lambda0 = 0.0;
  double nu = 0.0;
  std::vector<double> epsilons;
  std::vector<CurveSeries> series;
};

CurveTable n_vs_epsilon_curve(double lambda0, double nu, std::span<const double> deltas,
                              std::span<const double> epsilons);

/// Least-squares slope of ln y against ln x.
double log_log_slope(std::span<const double> x, std::span<const double> y);

struct SweepPoint {
  double g = 0.0;
  double eta = 0.0;
  double lambda0 = 0.0;
  double nu = 0.0;
  ExperimentSummary summary;
};

/// Uniform noise factor g = 1 - 2 eta on every qubit and basis.
struct NoiseSweepSetup {
  Strategy strategy;
  StateVector target;
  std::vector<double> g_values;
  double epsilon;
  std::uint64_t n;
  std::uint64_t repetitions;
  std::uint64_t seed;
  double q_prior = 0.5;
  unsigned threads = 0;
};

std::vector<SweepPoint> noise_sweep(const NoiseSweepSetup& setup);

}  // namespace nqsv
