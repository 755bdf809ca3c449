#include "nqsv/sim.hpp"

#include "nqsv/spectral.hpp"
#include "nqsv/states.hpp"
#include "nqsv/worstcase.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace nqsv {

namespace {

// Runs fn(i) for i in [0, count) over contiguous chunks.
template <class Fn>
void parallel_for(std::uint64_t count, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(count, 1)));
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::uint64_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t lo = t * chunk;
    const std::uint64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::uint64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

void check_budget(std::uint64_t n, std::uint64_t repetitions) {
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  if (repetitions == 0) throw std::invalid_argument("repetitions must be positive");
  if (n > kMaxShots / repetitions) {
    throw std::invalid_argument(
        fmt::format("N * repetitions = {} * {} exceeds {}", n, repetitions, kMaxShots));
  }
}

double born_probability(const DensityMatrix& rho, const ComplexMatrix& effect) {
  const double p = rho.expectation(effect);
  if (p < -1e-10 || p > 1.0 + 1e-10) {
    throw std::domain_error(fmt::format("pass probability {:.3e} outside [0,1]", p));
  }
  return std::clamp(p, 0.0, 1.0);
}

double mean_f(std::span<const double> f) {
  if (f.empty()) return 0.0;
  double s = 0.0;
  for (double x : f) s += x;
  return s / static_cast<double>(f.size());
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng trial_rng(std::uint64_t seed, std::uint64_t stream) noexcept {
  return Rng(splitmix64(splitmix64(seed) ^ stream));
}

double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool sample_pass(const DensityMatrix& rho, const ComplexMatrix& effect, Rng& rng) {
  if (effect.rows() != rho.dim() || effect.cols() != rho.dim()) {
    throw std::invalid_argument("effect and state dimensions differ");
  }
  return uniform01(rng) < born_probability(rho, effect);
}

PassSampler::PassSampler(const NoisyStrategy& strategy, const DensityMatrix& rho) {
  const auto& tests = strategy.tests();
  if (tests.empty()) throw std::invalid_argument("strategy has no tests");
  double acc = 0.0;
  for (const NoisyTest& t : tests) {
    if (t.effect.rows() != rho.dim()) throw std::invalid_argument("effect and state dimensions differ");
    const double p = born_probability(rho, t.effect);
    probs_.push_back(p);
    acc += t.weight;
    cumulative_.push_back(acc);
    total_ += t.weight * p;
  }
  for (double& c : cumulative_) c /= acc;
  total_ /= acc;
}

bool PassSampler::draw(Rng& rng) const {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  const auto i = static_cast<std::size_t>(it - cumulative_.begin());
  return uniform01(rng) < probs_[i];
}

std::uint64_t PassSampler::count_passes(std::uint64_t n, Rng& rng) const {
  std::uint64_t passes = 0;
  for (std::uint64_t i = 0; i < n; ++i) passes += draw(rng) ? 1 : 0;
  return passes;
}

ProtocolResult run_protocol(const PassSampler& sampler, std::uint64_t n, double f_prime, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  ProtocolResult r;
  r.passes = sampler.count_passes(n, rng);
  r.f = static_cast<double>(r.passes) / static_cast<double>(n);
  r.decision = r.passes >= acceptance_count(f_prime, n) ? Hypothesis::H0 : Hypothesis::H1;
  return r;
}

BadState bad_state(const ComplexMatrix& omega, const StateVector& psi, double epsilon) {
  const SpectralReport rep = analyze(omega, psi);
  if (rep.distinguishable) {
    const EigenDecomposition e = hermitian_eig(omega);
    const StateVector perp = StateVector::normalized(e.vectors.col(1));
    const StateVector bad = worst_case_state(psi, perp, epsilon);
    return {DensityMatrix::pure(bad), bad.expectation(omega), false};
  }
  const WorstCaseResult w = worst_case_pass_probability(omega, psi, epsilon);
  if (!(rep.lambda_prime - w.p_eps > 1e-9)) {
    throw std::domain_error(fmt::format(
        "not verifiable at this infidelity: lambda' = {:.10g}, p(eps) = {:.10g}", rep.lambda_prime, w.p_eps));
  }
  return {w.witness, w.witness.expectation(omega), true};
}

std::vector<std::uint64_t> run_ensemble(const PassSampler& sampler, std::uint64_t n,
                                        std::uint64_t repetitions, std::uint64_t seed,
                                        std::uint64_t stream_offset, unsigned threads) {
  check_budget(n, repetitions);
  std::vector<std::uint64_t> counts(repetitions);
  parallel_for(repetitions, threads, [&](std::uint64_t t) {
    Rng rng = trial_rng(seed, stream_offset + t);
    counts[t] = sampler.count_passes(n, rng);
  });
  return counts;
}

ExperimentSummary simulate_confidence(const ConfidenceSetup& s) {
  check_budget(s.n, s.repetitions);
  if (!(s.q_prior >= 0.0 && s.q_prior <= 1.0)) throw std::invalid_argument("prior outside [0,1]");
  if (!(s.epsilon > 0.0 && s.epsilon < 1.0)) throw std::invalid_argument("epsilon outside (0,1)");
  const ComplexMatrix& omega = s.strategy.op();
  const BadState bad = bad_state(omega, s.target, s.epsilon);
  const PassSampler good(s.strategy, DensityMatrix::pure(s.target));
  const PassSampler worse(s.strategy, bad.rho);

  ExperimentSummary out;
  out.seed = s.seed;
  out.n = s.n;
  out.repetitions = s.repetitions;
  out.q_prior = s.q_prior;
  out.h0 = good.pass_probability();
  out.h1 = worse.pass_probability();
  out.bad_state_from_witness = bad.from_witness;
  out.f_prime = s.f_prime.value_or(0.5 * (out.h0 + out.h1));
  out.pass_counts.resize(s.repetitions);
  out.truths.resize(s.repetitions);
  out.decisions.resize(s.repetitions);

  parallel_for(s.repetitions, s.threads, [&](std::uint64_t t) {
    Rng rng = trial_rng(s.seed, t);
    const Hypothesis truth = uniform01(rng) < s.q_prior ? Hypothesis::H0 : Hypothesis::H1;
    const ProtocolResult r = run_protocol(truth == Hypothesis::H0 ? good : worse, s.n, out.f_prime, rng);
    out.pass_counts[t] = r.passes;
    out.truths[t] = truth;
    out.decisions[t] = r.decision;
  });

  std::uint64_t rejected = 0, accepted_bad = 0;
  for (std::uint64_t t = 0; t < s.repetitions; ++t) {
    if (out.truths[t] == Hypothesis::H0) {
      ++out.h0_trials;
      if (out.decisions[t] == Hypothesis::H1) ++rejected;
    } else {
      ++out.h1_trials;
      if (out.decisions[t] == Hypothesis::H0) ++accepted_bad;
    }
  }
  out.empirical_type1 = out.h0_trials ? static_cast<double>(rejected) / static_cast<double>(out.h0_trials) : 0.0;
  out.empirical_type2 =
      out.h1_trials ? static_cast<double>(accepted_bad) / static_cast<double>(out.h1_trials) : 0.0;
  out.empirical_confidence =
      1.0 - static_cast<double>(rejected + accepted_bad) / static_cast<double>(s.repetitions);

  const ErrorRates er = error_rates(out.f_prime, s.n, Hypotheses{out.h0, out.h1});
  out.theoretical_type1 = er.type1;
  out.theoretical_type2 = er.type2;
  out.theoretical_p_sym = er.sym();
  out.theoretical_p_ave = er.ave(s.q_prior);
  return out;
}

Histogram histogram(const NoisyStrategy& strategy, const DensityMatrix& h0_state,
                    const DensityMatrix& h1_state, std::uint64_t n, std::uint64_t repetitions,
                    std::uint64_t seed, std::size_t max_bins, unsigned threads) {
  check_budget(n, repetitions);
  if (max_bins == 0) throw std::invalid_argument("max_bins must be positive");
  const PassSampler s0(strategy, h0_state);
  const PassSampler s1(strategy, h1_state);
  const auto c0 = run_ensemble(s0, n, repetitions, seed, 0, threads);
  const auto c1 = run_ensemble(s1, n, repetitions, seed, repetitions, threads);

  Histogram h;
  h.n = n;
  h.bin_width = (n + 1 + max_bins - 1) / max_bins;
  const std::uint64_t bins = (n + 1 + h.bin_width - 1) / h.bin_width;
  h.h0_counts.assign(bins, 0);
  h.h1_counts.assign(bins, 0);
  for (std::uint64_t b = 0; b < bins; ++b) {
    h.bin_lower.push_back(static_cast<double>(b * h.bin_width) / static_cast<double>(n));
  }
  const double dn = static_cast<double>(n);
  for (std::uint64_t c : c0) {
    ++h.h0_counts[c / h.bin_width];
    h.h0_f.push_back(static_cast<double>(c) / dn);
  }
  for (std::uint64_t c : c1) {
    ++h.h1_counts[c / h.bin_width];
    h.h1_f.push_back(static_cast<double>(c) / dn);
  }
  h.h0_mean = mean_f(h.h0_f);
  h.h1_mean = mean_f(h.h1_f);
  return h;
}

Histogram histogram(const ConfidenceSetup& s, std::size_t max_bins) {
  const BadState bad = bad_state(s.strategy.op(), s.target, s.epsilon);
  return histogram(s.strategy, DensityMatrix::pure(s.target), bad.rho, s.n, s.repetitions, s.seed, max_bins,
                   s.threads);
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("log-log slope needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(x.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

CurveTable n_vs_epsilon_curve(double lambda0, double nu, std::span<const double> deltas,
                              std::span<const double> epsilons) {
  CurveTable t{lambda0, nu, {epsilons.begin(), epsilons.end()}, {}};
  for (double delta : deltas) {
    CurveSeries s;
    s.delta = delta;
    std::vector<double> xs, ys;
    for (double eps : epsilons) {
      const SampleComplexity sc = sample_complexity(lambda0, nu, eps, delta);
      s.n.push_back(sc.n);
      s.feasible.push_back(sc.feasible);
      s.chernoff.push_back(chernoff_sample_complexity(lambda0, nu, eps, delta));
      if (sc.feasible) {
        xs.push_back(eps);
        ys.push_back(static_cast<double>(sc.n));
      }
    }
    s.slope = xs.size() >= 2 ? log_log_slope(xs, ys) : std::nan("");
    t.series.push_back(std::move(s));
  }
  return t;
}

std::vector<SweepPoint> noise_sweep(const NoiseSweepSetup& s) {
  const int nq = s.strategy.num_qubits();
  std::vector<SweepPoint> out;
  for (double g : s.g_values) {
    if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument(fmt::format("noise factor {} outside (0,1]", g));
    SweepPoint pt;
    pt.g = g;
    pt.eta = 0.5 * (1.0 - g);
    NoisyStrategy ns = noisy_strategy(s.strategy, QubitNoiseParams::uniform(nq, pt.eta));
    const SpectralReport rep = analyze(ns.op(), s.target);
    pt.lambda0 = rep.lambda0;
    pt.nu = rep.nu;
    ConfidenceSetup cs{std::move(ns), s.target, s.epsilon, s.n, s.repetitions, s.seed, s.q_prior, std::nullopt,
                       s.threads};
    pt.summary = simulate_confidence(cs);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace nqsv
