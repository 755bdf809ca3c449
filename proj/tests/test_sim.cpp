#include "nqsv/sim.hpp"

#include "nqsv/spectral.hpp"
#include "nqsv/states.hpp"

#include <doctest.h>

#include <cmath>

using namespace nqsv;

namespace {

const std::vector<std::string> kFiveQubit = {"XZZXI", "IXZZX", "XIXZZ", "ZXIXZ", "ZZZZZ"};

Strategy five_qubit_strategy() { return stabilizer_strategy(StabilizerGroup::from_strings(kFiveQubit)); }

StateVector five_qubit_state() { return stabilizer_state(StabilizerGroup::from_strings(kFiveQubit)); }

NoisyStrategy with_factor(const Strategy& s, double g) {
  return noisy_strategy(s, QubitNoiseParams::uniform(s.num_qubits(), 0.5 * (1.0 - g)));
}

// Uniform factor g giving the requested lambda0 for the five-qubit code.
double factor_for_lambda0(double lambda0) {
  const Strategy s = five_qubit_strategy();
  const StateVector psi = five_qubit_state();
  double lo = 0.5, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (analyze(with_factor(s, mid).op(), psi).lambda0 < lambda0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double binomial_se(double p, double m) { return std::sqrt(p * (1.0 - p) / m); }

}  // namespace

TEST_CASE("generator streams") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  Rng a = trial_rng(7, 3);
  Rng b = trial_rng(7, 3);
  Rng c = trial_rng(7, 4);
  const auto first = a();
  CHECK(first == b());
  CHECK(first != c());
  Rng r = trial_rng(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(r);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("sample_pass") {
  const DensityMatrix rho = DensityMatrix::pure(ghz(2));
  Rng rng = trial_rng(11, 0);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(sample_pass(rho, identity(4), rng));
    REQUIRE_FALSE(sample_pass(rho, ComplexMatrix::Zero(4, 4), rng));
  }
  const ComplexMatrix half = StateVector::basis(4, 0).projector();
  const int draws = 100000;
  int passes = 0;
  for (int i = 0; i < draws; ++i) passes += sample_pass(rho, half, rng) ? 1 : 0;
  CHECK(std::abs(passes / double(draws) - 0.5) <= 3 * binomial_se(0.5, draws));
  CHECK_THROWS_AS((void)sample_pass(rho, 2.0 * identity(4), rng), std::domain_error);
}

TEST_CASE("pass sampler caches Born probabilities") {
  const NoisyStrategy ns = with_factor(ghz_strategy(3), 0.9);
  const DensityMatrix rho = DensityMatrix::mix(0.7, DensityMatrix::pure(ghz(3)), DensityMatrix::maximally_mixed(8));
  const PassSampler s(ns, rho);
  CHECK(s.pass_probability() == doctest::Approx(rho.expectation(ns.op())).epsilon(1e-12));
  REQUIRE(s.test_pass_probabilities().size() == ns.tests().size());
  for (std::size_t i = 0; i < ns.tests().size(); ++i) {
    CHECK(s.test_pass_probabilities()[i] == doctest::Approx(rho.expectation(ns.tests()[i].effect)));
  }
}

TEST_CASE("protocol on the noiseless target always accepts") {
  const NoisyStrategy ns = noiseless_strategy(ghz_strategy(4));
  const PassSampler s(ns, DensityMatrix::pure(ghz(4)));
  Rng rng = trial_rng(5, 0);
  const ProtocolResult r = run_protocol(s, 5000, 0.99, rng);
  CHECK(r.passes == 5000);
  CHECK(r.f == 1.0);
  CHECK(r.decision == Hypothesis::H0);
}

TEST_CASE("mean pass frequency under both hypotheses") {
  const double g = factor_for_lambda0(0.9271);
  const NoisyStrategy ns = with_factor(five_qubit_strategy(), g);
  const StateVector psi = five_qubit_state();
  const SpectralReport rep = analyze(ns.op(), psi);
  REQUIRE(rep.distinguishable);
  CHECK(rep.lambda0 == doctest::Approx(0.9271).epsilon(1e-9));
  const BadState bad = bad_state(ns.op(), psi, 0.01);
  CHECK_FALSE(bad.from_witness);
  CHECK(bad.pass_probability == doctest::Approx(rep.lambda0 - rep.nu * 0.01).epsilon(1e-12));
  CHECK(fidelity(bad.rho, psi) == doctest::Approx(0.99).epsilon(1e-12));

  const std::uint64_t n = 20000, reps = 200;
  const Histogram h = histogram(ns, DensityMatrix::pure(psi), bad.rho, n, reps, 2024, 50);
  const double shots = static_cast<double>(n * reps);
  CHECK(std::abs(h.h0_mean - rep.lambda0) <= 3 * binomial_se(rep.lambda0, shots));
  CHECK(std::abs(h.h1_mean - bad.pass_probability) <= 3 * binomial_se(bad.pass_probability, shots));
}

TEST_CASE("empirical error rates match binomial tails") {
  const NoisyStrategy ns = with_factor(five_qubit_strategy(), factor_for_lambda0(0.9271));
  const StateVector psi = five_qubit_state();
  const BadState bad = bad_state(ns.op(), psi, 0.01);
  const double h0 = PassSampler(ns, DensityMatrix::pure(psi)).pass_probability();
  const double h1 = bad.pass_probability;
  const std::uint64_t n = 20000, reps = 1000;
  const double fp = 0.5 * (h0 + h1);
  const std::uint64_t accept = acceptance_count(fp, n);
  const Histogram h = histogram(ns, DensityMatrix::pure(psi), bad.rho, n, reps, 99);

  double type1 = 0, type2 = 0;
  for (double f : h.h0_f) type1 += std::llround(f * n) < static_cast<long long>(accept) ? 1 : 0;
  for (double f : h.h1_f) type2 += std::llround(f * n) >= static_cast<long long>(accept) ? 1 : 0;
  type1 /= reps;
  type2 /= reps;
  const double t1 = binom_cdf_left(static_cast<double>(accept) - 1.0, n, h0);
  const double t2 = binom_cdf_right(static_cast<double>(accept), n, h1);
  CHECK(std::abs(type1 - t1) <= 3 * binomial_se(t1, reps));
  CHECK(std::abs(type2 - t2) <= 3 * binomial_se(t2, reps));
}

TEST_CASE("simulate_confidence") {
  const NoisyStrategy ns = with_factor(five_qubit_strategy(), 0.97);
  ConfidenceSetup setup{ns, five_qubit_state(), 0.02, 4000, 400, 31337};

  SUBCASE("thread count does not change results") {
    setup.threads = 1;
    const ExperimentSummary a = simulate_confidence(setup);
    setup.threads = 4;
    const ExperimentSummary b = simulate_confidence(setup);
    CHECK(a.pass_counts == b.pass_counts);
    CHECK(a.decisions == b.decisions);
    CHECK(a.truths == b.truths);
    CHECK(a.empirical_confidence == b.empirical_confidence);
  }
  SUBCASE("summary bookkeeping") {
    const ExperimentSummary s = simulate_confidence(setup);
    CHECK(s.h0_trials + s.h1_trials == s.repetitions);
    CHECK(s.h0_trials > 150);
    CHECK(s.h1_trials > 150);
    for (auto c : s.pass_counts) REQUIRE(c <= s.n);
    CHECK(s.empirical_type1 >= 0.0);
    CHECK(s.empirical_type2 <= 1.0);
    CHECK(s.f_prime == doctest::Approx(0.5 * (s.h0 + s.h1)));
    CHECK(s.theoretical_p_sym == doctest::Approx(0.5 * (s.theoretical_type1 + s.theoretical_type2)));
    const double err = 1.0 - s.empirical_confidence;
    CHECK(std::abs(err - s.theoretical_p_ave) <= 3 * binomial_se(std::max(s.theoretical_p_ave, 1e-3), 400) + 0.01);
  }
  SUBCASE("guards") {
    setup.n = 2'000'000;
    setup.repetitions = 1000;
    CHECK_THROWS_AS((void)simulate_confidence(setup), std::invalid_argument);
  }
}

TEST_CASE("noiseless baseline reaches the requested confidence") {
  const Strategy s = five_qubit_strategy();
  const StateVector psi = five_qubit_state();
  const SpectralReport rep = analyze(s.op(), psi);
  const double eps = 0.01, delta = 0.05;
  const std::uint64_t n = noiseless_sample_complexity(rep.nu, eps, delta);
  ConfidenceSetup setup{noiseless_strategy(s), psi, eps, n, 2000, 8, 0.5, 1.0};
  const ExperimentSummary sum = simulate_confidence(setup);
  CHECK(sum.empirical_type1 == 0.0);
  CHECK(sum.empirical_confidence >= 1.0 - delta - 3 * binomial_se(delta, 2000));
}

TEST_CASE("non-distinguishable strategies use the witness") {
  const int n = 3;
  const NoisyStrategy ns = noisy_strategy(w_strategy(n), random_noise(n, 0.0, 0.3, 12345));
  const BadState bad = bad_state(ns.op(), w_state(n), 0.2);
  CHECK(bad.from_witness);
  CHECK(fidelity(bad.rho, w_state(n)) <= 0.8 + 1e-8);
  CHECK(bad.pass_probability < w_state(n).expectation(ns.op()));
  CHECK_THROWS_AS((void)bad_state(ns.op(), w_state(n), 0.01), std::domain_error);
}

TEST_CASE("histograms") {
  const NoisyStrategy ns = with_factor(ghz_strategy(3), 0.9);
  const DensityMatrix rho = DensityMatrix::pure(ghz(3));
  SUBCASE("single shot gives two bins") {
    const Histogram h = histogram(ns, rho, rho, 1, 100, 4);
    CHECK(h.bin_width == 1);
    CHECK(h.h0_counts.size() == 2);
    CHECK(h.h0_counts[0] + h.h0_counts[1] == 100);
  }
  SUBCASE("bin width") {
    const Histogram h = histogram(ns, rho, rho, 1000, 10, 4, 100);
    CHECK(h.bin_width == 11);
    CHECK(h.h0_counts.size() == 91);
    CHECK(h.bin_lower[1] == doctest::Approx(0.011));
  }
  SUBCASE("identical states give matching ensembles") {
    const std::uint64_t n = 2000, reps = 500;
    const Histogram h = histogram(ns, rho, rho, n, reps, 4);
    const double p = rho.expectation(ns.op());
    CHECK(std::abs(h.h0_mean - h.h1_mean) <= 3 * std::sqrt(2.0) * binomial_se(p, double(n * reps)));
    CHECK(h.h0_f != h.h1_f);
  }
}

TEST_CASE("sample complexity curves") {
  const std::vector<double> deltas = {0.01, 0.05, 0.1, 0.2};
  std::vector<double> eps;
  for (int i = 0; i <= 8; ++i) eps.push_back(3e-3 * std::pow(10.0, i / 8.0));
  const CurveTable t = n_vs_epsilon_curve(0.9271, 0.4341, deltas, eps);
  REQUIRE(t.series.size() == 4);
  for (const CurveSeries& s : t.series) {
    CHECK(s.slope >= -2.2);
    CHECK(s.slope <= -1.8);
  }
  for (std::size_t i = 0; i < eps.size(); ++i) {
    for (std::size_t d = 1; d < deltas.size(); ++d) CHECK(t.series[d].n[i] <= t.series[d - 1].n[i]);
  }
  // One-sided regime: counts are small and jumpy, so fit over three decades.
  std::vector<double> wide;
  for (int i = 0; i <= 12; ++i) wide.push_back(1e-4 * std::pow(10.0, i / 4.0));
  const CurveTable ideal = n_vs_epsilon_curve(1.0, 1.0, deltas, wide);
  for (const CurveSeries& s : ideal.series) {
    CHECK(s.slope >= -1.15);
    CHECK(s.slope <= -0.85);
  }
  CHECK(log_log_slope(std::vector<double>{1, 2, 4}, std::vector<double>{1, 0.25, 0.0625}) ==
        doctest::Approx(-2.0));
}

TEST_CASE("noise sweep") {
  NoiseSweepSetup setup{five_qubit_strategy(), five_qubit_state(), {1.0, 0.98, 0.96}, 0.02, 3000, 300, 77};
  const auto pts = noise_sweep(setup);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].lambda0 == doctest::Approx(1.0));
  CHECK(pts[1].lambda0 < pts[0].lambda0);
  CHECK(pts[2].lambda0 < pts[1].lambda0);
  CHECK(pts[2].summary.theoretical_p_sym > pts[0].summary.theoretical_p_sym);
  CHECK(pts[1].eta == doctest::Approx(0.01));
}
