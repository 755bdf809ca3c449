// Acceptance checks: one PASS/FAIL line per criterion.

#include "nqsv/config.hpp"
#include "nqsv/hypothesis.hpp"
#include "nqsv/noise.hpp"
#include "nqsv/sim.hpp"
#include "nqsv/spectral.hpp"
#include "nqsv/states.hpp"
#include "nqsv/worstcase.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <unistd.h>

using namespace nqsv;
namespace fs = std::filesystem;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

const std::vector<std::string> kFiveQubit = {"XZZXI", "IXZZX", "XIXZZ", "ZXIXZ", "ZZZZZ"};

ComplexVector gaussian_vector(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

ComplexMatrix random_operator(Eigen::Index d, std::mt19937_64& rng) {
  ComplexMatrix a(d, d);
  for (Eigen::Index j = 0; j < d; ++j) a.col(j) = gaussian_vector(d, rng);
  const ComplexMatrix u = Eigen::HouseholderQR<ComplexMatrix>(a).householderQ();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RealVector diag(d);
  for (Eigen::Index i = 0; i < d; ++i) diag(i) = unit(rng);
  const ComplexMatrix m = u * diag.cast<Complex>().asDiagonal() * u.adjoint();
  return 0.5 * (m + m.adjoint());
}

QubitNoiseParams random_symmetric(int n, std::mt19937_64& rng, double hi) {
  std::uniform_real_distribution<double> u(0.0, hi);
  std::vector<std::array<double, 3>> rows(static_cast<std::size_t>(n));
  for (auto& r : rows) r = {u(rng), u(rng), u(rng)};
  return QubitNoiseParams::per_qubit(rows);
}

StabilizerGroup group_for(int n) {
  if (n == 2) return StabilizerGroup::from_strings(std::vector<std::string>{"XX", "ZZ"});
  if (n == 4) return StabilizerGroup::from_strings(std::vector<std::string>{"XZII", "ZXZI", "IZXZ", "IIZX"});
  if (n == 5) return StabilizerGroup::from_strings(kFiveQubit);
  return StabilizerGroup::ghz_group(n);
}

// Bloch-ball maximum of Tr(rho omega) subject to <psi|rho|psi> <= 1 - eps.
double qubit_oracle(const ComplexMatrix& omega, const StateVector& psi, double eps) {
  const ComplexMatrix paulis[3] = {pauli_to_matrix(PauliString::parse("X")), pauli_to_matrix(PauliString::parse("Y")),
                                   pauli_to_matrix(PauliString::parse("Z"))};
  auto bloch = [&](const ComplexMatrix& m) {
    return Eigen::Vector3d((m * paulis[0]).trace().real(), (m * paulis[1]).trace().real(),
                           (m * paulis[2]).trace().real());
  };
  const double c0 = 0.5 * omega.trace().real();
  const Eigen::Vector3d c = 0.5 * bloch(omega);
  const Eigen::Vector3d n = bloch(psi.projector());
  const double s = 1.0 - 2.0 * eps;
  if (c.norm() < 1e-15 || n.dot(c.normalized()) <= s) return c0 + c.norm();
  Eigen::Vector3d e1 = c - n * n.dot(c);
  if (e1.norm() < 1e-12) e1 = n.unitOrthogonal();
  e1.normalize();
  const Eigen::Vector3d e2 = n.cross(e1);
  const double rad = std::sqrt(std::max(0.0, 1.0 - s * s));
  double best = -1e300;
  for (int k = 0; k < 200000; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / 200000;
    best = std::max(best, c0 + c.dot(s * n + rad * (std::cos(phi) * e1 + std::sin(phi) * e2)));
  }
  return best;
}

NoisyStrategy with_factor(const Strategy& s, double g) {
  return noisy_strategy(s, QubitNoiseParams::uniform(s.num_qubits(), 0.5 * (1.0 - g)));
}

double se(double p, double m) { return std::sqrt(std::max(p * (1.0 - p), 1e-12) / m); }

// ---------------------------------------------------------------------------

Outcome criterion1() {
  double worst = 0.0, gap_err = 0.0;
  for (int n = 3; n <= 5; ++n) {
    const ComplexMatrix op = ghz_strategy(n).op();
    const ComplexMatrix closed = (identity(op.rows()) + 2.0 * ghz(n).projector()) / 3.0;
    worst = std::max(worst, (op - closed).cwiseAbs().maxCoeff());
    gap_err = std::max(gap_err, std::abs(analyze(op, ghz(n)).nu - 2.0 / 3.0));
  }
  return {worst <= 1e-10 && gap_err <= 1e-10,
          fmt::format("max entry error {:.2e}, gap error {:.2e}", worst, gap_err)};
}

Outcome criterion2() {
  const StabilizerGroup g = StabilizerGroup::from_strings(kFiveQubit);
  const StateVector psi = stabilizer_state(g);
  double worst = (stabilizer_strategy(g).op() * psi.amplitudes() - psi.amplitudes()).norm();
  for (int n = 3; n <= 5; ++n) {
    const StateVector w = w_state(n);
    worst = std::max(worst, (w_strategy(n).op() * w.amplitudes() - w.amplitudes()).norm());
  }
  return {worst <= 1e-10, fmt::format("max residual {:.2e}", worst)};
}

Outcome criterion3() {
  std::mt19937_64 rng(4242);
  double worst_stab = 0.0, worst_ghz = 0.0;
  int draws = 0;
  for (int n = 2; n <= 5; ++n) {
    const StabilizerGroup g = group_for(n);
    const Strategy s = stabilizer_strategy(g);
    for (int d = 0; d < 100; ++d, ++draws) {
      const QubitNoiseParams params = random_symmetric(n, rng, 0.45);
      std::vector<double> p = stabilizer_analytic_spectrum(n, stabilizer_noise_factors(g, params)).p;
      std::sort(p.begin(), p.end(), std::greater<>());
      const RealVector numeric = hermitian_eig(noisy_strategy(s, params).op()).values;
      for (std::size_t i = 0; i < p.size(); ++i) {
        worst_stab = std::max(worst_stab, std::abs(p[i] - numeric(static_cast<Eigen::Index>(i))));
      }
    }
  }
  for (int n = 3; n <= 5; ++n) {
    for (int d = 0; d < 100; ++d, ++draws) {
      const QubitNoiseParams params = random_symmetric(n, rng, 0.3);
      std::vector<double> eta_z;
      for (int q = 0; q < n; ++q) eta_z.push_back(params.channel(q, Basis::Z).eta);
      const GhzDominantEigenvalue e = ghz_dominant_eigenvalue(eta_z, ghz_subset_factors(n, params));
      const ComplexMatrix op = noisy_strategy(ghz_strategy(n), params).op();
      worst_ghz = std::max(worst_ghz, std::abs(max_eigenvalue(op) - e.value));
    }
  }
  return {worst_stab <= 1e-10 && worst_ghz <= 1e-10,
          fmt::format("{} draws; stabilizer spectra {:.2e}, GHZ lambda0 {:.2e}", draws, worst_stab, worst_ghz)};
}

Outcome criterion4() {
  double lin = 0.0;
  for (int n = 3; n <= 5; ++n) {
    const ComplexMatrix om = with_factor(ghz_strategy(n), 0.9).op();
    const SpectralReport rep = analyze(om, ghz(n));
    if (!rep.distinguishable) return {false, "GHZ instance not distinguishable"};
    for (double eps : {1e-3, 1e-2, 1e-1}) {
      lin = std::max(lin, std::abs(worst_case_pass_probability(om, ghz(n), eps).p_eps - (rep.lambda0 - rep.nu * eps)));
    }
  }
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double gap = 0.0, infeas = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index d = i % 2 ? 4 : 8;
    const ComplexMatrix om = random_operator(d, rng);
    const StateVector psi = StateVector::normalized(gaussian_vector(d, rng));
    const double eps = unit(rng);
    const WorstCaseResult r = worst_case_pass_probability(om, psi, eps);
    gap = std::max(gap, std::abs(r.duality_gap));
    infeas = std::max(infeas, fidelity(r.witness, psi) - (1.0 - eps));
  }
  double oracle = 0.0;
  for (int i = 0; i < 20; ++i) {
    const ComplexMatrix om = random_operator(2, rng);
    const StateVector psi = StateVector::normalized(gaussian_vector(2, rng));
    for (double eps : {0.05, 0.3, 0.6, 0.9}) {
      oracle = std::max(oracle, std::abs(worst_case_pass_probability(om, psi, eps).p_eps - qubit_oracle(om, psi, eps)));
    }
  }
  return {lin <= 1e-8 && gap <= 1e-7 && infeas <= 1e-8 && oracle <= 1e-6,
          fmt::format("linear law {:.2e}, max gap {:.2e}, fidelity excess {:.2e}, qubit oracle {:.2e}", lin, gap,
                      infeas, oracle)};
}

Outcome criterion5() {
  const int n = 3;
  const ComplexMatrix om = noisy_strategy(w_strategy(n), random_noise(n, 0.0, 0.3, 12345)).op();
  const StateVector psi = w_state(n);
  const SpectralReport rep = analyze(om, psi);
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(i / 50.0);
  const auto curve = worst_case_curve(om, psi, grid);
  bool monotone = true;
  for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i].p_eps <= curve[i - 1].p_eps + 1e-8;
  const bool top = std::abs(curve.front().p_eps - rep.lambda0) <= 1e-10 && rep.lambda0 > rep.lambda_prime;
  const ThresholdResult t = infidelity_threshold(om, psi);
  const bool crossing = t.epsilon_th.has_value() && t.p_at_one < t.lambda_prime;
  const bool range = crossing && *t.epsilon_th > 0.0 && *t.epsilon_th < 0.3;
  return {monotone && top && crossing && range,
          fmt::format("seed 12345: lambda0 {:.6f} > lambda' {:.6f}, eps_th {:.6f} (reference value ~0.03 is "
                      "instance-dependent, order of magnitude only)",
                      rep.lambda0, rep.lambda_prime, t.epsilon_th.value_or(-1.0))};
}

Outcome criterion6() {
  const std::vector<double> deltas = {0.01, 0.05, 0.1, 0.2};
  std::vector<double> eps;
  for (int i = 0; i <= 10; ++i) eps.push_back(3e-3 * std::pow(10.0, i / 10.0));
  const CurveTable t = n_vs_epsilon_curve(0.9271, 0.4341, deltas, eps);
  bool slopes = true, factor = true;
  std::string detail;
  for (const CurveSeries& s : t.series) {
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double r = static_cast<double>(s.chernoff[i]) / static_cast<double>(s.n[i]);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    slopes = slopes && s.slope >= -2.2 && s.slope <= -1.8;
    const bool within = hi <= 4.0 && lo >= 0.25;
    factor = factor && within;
    detail += fmt::format("delta {}: slope {:.3f}, Chernoff/exact {:.2f}-{:.2f}{}; ", s.delta, s.slope, lo, hi,
                          within ? "" : " (outside factor 4)");
  }
  detail.resize(detail.size() - 2);
  return {slopes && factor, detail};
}

Outcome criterion7() {
  const Strategy strategy = stabilizer_strategy(StabilizerGroup::from_strings(kFiveQubit));
  const StateVector psi = stabilizer_state(StabilizerGroup::from_strings(kFiveQubit));
  const double g = 0.96;
  const NoisyStrategy ns = with_factor(strategy, g);
  const SpectralReport rep = analyze(ns.op(), psi);
  if (rep.lambda0 < 0.92 || rep.lambda0 > 0.94) return {false, fmt::format("lambda0 {} out of range", rep.lambda0)};

  const std::uint64_t n = 20000, reps = 1000;
  const ExperimentSummary s = simulate_confidence({ns, psi, 0.01, n, reps, 777});
  const double accept = static_cast<double>(acceptance_count(s.f_prime, n));
  const double t1 = binom_cdf_left(accept - 1.0, n, s.h0);
  const double t2 = binom_cdf_right(accept, n, s.h1);
  const double z1 = (s.empirical_type1 - t1) / se(t1, static_cast<double>(s.h0_trials));
  const double z2 = (s.empirical_type2 - t2) / se(t2, static_cast<double>(s.h1_trials));
  const bool rates = std::abs(z1) <= 3.0 && std::abs(z2) <= 3.0;

  const NoiseSweepSetup sweep{strategy, psi, {0.98, 0.97, 0.96, 0.95, 0.94}, 0.01, n, reps, 778};
  const auto pts = noise_sweep(sweep);
  bool monotone = true;
  std::string confs;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double c = pts[i].summary.empirical_confidence;
    confs += fmt::format("{}{:.3f}", i ? "," : "", c);
    if (i > 0) {
      const double prev = pts[i - 1].summary.empirical_confidence;
      const double noise = 3.0 * std::sqrt(2.0) * se(0.5 * (c + prev), static_cast<double>(reps));
      monotone = monotone && c <= prev + noise;
    }
  }
  return {rates && monotone,
          fmt::format("lambda0 {:.4f}; type I {:.4f} vs {:.4f} (z {:+.2f}), type II {:.4f} vs {:.4f} (z {:+.2f}); "
                      "confidence over g 0.98..0.94: {}",
                      rep.lambda0, s.empirical_type1, t1, z1, s.empirical_type2, t2, z2, confs)};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome criterion8() {
  const fs::path dir = fs::temp_directory_path() / fmt::format("nqsv_accept_{}", ::getpid());
  fs::create_directories(dir);
  const std::string cli = NQSV_CLI_PATH;
  const std::string cfg = NQSV_CONFIG_DIR;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"analyze", fmt::format("analyze -c {}/five_qubit_g096.json", cfg)},
      {"plan", fmt::format("plan -c {}/w3_threshold.json", cfg)},
      {"threshold", fmt::format("threshold -c {}/w3_threshold.json --csv", cfg)},
      {"simulate", fmt::format("simulate -c {}/w3_threshold.json --seed 5", cfg)},
      {"simulate_csv", fmt::format("simulate -c {}/w3_threshold.json --seed 5 --csv --threads 3", cfg)},
      {"histogram", fmt::format("histogram -c {}/five_qubit_g096.json --seed 11", cfg)},
      {"curve", "curve --lambda0 0.9271 --nu 0.4341 --json"},
  };
  int identical = 0;
  std::string bad;
  for (const auto& [name, args] : runs) {
    std::string outputs[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / fmt::format("{}_{}.out", name, k);
      const std::string cmd = fmt::format("\"{}\" {} --out \"{}\"", cli, args, out.string());
      if (std::system(cmd.c_str()) != 0) {
        bad += name + "(exit) ";
        break;
      }
      outputs[k] = slurp(out);
    }
    if (!outputs[0].empty() && outputs[0] == outputs[1]) {
      ++identical;
    } else {
      bad += name + " ";
    }
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(runs.size()),
          fmt::format("{}/{} invocations byte-identical{}", identical, runs.size(), bad.empty() ? "" : "; differ: " + bad)};
}

Outcome criterion9() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 10000; ++c) {
    const std::uint64_t n = 1 + rng() % 1000;
    const double p = unit(rng);
    const std::uint64_t k = rng() % (n + 1);
    const Big bp(p), bq = Big(1) - Big(p);
    Big term = boost::multiprecision::pow(bq, static_cast<int>(n));
    Big left = 0, total = 0;
    for (std::uint64_t i = 0; i <= n; ++i) {
      if (i > 0) term = term * Big(n - i + 1) / Big(i) * bp / bq;
      total += term;
      if (i <= k) left += term;
    }
    const double exact_left = static_cast<double>(left);
    const double exact_right = static_cast<double>(total - left);
    worst = std::max(worst, std::abs(binom_cdf_left(static_cast<double>(k), n, p) - exact_left));
    worst = std::max(worst, std::abs(binom_cdf_right(static_cast<double>(k + 1), n, p) - exact_right));
  }
  double comp = 0.0;
  for (int c = 0; c < 20000; ++c) {
    const std::uint64_t n = 1 + rng() % 1000000;
    const double p = unit(rng);
    const auto k = static_cast<double>(rng() % (n + 1));
    comp = std::max(comp, std::abs(binom_cdf_left(k, n, p) + binom_cdf_right(k + 1, n, p) - 1.0));
  }
  return {worst <= 1e-12 && comp <= 1e-12,
          fmt::format("10000 cases N<=1000: max error {:.2e}; complementarity {:.2e}", worst, comp)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"GHZ strategy closed form", criterion1},
      {"completeness", criterion2},
      {"analytic vs dense spectra", criterion3},
      {"worst-case solver oracles", criterion4},
      {"W-state threshold", criterion5},
      {"quadratic scaling", criterion6},
      {"Monte Carlo agreement", criterion7},
      {"CLI determinism", criterion8},
      {"binomial tails", criterion9},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("criterion {}: {} - {} ({}) [{:.2f} s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
               o.detail, secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
