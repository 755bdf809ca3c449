#include "nqsv/noise.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace nqsv {

namespace {

void check_flip(double p, const char* name) {
  if (!(p >= 0.0 && p < 0.5)) {
    throw std::invalid_argument(fmt::format("{} = {} outside [0, 0.5)", name, p));
  }
}

int basis_index(Basis b) {
  if (b == Basis::Skip) throw std::invalid_argument("no readout channel for a skipped qubit");
  return static_cast<int>(b);
}

Basis letter_basis(Pauli p) {
  switch (p) {
    case Pauli::X: return Basis::X;
    case Pauli::Y: return Basis::Y;
    case Pauli::Z: return Basis::Z;
    case Pauli::I: break;
  }
  return Basis::Skip;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::pair<double, double> spectrum_bounds(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  const RealVector& v = es.eigenvalues();
  return {v.minCoeff(), v.maxCoeff()};
}

}  // namespace

double FlipChannel::prob(int reported, int actual) const noexcept {
  if (actual == 0) return reported == 0 ? 1.0 - eta : eta;
  return reported == 0 ? q : 1.0 - q;
}

QubitNoiseParams::QubitNoiseParams(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw std::invalid_argument(fmt::format("qubit count {} outside 1..{}", n, kMaxQubits));
  }
  channels_.assign(static_cast<std::size_t>(n), {});
}

QubitNoiseParams::QubitNoiseParams(int n, std::vector<std::array<FlipChannel, 3>> channels)
    : channels_(std::move(channels)) {
  if (static_cast<int>(channels_.size()) != n || n < 1 || n > kMaxQubits) {
    throw std::invalid_argument(
        fmt::format("expected {} qubit noise rows, got {}", n, channels_.size()));
  }
  for (const auto& row : channels_) {
    for (const FlipChannel& c : row) {
      check_flip(c.eta, "eta");
      check_flip(c.q, "q");
    }
  }
}

QubitNoiseParams QubitNoiseParams::uniform(int n, double eta) {
  std::array<FlipChannel, 3> row;
  row.fill(FlipChannel{eta, eta});
  return QubitNoiseParams(n, std::vector<std::array<FlipChannel, 3>>(static_cast<std::size_t>(n), row));
}

QubitNoiseParams QubitNoiseParams::per_qubit(std::span<const std::array<double, 3>> etas) {
  std::vector<std::array<FlipChannel, 3>> rows;
  rows.reserve(etas.size());
  for (const auto& e : etas) {
    rows.push_back({FlipChannel{e[0], e[0]}, FlipChannel{e[1], e[1]}, FlipChannel{e[2], e[2]}});
  }
  const int n = static_cast<int>(rows.size());
  return QubitNoiseParams(n, std::move(rows));
}

const FlipChannel& QubitNoiseParams::channel(int qubit, Basis b) const {
  return channels_.at(static_cast<std::size_t>(qubit))[static_cast<std::size_t>(basis_index(b))];
}

bool QubitNoiseParams::symmetric() const noexcept {
  for (const auto& row : channels_) {
    for (const FlipChannel& c : row) {
      if (!c.symmetric()) return false;
    }
  }
  return true;
}

double QubitNoiseParams::factor(int qubit, Basis b) const {
  const FlipChannel& c = channel(qubit, b);
  if (!c.symmetric()) {
    throw std::logic_error(fmt::format("qubit {} basis {} has eta != q", qubit, basis_char(b)));
  }
  return c.factor();
}

double QubitNoiseParams::pauli_factor(const PauliString& p) const {
  if (p.size() != num_qubits()) {
    throw std::invalid_argument(
        fmt::format("Pauli string on {} qubits, noise on {}", p.size(), num_qubits()));
  }
  double g = 1.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] != Pauli::I) g *= factor(i, letter_basis(p[i]));
  }
  return g;
}

QubitNoiseParams random_noise(int n, double lo, double hi, std::uint64_t seed) {
  if (!(lo >= 0.0 && lo <= hi && hi < 0.5)) {
    throw std::invalid_argument(fmt::format("noise range [{}, {}] must satisfy 0 <= lo <= hi < 0.5", lo, hi));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::array<FlipChannel, 3>> rows(static_cast<std::size_t>(n));
  for (auto& row : rows) {
    for (FlipChannel& c : row) {
      c.eta = lo + (hi - lo) * unit_uniform(rng);
      c.q = lo + (hi - lo) * unit_uniform(rng);
    }
  }
  return QubitNoiseParams(n, std::move(rows));
}

// ---------------------------------------------------------------------------

OutcomeNoise OutcomeNoise::two_outcome(double eta, double q) {
  check_flip(eta, "eta");
  check_flip(q, "q");
  OutcomeNoise out;
  out.lambda.resize(2, 2);
  out.lambda << 1.0 - eta, q, eta, 1.0 - q;
  return out;
}

void OutcomeNoise::validate(Eigen::Index dim) const {
  const Eigen::Index k = lambda.rows();
  if (k < 1 || lambda.cols() != k) {
    throw std::invalid_argument(fmt::format("lambda must be square, got {}x{}", lambda.rows(), lambda.cols()));
  }
  if (lambda.minCoeff() < 0.0) throw std::invalid_argument("lambda has a negative entry");
  for (Eigen::Index j = 0; j < k; ++j) {
    const double s = lambda.col(j).sum();
    if (std::abs(s - 1.0) > 1e-12) {
      throw std::invalid_argument(fmt::format("lambda column {} sums to {}, not 1", j, s));
    }
  }
  if (delta.empty()) return;
  if (static_cast<Eigen::Index>(delta.size()) != k) {
    throw std::invalid_argument(fmt::format("expected {} residual operators, got {}", k, delta.size()));
  }
  ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
  for (const ComplexMatrix& d : delta) {
    if (d.rows() != dim || d.cols() != dim) {
      throw std::invalid_argument(fmt::format("residual operator is {}x{}, expected {}x{}", d.rows(),
                                              d.cols(), dim, dim));
    }
    if (max_asymmetry(d) > kHermitianTol) throw std::invalid_argument("residual operator not Hermitian");
    total += d;
  }
  const double err = total.cwiseAbs().maxCoeff();
  if (err > 1e-12) {
    throw std::invalid_argument(fmt::format("residual operators sum to nonzero (max entry {:.3g})", err));
  }
}

std::vector<ComplexMatrix> apply_outcome_noise(std::span<const ComplexMatrix> effects,
                                               const OutcomeNoise& noise) {
  if (effects.empty()) throw std::invalid_argument("empty POVM");
  const Eigen::Index dim = effects[0].rows();
  const auto k = static_cast<Eigen::Index>(effects.size());
  if (noise.lambda.rows() != k) {
    throw std::invalid_argument(
        fmt::format("lambda is {}x{} for a {}-outcome POVM", noise.lambda.rows(), noise.lambda.cols(), k));
  }
  noise.validate(dim);
  ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
  for (const ComplexMatrix& e : effects) {
    if (e.rows() != dim || e.cols() != dim) throw std::invalid_argument("POVM effects differ in dimension");
    total += e;
  }
  const double completeness = (total - identity(dim)).cwiseAbs().maxCoeff();
  if (completeness > 1e-10) {
    throw std::invalid_argument(fmt::format("POVM effects do not sum to identity (error {:.3g})", completeness));
  }

  std::vector<ComplexMatrix> out;
  out.reserve(effects.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index j = 0; j < k; ++j) m += noise.lambda(i, j) * effects[static_cast<std::size_t>(j)];
    if (!noise.delta.empty()) m += noise.delta[static_cast<std::size_t>(i)];
    m = hermitian_part_checked(m);
    const auto [lo, hi] = spectrum_bounds(m);
    if (lo < -1e-10) {
      throw std::invalid_argument(
          fmt::format("noisy effect {} is not positive semidefinite (min eigenvalue {:.6g})", i, lo));
    }
    if (hi > 1.0 + 1e-10) {
      throw std::invalid_argument(fmt::format("noisy effect {} exceeds identity (max eigenvalue {:.6g})", i, hi));
    }
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------

RealVector noisy_acceptance(const LocalTest& test, const QubitNoiseParams& params) {
  if (test.num_qubits() != params.num_qubits()) {
    throw std::invalid_argument(
        fmt::format("test on {} qubits, noise on {}", test.num_qubits(), params.num_qubits()));
  }
  const std::vector<int> measured = test.measured_qubits();
  const int k = static_cast<int>(measured.size());
  const std::size_t size = std::size_t{1} << k;
  RealVector v(static_cast<Eigen::Index>(size));
  for (std::size_t s = 0; s < size; ++s) v(static_cast<Eigen::Index>(s)) = test.passes(static_cast<std::uint32_t>(s)) ? 1.0 : 0.0;

  // Contract each measured axis with P(reported | true).
  for (int j = 0; j < k; ++j) {
    const int qubit = measured[static_cast<std::size_t>(j)];
    const FlipChannel& c = params.channel(qubit, test.bases()[static_cast<std::size_t>(qubit)]);
    const std::size_t bit = std::size_t{1} << (k - 1 - j);
    for (std::size_t s = 0; s < size; ++s) {
      if (s & bit) continue;
      const auto i0 = static_cast<Eigen::Index>(s);
      const auto i1 = static_cast<Eigen::Index>(s | bit);
      const double r0 = v(i0);
      const double r1 = v(i1);
      v(i0) = c.prob(0, 0) * r0 + c.prob(1, 0) * r1;
      v(i1) = c.prob(0, 1) * r0 + c.prob(1, 1) * r1;
    }
  }
  return v;
}

ComplexMatrix noisy_effect(const LocalTest& test, const QubitNoiseParams& params) {
  return test.effect_with_acceptance(noisy_acceptance(test, params));
}

ComplexMatrix noisy_pauli_test(const PauliString& p, const QubitNoiseParams& params) {
  if (p.size() != params.num_qubits()) {
    throw std::invalid_argument(
        fmt::format("Pauli string on {} qubits, noise on {}", p.size(), params.num_qubits()));
  }
  bool symmetric = true;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] != Pauli::I && !params.channel(i, letter_basis(p[i])).symmetric()) symmetric = false;
  }
  if (!symmetric) return noisy_effect(LocalTest::from_pauli(p, 1.0), params);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << p.size());
  return (identity(dim) + params.pauli_factor(p) * pauli_to_matrix(p)) / 2.0;
}

// ---------------------------------------------------------------------------

NoisyStrategy::NoisyStrategy(int n, std::vector<NoisyTest> tests) : n_(n), tests_(std::move(tests)) {
  if (tests_.empty()) throw std::invalid_argument("noisy strategy has no tests");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_);
  op_ = ComplexMatrix::Zero(dim, dim);
  for (const NoisyTest& t : tests_) {
    if (t.effect.rows() != dim || t.effect.cols() != dim) {
      throw std::invalid_argument("noisy effect dimension does not match qubit count");
    }
    op_ += t.weight * t.effect;
  }
}

NoisyStrategy noisy_strategy(const Strategy& s, const QubitNoiseParams& params) {
  std::vector<NoisyTest> tests;
  tests.reserve(s.tests().size());
  for (const LocalTest& t : s.tests()) tests.push_back({t.weight(), noisy_effect(t, params)});
  return NoisyStrategy(s.num_qubits(), std::move(tests));
}

NoisyStrategy noisy_strategy(const Strategy& s, std::span<const OutcomeNoise> per_test) {
  if (per_test.size() != s.tests().size()) {
    throw std::invalid_argument(
        fmt::format("{} outcome noise models for {} tests", per_test.size(), s.tests().size()));
  }
  std::vector<NoisyTest> tests;
  tests.reserve(s.tests().size());
  for (std::size_t i = 0; i < per_test.size(); ++i) {
    const LocalTest& t = s.tests()[i];
    const ComplexMatrix e = t.effect();
    const std::array<ComplexMatrix, 2> povm{e, identity(e.rows()) - e};
    tests.push_back({t.weight(), apply_outcome_noise(povm, per_test[i])[0]});
  }
  return NoisyStrategy(s.num_qubits(), std::move(tests));
}

NoisyStrategy noisy_strategy(const Strategy& s, const OutcomeNoise& shared) {
  const std::vector<OutcomeNoise> all(s.tests().size(), shared);
  return noisy_strategy(s, std::span<const OutcomeNoise>(all));
}

NoisyStrategy noiseless_strategy(const Strategy& s) {
  std::vector<NoisyTest> tests;
  tests.reserve(s.tests().size());
  for (const LocalTest& t : s.tests()) tests.push_back({t.weight(), t.effect()});
  return NoisyStrategy(s.num_qubits(), std::move(tests));
}

}  // namespace nqsv
