#include "nqsv/states.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace nqsv {

namespace {

void check_qubit_range(int n, int lo, const char* what) {
  if (n < lo || n > kMaxQubits) {
    throw std::invalid_argument(
        fmt::format("{} requires {} <= n <= {}, got n = {}", what, lo, kMaxQubits, n));
  }
}

inline std::uint32_t qubit_bit(int n, int qubit) { return 1u << (n - 1 - qubit); }

// Applies a 2x2 operator on one qubit: from the left (rows) or the right (columns).
void apply_left(ComplexMatrix& m, int n, int qubit, const Eigen::Matrix2cd& a) {
  const Eigen::Index stride = qubit_bit(n, qubit);
  const Eigen::Index dim = m.rows();
  for (Eigen::Index r0 = 0; r0 < dim; ++r0) {
    if (r0 & stride) continue;
    const Eigen::Index r1 = r0 | stride;
    for (Eigen::Index c = 0; c < dim; ++c) {
      const Complex x0 = m(r0, c);
      const Complex x1 = m(r1, c);
      m(r0, c) = a(0, 0) * x0 + a(0, 1) * x1;
      m(r1, c) = a(1, 0) * x0 + a(1, 1) * x1;
    }
  }
}

void apply_right(ComplexMatrix& m, int n, int qubit, const Eigen::Matrix2cd& b) {
  const Eigen::Index stride = qubit_bit(n, qubit);
  const Eigen::Index dim = m.cols();
  for (Eigen::Index c0 = 0; c0 < dim; ++c0) {
    if (c0 & stride) continue;
    const Eigen::Index c1 = c0 | stride;
    for (Eigen::Index r = 0; r < dim; ++r) {
      const Complex x0 = m(r, c0);
      const Complex x1 = m(r, c1);
      m(r, c0) = x0 * b(0, 0) + x1 * b(1, 0);
      m(r, c1) = x0 * b(0, 1) + x1 * b(1, 1);
    }
  }
}

}  // namespace

StateVector ghz(int n) {
  check_qubit_range(n, 2, "GHZ state");
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexVector v = ComplexVector::Zero(dim);
  v(0) = M_SQRT1_2;
  v(dim - 1) = M_SQRT1_2;
  return StateVector::normalized(std::move(v));
}

StateVector w_state(int n) {
  check_qubit_range(n, 2, "W state");
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexVector v = ComplexVector::Zero(dim);
  for (int i = 0; i < n; ++i) v(qubit_bit(n, i)) = 1.0 / std::sqrt(static_cast<double>(n));
  return StateVector::normalized(std::move(v));
}

// ---------------------------------------------------------------------------

StabilizerGroup StabilizerGroup::from_generators(std::vector<PauliString> generators) {
  if (generators.empty()) throw std::invalid_argument("stabilizer group needs generators");
  const int n = generators.front().size();
  for (const auto& g : generators) {
    if (g.size() != n) {
      throw std::invalid_argument(fmt::format(
          "generator {} acts on {} qubits, expected {}", g.to_string(), g.size(), n));
    }
    if (!g.is_hermitian()) {
      throw std::invalid_argument(fmt::format("generator {} is not Hermitian", g.to_string()));
    }
  }
  for (std::size_t a = 0; a < generators.size(); ++a) {
    for (std::size_t b = a + 1; b < generators.size(); ++b) {
      if (!generators[a].commutes_with(generators[b])) {
        throw std::invalid_argument(fmt::format("generators {} and {} anticommute",
                                                generators[a].to_string(),
                                                generators[b].to_string()));
      }
    }
  }
  const int m = static_cast<int>(generators.size());
  if (m > n) {
    throw std::invalid_argument(
        fmt::format("{} generators on {} qubits cannot be independent", m, n));
  }
  std::vector<PauliString> elements;
  elements.reserve(std::size_t{1} << m);
  elements.push_back(PauliString::identity(n));
  for (std::uint32_t y = 1; y < (1u << m); ++y) {
    // Build S^y from S^{y without its highest bit} to keep phases exact.
    const int top = std::bit_width(y) - 1;
    PauliString e = elements[y & ~(1u << top)] * generators[static_cast<std::size_t>(top)];
    if (e.is_identity_letters()) {
      if (e.sign() == -1) {
        throw std::invalid_argument("generators produce -1 in the group");
      }
      throw std::invalid_argument(
          "generators are dependent; the joint eigenspace has rank greater than one");
    }
    elements.push_back(std::move(e));
  }
  if (m != n) {
    throw std::invalid_argument(fmt::format(
        "{} independent generators on {} qubits give a joint eigenspace of rank {}", m, n,
        1u << (n - m)));
  }
  return StabilizerGroup(n, std::move(generators), std::move(elements));
}

StabilizerGroup StabilizerGroup::from_strings(std::span<const std::string> generators) {
  std::vector<PauliString> parsed;
  parsed.reserve(generators.size());
  for (const auto& s : generators) parsed.push_back(PauliString::parse(s));
  return from_generators(std::move(parsed));
}

StabilizerGroup StabilizerGroup::ghz_group(int n) {
  check_qubit_range(n, 2, "GHZ stabilizer group");
  std::vector<PauliString> gens;
  gens.emplace_back(std::vector<Pauli>(static_cast<std::size_t>(n), Pauli::X));
  for (int i = 0; i + 1 < n; ++i) {
    std::vector<Pauli> letters(static_cast<std::size_t>(n), Pauli::I);
    letters[static_cast<std::size_t>(i)] = Pauli::Z;
    letters[static_cast<std::size_t>(i + 1)] = Pauli::Z;
    gens.emplace_back(std::move(letters));
  }
  return from_generators(std::move(gens));
}

ComplexMatrix StabilizerGroup::basis_projector(std::uint32_t w) const {
  const Eigen::Index dim = Eigen::Index{1} << n_;
  ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
  for (std::uint32_t y = 0; y < elements_.size(); ++y) {
    const double s = std::popcount(w & y) % 2 == 0 ? 1.0 : -1.0;
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto [amp, r] = pauli_apply_basis(elements_[y], static_cast<std::uint32_t>(c));
      p(r, c) += s * amp;
    }
  }
  return p / static_cast<double>(elements_.size());
}

StateVector stabilizer_state(const StabilizerGroup& g) {
  const int n = g.num_qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  // Diagonal of the projector: only X-free elements contribute.
  RealVector diag = RealVector::Zero(dim);
  for (const auto& e : g.elements()) {
    if (e.x_mask() != 0) continue;
    for (Eigen::Index c = 0; c < dim; ++c) {
      diag(c) += pauli_apply_basis(e, static_cast<std::uint32_t>(c)).first.real();
    }
  }
  Eigen::Index best = 0;
  diag.maxCoeff(&best);
  ComplexVector v = ComplexVector::Zero(dim);
  for (const auto& e : g.elements()) {
    const auto [amp, r] = pauli_apply_basis(e, static_cast<std::uint32_t>(best));
    v(r) += amp;
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (std::abs(v(i)) > 1e-9) {
      v *= std::conj(v(i)) / std::abs(v(i));
      break;
    }
  }
  return StateVector::normalized(std::move(v));
}

StateVector worst_case_state(const StateVector& psi, const StateVector& psi_perp, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument(fmt::format("infidelity {} outside [0,1]", eps));
  }
  if (psi.dim() != psi_perp.dim()) throw std::invalid_argument("state dimensions differ");
  const double overlap = std::abs(psi.inner(psi_perp));
  if (overlap > 1e-10) {
    throw std::invalid_argument(
        fmt::format("states are not orthogonal: |<psi|psi_perp>| = {:.3e}", overlap));
  }
  ComplexVector v = std::sqrt(1.0 - eps) * psi.amplitudes() + std::sqrt(eps) * psi_perp.amplitudes();
  return StateVector::normalized(std::move(v));
}

// ---------------------------------------------------------------------------

char basis_char(Basis b) {
  switch (b) {
    case Basis::X: return 'X';
    case Basis::Y: return 'Y';
    case Basis::Z: return 'Z';
    case Basis::Skip: return 'I';
  }
  return '?';
}

Eigen::Matrix2cd basis_rows(Basis b) {
  Eigen::Matrix2cd u;
  const Complex i(0.0, 1.0);
  switch (b) {
    case Basis::X:
      u << M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2;
      break;
    case Basis::Y:
      // <+i| = (1, -i)/sqrt2, <-i| = (1, i)/sqrt2
      u << M_SQRT1_2, -i * M_SQRT1_2, M_SQRT1_2, i * M_SQRT1_2;
      break;
    case Basis::Z:
    case Basis::Skip:
      u = Eigen::Matrix2cd::Identity();
      break;
  }
  return u;
}

ComplexMatrix rotate_diagonal(std::span<const Basis> bases, const RealVector& diag) {
  const int n = static_cast<int>(bases.size());
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (diag.size() != dim) {
    throw std::invalid_argument(
        fmt::format("diagonal has length {}, expected {}", diag.size(), dim));
  }
  ComplexMatrix m = diag.cast<Complex>().asDiagonal();
  for (int q = 0; q < n; ++q) {
    const Basis b = bases[static_cast<std::size_t>(q)];
    if (b == Basis::Z || b == Basis::Skip) continue;
    const Eigen::Matrix2cd u = basis_rows(b);
    apply_left(m, n, q, u.adjoint());
    apply_right(m, n, q, u);
  }
  return m;
}

LocalTest::LocalTest(std::vector<Basis> bases, std::vector<bool> pass_table, double weight)
    : bases_(std::move(bases)), pass_(std::move(pass_table)), weight_(weight) {
  if (bases_.empty() || static_cast<int>(bases_.size()) > kMaxQubits) {
    throw std::invalid_argument(fmt::format("local test must act on 1..{} qubits", kMaxQubits));
  }
  num_measured_ = static_cast<int>(
      std::count_if(bases_.begin(), bases_.end(), [](Basis b) { return b != Basis::Skip; }));
  if (pass_.size() != (std::size_t{1} << num_measured_)) {
    throw std::invalid_argument(fmt::format("pass table has {} entries, expected 2^{} = {}",
                                            pass_.size(), num_measured_,
                                            std::size_t{1} << num_measured_));
  }
  if (!(weight_ > 0.0 && weight_ <= 1.0)) {
    throw std::invalid_argument(fmt::format("test weight {} outside (0,1]", weight_));
  }
}

LocalTest LocalTest::from_pauli(const PauliString& p, double weight) {
  std::vector<Basis> bases;
  bases.reserve(static_cast<std::size_t>(p.size()));
  for (Pauli l : p.letters()) {
    switch (l) {
      case Pauli::I: bases.push_back(Basis::Skip); break;
      case Pauli::X: bases.push_back(Basis::X); break;
      case Pauli::Y: bases.push_back(Basis::Y); break;
      case Pauli::Z: bases.push_back(Basis::Z); break;
    }
  }
  const int m = p.weight();
  const bool want_odd = p.sign() == -1;
  std::vector<bool> pass(std::size_t{1} << m);
  for (std::uint32_t s = 0; s < pass.size(); ++s) {
    pass[s] = (std::popcount(s) % 2 == 1) == want_odd;
  }
  return LocalTest(std::move(bases), std::move(pass), weight);
}

std::vector<int> LocalTest::measured_qubits() const {
  std::vector<int> out;
  for (int q = 0; q < num_qubits(); ++q) {
    if (bases_[static_cast<std::size_t>(q)] != Basis::Skip) out.push_back(q);
  }
  return out;
}

ComplexMatrix LocalTest::effect() const {
  RealVector acc(static_cast<Eigen::Index>(pass_.size()));
  for (std::size_t s = 0; s < pass_.size(); ++s) acc(static_cast<Eigen::Index>(s)) = pass_[s] ? 1.0 : 0.0;
  return effect_with_acceptance(acc);
}

ComplexMatrix LocalTest::effect_with_acceptance(const RealVector& acceptance) const {
  if (acceptance.size() != static_cast<Eigen::Index>(pass_.size())) {
    throw std::invalid_argument("acceptance vector length does not match the outcome space");
  }
  const int n = num_qubits();
  const auto measured = measured_qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  RealVector diag(dim);
  for (Eigen::Index z = 0; z < dim; ++z) {
    std::uint32_t s = 0;
    for (int q : measured) {
      s = (s << 1) | ((static_cast<std::uint32_t>(z) >> (n - 1 - q)) & 1u);
    }
    diag(z) = acceptance(s);
  }
  return rotate_diagonal(bases_, diag);
}

std::string LocalTest::describe() const {
  std::string b;
  for (Basis x : bases_) b.push_back(basis_char(x));
  const auto accepted = std::count(pass_.begin(), pass_.end(), true);
  return fmt::format("{} (accepts {}/{}, weight {:.6g})", b, accepted, pass_.size(), weight_);
}

// ---------------------------------------------------------------------------

Strategy::Strategy(int n, std::vector<LocalTest> tests) : n_(n), tests_(std::move(tests)) {
  if (tests_.empty()) throw std::invalid_argument("strategy has no tests");
  double total = 0.0;
  for (const auto& t : tests_) {
    if (t.num_qubits() != n_) {
      throw std::invalid_argument(
          fmt::format("test {} acts on {} qubits, expected {}", t.describe(), t.num_qubits(), n_));
    }
    total += t.weight();
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument(fmt::format("test weights sum to {:.15g}, not 1", total));
  }
}

std::vector<double> Strategy::weights() const {
  std::vector<double> w;
  w.reserve(tests_.size());
  for (const auto& t : tests_) w.push_back(t.weight());
  return w;
}

ComplexMatrix Strategy::op() const {
  const Eigen::Index dim = Eigen::Index{1} << n_;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (const auto& t : tests_) out += t.weight() * t.effect();
  return out;
}

Strategy stabilizer_strategy(const StabilizerGroup& g) {
  const int n = g.num_qubits();
  const double w = 1.0 / static_cast<double>((1u << n) - 1);
  std::vector<LocalTest> tests;
  for (std::uint32_t k = 1; k < g.elements().size(); ++k) {
    tests.push_back(LocalTest::from_pauli(g.element(k), w));
  }
  return Strategy(n, std::move(tests));
}

Strategy ghz_strategy(int n) {
  check_qubit_range(n, 3, "GHZ strategy");
  std::vector<LocalTest> tests;
  {
    std::vector<bool> pass(std::size_t{1} << n, false);
    pass.front() = true;
    pass.back() = true;
    tests.emplace_back(std::vector<Basis>(static_cast<std::size_t>(n), Basis::Z), std::move(pass),
                       1.0 / 3.0);
  }
  // (-1)^t prod_{k in Y} Y_k prod_{k notin Y} X_k with t = |Y|/2 mod 2 equals
  // X^n Z^Y, a stabilizer of GHZ_n; one test per even subset Y.
  const double w = 1.0 / (3.0 * std::ldexp(1.0, n - 2));
  for (std::uint32_t subset = 0; subset < (1u << n); ++subset) {
    const int size = std::popcount(subset);
    if (size % 2 != 0) continue;
    std::vector<Pauli> letters(static_cast<std::size_t>(n), Pauli::X);
    for (int q = 0; q < n; ++q) {
      if (subset & qubit_bit(n, q)) letters[static_cast<std::size_t>(q)] = Pauli::Y;
    }
    const int t = (size / 2) % 2;
    tests.push_back(LocalTest::from_pauli(PauliString(std::move(letters), t ? -1 : 1), w));
  }
  return Strategy(n, std::move(tests));
}

Strategy w_strategy(int n) {
  check_qubit_range(n, 3, "W strategy");
  std::vector<LocalTest> tests;
  {
    std::vector<bool> pass(std::size_t{1} << n, false);
    for (std::size_t s = 0; s < pass.size(); ++s) pass[s] = std::popcount(s) == 1;
    tests.emplace_back(std::vector<Basis>(static_cast<std::size_t>(n), Basis::Z), std::move(pass),
                       0.5);
  }
  const double w = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));  // 1/(2 C(n,2))
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      std::vector<Basis> bases(static_cast<std::size_t>(n), Basis::Z);
      bases[static_cast<std::size_t>(i)] = Basis::X;
      bases[static_cast<std::size_t>(j)] = Basis::X;
      const std::uint32_t pair_mask = qubit_bit(n, i) | qubit_bit(n, j);
      std::vector<bool> pass(std::size_t{1} << n, false);
      for (std::uint32_t s = 0; s < pass.size(); ++s) {
        const int others = std::popcount(s & ~pair_mask);
        const bool even_pair = std::popcount(s & pair_mask) % 2 == 0;
        pass[s] = (others == 0 && even_pair) || others == 1;
      }
      tests.emplace_back(std::move(bases), std::move(pass), w);
    }
  }
  return Strategy(n, std::move(tests));
}

}  // namespace nqsv
