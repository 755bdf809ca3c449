#include "nqsv/opcore.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace nqsv {

int qubit_count(Eigen::Index dim) {
  if (dim < 1 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument(fmt::format("dimension {} is not a power of two", dim));
  }
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if (n > kMaxQubits) {
    throw std::invalid_argument(
        fmt::format("{} qubits exceeds the dense limit of {}", n, kMaxQubits));
  }
  return n;
}

ComplexMatrix identity(Eigen::Index dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double max_asymmetry(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

ComplexMatrix hermitian_part_checked(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(
        fmt::format("expected a non-empty square matrix, got {}x{}", m.rows(), m.cols()));
  }
  const double asym = max_asymmetry(m);
  if (!(asym < kHermitianTol)) {
    throw std::invalid_argument(
        fmt::format("matrix is not Hermitian: max |M - M^dagger| = {:.3e}", asym));
  }
  return (m + m.adjoint()) * 0.5;
}

// ---------------------------------------------------------------------------

char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

namespace {

// Single-qubit product a*b = i^phase * result.
struct LetterProduct {
  Pauli result;
  int phase;
};

constexpr LetterProduct multiply_letters(Pauli a, Pauli b) {
  if (a == Pauli::I) return {b, 0};
  if (b == Pauli::I) return {a, 0};
  if (a == b) return {Pauli::I, 0};
  // Cyclic XY = iZ, YZ = iX, ZX = iY; anticyclic picks up -i.
  const int ia = static_cast<int>(a);
  const int ib = static_cast<int>(b);
  const auto third = static_cast<Pauli>(6 - ia - ib);
  const bool cyclic = (ia == 1 && ib == 2) || (ia == 2 && ib == 3) || (ia == 3 && ib == 1);
  return {third, cyclic ? 1 : 3};
}

}  // namespace

PauliString::PauliString(std::vector<Pauli> letters, int sign) : letters_(std::move(letters)) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("Pauli sign must be +1 or -1");
  if (letters_.empty()) throw std::invalid_argument("Pauli string must act on at least one qubit");
  if (size() > kMaxQubits) {
    throw std::invalid_argument(fmt::format("Pauli string of length {} exceeds {} qubits",
                                            size(), kMaxQubits));
  }
  phase_ = sign == 1 ? 0 : 2;
}

PauliString PauliString::parse(std::string_view text) {
  std::size_t pos = 0;
  int sign = 1;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    sign = text[0] == '-' ? -1 : 1;
    pos = 1;
  }
  static constexpr std::string_view kDoubleStruckOne = "\xF0\x9D\x9F\x99";  // U+1D7D9
  std::vector<Pauli> letters;
  for (; pos < text.size(); ++pos) {
    if (text.substr(pos, kDoubleStruckOne.size()) == kDoubleStruckOne) {
      letters.push_back(Pauli::I);
      pos += kDoubleStruckOne.size() - 1;
      continue;
    }
    switch (text[pos]) {
      case 'I': case '1': letters.push_back(Pauli::I); break;
      case 'X': case 'x': letters.push_back(Pauli::X); break;
      case 'Y': case 'y': letters.push_back(Pauli::Y); break;
      case 'Z': case 'z': letters.push_back(Pauli::Z); break;
      default:
        throw PauliParseError(
            fmt::format("invalid character '{}' at position {} in Pauli string \"{}\"",
                        text[pos], pos, text),
            pos);
    }
  }
  if (letters.empty()) {
    throw PauliParseError(fmt::format("empty Pauli string \"{}\"", text), pos);
  }
  if (static_cast<int>(letters.size()) > kMaxQubits) {
    throw PauliParseError(
        fmt::format("Pauli string \"{}\" exceeds {} qubits", text, kMaxQubits), kMaxQubits);
  }
  return PauliString(std::move(letters), sign);
}

PauliString PauliString::identity(int n) {
  return PauliString(std::vector<Pauli>(static_cast<std::size_t>(n), Pauli::I));
}

int PauliString::sign() const {
  if (!is_hermitian()) {
    throw std::logic_error(fmt::format("Pauli string {} has an imaginary phase", to_string()));
  }
  return phase_ == 0 ? 1 : -1;
}

bool PauliString::is_identity_letters() const noexcept {
  return std::all_of(letters_.begin(), letters_.end(), [](Pauli p) { return p == Pauli::I; });
}

int PauliString::weight() const noexcept {
  return static_cast<int>(
      std::count_if(letters_.begin(), letters_.end(), [](Pauli p) { return p != Pauli::I; }));
}

std::uint32_t PauliString::x_mask() const noexcept {
  std::uint32_t mask = 0;
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const Pauli p = letters_[static_cast<std::size_t>(i)];
    if (p == Pauli::X || p == Pauli::Y) mask |= 1u << (n - 1 - i);
  }
  return mask;
}

std::uint32_t PauliString::z_mask() const noexcept {
  std::uint32_t mask = 0;
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const Pauli p = letters_[static_cast<std::size_t>(i)];
    if (p == Pauli::Z || p == Pauli::Y) mask |= 1u << (n - 1 - i);
  }
  return mask;
}

bool PauliString::commutes_with(const PauliString& other) const {
  if (size() != other.size()) throw std::invalid_argument("Pauli strings differ in length");
  const int anti = std::popcount(x_mask() & other.z_mask()) + std::popcount(z_mask() & other.x_mask());
  return anti % 2 == 0;
}

PauliString operator*(const PauliString& a, const PauliString& b) {
  if (a.size() != b.size()) throw std::invalid_argument("Pauli strings differ in length");
  PauliString out = a;
  int phase = a.phase_ + b.phase_;
  for (std::size_t i = 0; i < a.letters_.size(); ++i) {
    const auto prod = multiply_letters(a.letters_[i], b.letters_[i]);
    out.letters_[i] = prod.result;
    phase += prod.phase;
  }
  out.phase_ = phase % 4;
  return out;
}

std::string PauliString::to_string() const {
  std::string s;
  switch (phase_) {
    case 1: s = "i"; break;
    case 2: s = "-"; break;
    case 3: s = "-i"; break;
    default: break;
  }
  for (Pauli p : letters_) s.push_back(pauli_char(p));
  return s;
}

std::pair<Complex, std::uint32_t> pauli_apply_basis(const PauliString& p, std::uint32_t basis) {
  static constexpr std::array<Complex, 4> kPhase = {Complex{1, 0}, Complex{0, 1}, Complex{-1, 0},
                                                    Complex{0, -1}};
  // Y|b> = i(-1)^b |~b>, Z|b> = (-1)^b |b>: phase i^{#Y} * (-1)^{popcount(z & basis)}.
  const std::uint32_t xm = p.x_mask();
  const std::uint32_t zm = p.z_mask();
  const int num_y = std::popcount(xm & zm);
  const int minus = std::popcount(zm & basis) % 2;
  const int k = (p.phase() + num_y + 2 * minus) % 4;
  return {kPhase[static_cast<std::size_t>(k)], basis ^ xm};
}

ComplexMatrix pauli_to_matrix(const PauliString& p) {
  const Eigen::Index dim = Eigen::Index{1} << p.size();
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto [amp, row] = pauli_apply_basis(p, static_cast<std::uint32_t>(col));
    m(row, col) = amp;
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

void fix_phase(ComplexMatrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    auto col = vectors.col(j);
    const double cutoff = 1e-6 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > cutoff) {
        col *= std::conj(col(i)) / std::abs(col(i));
        col(i) = Complex(col(i).real(), 0.0);
        break;
      }
    }
  }
}

}  // namespace

EigenDecomposition hermitian_eig(const ComplexMatrix& m) {
  const ComplexMatrix h = hermitian_part_checked(m);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Hermitian eigensolver failed to converge");
  }
  const Eigen::Index d = h.rows();
  EigenDecomposition out{RealVector(d), ComplexMatrix(d, d)};
  // Eigen returns ascending order.
  for (Eigen::Index j = 0; j < d; ++j) {
    out.values(j) = solver.eigenvalues()(d - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(d - 1 - j);
  }
  fix_phase(out.vectors);
  return out;
}

double max_eigenvalue(const ComplexMatrix& m) {
  const ComplexMatrix h = hermitian_part_checked(m);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Hermitian eigensolver failed to converge");
  }
  return solver.eigenvalues()(h.rows() - 1);
}

// ---------------------------------------------------------------------------

StateVector::StateVector(ComplexVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() == 0) throw std::invalid_argument("state vector is empty");
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > 1e-12) {
    throw std::invalid_argument(fmt::format("state vector norm {:.15g} is not 1", norm));
  }
}

StateVector StateVector::normalized(ComplexVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite vector");
  }
  amplitudes /= norm;
  return StateVector(std::move(amplitudes));
}

StateVector StateVector::basis(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) throw std::out_of_range("basis index out of range");
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return StateVector(std::move(v));
}

double StateVector::expectation(const ComplexMatrix& m) const {
  if (m.rows() != dim() || m.cols() != dim()) {
    throw std::invalid_argument(
        fmt::format("operator is {}x{} but state has dimension {}", m.rows(), m.cols(), dim()));
  }
  return amps_.dot(m * amps_).real();
}

DensityMatrix::DensityMatrix(const ComplexMatrix& m) : m_(hermitian_part_checked(m)) {
  const double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) {
    throw std::invalid_argument(fmt::format("density matrix trace {:.15g} is not 1", tr));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues()(0);
  if (min_eig < -1e-10) {
    throw std::invalid_argument(
        fmt::format("density matrix has negative eigenvalue {:.3e}", min_eig));
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return DensityMatrix(psi.projector(), Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(identity(dim) / static_cast<double>(dim), Unchecked{});
}

DensityMatrix DensityMatrix::mix(double w, const DensityMatrix& a, const DensityMatrix& b) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("mixing weight must lie in [0,1]");
  if (a.dim() != b.dim()) throw std::invalid_argument("cannot mix states of different dimension");
  return DensityMatrix(w * a.m_ + (1.0 - w) * b.m_, Unchecked{});
}

double DensityMatrix::expectation(const ComplexMatrix& op) const {
  if (op.rows() != dim() || op.cols() != dim()) {
    throw std::invalid_argument(
        fmt::format("operator is {}x{} but state has dimension {}", op.rows(), op.cols(), dim()));
  }
  // Tr(rho A) = sum_ij rho_ij A_ji
  return (m_.transpose().cwiseProduct(op)).sum().real();
}

double fidelity(const DensityMatrix& rho, const StateVector& psi) {
  if (rho.dim() != psi.dim()) {
    throw std::invalid_argument(
        fmt::format("dimension mismatch: rho is {} but psi is {}", rho.dim(), psi.dim()));
  }
  const Complex f = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
  return f.real();
}

}  // namespace nqsv
