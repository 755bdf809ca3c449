#pragma once

// Dense complex linear algebra for n-qubit operators: Pauli strings, tensor
// products, Hermitian eigendecomposition, pure and mixed states.
//
// Basis convention: qubit 0 is the most significant bit of a computational
// basis index, so kron(A_0, A_1, ..., A_{n-1}) acts on qubit i with A_i.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nqsv {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Hard cap on dense simulation size (d = 4096).
inline constexpr int kMaxQubits = 12;

/// Asymmetry below this is symmetrized away; above it is an error.
inline constexpr double kHermitianTol = 1e-10;

/// Number of qubits for a 2^n dimension; throws if dim is not a power of two
/// or exceeds the dense cap.
int qubit_count(Eigen::Index dim);

ComplexMatrix identity(Eigen::Index dim);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// max |M - M^dagger| over entries.
double max_asymmetry(const ComplexMatrix& m);

/// Returns (M + M^dagger)/2 if M is Hermitian within kHermitianTol, otherwise
/// throws std::invalid_argument reporting the max asymmetry.
ComplexMatrix hermitian_part_checked(const ComplexMatrix& m);

// ---------------------------------------------------------------------------
// Pauli strings

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);

class PauliParseError : public std::invalid_argument {
 public:
  PauliParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Tensor product of single-qubit Paulis with an overall phase i^phase.
/// Strings produced by parse() or by multiplying commuting Hermitian strings
/// carry a real phase (sign +-1).
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<Pauli> letters, int sign = +1);

  /// Parses "XZZXI", "-XX", "+ZZ". 'I' and '1' both mean identity.
  static PauliString parse(std::string_view text);
  static PauliString identity(int n);

  int size() const noexcept { return static_cast<int>(letters_.size()); }
  Pauli operator[](int i) const { return letters_.at(static_cast<std::size_t>(i)); }
  const std::vector<Pauli>& letters() const noexcept { return letters_; }

  /// Phase exponent k in i^k, k in {0,1,2,3}.
  int phase() const noexcept { return phase_; }
  bool is_hermitian() const noexcept { return phase_ % 2 == 0; }
  /// +1 or -1; throws std::logic_error for an imaginary phase.
  int sign() const;
  bool is_identity_letters() const noexcept;
  int weight() const noexcept;

  /// Bitmask of qubits carrying X or Y (bit for qubit i is 1 << (n-1-i)).
  std::uint32_t x_mask() const noexcept;
  std::uint32_t z_mask() const noexcept;

  bool commutes_with(const PauliString& other) const;

  /// Exact product with phase tracking.
  friend PauliString operator*(const PauliString& a, const PauliString& b);
  friend bool operator==(const PauliString& a, const PauliString& b) = default;

  std::string to_string() const;

 private:
  std::vector<Pauli> letters_;
  int phase_ = 0;
};

/// Dense matrix of a Pauli string including its phase.
ComplexMatrix pauli_to_matrix(const PauliString& p);

/// Applies p to |basis> and returns (amplitude, resulting basis index).
std::pair<Complex, std::uint32_t> pauli_apply_basis(const PauliString& p, std::uint32_t basis);

// ---------------------------------------------------------------------------
// Eigendecomposition

struct EigenDecomposition {
  RealVector values;     // sorted descending
  ComplexMatrix vectors; // column j pairs with values[j]
};

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are sorted in
/// descending order; each eigenvector has its first non-negligible component
/// made real positive so results are reproducible.
EigenDecomposition hermitian_eig(const ComplexMatrix& m);

/// Largest eigenvalue only (same validation as hermitian_eig).
double max_eigenvalue(const ComplexMatrix& m);

// ---------------------------------------------------------------------------
// States

class StateVector {
 public:
  /// Requires unit norm within 1e-12 (use normalized() for raw data).
  explicit StateVector(ComplexVector amplitudes);
  static StateVector normalized(ComplexVector amplitudes);
  static StateVector basis(Eigen::Index dim, Eigen::Index index);

  Eigen::Index dim() const noexcept { return amps_.size(); }
  const ComplexVector& amplitudes() const noexcept { return amps_; }
  Complex operator[](Eigen::Index i) const { return amps_(i); }

  Complex inner(const StateVector& other) const { return amps_.dot(other.amps_); }
  ComplexMatrix projector() const { return amps_ * amps_.adjoint(); }
  /// <psi|M|psi>, real part.
  double expectation(const ComplexMatrix& m) const;

 private:
  ComplexVector amps_;
};

class DensityMatrix {
 public:
  /// Validates Hermitian, unit trace (1e-10) and eigenvalues >= -1e-10.
  explicit DensityMatrix(const ComplexMatrix& m);
  static DensityMatrix pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(Eigen::Index dim);
  /// Convex combination w*a + (1-w)*b of two valid states.
  static DensityMatrix mix(double w, const DensityMatrix& a, const DensityMatrix& b);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  /// Tr(rho * op), real part.
  double expectation(const ComplexMatrix& op) const;

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// <psi|rho|psi>.
double fidelity(const DensityMatrix& rho, const StateVector& psi);

}  // namespace nqsv
