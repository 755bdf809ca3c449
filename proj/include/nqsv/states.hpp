#pragma once

// Target states (GHZ, W, stabilizer) and the nonadaptive verification
// strategies built from local two-outcome tests.

#include "nqsv/opcore.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nqsv {

StateVector ghz(int n);
StateVector w_state(int n);

/// Abelian Pauli group given by n independent commuting generators.
/// element(y) is S^y = prod_j S_j^{y_j} where bit j of y selects generator j.
class StabilizerGroup {
 public:
  /// Validates commutation, absence of -1 and a rank-one joint eigenspace.
  static StabilizerGroup from_generators(std::vector<PauliString> generators);
  static StabilizerGroup from_strings(std::span<const std::string> generators);
  /// <X...X, Z_i Z_{i+1}> stabilizing |GHZ_n>.
  static StabilizerGroup ghz_group(int n);

  int num_qubits() const noexcept { return n_; }
  const std::vector<PauliString>& generators() const noexcept { return generators_; }
  /// All 2^n elements indexed by y; element(0) is the identity.
  const std::vector<PauliString>& elements() const noexcept { return elements_; }
  const PauliString& element(std::uint32_t y) const { return elements_.at(y); }

  /// Projector onto the stabilizer basis vector |G_w>, prod_j (1 + (-1)^{w_j} S_j)/2.
  ComplexMatrix basis_projector(std::uint32_t w) const;

 private:
  StabilizerGroup(int n, std::vector<PauliString> gens, std::vector<PauliString> elems)
      : n_(n), generators_(std::move(gens)), elements_(std::move(elems)) {}
  int n_ = 0;
  std::vector<PauliString> generators_;
  std::vector<PauliString> elements_;
};

/// Unique joint +1 eigenvector of the group, phase-fixed.
StateVector stabilizer_state(const StabilizerGroup& g);

/// sqrt(1-eps)|psi> + sqrt(eps)|psi_perp>.
StateVector worst_case_state(const StateVector& psi, const StateVector& psi_perp, double eps);

// ---------------------------------------------------------------------------

enum class Basis : std::uint8_t { X = 0, Y = 1, Z = 2, Skip = 3 };

char basis_char(Basis b);

/// A two-outcome local test: every non-skipped qubit is measured in its basis
/// and the test passes when the joint outcome string is in the pass set.
///
/// Outcome strings range over the measured qubits only, in increasing qubit
/// order with the first measured qubit as the most significant bit. Bit value
/// 0 is the +1 eigenvector of the basis, 1 the -1 eigenvector.
class LocalTest {
 public:
  LocalTest(std::vector<Basis> bases, std::vector<bool> pass_table, double weight);

  /// Test accepting when the product of +-1 outcomes equals sign(p).
  static LocalTest from_pauli(const PauliString& p, double weight);

  int num_qubits() const noexcept { return static_cast<int>(bases_.size()); }
  const std::vector<Basis>& bases() const noexcept { return bases_; }
  std::vector<int> measured_qubits() const;
  int num_measured() const noexcept { return num_measured_; }
  const std::vector<bool>& pass_table() const noexcept { return pass_; }
  bool passes(std::uint32_t outcome) const { return pass_.at(outcome); }
  double weight() const noexcept { return weight_; }

  /// Noiseless effect operator sum_{s in pass} (x)_i Pi_{basis_i}(s_i).
  ComplexMatrix effect() const;

  /// Effect operator for an arbitrary acceptance probability per true outcome
  /// string over the measured qubits (length 2^num_measured). The noiseless
  /// effect uses the 0/1 pass table.
  ComplexMatrix effect_with_acceptance(const RealVector& acceptance) const;

  std::string describe() const;

 private:
  std::vector<Basis> bases_;
  std::vector<bool> pass_;
  double weight_;
  int num_measured_;
};

/// Probability-weighted list of local tests.
class Strategy {
 public:
  Strategy(int n, std::vector<LocalTest> tests);

  int num_qubits() const noexcept { return n_; }
  const std::vector<LocalTest>& tests() const noexcept { return tests_; }
  std::vector<double> weights() const;

  /// sum_i p_i E_i.
  ComplexMatrix op() const;

 private:
  int n_;
  std::vector<LocalTest> tests_;
};

/// One test per nonidentity element, each with weight 1/(2^n - 1).
Strategy stabilizer_strategy(const StabilizerGroup& g);

/// P_0 with weight 1/3 plus one XY test per even subset, each 1/(3 * 2^{n-2}).
Strategy ghz_strategy(int n);

/// Z-excitation test with weight 1/2 plus one XX-parity test per qubit pair.
Strategy w_strategy(int n);

/// Operator basis change for a single-qubit measurement: rows are the bras of
/// the +1 and -1 eigenvectors (identity for Z and Skip).
Eigen::Matrix2cd basis_rows(Basis b);

/// U^dagger diag(d) U where U = (x)_i basis_rows(bases_i), d over all n qubits.
ComplexMatrix rotate_diagonal(std::span<const Basis> bases, const RealVector& diag);

}  // namespace nqsv
