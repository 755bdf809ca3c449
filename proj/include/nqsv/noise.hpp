#pragma once

// Readout noise: classical flip channels on per-qubit outcome bits, and the
// general outcome-level model (stochastic matrix plus residual operators)
// for whole-test POVMs.

#include "nqsv/opcore.hpp"
#include "nqsv/states.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace nqsv {

/// Bit-flip channel on one measured outcome. eta is P(report 1 | true 0) and
/// q is P(report 0 | true 1); the matrix [[1-eta, q], [eta, 1-q]] maps true
/// outcome columns to reported rows.
struct FlipChannel {
  double eta = 0.0;
  double q = 0.0;

  bool symmetric() const noexcept { return eta == q; }
  /// Attenuation 1 - 2 eta of a Pauli expectation (symmetric channels).
  double factor() const noexcept { return 1.0 - 2.0 * eta; }
  /// P(report `reported` | true `actual`).
  double prob(int reported, int actual) const noexcept;
};

/// Independent flip channels per qubit and measurement basis.
class QubitNoiseParams {
 public:
  explicit QubitNoiseParams(int n);
  QubitNoiseParams(int n, std::vector<std::array<FlipChannel, 3>> channels);

  static QubitNoiseParams noiseless(int n) { return QubitNoiseParams(n); }
  /// eta = q = value for every qubit and basis.
  static QubitNoiseParams uniform(int n, double eta);
  /// Symmetric per-qubit rows [eta_x, eta_y, eta_z].
  static QubitNoiseParams per_qubit(std::span<const std::array<double, 3>> etas);

  int num_qubits() const noexcept { return static_cast<int>(channels_.size()); }
  const FlipChannel& channel(int qubit, Basis b) const;
  bool symmetric() const noexcept;
  /// 1 - 2 eta for a qubit and basis (requires that channel to be symmetric).
  double factor(int qubit, Basis b) const;

  /// Product of per-letter factors over the non-identity letters of p.
  double pauli_factor(const PauliString& p) const;

 private:
  std::vector<std::array<FlipChannel, 3>> channels_;  // indexed [qubit][X,Y,Z]
};

/// Uniform draws in [lo, hi] for every qubit, basis and for eta and q
/// separately. Reproducible from the seed.
QubitNoiseParams random_noise(int n, double lo, double hi, std::uint64_t seed);

/// Outcome-level model for a k-outcome POVM: noisy_i = sum_j lambda(i,j) Pi_j + delta_i.
struct OutcomeNoise {
  RealMatrix lambda;
  std::vector<ComplexMatrix> delta;  // empty means all zero

  /// Two-outcome model with flip probabilities eta, q and zero residual.
  static OutcomeNoise two_outcome(double eta, double q);
  void validate(Eigen::Index dim) const;
};

/// Applies an outcome-level model to a complete POVM. Throws if the result is
/// not a valid POVM (reports the offending minimum eigenvalue).
std::vector<ComplexMatrix> apply_outcome_noise(std::span<const ComplexMatrix> effects,
                                               const OutcomeNoise& noise);

/// Probability that a test reports a passing outcome, for each true outcome
/// string over its measured qubits, under independent per-qubit flips.
RealVector noisy_acceptance(const LocalTest& test, const QubitNoiseParams& params);

/// Noisy effect of a single local test.
ComplexMatrix noisy_effect(const LocalTest& test, const QubitNoiseParams& params);

/// (1 + g P)/2 with g the product of per-letter factors. Asymmetric parameters
/// fall back to the outcome-level construction through the pass set.
ComplexMatrix noisy_pauli_test(const PauliString& p, const QubitNoiseParams& params);

struct NoisyTest {
  double weight;
  ComplexMatrix effect;
};

class NoisyStrategy {
 public:
  NoisyStrategy(int n, std::vector<NoisyTest> tests);

  int num_qubits() const noexcept { return n_; }
  const std::vector<NoisyTest>& tests() const noexcept { return tests_; }
  /// sum_i p_i noisy_effect_i.
  const ComplexMatrix& op() const noexcept { return op_; }

 private:
  int n_;
  std::vector<NoisyTest> tests_;
  ComplexMatrix op_;
};

NoisyStrategy noisy_strategy(const Strategy& s, const QubitNoiseParams& params);
/// One outcome-level model per test applied to {E_i, 1 - E_i}.
NoisyStrategy noisy_strategy(const Strategy& s, std::span<const OutcomeNoise> per_test);
/// Same model applied to every test.
NoisyStrategy noisy_strategy(const Strategy& s, const OutcomeNoise& shared);
NoisyStrategy noiseless_strategy(const Strategy& s);

}  // namespace nqsv
