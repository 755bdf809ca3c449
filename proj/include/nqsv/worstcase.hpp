#pragma once

// Worst-case pass probability over states with bounded fidelity, solved
// through the one-dimensional Lagrangian dual
//   p(eps) = min_{mu >= 0} lambda_max(omega - mu |psi><psi|) + mu (1 - eps).

#include "nqsv/hypothesis.hpp"
#include "nqsv/opcore.hpp"

#include <optional>
#include <span>
#include <vector>

namespace nqsv {

inline constexpr double kDualityGapTol = 1e-7;

struct WorstCaseResult {
  double epsilon = 0.0;
  double p_eps = 0.0;        // dual optimum
  double mu_star = 0.0;      // +infinity at eps = 1
  DensityMatrix witness;     // primal state with fidelity <= 1 - eps
  double witness_value = 0.0;
  double witness_fidelity = 0.0;
  double duality_gap = 0.0;  // p_eps - witness_value
  bool converged = false;    // duality_gap <= kDualityGapTol
};

/// max Tr(rho omega) over density matrices with <psi|rho|psi> <= 1 - eps.
/// Throws std::runtime_error if the multiplier bracket passes 1e6 max(lambda_max, 1).
WorstCaseResult worst_case_pass_probability(const ComplexMatrix& omega, const StateVector& psi,
                                            double epsilon);

std::vector<WorstCaseResult> worst_case_curve(const ComplexMatrix& omega, const StateVector& psi,
                                              std::span<const double> epsilons);

struct ThresholdResult {
  std::optional<double> epsilon_th;  // empty when no threshold exists
  double lambda_prime = 0.0;
  bool exists_check = false;         // trace condition
  double p_at_one = 0.0;
  double p_at_threshold = 0.0;
};

/// Largest eps with p(eps) >= lambda', by bisection on [0, 1]. Empty when the
/// trace condition fails or p(1) >= lambda'.
ThresholdResult infidelity_threshold(const ComplexMatrix& omega, const StateVector& psi,
                                     double tol = 1e-6);

/// Plan with H0 at lambda' and H1 at p(eps); throws if lambda' - p(eps) is not
/// positive (eps at or below the threshold).
TestPlan nondistinguishable_plan(const ComplexMatrix& omega, const StateVector& psi, double epsilon,
                                 double delta, double q_prior = 0.5);

}  // namespace nqsv
