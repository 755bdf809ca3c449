#pragma once

#include "nqsv/noise.hpp"
#include "nqsv/opcore.hpp"
#include "nqsv/states.hpp"

#include <span>
#include <vector>

namespace nqsv {

inline constexpr double kDefaultSpectralTol = 1e-9;

struct SpectralReport {
  double lambda0 = 0.0;       // largest eigenvalue
  double lambda1 = 0.0;       // second largest
  double nu = 0.0;            // lambda0 - lambda1
  double lambda_prime = 0.0;  // <psi|omega|psi>
  bool target_is_dominant = false;
  double residual = 0.0;      // ||omega psi - lambda0 psi||
  bool distinguishable = false;
  double tol = kDefaultSpectralTol;
};

/// Target is distinguishable when it is the eigenvector of lambda0 (residual
/// within tol) and the gap exceeds tol. Eigenvalues in [-1e-10, 0) are clamped
/// to zero; anything lower throws.
SpectralReport analyze(const ComplexMatrix& omega, const StateVector& psi,
                       double tol = kDefaultSpectralTol);

/// g_k for every nonidentity element k = 1 .. 2^n - 1 of the group.
std::vector<double> stabilizer_noise_factors(const StabilizerGroup& g, const QubitNoiseParams& params);

struct StabilizerSpectrum {
  std::vector<double> p;  // p[w] for w in 0 .. 2^n - 1
  double lambda0 = 0.0;   // p[0]
  double lambda1 = 0.0;   // max over w != 0
};

/// Pass probability of every stabilizer basis vector |G_w> under the noisy
/// stabilizer strategy with factors g_k (indexed k - 1).
StabilizerSpectrum stabilizer_analytic_spectrum(int n, std::span<const double> factors);

/// Factors of the XY tests of the GHZ strategy, in strategy order (even
/// subsets in increasing mask order).
std::vector<double> ghz_subset_factors(int n, const QubitNoiseParams& params);

/// Whether the GHZ pair |0..0>,|1..1> carries the uniquely largest eigenvalue
/// of the noisy all-Z test: for every proper nonempty subset A, the product
/// (prod_{not A}(1-eta) - prod_{not A} eta)(prod_A(1-eta) - prod_A eta) > 0.
bool ghz_z_test_dominant(std::span<const double> eta_z);

struct GhzDominantEigenvalue {
  double value;
  bool z_test_dominant;  // value is only the top eigenvalue when this holds
};

/// Eigenvalue of |GHZ_n> under the noisy GHZ strategy.
GhzDominantEigenvalue ghz_dominant_eigenvalue(std::span<const double> eta_z,
                                              std::span<const double> subset_factors);

/// Necessary condition for a positive infidelity threshold: Tr(omega) < 2^n lambda'
/// (strict, with a 1e-12 per-dimension margin).
bool trace_condition(const ComplexMatrix& omega, double lambda_prime, int n);

}  // namespace nqsv
