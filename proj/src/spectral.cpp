#include "nqsv/spectral.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>

namespace nqsv {

SpectralReport analyze(const ComplexMatrix& omega, const StateVector& psi, double tol) {
  if (omega.rows() != psi.dim()) {
    throw std::invalid_argument(
        fmt::format("operator dimension {} does not match state dimension {}", omega.rows(), psi.dim()));
  }
  if (omega.rows() < 2) throw std::invalid_argument("spectral analysis needs dimension >= 2");
  const EigenDecomposition e = hermitian_eig(omega);
  const Eigen::Index d = e.values.size();
  if (e.values(d - 1) < -1e-10) {
    throw std::invalid_argument(fmt::format("operator has eigenvalue {:.6g} below zero", e.values(d - 1)));
  }
  if (e.values(0) > 1.0 + 1e-10) {
    throw std::invalid_argument(fmt::format("operator has eigenvalue {:.6g} above one", e.values(0)));
  }

  SpectralReport r;
  r.tol = tol;
  r.lambda0 = std::max(e.values(0), 0.0);
  r.lambda1 = std::max(e.values(1), 0.0);
  r.nu = r.lambda0 - r.lambda1;
  r.lambda_prime = psi.expectation(omega);
  r.residual = (omega * psi.amplitudes() - r.lambda0 * psi.amplitudes()).norm();
  r.target_is_dominant = r.residual <= tol;
  r.distinguishable = r.target_is_dominant && r.nu > tol;
  return r;
}

std::vector<double> stabilizer_noise_factors(const StabilizerGroup& g, const QubitNoiseParams& params) {
  std::vector<double> out;
  out.reserve(g.elements().size() - 1);
  for (std::size_t k = 1; k < g.elements().size(); ++k) out.push_back(params.pauli_factor(g.elements()[k]));
  return out;
}

StabilizerSpectrum stabilizer_analytic_spectrum(int n, std::span<const double> factors) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument(fmt::format("qubit count {} out of range", n));
  const std::uint32_t size = 1u << n;
  if (factors.size() != size - 1) {
    throw std::invalid_argument(fmt::format("expected {} noise factors, got {}", size - 1, factors.size()));
  }
  StabilizerSpectrum s;
  s.p.resize(size);
  const double norm = 1.0 / static_cast<double>(size - 1);
  for (std::uint32_t w = 0; w < size; ++w) {
    double acc = 0.0;
    for (std::uint32_t k = 1; k < size; ++k) {
      const double sign = std::popcount(w & k) % 2 == 0 ? 1.0 : -1.0;
      acc += 0.5 * (1.0 + factors[k - 1] * sign);
    }
    s.p[w] = acc * norm;
  }
  s.lambda0 = s.p[0];
  s.lambda1 = *std::max_element(s.p.begin() + 1, s.p.end());
  return s;
}

std::vector<double> ghz_subset_factors(int n, const QubitNoiseParams& params) {
  if (params.num_qubits() != n) {
    throw std::invalid_argument(fmt::format("noise on {} qubits for GHZ_{}", params.num_qubits(), n));
  }
  std::vector<double> out;
  for (std::uint32_t subset = 0; subset < (1u << n); ++subset) {
    if (std::popcount(subset) % 2 != 0) continue;
    double g = 1.0;
    for (int q = 0; q < n; ++q) {
      const bool y = subset & (1u << (n - 1 - q));
      g *= params.factor(q, y ? Basis::Y : Basis::X);
    }
    out.push_back(g);
  }
  return out;
}

bool ghz_z_test_dominant(std::span<const double> eta_z) {
  const int n = static_cast<int>(eta_z.size());
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument(fmt::format("qubit count {} out of range", n));
  const std::uint32_t full = (1u << n) - 1;
  for (std::uint32_t a = 1; a < full; ++a) {
    double in_keep = 1.0, in_flip = 1.0, out_keep = 1.0, out_flip = 1.0;
    for (int i = 0; i < n; ++i) {
      const double eta = eta_z[static_cast<std::size_t>(i)];
      if (a & (1u << i)) {
        in_keep *= 1.0 - eta;
        in_flip *= eta;
      } else {
        out_keep *= 1.0 - eta;
        out_flip *= eta;
      }
    }
    if (!((out_keep - out_flip) * (in_keep - in_flip) > 0.0)) return false;
  }
  return true;
}

GhzDominantEigenvalue ghz_dominant_eigenvalue(std::span<const double> eta_z,
                                              std::span<const double> subset_factors) {
  const int n = static_cast<int>(eta_z.size());
  if (n < 3 || n > kMaxQubits) throw std::invalid_argument(fmt::format("GHZ strategy needs 3..{} qubits", kMaxQubits));
  const std::size_t subsets = std::size_t{1} << (n - 1);
  if (subset_factors.size() != subsets) {
    throw std::invalid_argument(fmt::format("expected {} subset factors, got {}", subsets, subset_factors.size()));
  }
  double keep = 1.0, flip = 1.0;
  for (double eta : eta_z) {
    keep *= 1.0 - eta;
    flip *= eta;
  }
  double acc = 0.0;
  for (double g : subset_factors) acc += 0.5 * (g + 1.0);
  const double value = (keep + flip) / 3.0 + acc / (3.0 * std::ldexp(1.0, n - 2));
  return {value, ghz_z_test_dominant(eta_z)};
}

bool trace_condition(const ComplexMatrix& omega, double lambda_prime, int n) {
  const double dim = std::ldexp(1.0, n);
  return omega.trace().real() < dim * lambda_prime - 1e-12 * dim;
}

}  // namespace nqsv
