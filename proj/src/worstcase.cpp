#include "nqsv/worstcase.hpp"

#include "nqsv/spectral.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace nqsv {

namespace {

// Top eigenspace of a Hermitian matrix (eigenvalues within tol of the max)
// together with the overlaps of its basis with psi.
struct TopCluster {
  double top;
  ComplexMatrix basis;    // d x k orthonormal columns
  ComplexVector overlap;  // basis^dagger psi
};

TopCluster top_cluster(const ComplexMatrix& m, const ComplexVector& psi, double tol) {
  const EigenDecomposition e = hermitian_eig(m);
  Eigen::Index k = 1;
  while (k < e.values.size() && e.values(0) - e.values(k) <= tol) ++k;
  TopCluster c{e.values(0), e.vectors.leftCols(k), {}};
  c.overlap = c.basis.adjoint() * psi;
  return c;
}

struct Candidate {
  ComplexVector v;
  double fidelity;
  double value;
};

Candidate make_candidate(ComplexVector v, const ComplexMatrix& omega, const ComplexVector& psi) {
  v.normalize();
  const double f = std::norm(psi.dot(v));
  const double val = v.dot(omega * v).real();
  return {std::move(v), f, val};
}

// Cluster vector with the largest fidelity.
Candidate max_fidelity(const TopCluster& c, const ComplexMatrix& omega, const ComplexVector& psi) {
  if (c.overlap.norm() < 1e-300) return make_candidate(c.basis.col(0), omega, psi);
  return make_candidate(c.basis * c.overlap, omega, psi);
}

// Cluster vector with the smallest fidelity (zero when the cluster has k >= 2).
Candidate min_fidelity(const TopCluster& c, const ComplexMatrix& omega, const ComplexVector& psi) {
  const Eigen::Index k = c.basis.cols();
  if (k == 1) return make_candidate(c.basis.col(0), omega, psi);
  const double n2 = c.overlap.squaredNorm();
  if (n2 < 1e-300) return make_candidate(c.basis.col(0), omega, psi);
  Eigen::Index j = 0;
  c.overlap.cwiseAbs().minCoeff(&j);
  ComplexVector u = ComplexVector::Zero(k);
  u(j) = 1.0;
  u -= c.overlap * (std::conj(c.overlap(j)) / n2);
  return make_candidate(c.basis * u, omega, psi);
}

ComplexMatrix shifted(const ComplexMatrix& omega, const ComplexMatrix& proj, double mu) {
  return omega - mu * proj;
}

WorstCaseResult finish(double eps, double dual, double mu, const std::vector<Candidate>& cands) {
  const double cap = 1.0 - eps;
  double best = -std::numeric_limits<double>::infinity();
  ComplexMatrix best_rho;
  double best_f = 0.0;
  for (const Candidate& c : cands) {
    if (c.fidelity <= cap + 1e-12 && c.value > best) {
      best = c.value;
      best_rho = c.v * c.v.adjoint();
      best_f = c.fidelity;
    }
  }
  for (const Candidate& hi : cands) {
    if (!(hi.fidelity > cap)) continue;
    for (const Candidate& lo : cands) {
      if (!(lo.fidelity < cap)) continue;
      const double t = (cap - lo.fidelity) / (hi.fidelity - lo.fidelity);
      const double val = t * hi.value + (1 - t) * lo.value;
      if (val > best) {
        best = val;
        best_rho = t * (hi.v * hi.v.adjoint()) + (1 - t) * (lo.v * lo.v.adjoint());
        best_f = t * hi.fidelity + (1 - t) * lo.fidelity;
      }
    }
  }
  if (!std::isfinite(best)) throw std::runtime_error("no feasible witness found for the worst-case state");
  WorstCaseResult r{eps, dual, mu, DensityMatrix(best_rho), best, best_f, dual - best, false};
  r.converged = r.duality_gap <= kDualityGapTol;
  return r;
}

}  // namespace

WorstCaseResult worst_case_pass_probability(const ComplexMatrix& omega, const StateVector& psi,
                                            double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument(fmt::format("infidelity {} outside [0,1]", epsilon));
  }
  if (omega.rows() != psi.dim()) {
    throw std::invalid_argument(
        fmt::format("operator dimension {} does not match state dimension {}", omega.rows(), psi.dim()));
  }
  const ComplexMatrix om = hermitian_part_checked(omega);
  const ComplexVector& v = psi.amplitudes();
  const ComplexMatrix proj = psi.projector();
  const double cap = 1.0 - epsilon;

  if (epsilon == 1.0) {
    // Support restricted to the complement of psi.
    const ComplexMatrix q = identity(om.rows()) - proj;
    const ComplexMatrix restricted = q * om * q - proj;
    const TopCluster c = top_cluster(restricted, v, 1e-9);
    return finish(epsilon, c.top, std::numeric_limits<double>::infinity(), {min_fidelity(c, om, v)});
  }

  const double lmax = max_eigenvalue(om);
  auto g = [&](double mu) { return max_eigenvalue(shifted(om, proj, mu)) + mu * cap; };

  {
    const TopCluster c0 = top_cluster(om, v, 1e-9);
    const Candidate low = min_fidelity(c0, om, v);
    if (low.fidelity <= cap + 1e-12) return finish(epsilon, c0.top, 0.0, {low, max_fidelity(c0, om, v)});
  }

  // Expand until the right derivative cap - min fidelity turns positive.
  const double mu_cap = 1e6 * std::max(lmax, 1.0);
  double a = 0.0;
  double b = 1.0;
  while (true) {
    const TopCluster cb = top_cluster(shifted(om, proj, b), v, 1e-9);
    if (min_fidelity(cb, om, v).fidelity < cap) break;
    a = b;
    b *= 2.0;
    if (b > mu_cap) {
      throw std::runtime_error(fmt::format("multiplier bracket exceeded {:.3g} at eps = {}", mu_cap, epsilon));
    }
  }

  // Bisection on the sign of the right derivative cap - min fidelity. The
  // dual is flat near its minimum, so comparing values would lose the bracket.
  while (b - a > 1e-13 * std::max(1.0, b)) {
    const double mid = 0.5 * (a + b);
    const TopCluster cm = top_cluster(shifted(om, proj, mid), v, 1e-9);
    if (min_fidelity(cm, om, v).fidelity > cap) {
      a = mid;
    } else {
      b = mid;
    }
  }
  const double mu = 0.5 * (a + b);
  const double dual = std::min({g(mu), g(a), g(b)});

  const double tol = std::max(1e-9, 10.0 * (b - a));
  const TopCluster ca = top_cluster(shifted(om, proj, a), v, tol);
  const TopCluster cb = top_cluster(shifted(om, proj, b), v, tol);
  return finish(epsilon, dual, mu,
                {max_fidelity(ca, om, v), min_fidelity(ca, om, v), max_fidelity(cb, om, v),
                 min_fidelity(cb, om, v)});
}

std::vector<WorstCaseResult> worst_case_curve(const ComplexMatrix& omega, const StateVector& psi,
                                              std::span<const double> epsilons) {
  std::vector<WorstCaseResult> out;
  out.reserve(epsilons.size());
  for (double e : epsilons) out.push_back(worst_case_pass_probability(omega, psi, e));
  return out;
}

ThresholdResult infidelity_threshold(const ComplexMatrix& omega, const StateVector& psi, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("threshold tolerance must be positive");
  ThresholdResult r;
  r.lambda_prime = psi.expectation(omega);
  r.exists_check = trace_condition(omega, r.lambda_prime, qubit_count(omega.rows()));
  r.p_at_one = worst_case_pass_probability(omega, psi, 1.0).p_eps;
  if (!r.exists_check || r.p_at_one >= r.lambda_prime - 1e-12) return r;

  double lo = 0.0;  // p(lo) >= lambda'
  double hi = 1.0;  // p(hi) < lambda'
  double p_lo = worst_case_pass_probability(omega, psi, 0.0).p_eps;
  while (true) {
    if (hi - lo <= tol && std::abs(p_lo - r.lambda_prime) <= tol) break;
    if (hi - lo <= 1e-15) break;
    const double mid = 0.5 * (lo + hi);
    const double p = worst_case_pass_probability(omega, psi, mid).p_eps;
    if (p >= r.lambda_prime) {
      lo = mid;
      p_lo = p;
    } else {
      hi = mid;
    }
  }
  r.epsilon_th = lo;
  r.p_at_threshold = p_lo;
  return r;
}

TestPlan nondistinguishable_plan(const ComplexMatrix& omega, const StateVector& psi, double epsilon,
                                 double delta, double q_prior) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument(fmt::format("epsilon {} outside (0,1)", epsilon));
  const double lp = psi.expectation(omega);
  const double p = worst_case_pass_probability(omega, psi, epsilon).p_eps;
  const double sep = lp - p;
  if (!(sep > 1e-9)) {
    throw std::domain_error(
        fmt::format("not verifiable at this infidelity: lambda' = {:.10g}, p(eps) = {:.10g}", lp, p));
  }
  const SampleComplexity sc = sample_complexity(Hypotheses{lp, p}, delta);
  TestPlan plan;
  plan.lambda0 = lp;
  plan.nu = sep / epsilon;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.q_prior = q_prior;
  plan.h1 = p;
  plan.f_prime = sc.f_prime;
  plan.n = sc.n;
  plan.feasible = sc.feasible;
  plan.p_sym = sc.p_sym;
  return plan;
}

}  // namespace nqsv
