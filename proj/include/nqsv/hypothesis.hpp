#pragma once

// Binomial tails, symmetric hypothesis-testing error rates and sample
// complexity for accept-if-frequent verification.
//
// Tail conventions: left(k) sums i <= floor(k), right(k) sums i >= ceil(k).
// A run of N tests accepts the target iff the pass count is >= ceil(f' N).

#include <cstdint>

namespace nqsv {

/// Largest sample count the search will consider.
inline constexpr std::uint64_t kSampleCap = 100'000'000;

/// C(N,i) p^i (1-p)^(N-i) via saddle-point deviance (accurate in the tails).
double binom_pmf(std::uint64_t i, std::uint64_t n, double p);

/// P(X <= floor(k)) for X ~ Bin(N, p).
double binom_cdf_left(double k, std::uint64_t n, double p);

/// P(X >= ceil(k)) for X ~ Bin(N, p).
double binom_cdf_right(double k, std::uint64_t n, double p);

/// Pass probabilities under the two hypotheses: h0 for the target, h1 for
/// the worst admissible state. Requires h0 > h1.
struct Hypotheses {
  double h0;
  double h1;
};

struct ErrorRates {
  double type1;  // left(f'N; N, h0): target rejected
  double type2;  // right(f'N; N, h1): bad state accepted
  double sym() const noexcept { return 0.5 * (type1 + type2); }
  double ave(double q) const noexcept { return q * type1 + (1.0 - q) * type2; }
};

ErrorRates error_rates(double f_prime, std::uint64_t n, Hypotheses h);

/// h0 = lambda0, h1 = lambda0 - nu*eps.
Hypotheses spectral_hypotheses(double lambda0, double nu, double epsilon);

/// [left(f'N; N, lambda0) + right(f'N; N, lambda0 - nu eps)] / 2.
double p_sym(double f_prime, std::uint64_t n, double lambda0, double nu, double epsilon);
/// q left(...) + (1 - q) right(...).
double p_ave(double f_prime, std::uint64_t n, double lambda0, double nu, double epsilon, double q);

/// Midpoint of the two pass probabilities: lambda0 - nu eps / 2.
double threshold_frequency(double lambda0, double nu, double epsilon);
double threshold_frequency(Hypotheses h);

struct SampleComplexity {
  std::uint64_t n = 0;       // smallest N found (0 when infeasible)
  bool feasible = false;     // false when no N <= kSampleCap meets delta
  double f_prime = 0.0;
  double p_sym = 1.0;        // at n (at the cap when infeasible)
};

/// Smallest N with P_sym <= delta at the midpoint threshold. Seeds at the
/// Chernoff estimate, brackets exponentially, bisects, then scans the 200
/// values below the result to absorb binomial discreteness.
SampleComplexity sample_complexity(Hypotheses h, double delta);
SampleComplexity sample_complexity(double lambda0, double nu, double epsilon, double delta);

/// ceil(8 (1 - lambda0) lambda0 (nu eps)^-2 ln(1/delta)); 0 when lambda0 = 1.
std::uint64_t chernoff_sample_complexity(double lambda0, double nu, double epsilon, double delta);

/// f ln(f/p) + (1-f) ln((1-f)/(1-p)) with 0 ln 0 = 0.
double kl_divergence(double f, double p);

/// exp(-N D(f || 1 - nu eps)).
double asymmetric_error(std::uint64_t n, double f, double nu, double epsilon);

/// ceil(ln(1/delta) / ln(1/(1 - nu eps))), at least 1.
std::uint64_t noiseless_sample_complexity(double nu, double epsilon, double delta);

struct TestPlan {
  double lambda0 = 0.0;
  double nu = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double q_prior = 0.5;
  double h1 = 0.0;  // pass probability of the worst admissible state
  double f_prime = 0.0;
  std::uint64_t n = 0;
  bool feasible = false;
  double p_sym = 1.0;
};

TestPlan make_plan(double lambda0, double nu, double epsilon, double delta, double q_prior = 0.5);

/// Number of passes needed to accept: ceil(f' N).
std::uint64_t acceptance_count(double f_prime, std::uint64_t n);

}  // namespace nqsv
