#include "nqsv/hypothesis.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nqsv {

namespace {

// log(n!) - log(sqrt(2 pi n) (n/e)^n) for integer n <= 15.
const std::array<double, 16>& stirlerr_table() {
  static const std::array<double, 16> table = [] {
    std::array<double, 16> t{};
    const long double half_log_2pi = 0.5L * std::log(2.0L * std::numbers::pi_v<long double>);
    t[0] = 0.0;
    for (int i = 1; i < 16; ++i) {
      const long double n = i;
      t[static_cast<std::size_t>(i)] =
          static_cast<double>(std::lgammal(n + 1.0L) - (n + 0.5L) * std::log(n) + n - half_log_2pi);
    }
    return t;
  }();
  return table;
}

double stirlerr(double n) {
  constexpr double s0 = 1.0 / 12;
  constexpr double s1 = 1.0 / 360;
  constexpr double s2 = 1.0 / 1260;
  constexpr double s3 = 1.0 / 1680;
  constexpr double s4 = 1.0 / 1188;
  if (n <= 15.0) return stirlerr_table()[static_cast<std::size_t>(n)];
  const double nn = n * n;
  if (n > 500) return (s0 - s1 / nn) / n;
  if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// Deviance term x log(x/np) + np - x, stable near x = np.
double bd0(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
  }
  return x * std::log(x / np) + np - x;
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

void check_binom_args(std::uint64_t n, double p) {
  if (n < 1) throw std::invalid_argument("binomial tail needs N >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(fmt::format("probability {} outside [0,1]", p));
}

// Sum of pmf over [lo, hi] starting at the endpoint nearest the mode and
// stopping once terms become negligible. The range must not contain the mode.
double tail_sum(std::uint64_t lo, std::uint64_t hi, bool walk_down, std::uint64_t n, double p) {
  std::vector<double> terms;
  double running = 0.0;
  std::uint64_t i = walk_down ? hi : lo;
  while (true) {
    const double t = binom_pmf(i, n, p);
    terms.push_back(t);
    running += t;
    if (t == 0.0 || t < 1e-17 * running) break;
    if (walk_down) {
      if (i == lo) break;
      --i;
    } else {
      if (i == hi) break;
      ++i;
    }
  }
  return pairwise_sum(terms.data(), terms.size());
}

// P(X <= m) for integer m in [0, n).
double left_tail_int(std::uint64_t m, std::uint64_t n, double p) {
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  const double mode = std::floor((static_cast<double>(n) + 1.0) * p);
  if (static_cast<double>(m) < mode) return tail_sum(0, m, true, n, p);
  return 1.0 - tail_sum(m + 1, n, false, n, p);
}

}  // namespace

double binom_pmf(std::uint64_t i, std::uint64_t n, double p) {
  check_binom_args(n, p);
  if (i > n) return 0.0;
  const double q = 1.0 - p;
  if (p == 0.0) return i == 0 ? 1.0 : 0.0;
  if (q == 0.0) return i == n ? 1.0 : 0.0;
  const auto x = static_cast<double>(i);
  const auto nn = static_cast<double>(n);
  if (i == 0) return std::exp(nn * std::log1p(-p));
  if (i == n) return std::exp(nn * std::log(p));
  const double lc = stirlerr(nn) - stirlerr(x) - stirlerr(nn - x) - bd0(x, nn * p) - bd0(nn - x, nn * q);
  const double lf = std::log(2 * std::numbers::pi) + std::log(x) + std::log1p(-x / nn);
  return std::exp(lc - 0.5 * lf);
}

double binom_cdf_left(double k, std::uint64_t n, double p) {
  check_binom_args(n, p);
  if (std::isnan(k)) throw std::invalid_argument("tail argument is NaN");
  const double fk = std::floor(k);
  if (fk < 0.0) return 0.0;
  if (fk >= static_cast<double>(n)) return 1.0;
  return left_tail_int(static_cast<std::uint64_t>(fk), n, p);
}

double binom_cdf_right(double k, std::uint64_t n, double p) {
  check_binom_args(n, p);
  if (std::isnan(k)) throw std::invalid_argument("tail argument is NaN");
  const double ck = std::ceil(k);
  if (ck <= 0.0) return 1.0;
  if (ck > static_cast<double>(n)) return 0.0;
  // P(X >= c) = P(n - X <= n - c) with n - X ~ Bin(n, 1 - p).
  const auto c = static_cast<std::uint64_t>(ck);
  if (c == n) return binom_pmf(n, n, p);
  return left_tail_int(n - c, n, 1.0 - p);
}

ErrorRates error_rates(double f_prime, std::uint64_t n, Hypotheses h) {
  const double k = f_prime * static_cast<double>(n);
  if (!(k >= 0.0 && k <= static_cast<double>(n))) {
    throw std::invalid_argument(fmt::format("threshold f'N = {} outside [0, {}]", k, n));
  }
  return {binom_cdf_left(k, n, h.h0), binom_cdf_right(k, n, h.h1)};
}

Hypotheses spectral_hypotheses(double lambda0, double nu, double epsilon) {
  return {lambda0, lambda0 - nu * epsilon};
}

double p_sym(double f_prime, std::uint64_t n, double lambda0, double nu, double epsilon) {
  return error_rates(f_prime, n, spectral_hypotheses(lambda0, nu, epsilon)).sym();
}

double p_ave(double f_prime, std::uint64_t n, double lambda0, double nu, double epsilon, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument(fmt::format("prior {} outside [0,1]", q));
  return error_rates(f_prime, n, spectral_hypotheses(lambda0, nu, epsilon)).ave(q);
}

double threshold_frequency(double lambda0, double nu, double epsilon) {
  return threshold_frequency(spectral_hypotheses(lambda0, nu, epsilon));
}

double threshold_frequency(Hypotheses h) { return 0.5 * (h.h0 + h.h1); }

std::uint64_t chernoff_sample_complexity(double lambda0, double nu, double epsilon, double delta) {
  if (!(nu * epsilon > 0.0)) throw std::invalid_argument("Chernoff estimate needs nu * eps > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument(fmt::format("delta {} outside (0,1)", delta));
  const double ne = nu * epsilon;
  return static_cast<std::uint64_t>(std::ceil(8.0 * (1.0 - lambda0) * lambda0 / (ne * ne) * std::log(1.0 / delta)));
}

SampleComplexity sample_complexity(Hypotheses h, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument(fmt::format("delta {} outside (0,1)", delta));
  if (!(h.h0 > h.h1)) {
    throw std::invalid_argument(fmt::format("target pass probability {} must exceed {}", h.h0, h.h1));
  }
  if (!(h.h0 <= 1.0 && h.h1 >= 0.0)) throw std::invalid_argument("pass probabilities outside [0,1]");
  const double fp = threshold_frequency(h);
  auto value = [&](std::uint64_t n) { return error_rates(fp, n, h).sym(); };
  auto ok = [&](std::uint64_t n) { return value(n) <= delta; };

  // Seed from the Chernoff estimate expressed in the two pass probabilities.
  const double gap = h.h0 - h.h1;
  const double seed_real = 8.0 * (1.0 - h.h0) * h.h0 / (gap * gap) * std::log(1.0 / delta);
  std::uint64_t seed = seed_real >= 1.0 ? static_cast<std::uint64_t>(std::ceil(std::min(seed_real, 1e8))) : 1;

  std::uint64_t lo = 0;  // largest known failing N (0 = none)
  std::uint64_t hi = 0;  // smallest known passing N
  if (ok(seed)) {
    hi = seed;
    std::uint64_t probe = seed / 2;
    while (probe >= 1 && ok(probe)) {
      hi = probe;
      probe /= 2;
    }
    lo = probe;
  } else {
    lo = seed;
    std::uint64_t probe = seed;
    while (true) {
      if (probe >= kSampleCap) {
        SampleComplexity out;
        out.f_prime = fp;
        out.p_sym = value(kSampleCap);
        return out;
      }
      probe = std::min(probe * 2, kSampleCap);
      if (ok(probe)) {
        hi = probe;
        break;
      }
      lo = probe;
    }
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  std::uint64_t best = hi;
  const std::uint64_t floor_n = hi > 200 ? hi - 200 : 1;
  for (std::uint64_t n = floor_n; n < hi; ++n) {
    if (ok(n)) {
      best = n;
      break;
    }
  }
  SampleComplexity out;
  out.n = best;
  out.feasible = true;
  out.f_prime = fp;
  out.p_sym = value(best);
  return out;
}

SampleComplexity sample_complexity(double lambda0, double nu, double epsilon, double delta) {
  if (!(nu > 0.0)) throw std::invalid_argument(fmt::format("spectral gap {} must be positive", nu));
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument(fmt::format("epsilon {} outside (0,1)", epsilon));
  if (!(lambda0 - nu * epsilon > 0.0)) throw std::invalid_argument("lambda0 - nu*eps must be positive");
  return sample_complexity(spectral_hypotheses(lambda0, nu, epsilon), delta);
}

double kl_divergence(double f, double p) {
  if (!(f >= 0.0 && f <= 1.0 && p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(fmt::format("divergence arguments ({}, {}) outside [0,1]", f, p));
  }
  auto term = [](double a, double b) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    return a * std::log(a / b);
  };
  return term(f, p) + term(1.0 - f, 1.0 - p);
}

double asymmetric_error(std::uint64_t n, double f, double nu, double epsilon) {
  return std::exp(-static_cast<double>(n) * kl_divergence(f, 1.0 - nu * epsilon));
}

std::uint64_t noiseless_sample_complexity(double nu, double epsilon, double delta) {
  const double ne = nu * epsilon;
  if (!(ne > 0.0 && ne <= 1.0)) throw std::invalid_argument(fmt::format("nu * eps = {} outside (0,1]", ne));
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument(fmt::format("delta {} outside (0,1]", delta));
  if (ne == 1.0) return 1;
  const double n = std::ceil(std::log(1.0 / delta) / -std::log1p(-ne));
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

TestPlan make_plan(double lambda0, double nu, double epsilon, double delta, double q_prior) {
  if (!(q_prior >= 0.0 && q_prior <= 1.0)) throw std::invalid_argument(fmt::format("prior {} outside [0,1]", q_prior));
  const SampleComplexity sc = sample_complexity(lambda0, nu, epsilon, delta);
  TestPlan plan;
  plan.lambda0 = lambda0;
  plan.nu = nu;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.q_prior = q_prior;
  plan.h1 = lambda0 - nu * epsilon;
  plan.f_prime = sc.f_prime;
  plan.n = sc.n;
  plan.feasible = sc.feasible;
  plan.p_sym = sc.p_sym;
  return plan;
}

std::uint64_t acceptance_count(double f_prime, std::uint64_t n) {
  return static_cast<std::uint64_t>(std::ceil(f_prime * static_cast<double>(n)));
}

}  // namespace nqsv
