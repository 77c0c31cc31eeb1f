#include "skewlink/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace skewlink::numerics {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSqrt2 = 1.414213562373095048801688724209698079;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1] by Newton
// iteration on the Legendre recurrence.
void gauss_legendre_unit(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Series part of Owen's T, valid (and fast) for |a| <= 1/2:
// T = e^{-h^2/2}/(2pi) sum_j (-1)^j s_j(h) a^{2j+1}/(2j+1),
// s_j(h) = sum_{m<=j} (h^2/2)^m / m!. Since e^{-h^2/2} s_j <= 1, the
// remainder is bounded by a^{2j+3}/(2j+3).
double owens_t_series(double h, double a) {
  const double hh = 0.5 * h * h;
  const double e = std::exp(-hh);
  const double a2 = a * a;
  double sj = 1.0;
  double term_m = 1.0;
  double apow = a;
  double total = 0.0;
  double sign = 1.0;
  for (int j = 0; j < 2000; ++j) {
    total += sign * e * sj * apow / (2.0 * j + 1.0);
    sign = -sign;
    apow *= a2;
    term_m *= hh / (j + 1.0);
    sj += term_m;
    if (apow / (2.0 * j + 3.0) < 1e-17) break;
  }
  return total / (2.0 * kPi);
}

const QuadratureRule& owens_base_rule() {
  static const QuadratureRule rule = gauss_legendre_rule(64, {0.0, 1.0});
  return rule;
}

// Direct 64-point Gauss-Legendre on the defining integral over [0,a].
double owens_t_gl(double h, double a) {
  const QuadratureRule& r = owens_base_rule();
  double total = 0.0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k) {
    const double x = a * r.nodes[k];
    total += a * r.weights[k] * std::exp(-0.5 * h * h * (1.0 + x * x)) /
             (1.0 + x * x);
  }
  return total / (2.0 * kPi);
}

double owens_t_core(double h, double a) {
  // h >= 0, a > 0 here.
  if (a <= 0.5) return owens_t_series(h, a);
  if (a <= 1.0) return owens_t_gl(h, a);
  const double ah = a * h;
  return 0.5 * (std_normal_cdf(h) + std_normal_cdf(ah)) -
         std_normal_cdf(h) * std_normal_cdf(ah) - owens_t_core(ah, 1.0 / a);
}

// Robert's one-sided tail sampler for N(0,1) restricted to (lo, inf),
// lo >= 0. Exponential proposal with the optimal rate.
double robert_tail(double lo, Rng& rng) {
  const double rate = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
  for (;;) {
    const double x = lo - std::log(rng.uniform()) / rate;
    const double d = x - rate;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
  }
}

}  // namespace

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double std_normal_cdf(double x) {
  if (std::isnan(x)) throw std::domain_error("std_normal_cdf: NaN input");
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  return 0.5 * std::erfc(-x / kSqrt2);
}

double log_std_normal_cdf(double x) {
  if (x > -37.0) return std::log(std_normal_cdf(x));
  // Asymptotic expansion of Mills' ratio in the deep left tail.
  const double x2 = x * x;
  const double corr = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2);
  return -0.5 * x2 - 0.5 * std::log(2.0 * kPi) - std::log(-x) + std::log(corr);
}

// AS 241 algorithm PPND16.
double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw std::domain_error("std_normal_quantile: p outside [0,1]");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * kPi * var) - 0.5 * d * d / var;
}

double owens_t(double h, double a) {
  if (!std::isfinite(h) || !std::isfinite(a)) {
    throw std::domain_error("owens_t: non-finite input");
  }
  if (a == 0.0) return 0.0;
  double sign = 1.0;
  if (a < 0.0) {
    a = -a;
    sign = -1.0;
  }
  h = std::abs(h);
  if (h == 0.0) return sign * std::atan(a) / (2.0 * kPi);
  return sign * owens_t_core(h, a);
}

double sample_truncated_normal(double mean, double variance, double lower,
                               double upper, Rng& rng) {
  if (!(variance > 0.0)) {
    throw std::domain_error("sample_truncated_normal: variance must be > 0");
  }
  if (!(lower < upper)) {
    throw std::domain_error("sample_truncated_normal: lower >= upper");
  }
  const double sd = std::sqrt(variance);
  const double alpha = (lower - mean) / sd;
  const double beta = (upper - mean) / sd;

  double z;
  if (alpha >= 3.0) {
    do {
      z = robert_tail(alpha, rng);
    } while (z >= beta);
  } else if (beta <= -3.0) {
    do {
      z = -robert_tail(-beta, rng);
    } while (z <= alpha);
  } else {
    const double pa = std_normal_cdf(alpha);
    const double pb = std_normal_cdf(beta);
    const double u = pa + (pb - pa) * rng.uniform();
    z = std_normal_quantile(u);
  }
  double x = mean + sd * z;
  // Land strictly inside the interval even after rounding.
  if (x <= lower) x = std::nextafter(lower, upper);
  if (x >= upper) x = std::nextafter(upper, lower);
  return x;
}

QuadratureRule gauss_legendre_rule(int points, Interval domain) {
  if (points < 2) throw std::domain_error("gauss_legendre_rule: points < 2");
  if (!(domain.lo < domain.hi)) {
    throw std::domain_error("gauss_legendre_rule: empty domain");
  }
  std::vector<double> x, w;
  gauss_legendre_unit(points, x, w);
  QuadratureRule rule;
  rule.domain = domain;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const double mid = 0.5 * (domain.lo + domain.hi);
  const double half = 0.5 * (domain.hi - domain.lo);
  for (int i = 0; i < points; ++i) {
    rule.nodes[i] = mid + half * x[i];
    rule.weights[i] = half * w[i];
  }
  return rule;
}

IntegralResult integrate(const std::function<double(double)>& f,
                         const QuadratureRule& rule, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("integrate: tol must be > 0");
  const int n = static_cast<int>(rule.nodes.size());
  const double lo = rule.domain.lo;
  const double width = rule.domain.measure();
  // Unit-interval offsets of the base rule, reused for each panel.
  std::vector<double> t(n), wu(n);
  for (int i = 0; i < n; ++i) {
    t[i] = (rule.nodes[i] - lo) / width;
    wu[i] = rule.weights[i] / width;
  }

  constexpr int kMaxLevel = 12;
  IntegralResult res;
  double prev = 0.0;
  for (int level = 0; level <= kMaxLevel; ++level) {
    const int panels = 1 << level;
    const double pw = width / panels;
    double total = 0.0;
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double a = lo + pnl * pw;
      for (int i = 0; i < n; ++i) {
        total += pw * wu[i] * f(a + pw * t[i]);
      }
    }
    res.value = total;
    res.levels = level;
    if (level > 0) {
      res.error_estimate = std::abs(total - prev);
      if (res.error_estimate < tol) {
        res.converged = true;
        return res;
      }
    }
    prev = total;
  }
  res.converged = false;
  return res;
}

IntegralResult integrate_half_line(const std::function<double(double)>& f,
                                   double tol, int points) {
  const QuadratureRule rule = gauss_legendre_rule(points, {0.0, 1.0});
  return integrate(
      [&f](double t) {
        const double om = 1.0 - t;
        const double u = t / om;
        return f(u) / (om * om);
      },
      rule, tol);
}

double sample_skewness(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 3) throw std::domain_error("sample_skewness: need at least 3 values");
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  if (m2 <= 0.0) throw std::domain_error("sample_skewness: zero variance");
  return m3 / std::pow(m2, 1.5);
}

HpdInterval hpd_interval(std::span<const double> draws, double prob) {
  if (draws.size() < 50) throw std::domain_error("hpd_interval: need >= 50 draws");
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::domain_error("hpd_interval: prob outside (0,1)");
  }
  std::vector<double> s(draws.begin(), draws.end());
  std::sort(s.begin(), s.end());
  const std::size_t k = s.size();
  std::size_t m = static_cast<std::size_t>(
      std::ceil(prob * static_cast<double>(k)));
  m = std::clamp<std::size_t>(m, 1, k);

  std::size_t best = 0;
  double best_width = s[m - 1] - s[0];
  for (std::size_t i = 1; i + m <= k; ++i) {
    const double width = s[i + m - 1] - s[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {s[best], s[best + m - 1], best_width == 0.0};
}

double posterior_mode(std::span<const double> draws) {
  if (draws.empty()) throw std::domain_error("posterior_mode: empty input");
  std::vector<double> s(draws.begin(), draws.end());
  std::sort(s.begin(), s.end());
  std::size_t lo = 0, n = s.size();
  while (n > 3) {
    const std::size_t m = (n + 1) / 2;
    std::size_t best = lo;
    double best_width = s[lo + m - 1] - s[lo];
    for (std::size_t i = lo + 1; i + m <= lo + n; ++i) {
      const double width = s[i + m - 1] - s[i];
      if (width < best_width) {
        best_width = width;
        best = i;
      }
    }
    lo = best;
    n = m;
  }
  if (n == 1) return s[lo];
  if (n == 2) return 0.5 * (s[lo] + s[lo + 1]);
  const double d1 = s[lo + 1] - s[lo];
  const double d2 = s[lo + 2] - s[lo + 1];
  if (d1 < d2) return 0.5 * (s[lo] + s[lo + 1]);
  if (d2 < d1) return 0.5 * (s[lo + 1] + s[lo + 2]);
  return s[lo + 1];
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::domain_error("quantile: empty input");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

double median(std::span<const double> draws) {
  std::vector<double> s(draws.begin(), draws.end());
  std::sort(s.begin(), s.end());
  return quantile(s, 0.5);
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::domain_error("mean: empty input");
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

}  // namespace skewlink::numerics
