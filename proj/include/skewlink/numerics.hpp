#ifndef SKEWLINK_NUMERICS_HPP_
#define SKEWLINK_NUMERICS_HPP_

#include <functional>
#include <span>
#include <vector>

#include "skewlink/rng.hpp"

namespace skewlink::numerics {

double std_normal_pdf(double x);

// Phi(x); accepts +/-inf. Relative error below 1e-14 everywhere.
double std_normal_cdf(double x);

// log Phi(x), stable far into the left tail.
double log_std_normal_cdf(double x);

// Phi^{-1}(p) for p in (0,1) (Wichura's AS 241, double precision).
double std_normal_quantile(double p);

// log density of N(mean, var) at x.
double log_normal_pdf(double x, double mean, double var);

// Owen's T function. Series expansion for |a| <= 1/2, 64-point
// Gauss-Legendre on the defining integral for 1/2 < |a| <= 1, and the
// reflection T(h,a) = (Phi(h)+Phi(ah))/2 - Phi(h)Phi(ah) - T(ah,1/a)
// for |a| > 1. Absolute error below 1e-12.
double owens_t(double h, double a);

// One draw from N(mean, variance) restricted to (lower, upper); either
// bound may be infinite. Inverse-CDF for mild truncation, exponential
// rejection for one-sided tails beyond 3 sigma.
double sample_truncated_normal(double mean, double variance, double lower,
                               double upper, Rng& rng);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double measure() const { return hi - lo; }
};

// Base quadrature rule over a finite interval. integrate() refines it
// dyadically, so the rule fixes only the per-panel nodes.
struct QuadratureRule {
  std::vector<double> nodes;    // abscissae inside domain
  std::vector<double> weights;  // all positive
  Interval domain;
};

QuadratureRule gauss_legendre_rule(int points, Interval domain);

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  int levels = 0;
};

// Refine the rule over 1, 2, 4, ... panels until two successive estimates
// differ by less than tol (absolute) or the level cap is hit, in which case
// the result is flagged via converged=false.
IntegralResult integrate(const std::function<double(double)>& f,
                         const QuadratureRule& rule, double tol);

// Integral over [0, inf) through the map u = t/(1-t).
IntegralResult integrate_half_line(const std::function<double(double)>& f,
                                   double tol, int points = 64);

// [sum (v-vbar)^3/n] / [sum (v-vbar)^2/n]^{3/2}
double sample_skewness(std::span<const double> v);

struct HpdInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool degenerate = false;  // all candidate windows had zero width
};

// Shortest window of ceil(prob*K) consecutive sorted draws; leftmost wins
// ties. Requires at least 50 draws.
HpdInterval hpd_interval(std::span<const double> draws, double prob);

// Half-sample mode (recursive shortest half of the sorted draws).
double posterior_mode(std::span<const double> draws);

double quantile(std::span<const double> sorted, double q);
double median(std::span<const double> draws);
double mean(std::span<const double> v);

}  // namespace skewlink::numerics

#endif  // SKEWLINK_NUMERICS_HPP_
