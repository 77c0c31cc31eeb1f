#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "skewlink/numerics.hpp"
#include "skewlink/rng.hpp"
#include "support/test_support.hpp"

using namespace skewlink;
namespace num = skewlink::numerics;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double owens_defining_integral(double h, double a) {
  // (1/2pi) int_0^a exp(-h^2(1+x^2)/2)/(1+x^2) dx by adaptive Simpson.
  const double sign = a < 0 ? -1.0 : 1.0;
  const double lim = std::abs(a);
  const double v = testsup::adaptive_simpson(
      [h](double x) {
        return std::exp(-0.5 * h * h * (1.0 + x * x)) / (1.0 + x * x);
      },
      0.0, lim, 1e-15);
  return sign * v / (2.0 * std::numbers::pi);
}
}  // namespace

TEST_CASE("owens_t anchors") {
  CHECK(num::owens_t(0.0, 1.0) == doctest::Approx(0.125).epsilon(1e-13));
  CHECK(num::owens_t(3.7, 0.0) == 0.0);
  CHECK(num::owens_t(-2.2, 0.0) == 0.0);
  // T(h,1) = Phi(h)(1-Phi(h))/2
  const double phi = num::std_normal_cdf(0.5);
  CHECK(num::owens_t(0.5, 1.0) ==
        doctest::Approx(0.5 * phi * (1.0 - phi)).epsilon(1e-12));
  CHECK(std::abs(num::owens_t(0.5, 1.0) - 0.10667106296144852) < 1e-13);
}

TEST_CASE("owens_t matches the defining integral") {
  const double hs[] = {0.0625, 0.5, 1.0, 2.0, 4.0, 7.5};
  const double as[] = {0.01, 0.3, 0.49999, 0.5, 0.500001, 0.75, 0.994,
                       1.0, 1.5, 4.0, 40.0};
  for (double h : hs) {
    for (double a : as) {
      const double want = owens_defining_integral(h, a);
      CHECK(std::abs(num::owens_t(h, a) - want) < 1e-12);
    }
  }
  // frozen external oracle values (scipy.special.owens_t)
  CHECK(std::abs(num::owens_t(2.0, 0.5) - 0.008625077985521508) < 1e-14);
  CHECK(std::abs(num::owens_t(0.3, 2.5) - 0.1727035640063457) < 1e-13);
  CHECK(std::abs(num::owens_t(1.2, 3.0) - 0.05753253232452389) < 1e-13);
  CHECK(std::abs(num::owens_t(4.0, 0.7) - 1.578209778142428e-05) < 1e-15);
  CHECK(std::abs(num::owens_t(2.5, 10.0) - 0.003104832662888069) < 1e-13);
  CHECK(std::abs(num::owens_t(0.01, 50.0) - 0.24642753439434217) < 1e-13);
  CHECK(std::abs(num::owens_t(6.0, 1.0) - 4.932938220321733e-10) < 1e-16);
}

TEST_CASE("owens_t symmetry and bounds on random inputs") {
  Rng rng(99);
  for (int k = 0; k < 100; ++k) {
    const double h = rng.uniform(-6.0, 6.0);
    const double a = std::tan(rng.uniform(-1.5, 1.5));
    const double t = num::owens_t(h, a);
    CHECK(t == -num::owens_t(h, -a));
    CHECK(num::owens_t(-h, a) == t);
    CHECK(std::abs(t) <= 0.25 + 1e-15);
  }
  CHECK_THROWS_AS(num::owens_t(kInf, 1.0), std::domain_error);
  CHECK_THROWS_AS(num::owens_t(0.5, std::nan("")), std::domain_error);
}

TEST_CASE("std_normal_cdf") {
  CHECK(num::std_normal_cdf(0.0) == 0.5);
  CHECK(num::std_normal_cdf(kInf) == 1.0);
  CHECK(num::std_normal_cdf(-kInf) == 0.0);
  // derived by inverting a high-precision erf oracle
  CHECK(std::abs(num::std_normal_cdf(1.959964) - 0.9750000009035577) < 1e-15);
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.uniform(-8.0, 8.0);
    CHECK(std::abs(num::std_normal_cdf(x) + num::std_normal_cdf(-x) - 1.0) <
          1e-14);
  }
}

TEST_CASE("std_normal_quantile inverts the cdf") {
  CHECK(std::abs(num::std_normal_quantile(0.975) - 1.959963984540054) < 1e-12);
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const double p = rng.uniform();
    const double x = num::std_normal_quantile(p);
    CHECK(std::abs(num::std_normal_cdf(x) - p) < 1e-12);
  }
  CHECK(num::std_normal_quantile(0.0) == -kInf);
  CHECK(num::std_normal_quantile(1.0) == kInf);
}

TEST_CASE("truncated normal support and moments") {
  Rng rng(3);
  for (int k = 0; k < 10000; ++k) {
    CHECK(num::sample_truncated_normal(0.0, 1.0, 0.0, kInf, rng) > 0.0);
  }
  // untruncated case: mean within 4/sqrt(1e6)
  double s = 0.0;
  const int n = 1000000;
  for (int k = 0; k < n; ++k) {
    s += num::sample_truncated_normal(0.0, 1.0, -kInf, kInf, rng);
  }
  CHECK(std::abs(s / n) < 4.0e-3);

  // one-sided mean: 2 + phi(-2)/(1-Phi(-2))
  s = 0.0;
  for (int k = 0; k < n; ++k) {
    s += num::sample_truncated_normal(2.0, 1.0, 0.0, kInf, rng);
  }
  CHECK(std::abs(s / n - 2.05524786267899) < 4.0e-3);

  CHECK_THROWS_AS(num::sample_truncated_normal(0, 1, 1.0, 1.0, rng),
                  std::domain_error);
  CHECK_THROWS_AS(num::sample_truncated_normal(0, 0.0, 0, 1, rng),
                  std::domain_error);
}

TEST_CASE("truncated normal law (KS): mild and deep regimes") {
  Rng rng(4);
  const auto tn_cdf = [](double x, double mean, double sd, double lo,
                         double hi) {
    const double pa = num::std_normal_cdf((lo - mean) / sd);
    const double pb = num::std_normal_cdf((hi - mean) / sd);
    return (num::std_normal_cdf((x - mean) / sd) - pa) / (pb - pa);
  };
  {
    std::vector<double> draws(20000);
    for (auto& d : draws) {
      d = num::sample_truncated_normal(0.5, 2.0, -1.0, 2.0, rng);
    }
    const double p = testsup::ks_test_cdf(
        draws, [&](double x) {
          return tn_cdf(x, 0.5, std::sqrt(2.0), -1.0, 2.0);
        });
    CHECK(p > 0.01);
  }
  {
    // alpha = 5 forces the exponential-rejection path
    std::vector<double> draws(20000);
    for (auto& d : draws) {
      d = num::sample_truncated_normal(0.0, 1.0, 5.0, kInf, rng);
    }
    const double p = testsup::ks_test_cdf(
        draws, [&](double x) { return tn_cdf(x, 0.0, 1.0, 5.0, 40.0); });
    CHECK(p > 0.01);
    for (double d : draws) CHECK(d > 5.0);
  }
}

TEST_CASE("quadrature rule invariants") {
  const auto rule = num::gauss_legendre_rule(64, {-2.0, 3.0});
  CHECK(rule.nodes.size() == 64);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.weights.size(); ++i) {
    CHECK(rule.weights[i] > 0.0);
    CHECK(rule.nodes[i] > -2.0);
    CHECK(rule.nodes[i] < 3.0);
    total += rule.weights[i];
  }
  CHECK(std::abs(total - rule.domain.measure()) < 1e-12);
  CHECK_THROWS_AS(num::gauss_legendre_rule(1, {0.0, 1.0}), std::domain_error);
}

TEST_CASE("integrate: analytic battery") {
  struct Case {
    std::function<double(double)> f;
    num::Interval dom;
    double want;
    double tol;
  };
  const double pi = std::numbers::pi;
  const std::vector<Case> battery = {
      {[](double) { return 1.0; }, {0, 1}, 1.0, 1e-10},
      {[](double u) { return u; }, {0, 1}, 0.5, 1e-10},
      {[](double u) { return u * u * u; }, {0, 1}, 0.25, 1e-10},
      {[pi](double u) { return std::sin(u); }, {0, pi}, 2.0, 1e-10},
      {[](double u) { return std::exp(u); }, {0, 2}, std::exp(2.0) - 1.0,
       1e-10},
      {[](double u) { return 1.0 / (1.0 + u * u); }, {0, 1}, pi / 4.0, 1e-10},
      {[](double u) { return std::log(u + 1.0); }, {0, 1},
       2.0 * std::log(2.0) - 1.0, 1e-10},
      // endpoint singularity in the derivative: slower dyadic convergence
      {[](double u) { return std::sqrt(u); }, {0, 4}, 16.0 / 3.0, 1e-7},
      {[](double u) { return std::cos(10.0 * u); }, {0, 1},
       std::sin(10.0) / 10.0, 1e-10},
      {[](double u) { return std::exp(-u * u); }, {-3, 3},
       std::sqrt(pi) * std::erf(3.0), 1e-10},
  };
  for (const auto& c : battery) {
    const auto rule = num::gauss_legendre_rule(64, c.dom);
    const auto res = num::integrate(c.f, rule, c.tol);
    CHECK(res.converged);
    CHECK(std::abs(res.value - c.want) < c.tol);
  }
}

TEST_CASE("integrate: half line and non-convergence flag") {
  const auto exp_res = num::integrate_half_line(
      [](double u) { return std::exp(-u); }, 1e-10);
  CHECK(exp_res.converged);
  CHECK(std::abs(exp_res.value - 1.0) < 1e-10);

  // 1e6 rad/unit oscillation cannot be resolved at the refinement cap.
  const auto unit = num::gauss_legendre_rule(64, {0.0, 1.0});
  const auto bad = num::integrate(
      [](double u) { return std::sin(1e6 * u); }, unit, 1e-13);
  CHECK_FALSE(bad.converged);
}

TEST_CASE("sample_skewness") {
  const std::vector<double> sym = {-1.0, 0.0, 1.0};
  CHECK(num::sample_skewness(sym) == doctest::Approx(0.0).epsilon(1e-14));
  const std::vector<double> v = {0.0, 0.0, 1.0};
  CHECK(num::sample_skewness(v) ==
        doctest::Approx(0.7071067811865475).epsilon(1e-12));

  Rng rng(5);
  std::vector<double> x(50);
  for (auto& e : x) e = rng.normal();
  const double base = num::sample_skewness(x);
  for (int k = 0; k < 20; ++k) {
    const double a = rng.uniform(0.1, 4.0);
    const double c = rng.uniform(-10.0, 10.0);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + c;
    CHECK(num::sample_skewness(y) == doctest::Approx(base).epsilon(1e-9));
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = -a * x[i] + c;
    CHECK(num::sample_skewness(y) == doctest::Approx(-base).epsilon(1e-9));
  }
  const std::vector<double> flat = {2.0, 2.0, 2.0};
  CHECK_THROWS_AS(num::sample_skewness(flat), std::domain_error);
  const std::vector<double> two = {1.0, 2.0};
  CHECK_THROWS_AS(num::sample_skewness(two), std::domain_error);
}

TEST_CASE("hpd_interval") {
  std::vector<double> flat(60, 3.25);
  const auto deg = num::hpd_interval(flat, 0.95);
  CHECK(deg.lower == 3.25);
  CHECK(deg.upper == 3.25);
  CHECK(deg.degenerate);

  std::vector<double> grid(100);
  for (int i = 0; i < 100; ++i) grid[i] = i + 1.0;
  const auto g = num::hpd_interval(grid, 0.95);
  CHECK(g.lower == 1.0);  // leftmost shortest window
  CHECK(g.upper == 95.0);
  CHECK_FALSE(g.degenerate);

  Rng rng(6);
  std::vector<double> z(10000);
  for (auto& e : z) e = rng.normal();
  const auto h = num::hpd_interval(z, 0.95);
  CHECK(std::abs(h.lower + 1.959964) < 0.15);
  CHECK(std::abs(h.upper - 1.959964) < 0.15);

  std::vector<double> small(10, 1.0);
  CHECK_THROWS_AS(num::hpd_interval(small, 0.95), std::domain_error);
}

TEST_CASE("hpd width never exceeds the equal-tailed width") {
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> draws(400);
    const double shape = rng.uniform(0.5, 5.0);
    for (auto& d : draws) d = rng.gamma(shape, 1.0);
    const double prob = 0.9;
    const auto hpd = num::hpd_interval(draws, prob);
    std::sort(draws.begin(), draws.end());
    const double lo = num::quantile(draws, 0.05);
    const double hi = num::quantile(draws, 0.95);
    CHECK(hpd.upper - hpd.lower <= hi - lo + 1e-12);
  }
}

TEST_CASE("posterior_mode") {
  std::vector<double> flat(60, -1.5);
  CHECK(num::posterior_mode(flat) == -1.5);
  const std::vector<double> atom = {0.0, 0.0, 0.0, 5.0};
  CHECK(num::posterior_mode(atom) == 0.0);

  Rng rng(8);
  std::vector<double> b(10000);
  for (auto& e : b) e = rng.beta(2.0, 5.0);
  CHECK(std::abs(num::posterior_mode(b) - 0.2) < 0.05);
}

TEST_CASE("rng determinism and derived streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  CHECK(Rng::derive_seed(1, 0) != Rng::derive_seed(1, 1));
  CHECK(Rng::derive_seed(1, 0) != Rng::derive_seed(2, 0));
  // gamma moments sanity
  Rng g(9);
  double s = 0.0;
  for (int i = 0; i < 200000; ++i) s += g.gamma(3.0, 2.0);
  CHECK(std::abs(s / 200000 - 1.5) < 0.02);
}
