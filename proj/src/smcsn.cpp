#include "skewlink/smcsn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skewlink/numerics.hpp"
#include "skewlink/parallel.hpp"

namespace skewlink::smcsn {

namespace num = skewlink::numerics;

void CenteredParams::validate() const {
  if (!(sigma2 > 0.0)) throw std::domain_error("CenteredParams: sigma2 <= 0");
  if (!(std::abs(delta) < 1.0)) {
    throw std::domain_error("CenteredParams: |delta| >= 1");
  }
  if (!std::isfinite(mu)) throw std::domain_error("CenteredParams: mu not finite");
}

int MixingFamily::shape_count() const {
  switch (tag) {
    case Family::kCst:
    case Family::kCss:
      return 1;
    case Family::kCscn:
      return 2;
    default:
      return 0;
  }
}

void MixingFamily::validate() const {
  switch (tag) {
    case Family::kNormal:
    case Family::kCsn:
      return;
    case Family::kCst:
      if (!(nu1 > 2.0 && nu1 <= 40.0)) {
        throw std::domain_error("CST: nu must lie in (2,40]");
      }
      return;
    case Family::kCss:
      if (!(nu1 > 1.0 && nu1 <= 40.0)) {
        throw std::domain_error("CSS: nu must lie in (1,40]");
      }
      return;
    case Family::kCscn:
      if (!(nu1 > 0.0 && nu1 < 1.0 && nu2 > 0.0 && nu2 < 1.0)) {
        throw std::domain_error("CSCN: nu1, nu2 must lie in (0,1)");
      }
      return;
  }
  throw std::domain_error("MixingFamily: unknown tag");
}

std::string MixingFamily::name() const {
  switch (tag) {
    case Family::kNormal: return "probit";
    case Family::kCsn: return "csn";
    case Family::kCst: return "cst";
    case Family::kCss: return "css";
    case Family::kCscn: return "cscn";
  }
  return "?";
}

MixingFamily family_from_name(const std::string& name, double nu1, double nu2) {
  MixingFamily fam;
  if (name == "probit" || name == "normal") {
    fam = MixingFamily::normal();
  } else if (name == "csn") {
    fam = MixingFamily::csn();
  } else if (name == "cst") {
    fam = MixingFamily::cst(nu1);
  } else if (name == "css") {
    fam = MixingFamily::css(nu1);
  } else if (name == "cscn") {
    fam = MixingFamily::cscn(nu1, nu2);
  } else {
    throw std::domain_error("unknown family: " + name);
  }
  return fam;
}

double pearson_gamma(double delta) {
  if (!(std::abs(delta) < 1.0)) {
    throw std::domain_error("pearson_gamma: |delta| >= 1");
  }
  const double bd = kB * delta;
  return 0.5 * (4.0 - 3.141592653589793238462643) * bd * bd * bd /
         std::pow(1.0 - bd * bd, 1.5);
}

DirectDerived cp_to_dp(const CenteredParams& p) {
  p.validate();
  DirectDerived d;
  const double sigma = std::sqrt(p.sigma2);
  const double delta = p.delta;
  d.gamma = pearson_gamma(delta);
  const double g13 = std::cbrt(d.gamma);  // signed cube root
  d.xi = p.mu - sigma * g13 * kS;
  d.omega = sigma * std::sqrt(1.0 + kS * kS * g13 * g13);
  d.lambda = delta / std::sqrt(1.0 - delta * delta);
  const double r = 1.0 - kB * kB * delta * delta;
  d.Delta = delta / std::sqrt(r);
  d.tau = (1.0 - delta * delta) / r;
  return d;
}

double csn_pdf(double y, const CenteredParams& p) {
  const DirectDerived d = cp_to_dp(p);
  const double z = (y - d.xi) / d.omega;
  return 2.0 / d.omega * num::std_normal_pdf(z) *
         num::std_normal_cdf(d.lambda * z);
}

double csn_cdf(double y, const CenteredParams& p) {
  const DirectDerived d = cp_to_dp(p);
  const double z = (y - d.xi) / d.omega;
  const double f = num::std_normal_cdf(z) - 2.0 * num::owens_t(z, d.lambda);
  return std::clamp(f, 0.0, 1.0);
}

double mixing_einv(const MixingFamily& fam) {
  fam.validate();
  switch (fam.tag) {
    case Family::kNormal:
    case Family::kCsn:
      return 1.0;
    case Family::kCst:
      return fam.nu1 / (fam.nu1 - 2.0);
    case Family::kCss:
      return fam.nu1 / (fam.nu1 - 1.0);
    case Family::kCscn:
      return (fam.nu1 + fam.nu2 * (1.0 - fam.nu1)) / fam.nu2;
  }
  throw std::domain_error("mixing_einv: unknown family");
}

double mixing_sample(const MixingFamily& fam, Rng& rng) {
  switch (fam.tag) {
    case Family::kNormal:
    case Family::kCsn:
      return 1.0;
    case Family::kCst:
      return rng.gamma(0.5 * fam.nu1, 0.5 * fam.nu1);
    case Family::kCss:
      // beta(nu, 1) by inversion.
      return std::pow(rng.uniform(), 1.0 / fam.nu1);
    case Family::kCscn:
      return rng.uniform() < fam.nu1 ? fam.nu2 : 1.0;
  }
  throw std::domain_error("mixing_sample: unknown family");
}

namespace {

constexpr double kCdfTol = 1e-8;

double log_gamma_mixing_pdf(double u, double nu) {
  const double a = 0.5 * nu;
  return a * std::log(a) - std::lgamma(a) + (a - 1.0) * std::log(u) - a * u;
}

// Adaptive Gauss-Legendre of f over (0,1) through t = s^4, which smooths
// the u^{a-1} behaviour of the mixing densities near zero.
num::IntegralResult integrate_unit(const std::function<double(double)>& f,
                                   double tol) {
  static const num::QuadratureRule unit_rule =
      num::gauss_legendre_rule(64, {0.0, 1.0});
  return num::integrate(
      [&f](double s) {
        const double s2 = s * s;
        return f(s2 * s2) * 4.0 * s2 * s;
      },
      unit_rule, tol);
}

// Outer quadrature of csn_cdf(y; mu, sigma2/u, delta) against G(du|nu).
double mixed_cdf(double y, const CenteredParams& p, const MixingFamily& fam,
                 QuadReport* report) {
  const auto scaled = [&](double u) {
    CenteredParams q{p.mu, p.sigma2 / u, p.delta};
    return csn_cdf(y, q);
  };

  num::IntegralResult res;
  if (fam.tag == Family::kCst) {
    // u = t/(1-t) maps (0,inf) onto (0,1).
    res = integrate_unit(
        [&](double t) {
          const double om = 1.0 - t;
          const double u = t / om;
          return std::exp(log_gamma_mixing_pdf(u, fam.nu1)) * scaled(u) /
                 (om * om);
        },
        kCdfTol);
  } else {
    // CSS: beta(nu,1) density nu u^{nu-1} on (0,1).
    res = integrate_unit(
        [&](double u) {
          return fam.nu1 * std::pow(u, fam.nu1 - 1.0) * scaled(u);
        },
        kCdfTol);
  }
  if (report != nullptr) {
    report->converged = res.converged;
    report->error_estimate = res.error_estimate;
  }
  return std::clamp(res.value, 0.0, 1.0);
}

}  // namespace

double smcsn_cdf(double y, const CenteredParams& p, const MixingFamily& fam,
                 QuadReport* report) {
  fam.validate();
  if (report != nullptr) *report = QuadReport{};
  switch (fam.tag) {
    case Family::kNormal: {
      CenteredParams q{p.mu, p.sigma2, 0.0};
      return csn_cdf(y, q);
    }
    case Family::kCsn:
      return csn_cdf(y, p);
    case Family::kCscn: {
      CenteredParams contaminated{p.mu, p.sigma2 / fam.nu2, p.delta};
      return fam.nu1 * csn_cdf(y, contaminated) +
             (1.0 - fam.nu1) * csn_cdf(y, p);
    }
    case Family::kCst:
    case Family::kCss:
      return mixed_cdf(y, p, fam, report);
  }
  throw std::domain_error("smcsn_cdf: unknown family");
}

double smcsn_sample(const CenteredParams& p, const MixingFamily& fam, Rng& rng) {
  // The Normal family pins delta at 0 by definition.
  const CenteredParams q{p.mu, p.sigma2,
                         fam.tag == Family::kNormal ? 0.0 : p.delta};
  const DirectDerived d = cp_to_dp(q);
  const double u = mixing_sample(fam, rng);
  const double h = std::abs(rng.normal());
  const double t = rng.normal();
  const double sigma = std::sqrt(q.sigma2);
  return q.mu + sigma / std::sqrt(u) * (d.Delta * (h - kB) + std::sqrt(d.tau) * t);
}

namespace {
constexpr std::size_t kSampleBlock = 8192;
}

std::vector<double> sample_many(const CenteredParams& p, const MixingFamily& fam,
                                std::size_t count, std::uint64_t seed,
                                int threads) {
  fam.validate();
  std::vector<double> out(count);
  const std::int64_t blocks =
      static_cast<std::int64_t>((count + kSampleBlock - 1) / kSampleBlock);
  parallel_for(blocks, threads, [&](std::int64_t blk) {
    Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(blk)));
    const std::size_t lo = static_cast<std::size_t>(blk) * kSampleBlock;
    const std::size_t hi = std::min(count, lo + kSampleBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      out[i] = smcsn_sample(p, fam, rng);
    }
  });
  return out;
}

std::vector<double> sample_many_serial(const CenteredParams& p,
                                       const MixingFamily& fam,
                                       std::size_t count, std::uint64_t seed) {
  fam.validate();
  std::vector<double> out(count);
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    Rng rng(Rng::derive_seed(seed, blk));
    const std::size_t lo = blk * kSampleBlock;
    const std::size_t hi = std::min(count, lo + kSampleBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      out[i] = smcsn_sample(p, fam, rng);
    }
  }
  return out;
}

}  // namespace skewlink::smcsn
