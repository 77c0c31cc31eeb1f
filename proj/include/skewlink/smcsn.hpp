#ifndef SKEWLINK_SMCSN_HPP_
#define SKEWLINK_SMCSN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "skewlink/rng.hpp"

namespace skewlink::smcsn {

// E|N(0,1)| -- the half-normal mean, written b throughout.
inline constexpr double kB = 0.79788456080286535588;
// (2/(4-pi))^{1/3}
inline constexpr double kS = 1.32570081510001110500;

// Centered parameterization: mean, scale, skewness in (-1,1).
struct CenteredParams {
  double mu = 0.0;
  double sigma2 = 1.0;
  double delta = 0.0;
  void validate() const;
};

// Quantities of the direct parameterization derived from CenteredParams.
struct DirectDerived {
  double xi = 0.0;      // location
  double omega = 1.0;   // scale (> 0)
  double lambda = 0.0;  // shape
  double gamma = 0.0;   // Pearson skewness coefficient
  double b = kB;
  double s = kS;
  double Delta = 0.0;   // delta / sqrt(1 - b^2 delta^2)
  double tau = 1.0;     // (1 - delta^2) / (1 - b^2 delta^2), in (0,1]
};

enum class Family { kNormal, kCsn, kCst, kCss, kCscn };

// The mixing law G(.|nu) of U. Shape bounds keep Var(Y) finite:
// CST nu in (2,40], CSS nu in (1,40], CSCN nu1,nu2 in (0,1).
struct MixingFamily {
  Family tag = Family::kCsn;
  double nu1 = 0.0;
  double nu2 = 0.0;

  static MixingFamily normal() { return {Family::kNormal, 0.0, 0.0}; }
  static MixingFamily csn() { return {Family::kCsn, 0.0, 0.0}; }
  static MixingFamily cst(double nu) { return {Family::kCst, nu, 0.0}; }
  static MixingFamily css(double nu) { return {Family::kCss, nu, 0.0}; }
  static MixingFamily cscn(double nu1, double nu2) {
    return {Family::kCscn, nu1, nu2};
  }

  int shape_count() const;
  void validate() const;
  std::string name() const;
};

MixingFamily family_from_name(const std::string& name, double nu1, double nu2);

// Pearson skewness ((4-pi)/2) (b d)^3 / (1 - b^2 d^2)^{3/2}; odd in d.
double pearson_gamma(double delta);

DirectDerived cp_to_dp(const CenteredParams& p);

double csn_pdf(double y, const CenteredParams& p);

// Phi(z) - 2 T(z, lambda) with z = (y - xi)/omega.
double csn_cdf(double y, const CenteredParams& p);

// E(U^{-1}) under G(.|nu).
double mixing_einv(const MixingFamily& fam);

double mixing_sample(const MixingFamily& fam, Rng& rng);

struct QuadReport {
  bool converged = true;
  double error_estimate = 0.0;
};

// CDF of the scale mixture with k(u) = 1/u. CSCN is the exact two-point
// mixture; CST/CSS integrate the mixing law by adaptive Gauss-Legendre on
// (0,1) (CST through u = t/(1-t)) to absolute tolerance 1e-8.
double smcsn_cdf(double y, const CenteredParams& p, const MixingFamily& fam,
                 QuadReport* report = nullptr);

// Exact draw through U, H half-normal, T normal:
// Y = mu + sigma/sqrt(U) * (Delta (H - b) + sqrt(tau) T).
double smcsn_sample(const CenteredParams& p, const MixingFamily& fam, Rng& rng);

// Batch sampler: OpenMP over fixed-size blocks, each block on its own
// sub-stream, so the output is identical for every thread count.
std::vector<double> sample_many(const CenteredParams& p, const MixingFamily& fam,
                                std::size_t count, std::uint64_t seed,
                                int threads);

// Plain-loop reference for sample_many (same blocks, same sub-streams).
std::vector<double> sample_many_serial(const CenteredParams& p,
                                       const MixingFamily& fam,
                                       std::size_t count, std::uint64_t seed);

}  // namespace skewlink::smcsn

#endif  // SKEWLINK_SMCSN_HPP_
