#ifndef SKEWLINK_DIAGNOSTICS_HPP_
#define SKEWLINK_DIAGNOSTICS_HPP_

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "skewlink/sampler.hpp"

namespace skewlink::diagnostics {

using model::BinaryDataset;
using sampler::ChainConfig;
using sampler::PosteriorDraws;

enum class Statistic { kMean, kMedian, kMode };

std::string statistic_name(Statistic s);
double apply_statistic(Statistic s, std::span<const double> draws);

struct ResidualDraws {
  Eigen::MatrixXd eps;              // retained x n
  Eigen::VectorXd posterior_mean;   // per observation
  Eigen::VectorXd skewness;         // per retained draw
};

// Latent residual of draw k, observation i:
// eps = sqrt(u) (z - x'beta + Delta (h - b)/sqrt(u)) / sqrt(tau),
// which recovers the standard-normal shock of the latent representation
// exactly. Requires retained latents.
ResidualDraws latent_residuals(const PosteriorDraws& draws,
                               const BinaryDataset& data);

struct EnvelopeBand {
  std::vector<double> theoretical;  // Phi^-1((j - 0.5)/n)
  std::vector<double> observed;     // sorted posterior-mean residuals
  std::vector<double> lower, upper;
  double band_prob = 0.95;
  int inside() const;
};

EnvelopeBand normal_envelope(const ResidualDraws& res, int replicates,
                             double band_prob, Rng& rng);

struct SignReport {
  int sign = +1;  // sign of delta suggested by the scheme
  double stat_mean = 0.0, stat_median = 0.0, stat_mode = 0.0;
  std::vector<double> skewness_draws;
  Statistic used = Statistic::kMean;
  std::vector<std::string> warnings;
  int sign_under(Statistic s) const;
};

// Probit pre-fit (beta ~ N(0,1000 I)), per-draw residual skewness, then
// sign(-statistic) as the sign of delta.
SignReport select_delta_sign(const BinaryDataset& data, const ChainConfig& cfg,
                             Statistic statistic = Statistic::kMean);

struct SummaryRow {
  std::string name;
  double mean = 0, median = 0, mode = 0, hpd_lower = 0, hpd_upper = 0;
  bool hpd_degenerate = false;
  bool recommended_known = false;
  Statistic recommended = Statistic::kMean;
};

// Per-parameter posterior summaries; the recommended statistic follows the
// per-family mapping (regression: median for CSN/CST/CSS, mean for CSCN;
// delta: mode; nu: mode CST, median CSS, mean CSCN).
std::vector<SummaryRow> summarize(const PosteriorDraws& draws, double prob);

struct LinkCurve {
  std::vector<double> eta;
  std::vector<double> mean, lower, upper;
  int quad_failures = 0;
};

// Posterior mean and equal-tail band of success_prob over an eta grid.
LinkCurve link_curve(const PosteriorDraws& draws, std::span<const double> etas,
                     double band_prob, int threads);

}  // namespace skewlink::diagnostics

#endif  // SKEWLINK_DIAGNOSTICS_HPP_
