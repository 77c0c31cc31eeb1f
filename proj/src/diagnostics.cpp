#include "skewlink/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skewlink/numerics.hpp"
#include "skewlink/parallel.hpp"

namespace skewlink::diagnostics {

namespace num = skewlink::numerics;
using smcsn::Family;
using smcsn::kB;

std::string statistic_name(Statistic s) {
  switch (s) {
    case Statistic::kMean: return "mean";
    case Statistic::kMedian: return "median";
    case Statistic::kMode: return "mode";
  }
  return "?";
}

double apply_statistic(Statistic s, std::span<const double> draws) {
  switch (s) {
    case Statistic::kMean: return num::mean(draws);
    case Statistic::kMedian: return num::median(draws);
    case Statistic::kMode: return num::posterior_mode(draws);
  }
  throw std::domain_error("apply_statistic: unknown statistic");
}

ResidualDraws latent_residuals(const PosteriorDraws& draws,
                               const BinaryDataset& data) {
  if (!draws.z || !draws.h || !draws.u) {
    throw std::domain_error(
        "latent_residuals: chain was run without retain_latents; "
        "refit with latent retention enabled");
  }
  const int kept = draws.retained();
  const int n = data.n();
  ResidualDraws out;
  out.eps.resize(kept, n);
  out.skewness.resize(kept);

  for (int k = 0; k < kept; ++k) {
    const double d = draws.delta[k];
    const double r = 1.0 - kB * kB * d * d;
    const double Delta = d / std::sqrt(r);
    const double tau = (1.0 - d * d) / r;
    const Eigen::VectorXd eta = data.X * draws.beta.row(k).transpose();
    for (int i = 0; i < n; ++i) {
      const double u = (*draws.u)(k, i);
      const double h = (*draws.h)(k, i);
      const double z = (*draws.z)(k, i);
      out.eps(k, i) =
          std::sqrt(u) * (z - eta[i] + Delta * (h - kB) / std::sqrt(u)) /
          std::sqrt(tau);
    }
    const auto row = out.eps.row(k);
    std::vector<double> v(row.begin(), row.end());
    out.skewness[k] = num::sample_skewness(v);
  }
  out.posterior_mean = out.eps.colwise().mean();
  return out;
}

int EnvelopeBand::inside() const {
  int count = 0;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    if (observed[j] >= lower[j] && observed[j] <= upper[j]) ++count;
  }
  return count;
}

EnvelopeBand normal_envelope(const ResidualDraws& res, int replicates,
                             double band_prob, Rng& rng) {
  if (replicates < 100) {
    throw std::domain_error("normal_envelope: need >= 100 replicates");
  }
  if (!(band_prob > 0.0 && band_prob < 1.0)) {
    throw std::domain_error("normal_envelope: band_prob outside (0,1)");
  }
  const int n = static_cast<int>(res.posterior_mean.size());
  EnvelopeBand band;
  band.band_prob = band_prob;
  band.observed.assign(res.posterior_mean.data(), res.posterior_mean.data() + n);
  std::sort(band.observed.begin(), band.observed.end());
  band.theoretical.resize(n);
  for (int j = 0; j < n; ++j) {
    band.theoretical[j] = num::std_normal_quantile((j + 0.5) / n);
  }

  // Order statistics of `replicates` standard-normal samples of size n.
  Eigen::MatrixXd sims(replicates, n);
  std::vector<double> sample(n);
  for (int r = 0; r < replicates; ++r) {
    for (int i = 0; i < n; ++i) sample[i] = rng.normal();
    std::sort(sample.begin(), sample.end());
    for (int i = 0; i < n; ++i) sims(r, i) = sample[i];
  }
  band.lower.resize(n);
  band.upper.resize(n);
  const double lo_q = 0.5 * (1.0 - band_prob);
  const double hi_q = 0.5 * (1.0 + band_prob);
  std::vector<double> col(replicates);
  for (int j = 0; j < n; ++j) {
    for (int r = 0; r < replicates; ++r) col[r] = sims(r, j);
    std::sort(col.begin(), col.end());
    band.lower[j] = num::quantile(col, lo_q);
    band.upper[j] = num::quantile(col, hi_q);
  }
  return band;
}

int SignReport::sign_under(Statistic s) const {
  double v = 0.0;
  switch (s) {
    case Statistic::kMean: v = stat_mean; break;
    case Statistic::kMedian: v = stat_median; break;
    case Statistic::kMode: v = stat_mode; break;
  }
  return v <= 0.0 ? +1 : -1;
}

SignReport select_delta_sign(const BinaryDataset& data, const ChainConfig& cfg,
                             Statistic statistic) {
  // Probit pre-fit with the weakly informative normal prior; K retained
  // draws of (beta, Z).
  model::LinkSpec probit{smcsn::MixingFamily::normal(),
                         model::SignRegion::kPositive};
  model::PriorSpec prior;
  prior.kind = model::PriorKind::kNormalFixed;
  prior.normal_var = 1000.0;
  ChainConfig fit_cfg = cfg;
  fit_cfg.retain_latents = true;

  const PosteriorDraws draws = sampler::run_chain(data, probit, fit_cfg, prior);

  SignReport rep;
  rep.warnings = data.warnings;
  const int kept = draws.retained();
  rep.skewness_draws.resize(kept);
  const int n = data.n();
  std::vector<double> eps(n);
  for (int k = 0; k < kept; ++k) {
    const Eigen::VectorXd eta = data.X * draws.beta.row(k).transpose();
    for (int i = 0; i < n; ++i) eps[i] = (*draws.z)(k, i) - eta[i];
    rep.skewness_draws[k] = num::sample_skewness(eps);
  }
  rep.stat_mean = num::mean(rep.skewness_draws);
  rep.stat_median = num::median(rep.skewness_draws);
  rep.stat_mode = num::posterior_mode(rep.skewness_draws);
  rep.used = statistic;
  // The residual skewness estimates the sign of -delta.
  rep.sign = rep.sign_under(statistic);
  return rep;
}

namespace {

Statistic recommended_regression(Family tag) {
  return tag == Family::kCscn ? Statistic::kMean : Statistic::kMedian;
}

}  // namespace

std::vector<SummaryRow> summarize(const PosteriorDraws& draws, double prob) {
  std::vector<SummaryRow> rows;
  const Family tag = draws.spec.family.tag;
  for (const auto& [name, chain] : draws.named_chains()) {
    SummaryRow row;
    row.name = name;
    std::vector<double> v(chain.data(), chain.data() + chain.size());
    row.mean = num::mean(v);
    row.median = num::median(v);
    row.mode = num::posterior_mode(v);
    const auto hpd = num::hpd_interval(v, prob);
    row.hpd_lower = hpd.lower;
    row.hpd_upper = hpd.upper;
    row.hpd_degenerate = hpd.degenerate;
    if (name.rfind("beta_", 0) == 0) {
      row.recommended_known = true;
      row.recommended = recommended_regression(tag);
    } else if (name == "delta") {
      row.recommended_known = true;
      row.recommended = Statistic::kMode;
    } else if (name == "nu") {
      row.recommended_known = true;
      row.recommended =
          tag == Family::kCst ? Statistic::kMode : Statistic::kMedian;
    } else if (name == "nu1" || name == "nu2") {
      row.recommended_known = true;
      row.recommended = Statistic::kMean;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

LinkCurve link_curve(const PosteriorDraws& draws, std::span<const double> etas,
                     double band_prob, int threads) {
  const int kept = draws.retained();
  const int m = static_cast<int>(etas.size());
  const Family tag = draws.spec.family.tag;

  LinkCurve curve;
  curve.eta.assign(etas.begin(), etas.end());
  curve.mean.resize(m);
  curve.lower.resize(m);
  curve.upper.resize(m);

  Eigen::MatrixXd probs(kept, m);
  std::vector<int> failures(m, 0);
  parallel_for(m, threads, [&](std::int64_t j) {
    for (int k = 0; k < kept; ++k) {
      smcsn::MixingFamily fam = draws.spec.family;
      if (fam.shape_count() >= 1) fam.nu1 = draws.nu(k, 0);
      if (fam.shape_count() >= 2) fam.nu2 = draws.nu(k, 1);
      const double d = tag == Family::kNormal ? 0.0 : draws.delta[k];
      smcsn::QuadReport rep;
      probs(k, j) = model::success_prob(etas[j], d, fam, &rep);
      if (!rep.converged) ++failures[j];
    }
  });
  for (int j = 0; j < m; ++j) curve.quad_failures += failures[j];

  const double lo_q = 0.5 * (1.0 - band_prob);
  const double hi_q = 0.5 * (1.0 + band_prob);
  std::vector<double> col(kept);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < kept; ++k) col[k] = probs(k, j);
    std::sort(col.begin(), col.end());
    curve.mean[j] = num::mean(col);
    curve.lower[j] = num::quantile(col, lo_q);
    curve.upper[j] = num::quantile(col, hi_q);
  }
  return curve;
}

}  // namespace skewlink::diagnostics
