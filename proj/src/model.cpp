#include "skewlink/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "skewlink/numerics.hpp"

namespace skewlink::model {

namespace num = skewlink::numerics;
using smcsn::CenteredParams;
using smcsn::Family;
using smcsn::kB;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = 3.141592653589793238462643383279502884;
}  // namespace

void BinaryDataset::validate() const {
  if (X.rows() != y.size()) throw std::domain_error("dataset: X/y size mismatch");
  if (X.rows() < X.cols()) throw std::domain_error("dataset: n < p");
  if (!X.allFinite()) throw std::domain_error("dataset: non-finite entry in X");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw std::domain_error("dataset: response must be 0/1");
    }
  }
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (X(i, 0) != 1.0) throw std::domain_error("dataset: first column must be 1");
  }
}

void detect_degeneracies(BinaryDataset& data) {
  const int n = data.n();
  double ones = data.y.sum();
  if (ones == 0.0 || ones == n) {
    data.warnings.push_back("response is constant (all y equal)");
    return;
  }
  for (int j = 1; j < data.p(); ++j) {
    // Single-covariate separation: some threshold on x_j splits y exactly.
    double max0 = -std::numeric_limits<double>::infinity();
    double min1 = std::numeric_limits<double>::infinity();
    double min0 = std::numeric_limits<double>::infinity();
    double max1 = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double x = data.X(i, j);
      if (data.y[i] == 0.0) {
        max0 = std::max(max0, x);
        min0 = std::min(min0, x);
      } else {
        max1 = std::max(max1, x);
        min1 = std::min(min1, x);
      }
    }
    if (max0 <= min1 || max1 <= min0) {
      data.warnings.push_back("covariate '" + data.column_names[j] +
                              "' separates the response");
    }
  }
}

MixingFamily ModelParams::family_with_nu(const MixingFamily& base) const {
  MixingFamily fam = base;
  switch (base.tag) {
    case Family::kCst:
    case Family::kCss:
      fam.nu1 = nu1;
      break;
    case Family::kCscn:
      fam.nu1 = nu1;
      fam.nu2 = nu2;
      break;
    default:
      break;
  }
  return fam;
}

double success_prob(double eta, double delta, const MixingFamily& fam,
                    QuadReport* report) {
  if (!(std::abs(delta) < 1.0)) throw std::domain_error("success_prob: |delta| >= 1");
  const CenteredParams p{0.0, 1.0, delta};
  return smcsn::smcsn_cdf(eta, p, fam, report);
}

namespace {

// log h(u|nu) for the mixing law; constants in u and nu kept so that
// nu-updates can reuse the same terms.
double log_mixing_density(double u, const MixingFamily& fam) {
  switch (fam.tag) {
    case Family::kNormal:
    case Family::kCsn:
      return 0.0;  // point mass at 1
    case Family::kCst: {
      const double a = 0.5 * fam.nu1;
      return a * std::log(a) - std::lgamma(a) + (a - 1.0) * std::log(u) - a * u;
    }
    case Family::kCss:
      if (u <= 0.0 || u >= 1.0) return kNegInf;
      return std::log(fam.nu1) + (fam.nu1 - 1.0) * std::log(u);
    case Family::kCscn:
      if (u == fam.nu2) return std::log(fam.nu1);
      if (u == 1.0) return std::log(1.0 - fam.nu1);
      return kNegInf;
  }
  return kNegInf;
}

bool sign_ok(double z, double y) { return (z > 0.0) == (y == 1.0); }

}  // namespace

double complete_log_likelihood(const ModelParams& theta, const LatentState& lat,
                               const BinaryDataset& data,
                               const MixingFamily& fam) {
  const int n = data.n();
  if (lat.z.size() != n || lat.h.size() != n || lat.u.size() != n) {
    throw std::domain_error("complete_log_likelihood: latent size mismatch");
  }
  const CenteredParams cp{0.0, 1.0, theta.delta};
  const smcsn::DirectDerived dp = smcsn::cp_to_dp(cp);
  const MixingFamily fam_nu = theta.family_with_nu(fam);
  const Eigen::VectorXd eta = data.X * theta.beta;

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!sign_ok(lat.z[i], data.y[i])) return kNegInf;
    const double u = lat.u[i];
    const double h = lat.h[i];
    if (!(u > 0.0) || !(h > 0.0)) return kNegInf;
    const double mu = eta[i] + dp.Delta / std::sqrt(u) * (kB - h);
    const double r = lat.z[i] - mu;
    const double lm = log_mixing_density(u, fam_nu);
    if (lm == kNegInf) return kNegInf;
    total += 0.5 * std::log(u) - 0.5 * std::log(dp.tau) -
             0.5 * u * r * r / dp.tau - 0.5 * h * h + lm;
  }
  return total;
}

double cscn_marginal_log_likelihood(const ModelParams& theta,
                                    const Eigen::VectorXd& z,
                                    const Eigen::VectorXd& h,
                                    const BinaryDataset& data) {
  const int n = data.n();
  if (z.size() != n || h.size() != n) {
    throw std::domain_error("cscn_marginal_log_likelihood: latent size mismatch");
  }
  const double nu1 = theta.nu1;
  const double nu2 = theta.nu2;
  if (!(nu1 >= 0.0 && nu1 <= 1.0 && nu2 > 0.0 && nu2 <= 1.0)) {
    throw std::domain_error("cscn_marginal_log_likelihood: invalid nu");
  }
  const CenteredParams cp{0.0, 1.0, theta.delta};
  const smcsn::DirectDerived dp = smcsn::cp_to_dp(cp);
  const Eigen::VectorXd eta = data.X * theta.beta;

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!sign_ok(z[i], data.y[i])) return kNegInf;
    // Per-atom terms with the same dropped constants as the complete
    // likelihood: 0.5 log u - 0.5 log tau - u (z-mu(u))^2 / (2 tau).
    const auto atom = [&](double u) {
      const double mu = eta[i] + dp.Delta / std::sqrt(u) * (kB - h[i]);
      const double r = z[i] - mu;
      return 0.5 * std::log(u) - 0.5 * std::log(dp.tau) -
             0.5 * u * r * r / dp.tau;
    };
    const double la = (nu1 > 0.0) ? std::log(nu1) + atom(nu2) : kNegInf;
    const double lb = (nu1 < 1.0) ? std::log(1.0 - nu1) + atom(1.0) : kNegInf;
    const double m = std::max(la, lb);
    total += m + std::log(std::exp(la - m) + std::exp(lb - m)) -
             0.5 * h[i] * h[i];
  }
  return total;
}

double log_g_prior_kernel(double g, const PriorSpec& prior) {
  if (!(g > 0.0)) return kNegInf;
  switch (prior.kind) {
    case PriorKind::kHyperG:
      return -0.5 * prior.alpha * std::log1p(g);
    case PriorKind::kHyperGUniformAlpha: {
      // alpha ~ U(2,4) marginalized:
      // pi(g) = (1+g)^{-1} [1 - (1+g)^{-1}(1+L)] / L^2, L = log(1+g),
      // up to the 1/4 normalizer.
      const double L = std::log1p(g);
      const double c = 0.5 * L;
      double frac;
      if (L < 1e-5) {
        frac = 2.0 - 8.0 * c / 3.0 + 2.0 * c * c;  // series at c = 0
      } else {
        frac = (1.0 - std::exp(-2.0 * c) * (1.0 + 2.0 * c)) / (c * c);
      }
      return -L + std::log(0.25 * frac);
    }
    case PriorKind::kNormalFixed:
      return 0.0;  // no g in the model
  }
  return kNegInf;
}

double log_prior(const ModelParams& theta, const LinkSpec& spec,
                 const PriorSpec& prior) {
  double total = 0.0;

  // beta block.
  if (prior.kind == PriorKind::kNormalFixed) {
    for (Eigen::Index j = 0; j < theta.beta.size(); ++j) {
      total += num::log_normal_pdf(theta.beta[j], 0.0, prior.normal_var);
    }
  } else {
    if (!(theta.g > 0.0)) return kNegInf;
    for (Eigen::Index j = 0; j < theta.beta.size(); ++j) {
      total += num::log_normal_pdf(theta.beta[j], 0.0, 0.5 * theta.g);
    }
    total += log_g_prior_kernel(theta.g, prior);
  }

  // delta block: pi(delta) = 2 / (pi sqrt(1-delta^2)) on A.
  if (spec.family.tag != Family::kNormal) {
    const double d = theta.delta;
    if (!(d > spec.delta_lower() && d < spec.delta_upper())) return kNegInf;
    total += std::log(2.0 / kPi) - 0.5 * std::log1p(-d * d);
  } else if (theta.delta != 0.0) {
    return kNegInf;
  }

  // nu block.
  switch (spec.family.tag) {
    case Family::kCst: {
      const double e = theta.nu1 - 2.0;
      if (!(e > 0.0 && e <= 38.0)) return kNegInf;
      total += std::log(0.1) - 0.1 * e;
      break;
    }
    case Family::kCss: {
      const double e = theta.nu1 - 1.0;
      if (!(e > 0.0 && e <= 39.0)) return kNegInf;
      total += std::log(0.1) - 0.1 * e;
      break;
    }
    case Family::kCscn:
      if (!(theta.nu1 > 0.0 && theta.nu1 < 1.0)) return kNegInf;
      if (!(theta.nu2 > 0.0 && theta.nu2 < 1.0)) return kNegInf;
      break;  // independent U(0,1): zero log density
    default:
      break;
  }
  return total;
}

SimulatedData simulate_dataset(const Eigen::VectorXd& beta, double delta,
                               const MixingFamily& fam, int n, Rng& rng,
                               bool standardize) {
  if (n < 2) throw std::domain_error("simulate_dataset: n < 2");
  if (!(std::abs(delta) < 1.0)) {
    throw std::domain_error("simulate_dataset: |delta| >= 1");
  }
  fam.validate();
  const int p = static_cast<int>(beta.size());

  SimulatedData out;
  out.data.X.resize(n, p);
  out.data.X.col(0).setOnes();
  out.data.column_names.push_back("(intercept)");
  for (int j = 1; j < p; ++j) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.normal();
    if (standardize) {
      const double m = x.mean();
      const double sd = std::sqrt((x.array() - m).square().sum() / (n - 1));
      x = (x.array() - m) / sd;
    }
    out.data.X.col(j) = x;
    out.data.column_names.push_back("x" + std::to_string(j));
  }

  // Latent noise carries skewness -delta so that the generated data follow
  // the link F(.;0,1,+delta).
  const CenteredParams noise{0.0, 1.0, -delta};
  out.z_true.resize(n);
  out.data.y.resize(n);
  const Eigen::VectorXd eta = out.data.X * beta;
  for (int i = 0; i < n; ++i) {
    out.z_true[i] = eta[i] + smcsn::smcsn_sample(noise, fam, rng);
    out.data.y[i] = out.z_true[i] > 0.0 ? 1.0 : 0.0;
  }
  detect_degeneracies(out.data);
  return out;
}

}  // namespace skewlink::model
