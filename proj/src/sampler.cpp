#include "skewlink/sampler.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "skewlink/numerics.hpp"

namespace skewlink::sampler {

namespace num = skewlink::numerics;
using smcsn::Family;
using smcsn::kB;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double logit(double x) { return std::log(x / (1.0 - x)); }
double inv_logit(double t) { return 1.0 / (1.0 + std::exp(-t)); }
}  // namespace

void ChainConfig::validate() const {
  if (iterations <= 0 || thin <= 0 || burn_in < 0) {
    throw std::domain_error("chain config: nonpositive sizes");
  }
  if (burn_in >= iterations) {
    throw std::domain_error("chain config: burn_in must be < iterations");
  }
  if (retained() < 100) {
    throw std::domain_error(
        "chain config: (iterations - burn_in)/thin must be >= 100");
  }
  if (adapt_window <= 0) throw std::domain_error("chain config: adapt_window");
}

void SamplerState::refresh_link() {
  const double d = theta.delta;
  const double r = 1.0 - kB * kB * d * d;
  Delta = d / std::sqrt(r);
  tau = (1.0 - d * d) / r;
}

void step_z(SamplerState& st, const BinaryDataset& data, Rng& rng) {
  const int n = data.n();
  const Eigen::VectorXd eta = data.X * st.theta.beta;
  for (int i = 0; i < n; ++i) {
    const double u = st.lat.u[i];
    const double mu = eta[i] + st.Delta / std::sqrt(u) * (kB - st.lat.h[i]);
    const double var = st.tau / u;
    if (data.y[i] == 1.0) {
      st.lat.z[i] = num::sample_truncated_normal(mu, var, 0.0, kInf, rng);
    } else {
      st.lat.z[i] = num::sample_truncated_normal(mu, var, -kInf, 0.0, rng);
    }
  }
}

void step_h(SamplerState& st, const BinaryDataset& data, Rng& rng) {
  const int n = data.n();
  const Eigen::VectorXd eta = data.X * st.theta.beta;
  const double D = st.Delta;
  const double denom = D * D + st.tau;
  const double var = st.tau / denom;
  for (int i = 0; i < n; ++i) {
    const double su = std::sqrt(st.lat.u[i]);
    const double a = st.lat.z[i] - eta[i] - D * kB / su;
    const double mean = -su * a * D / denom;
    st.lat.h[i] = num::sample_truncated_normal(mean, var, 0.0, kInf, rng);
  }
}

void step_beta(SamplerState& st, const BinaryDataset& data,
               const PriorSpec& prior, Rng& rng) {
  const int n = data.n();
  const int p = data.p();
  // Pseudo-data: z_tilde_i ~ N(x_i' beta, tau/u_i).
  Eigen::VectorXd ztilde(n);
  for (int i = 0; i < n; ++i) {
    ztilde[i] = st.lat.z[i] -
                st.Delta / std::sqrt(st.lat.u[i]) * (kB - st.lat.h[i]);
  }
  const double prior_prec = prior.kind == model::PriorKind::kNormalFixed
                                ? 1.0 / prior.normal_var
                                : 2.0 / st.theta.g;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < n; ++i) {
    const double w = st.lat.u[i] / st.tau;
    A.noalias() += w * data.X.row(i).transpose() * data.X.row(i);
    rhs.noalias() += w * ztilde[i] * data.X.row(i).transpose();
  }
  A.diagonal().array() += prior_prec;

  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    A.diagonal().array() += 1e-10;
    llt.compute(A);
  }
  const Eigen::VectorXd mean = llt.solve(rhs);
  Eigen::VectorXd shock(p);
  for (int j = 0; j < p; ++j) shock[j] = rng.normal();
  // A = L L^T; solving L^T x = shock gives cov(x) = A^{-1}.
  st.theta.beta = mean + llt.matrixU().solve(shock);
}

namespace {

// Conditional mean of z_i given u.
double mu_of_u(const SamplerState& st, double eta_i, double h_i, double u) {
  return eta_i + st.Delta / std::sqrt(u) * (kB - h_i);
}

// log kernel of the CST/CSS u_i conditional (z-likelihood + mixing density).
double u_log_kernel(const SamplerState& st, const MixingFamily& fam,
                    double eta_i, double z_i, double h_i, double u) {
  if (!(u > 0.0)) return -kInf;
  double lm;
  const double nu = st.theta.nu1;
  if (fam.tag == Family::kCst) {
    lm = (0.5 * nu - 1.0) * std::log(u) - 0.5 * nu * u;
  } else {  // CSS: beta(nu,1) on (0,1)
    if (u >= 1.0) return -kInf;
    lm = (nu - 1.0) * std::log(u);
  }
  const double r = z_i - mu_of_u(st, eta_i, h_i, u);
  return 0.5 * std::log(u) - 0.5 * u * r * r / st.tau + lm;
}

}  // namespace

double cscn_atom_prob(const SamplerState& st, const BinaryDataset& data, int i) {
  const double eta_i = data.X.row(i).dot(st.theta.beta);
  const double nu1 = st.theta.nu1;
  const double nu2 = st.theta.nu2;
  const double z = st.lat.z[i];
  const double h = st.lat.h[i];
  const double ra = z - mu_of_u(st, eta_i, h, nu2);
  const double rb = z - mu_of_u(st, eta_i, h, 1.0);
  const double la =
      std::log(nu1) + 0.5 * std::log(nu2) - 0.5 * nu2 * ra * ra / st.tau;
  const double lb = std::log(1.0 - nu1) - 0.5 * rb * rb / st.tau;
  return 1.0 / (1.0 + std::exp(lb - la));
}

BlockAcceptance step_u(SamplerState& st, const BinaryDataset& data,
                       const MixingFamily& fam, double scale, Rng& rng) {
  const int n = data.n();
  BlockAcceptance acc;
  if (fam.tag == Family::kCscn) {
    for (int i = 0; i < n; ++i) {
      const double pc = cscn_atom_prob(st, data, i);
      st.lat.u[i] = rng.uniform() < pc ? st.theta.nu2 : 1.0;
    }
    acc.accepted = acc.attempts = n;
    return acc;
  }
  const Eigen::VectorXd eta = data.X * st.theta.beta;
  for (int i = 0; i < n; ++i) {
    const double u0 = st.lat.u[i];
    const double w1 = std::log(u0) + scale * rng.normal();
    const double u1 = std::exp(w1);
    // Jacobian of u = e^w adds +log u to the kernel on the w scale.
    const double l0 =
        u_log_kernel(st, fam, eta[i], st.lat.z[i], st.lat.h[i], u0) +
        std::log(u0);
    const double l1 =
        u_log_kernel(st, fam, eta[i], st.lat.z[i], st.lat.h[i], u1) +
        (std::isfinite(u1) && u1 > 0.0 ? w1 : -kInf);
    ++acc.attempts;
    if (std::log(rng.uniform()) < l1 - l0) {
      st.lat.u[i] = u1;
      ++acc.accepted;
    }
  }
  return acc;
}

double delta_log_target(const SamplerState& st, const BinaryDataset& data,
                        const LinkSpec& spec, double delta) {
  const double lo = spec.delta_lower();
  const double hi = spec.delta_upper();
  if (!(delta > lo && delta < hi)) return -kInf;
  const double r = 1.0 - kB * kB * delta * delta;
  const double D = delta / std::sqrt(r);
  const double tau = (1.0 - delta * delta) / r;

  const Eigen::VectorXd eta = data.X * st.theta.beta;
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double u = st.lat.u[i];
    const double mu = eta[i] + D / std::sqrt(u) * (kB - st.lat.h[i]);
    total += num::log_normal_pdf(st.lat.z[i], mu, tau / u);
  }
  // prior 2/(pi sqrt(1-d^2)) plus the logit-transform Jacobian over A.
  total += -0.5 * std::log1p(-delta * delta);
  total += std::log(delta - lo) + std::log(hi - delta);
  return total;
}

bool step_delta(SamplerState& st, const BinaryDataset& data,
                const LinkSpec& spec, double scale, Rng& rng) {
  const double lo = spec.delta_lower();
  const double hi = spec.delta_upper();
  const double width = hi - lo;
  const double t0 = logit((st.theta.delta - lo) / width);
  const double t1 = t0 + scale * rng.normal();
  const double d1 = lo + width * inv_logit(t1);
  const double l0 = delta_log_target(st, data, spec, st.theta.delta);
  const double l1 = delta_log_target(st, data, spec, d1);
  if (std::log(rng.uniform()) < l1 - l0) {
    st.theta.delta = d1;
    st.refresh_link();
    return true;
  }
  return false;
}

double g_log_target(const Eigen::VectorXd& beta, double g,
                    const PriorSpec& prior) {
  if (!(g > 0.0)) return -kInf;
  const double p = static_cast<double>(beta.size());
  const double quad = 2.0 * beta.squaredNorm();  // beta' Sigma_b^{-1} beta
  return -0.5 * p * std::log(g) - 0.5 * quad / g +
         model::log_g_prior_kernel(g, prior) + std::log(g);  // + Jacobian
}

bool step_g(SamplerState& st, const PriorSpec& prior, double scale, Rng& rng) {
  if (prior.kind == model::PriorKind::kNormalFixed) return false;
  const double w0 = std::log(st.theta.g);
  const double w1 = w0 + scale * rng.normal();
  const double g1 = std::exp(w1);
  const double l0 = g_log_target(st.theta.beta, st.theta.g, prior);
  const double l1 = g_log_target(st.theta.beta, g1, prior);
  if (std::log(rng.uniform()) < l1 - l0) {
    st.theta.g = g1;
    return true;
  }
  return false;
}

std::pair<BlockAcceptance, BlockAcceptance> step_nu(
    SamplerState& st, const BinaryDataset& data, const LinkSpec& spec,
    double scale_nu1, double scale_nu2, Rng& rng) {
  BlockAcceptance acc1, acc2;
  const Family tag = spec.family.tag;
  const int n = data.n();

  if (tag == Family::kCst || tag == Family::kCss) {
    const double lo = tag == Family::kCst ? 2.0 : 1.0;
    const double nu0 = st.theta.nu1;
    const double w1 = std::log(nu0) + scale_nu1 * rng.normal();
    const double nu1 = std::exp(w1);
    const auto target = [&](double nu) {
      if (!(nu > lo && nu <= 40.0)) return -kInf;
      double total = 0.0;
      if (tag == Family::kCst) {
        const double a = 0.5 * nu;
        for (int i = 0; i < n; ++i) {
          const double u = st.lat.u[i];
          total += a * std::log(a) - std::lgamma(a) +
                   (a - 1.0) * std::log(u) - a * u;
        }
      } else {
        for (int i = 0; i < n; ++i) {
          total += std::log(nu) + (nu - 1.0) * std::log(st.lat.u[i]);
        }
      }
      total += -0.1 * (nu - lo);     // truncated exponential prior kernel
      return total + std::log(nu);   // log-scale Jacobian
    };
    ++acc1.attempts;
    if (std::log(rng.uniform()) < target(nu1) - target(nu0)) {
      st.theta.nu1 = nu1;
      ++acc1.accepted;
    }
    return {acc1, acc2};
  }

  if (tag == Family::kCscn) {
    // nu1 | rest: binomial in the contamination indicators, U(0,1) prior.
    int m = 0;
    for (int i = 0; i < n; ++i) {
      if (st.lat.u[i] != 1.0) ++m;
    }
    {
      const auto target = [&](double v) {
        if (!(v > 0.0 && v < 1.0)) return -kInf;
        return m * std::log(v) + (n - m) * std::log(1.0 - v) + std::log(v) +
               std::log(1.0 - v);  // logit Jacobian
      };
      const double t1 = logit(st.theta.nu1) + scale_nu1 * rng.normal();
      const double v1 = inv_logit(t1);
      ++acc1.attempts;
      if (std::log(rng.uniform()) < target(v1) - target(st.theta.nu1)) {
        st.theta.nu1 = v1;
        ++acc1.accepted;
      }
    }
    // nu2 | rest: z-likelihood over contaminated observations; the stored
    // atoms move with nu2 on acceptance.
    {
      const Eigen::VectorXd eta = data.X * st.theta.beta;
      const auto target = [&](double v) {
        if (!(v > 0.0 && v < 1.0)) return -kInf;
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
          if (st.lat.u[i] == 1.0) continue;
          const double r = st.lat.z[i] - mu_of_u(st, eta[i], st.lat.h[i], v);
          total += 0.5 * std::log(v) - 0.5 * v * r * r / st.tau;
        }
        return total + std::log(v) + std::log(1.0 - v);
      };
      const double t1 = logit(st.theta.nu2) + scale_nu2 * rng.normal();
      const double v1 = inv_logit(t1);
      ++acc2.attempts;
      if (std::log(rng.uniform()) < target(v1) - target(st.theta.nu2)) {
        const double old = st.theta.nu2;
        st.theta.nu2 = v1;
        for (int i = 0; i < n; ++i) {
          if (st.lat.u[i] == old) st.lat.u[i] = v1;
        }
        ++acc2.accepted;
      }
    }
    return {acc1, acc2};
  }
  return {acc1, acc2};
}

SamplerState initial_state(const BinaryDataset& data, const LinkSpec& spec,
                           Rng& rng) {
  data.validate();
  const int n = data.n();
  const int p = data.p();
  SamplerState st;

  // Least-squares fit of (2y - 1) on X.
  const Eigen::VectorXd target = 2.0 * data.y.array() - 1.0;
  Eigen::MatrixXd xtx = data.X.transpose() * data.X;
  xtx.diagonal().array() += 1e-8;
  st.theta.beta = xtx.ldlt().solve(data.X.transpose() * target);

  switch (spec.family.tag) {
    case Family::kNormal:
      st.theta.delta = 0.0;
      break;
    default:
      st.theta.delta =
          0.5 * (spec.delta_lower() + spec.delta_upper());  // midpoint of A
      break;
  }
  switch (spec.family.tag) {
    case Family::kCst: st.theta.nu1 = 5.0; break;
    case Family::kCss: st.theta.nu1 = 3.0; break;
    case Family::kCscn:
      st.theta.nu1 = 0.5;
      st.theta.nu2 = 0.5;
      break;
    default: break;
  }
  st.theta.g = 1.0;
  st.refresh_link();

  st.lat.u = Eigen::VectorXd::Ones(n);
  st.lat.h = Eigen::VectorXd::Constant(n, kB);
  st.lat.z = Eigen::VectorXd::Zero(n);
  step_z(st, data, rng);
  (void)p;
  return st;
}

namespace {

struct Adapter {
  double log_scale = 0.0;
  int accepted = 0;
  int attempts = 0;
  int windows = 0;

  void record(const BlockAcceptance& a) {
    accepted += a.accepted;
    attempts += a.attempts;
  }
  void record(bool ok) {
    accepted += ok ? 1 : 0;
    ++attempts;
  }
  // Robbins-Monro step toward the target rate; call once per window.
  void adapt(double target) {
    if (attempts == 0) return;
    ++windows;
    const double rate = static_cast<double>(accepted) / attempts;
    const double gain = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(windows)));
    log_scale += gain * (rate - target);
    log_scale = std::clamp(log_scale, std::log(1e-3), std::log(50.0));
    accepted = attempts = 0;
  }
  double scale() const { return std::exp(log_scale); }
};

std::string dump_state(const SamplerState& st) {
  std::ostringstream os;
  os << "beta:";
  for (Eigen::Index j = 0; j < st.theta.beta.size(); ++j) {
    os << ' ' << st.theta.beta[j];
  }
  os << " delta: " << st.theta.delta << " nu: " << st.theta.nu1 << ' '
     << st.theta.nu2 << " g: " << st.theta.g;
  os << " z[0..4]:";
  for (int i = 0; i < std::min<int>(5, static_cast<int>(st.lat.z.size())); ++i) {
    os << ' ' << st.lat.z[i];
  }
  return os.str();
}

bool finite_state(const SamplerState& st) {
  if (!st.theta.beta.allFinite()) return false;
  if (!std::isfinite(st.theta.delta) || !std::isfinite(st.theta.g)) return false;
  if (!std::isfinite(st.theta.nu1) || !std::isfinite(st.theta.nu2)) return false;
  if (!st.lat.z.allFinite() || !st.lat.h.allFinite() || !st.lat.u.allFinite()) {
    return false;
  }
  return true;
}

}  // namespace

std::vector<std::pair<std::string, Eigen::VectorXd>>
PosteriorDraws::named_chains() const {
  std::vector<std::pair<std::string, Eigen::VectorXd>> out;
  for (int j = 0; j < beta.cols(); ++j) {
    out.emplace_back("beta_" + std::to_string(j), beta.col(j));
  }
  if (spec.family.tag != Family::kNormal) out.emplace_back("delta", delta);
  switch (spec.family.tag) {
    case Family::kCst:
    case Family::kCss:
      out.emplace_back("nu", nu.col(0));
      break;
    case Family::kCscn:
      out.emplace_back("nu1", nu.col(0));
      out.emplace_back("nu2", nu.col(1));
      break;
    default:
      break;
  }
  if (prior.kind != model::PriorKind::kNormalFixed) out.emplace_back("g", g);
  return out;
}

PosteriorDraws run_chain(const BinaryDataset& data, const LinkSpec& spec,
                         const ChainConfig& cfg, const PriorSpec& prior) {
  cfg.validate();
  spec.family.validate();
  data.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const Family tag = spec.family.tag;
  const bool has_u = tag == Family::kCst || tag == Family::kCss ||
                     tag == Family::kCscn;
  const bool has_delta = tag != Family::kNormal;
  const bool has_nu = spec.family.shape_count() > 0;
  const bool has_g = prior.kind != model::PriorKind::kNormalFixed;
  const int n = data.n();
  const int p = data.p();

  Rng rng(cfg.seed);
  SamplerState st = initial_state(data, spec, rng);

  Adapter ad_delta, ad_g, ad_u, ad_nu1, ad_nu2;
  ad_delta.log_scale = std::log(cfg.scale_delta);
  ad_g.log_scale = std::log(cfg.scale_g);
  ad_u.log_scale = std::log(cfg.scale_u);
  ad_nu1.log_scale = std::log(cfg.scale_nu);
  ad_nu2.log_scale = std::log(cfg.scale_nu);

  // Post-burn-in tallies.
  Adapter tally_delta, tally_g, tally_u, tally_nu1, tally_nu2;

  const int kept = cfg.retained();
  PosteriorDraws out;
  out.spec = spec;
  out.prior = prior;
  out.config = cfg;
  out.beta_names = data.column_names;
  out.beta.resize(kept, p);
  out.delta.resize(kept);
  out.g.resize(kept);
  out.nu.resize(kept, std::max(1, spec.family.shape_count()));
  out.nu.setZero();
  if (cfg.retain_latents) {
    out.z = Eigen::MatrixXd(kept, n);
    out.h = Eigen::MatrixXd(kept, n);
    out.u = Eigen::MatrixXd(kept, n);
  }

  int row = 0;
  for (int t = 1; t <= cfg.iterations; ++t) {
    const bool warm = t <= cfg.burn_in;

    step_z(st, data, rng);
    step_h(st, data, rng);
    if (has_u) {
      const auto a = step_u(st, data, st.theta.family_with_nu(spec.family),
                            ad_u.scale(), rng);
      (warm ? ad_u : tally_u).record(a);
    }
    step_beta(st, data, prior, rng);
    if (has_g) {
      const bool ok = step_g(st, prior, ad_g.scale(), rng);
      (warm ? ad_g : tally_g).record(ok);
    }
    if (has_delta) {
      const bool ok = step_delta(st, data, spec, ad_delta.scale(), rng);
      (warm ? ad_delta : tally_delta).record(ok);
    }
    if (has_nu) {
      const auto [a1, a2] =
          step_nu(st, data, spec, ad_nu1.scale(), ad_nu2.scale(), rng);
      (warm ? ad_nu1 : tally_nu1).record(a1);
      (warm ? ad_nu2 : tally_nu2).record(a2);
    }

    if (!finite_state(st)) throw ChainAbort(t, dump_state(st));

    if (warm && t % cfg.adapt_window == 0) {
      ad_delta.adapt(cfg.adapt_target);
      ad_g.adapt(cfg.adapt_target);
      ad_u.adapt(cfg.adapt_target);
      ad_nu1.adapt(cfg.adapt_target);
      ad_nu2.adapt(cfg.adapt_target);
    }

    if (!warm && (t - cfg.burn_in) % cfg.thin == 0 && row < kept) {
      out.beta.row(row) = st.theta.beta.transpose();
      out.delta[row] = st.theta.delta;
      out.g[row] = has_g ? st.theta.g : 0.0;
      if (spec.family.shape_count() >= 1) out.nu(row, 0) = st.theta.nu1;
      if (spec.family.shape_count() >= 2) out.nu(row, 1) = st.theta.nu2;
      if (cfg.retain_latents) {
        out.z->row(row) = st.lat.z.transpose();
        out.h->row(row) = st.lat.h.transpose();
        out.u->row(row) = st.lat.u.transpose();
      }
      ++row;
    }
  }

  const auto rate = [](const Adapter& a) {
    return a.attempts == 0 ? 0.0
                           : static_cast<double>(a.accepted) / a.attempts;
  };
  if (has_delta) out.acceptance["delta"] = rate(tally_delta);
  if (has_g) out.acceptance["g"] = rate(tally_g);
  if (has_u && tag != Family::kCscn) out.acceptance["u"] = rate(tally_u);
  if (has_nu) {
    if (tag == Family::kCscn) {
      out.acceptance["nu1"] = rate(tally_nu1);
      out.acceptance["nu2"] = rate(tally_nu2);
    } else {
      out.acceptance["nu"] = rate(tally_nu1);
    }
  }

  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t_start)
                    .count();
  return out;
}

}  // namespace skewlink::sampler
