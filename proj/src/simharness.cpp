#include "skewlink/simharness.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "skewlink/numerics.hpp"
#include "skewlink/parallel.hpp"

namespace skewlink::simharness {

namespace num = skewlink::numerics;
using smcsn::Family;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Replica r draws its data stream from slot 2r and its chain seed from
// slot 2r+1 of the master stream.
std::uint64_t data_seed(std::uint64_t master, int replica) {
  return Rng::derive_seed(master, 2 * static_cast<std::uint64_t>(replica));
}
std::uint64_t chain_seed(std::uint64_t master, int replica) {
  return Rng::derive_seed(master, 2 * static_cast<std::uint64_t>(replica) + 1);
}

std::vector<std::string> parameter_names(const LinkSpec& link, int p) {
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back("beta_" + std::to_string(j));
  if (link.family.tag != Family::kNormal) names.push_back("delta");
  switch (link.family.tag) {
    case Family::kCst:
    case Family::kCss: names.push_back("nu"); break;
    case Family::kCscn:
      names.push_back("nu1");
      names.push_back("nu2");
      break;
    default: break;
  }
  return names;
}

std::vector<double> chain_of(const sampler::PosteriorDraws& draws,
                             const std::string& name) {
  for (const auto& [n, c] : draws.named_chains()) {
    if (n == name) return std::vector<double>(c.data(), c.data() + c.size());
  }
  throw std::domain_error("no chain named " + name);
}

}  // namespace

void StudySpec::apply_default_statistics() {
  const Family tag = link.family.tag;
  stat_beta = tag == Family::kCscn ? Statistic::kMean : Statistic::kMedian;
  stat_delta = Statistic::kMode;
  switch (tag) {
    case Family::kCst: stat_nu = Statistic::kMode; break;
    case Family::kCss: stat_nu = Statistic::kMedian; break;
    default: stat_nu = Statistic::kMean; break;
  }
}

void StudySpec::validate() const {
  if (replicas < 2) throw std::domain_error("study: need >= 2 replicas");
  if (beta_true.size() < 1) throw std::domain_error("study: empty beta");
  if (!(std::abs(delta_true) < 1.0)) throw std::domain_error("study: |delta| >= 1");
  if (link.family.tag != Family::kNormal) {
    const bool pos = delta_true > 0.0;
    if (pos != (link.sign == model::SignRegion::kPositive)) {
      throw std::domain_error("study: delta_true outside the sign region");
    }
  }
  link.family.validate();
  chain.validate();
}

RecoveryStats recovery_stats(std::span<const double> estimates, double truth) {
  if (estimates.size() < 2) {
    throw std::domain_error("recovery_stats: need >= 2 estimates");
  }
  RecoveryStats out;
  out.est = num::mean(estimates);
  double ss = 0.0;
  for (double e : estimates) ss += (e - out.est) * (e - out.est);
  out.sd = std::sqrt(ss / (static_cast<double>(estimates.size()) - 1.0));
  const double bias = out.est - truth;
  if (truth != 0.0) {
    out.rel_bias = std::abs(bias) / truth;
  } else {
    out.rel_bias = std::abs(bias);
    out.rel_bias_is_absolute = true;
  }
  out.mse = bias * bias + out.sd * out.sd;
  return out;
}

RecoveryReport run_recovery_study(const StudySpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int p = static_cast<int>(spec.beta_true.size());
  const auto names = parameter_names(spec.link, p);
  const int q = static_cast<int>(names.size());

  RecoveryReport rep;
  rep.parameter_names = names;
  rep.per_replica = Eigen::MatrixXd::Constant(spec.replicas, q, kNaN);
  std::vector<int> failed(spec.replicas, 0);

  parallel_for(spec.replicas, spec.threads, [&](std::int64_t r) {
    Rng data_rng(data_seed(spec.master_seed, static_cast<int>(r)));
    const auto sim = model::simulate_dataset(
        spec.beta_true, spec.delta_true, spec.link.family, spec.n, data_rng);
    ChainConfig cfg = spec.chain;
    cfg.seed = chain_seed(spec.master_seed, static_cast<int>(r));
    try {
      const auto draws =
          sampler::run_chain(sim.data, spec.link, cfg, spec.prior);
      int col = 0;
      for (int j = 0; j < p; ++j) {
        rep.per_replica(r, col++) = diagnostics::apply_statistic(
            spec.stat_beta, chain_of(draws, "beta_" + std::to_string(j)));
      }
      if (spec.link.family.tag != Family::kNormal) {
        rep.per_replica(r, col++) = diagnostics::apply_statistic(
            spec.stat_delta, chain_of(draws, "delta"));
      }
      switch (spec.link.family.tag) {
        case Family::kCst:
        case Family::kCss:
          rep.per_replica(r, col++) = diagnostics::apply_statistic(
              spec.stat_nu, chain_of(draws, "nu"));
          break;
        case Family::kCscn:
          rep.per_replica(r, col++) = diagnostics::apply_statistic(
              spec.stat_nu, chain_of(draws, "nu1"));
          rep.per_replica(r, col++) = diagnostics::apply_statistic(
              spec.stat_nu, chain_of(draws, "nu2"));
          break;
        default:
          break;
      }
    } catch (const sampler::ChainAbort&) {
      failed[r] = 1;
    }
  });

  for (int r = 0; r < spec.replicas; ++r) {
    if (failed[r]) rep.excluded_replicas.push_back(r);
  }

  std::vector<double> truths(spec.beta_true.data(), spec.beta_true.data() + p);
  if (spec.link.family.tag != Family::kNormal) truths.push_back(spec.delta_true);
  switch (spec.link.family.tag) {
    case Family::kCst:
    case Family::kCss: truths.push_back(spec.link.family.nu1); break;
    case Family::kCscn:
      truths.push_back(spec.link.family.nu1);
      truths.push_back(spec.link.family.nu2);
      break;
    default: break;
  }

  for (int c = 0; c < q; ++c) {
    std::vector<double> est;
    for (int r = 0; r < spec.replicas; ++r) {
      if (!failed[r]) est.push_back(rep.per_replica(r, c));
    }
    RecoveryRow row;
    row.parameter = names[c];
    row.real = truths[c];
    row.stats = recovery_stats(est, truths[c]);
    rep.rows.push_back(std::move(row));
  }
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

SignStudyReport run_sign_study(const StudySpec& spec) {
  spec.validate();
  SignStudyReport rep;
  rep.replicas = spec.replicas;
  const int truth_sign = spec.delta_true > 0.0 ? +1 : -1;

  std::vector<std::array<int, 3>> correct(spec.replicas, {0, 0, 0});
  std::vector<int> failed(spec.replicas, 0);
  parallel_for(spec.replicas, spec.threads, [&](std::int64_t r) {
    Rng data_rng(data_seed(spec.master_seed, static_cast<int>(r)));
    const auto sim = model::simulate_dataset(
        spec.beta_true, spec.delta_true, spec.link.family, spec.n, data_rng);
    ChainConfig cfg = spec.chain;
    cfg.seed = chain_seed(spec.master_seed, static_cast<int>(r));
    try {
      const auto report = diagnostics::select_delta_sign(sim.data, cfg);
      correct[r][0] = report.sign_under(Statistic::kMean) == truth_sign;
      correct[r][1] = report.sign_under(Statistic::kMedian) == truth_sign;
      correct[r][2] = report.sign_under(Statistic::kMode) == truth_sign;
    } catch (const sampler::ChainAbort&) {
      failed[r] = 1;
    }
  });
  for (int r = 0; r < spec.replicas; ++r) {
    if (failed[r]) {
      rep.excluded_replicas.push_back(r);
      continue;
    }
    rep.correct_mean += correct[r][0];
    rep.correct_median += correct[r][1];
    rep.correct_mode += correct[r][2];
  }
  return rep;
}

PriorStudyReport run_prior_study(const StudySpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int p = static_cast<int>(spec.beta_true.size());

  PriorStudyReport rep;
  for (int j = 0; j < p; ++j) {
    rep.parameter_names.push_back("beta_" + std::to_string(j));
  }

  struct Arm {
    std::string name;
    PriorSpec prior;
  };
  std::vector<Arm> arms;
  {
    PriorSpec normal;
    normal.kind = model::PriorKind::kNormalFixed;
    normal.normal_var = rep.normal_prior_var;
    arms.push_back({"normal", normal});
    PriorSpec hyper;
    hyper.kind = model::PriorKind::kHyperG;
    hyper.alpha = 4.0;
    arms.push_back({"hyper-g(4)", hyper});
    PriorSpec hyperu;
    hyperu.kind = model::PriorKind::kHyperGUniformAlpha;
    arms.push_back({"hyper-g(U(2,4))", hyperu});
  }
  const std::vector<Statistic> stats = {Statistic::kMean, Statistic::kMedian,
                                        Statistic::kMode};

  // per arm, per statistic, per parameter, per replica
  std::vector<std::vector<Eigen::MatrixXd>> est(
      arms.size(),
      std::vector<Eigen::MatrixXd>(
          stats.size(), Eigen::MatrixXd::Constant(spec.replicas, p, kNaN)));
  std::vector<int> failed(spec.replicas, 0);

  parallel_for(spec.replicas, spec.threads, [&](std::int64_t r) {
    Rng data_rng(data_seed(spec.master_seed, static_cast<int>(r)));
    const auto sim = model::simulate_dataset(
        spec.beta_true, spec.delta_true, spec.link.family, spec.n, data_rng);
    ChainConfig cfg = spec.chain;
    cfg.seed = chain_seed(spec.master_seed, static_cast<int>(r));
    try {
      for (std::size_t a = 0; a < arms.size(); ++a) {
        const auto draws =
            sampler::run_chain(sim.data, spec.link, cfg, arms[a].prior);
        for (int j = 0; j < p; ++j) {
          const auto chain = chain_of(draws, "beta_" + std::to_string(j));
          for (std::size_t s = 0; s < stats.size(); ++s) {
            est[a][s](r, j) = diagnostics::apply_statistic(stats[s], chain);
          }
        }
      }
    } catch (const sampler::ChainAbort&) {
      failed[r] = 1;
    }
  });

  for (int r = 0; r < spec.replicas; ++r) {
    if (failed[r]) rep.excluded_replicas.push_back(r);
  }
  for (std::size_t a = 0; a < arms.size(); ++a) {
    PriorArmResult arm;
    arm.prior_name = arms[a].name;
    for (std::size_t s = 0; s < stats.size(); ++s) {
      std::vector<double> per_param(p);
      for (int j = 0; j < p; ++j) {
        std::vector<double> col;
        for (int r = 0; r < spec.replicas; ++r) {
          if (!failed[r]) col.push_back(est[a][s](r, j));
        }
        per_param[j] = num::mean(col);
      }
      arm.est[diagnostics::statistic_name(stats[s])] = per_param;
    }
    rep.arms.push_back(std::move(arm));
  }
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

StudySpec parse_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("cannot open study config '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw std::domain_error("study config line " + std::to_string(lineno) +
                                ": expected key = value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  StudySpec spec;
  spec.chain = ChainConfig::desk_scale();
  double nu1 = 0.0, nu2 = 0.0;
  std::string family = "csn";
  const std::set<std::string> known = {
      "family", "nu1", "nu2", "nu", "beta", "delta", "n", "replicas",
      "iterations", "burn_in", "thin", "seed", "threads", "retain_latents"};
  for (const auto& [k, v] : kv) {
    if (!known.count(k)) {
      throw std::domain_error("study config: unknown key '" + k + "'");
    }
    if (k == "family") family = v;
    else if (k == "nu" || k == "nu1") nu1 = std::stod(v);
    else if (k == "nu2") nu2 = std::stod(v);
    else if (k == "delta") spec.delta_true = std::stod(v);
    else if (k == "n") spec.n = std::stoi(v);
    else if (k == "replicas") spec.replicas = std::stoi(v);
    else if (k == "iterations") spec.chain.iterations = std::stoi(v);
    else if (k == "burn_in") spec.chain.burn_in = std::stoi(v);
    else if (k == "thin") spec.chain.thin = std::stoi(v);
    else if (k == "seed") spec.master_seed = std::stoull(v);
    else if (k == "threads") spec.threads = std::stoi(v);
    else if (k == "retain_latents") spec.chain.retain_latents = v == "true";
    else if (k == "beta") {
      std::vector<double> vals;
      std::stringstream ss(v);
      std::string tok;
      while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
      spec.beta_true = Eigen::Map<Eigen::VectorXd>(vals.data(),
                                                   static_cast<long>(vals.size()));
    }
  }
  spec.link.family = smcsn::family_from_name(family, nu1, nu2);
  spec.link.sign = spec.delta_true >= 0.0 ? model::SignRegion::kPositive
                                          : model::SignRegion::kNegative;
  if (spec.beta_true.size() == 0) {
    spec.beta_true = Eigen::Vector2d(1.0, 2.0);
  }
  spec.apply_default_statistics();
  return spec;
}

}  // namespace skewlink::simharness
