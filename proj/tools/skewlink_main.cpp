// skewlink: Bayesian binary regression with skewed, heavy-tailed link
// functions built from scale mixtures of centered skew-normal CDFs.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "skewlink/diagnostics.hpp"
#include "skewlink/io.hpp"
#include "skewlink/numerics.hpp"
#include "skewlink/parallel.hpp"
#include "skewlink/simharness.hpp"

namespace fs = std::filesystem;
using namespace skewlink;
namespace num = skewlink::numerics;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitSampler = 3;
constexpr int kExitConfig = 4;

struct CommonOpts {
  std::string out_dir = ".";
  std::uint64_t seed = 20240901;
  int threads = hardware_threads();
};

struct ChainOpts {
  int iterations = 60000;
  int burn_in = 40000;
  int thin = 20;
  bool desk_scale = false;

  sampler::ChainConfig config(std::uint64_t seed) const {
    sampler::ChainConfig cfg;
    if (desk_scale) cfg = sampler::ChainConfig::desk_scale();
    if (iterations != 60000 || !desk_scale) cfg.iterations = iterations;
    if (burn_in != 40000 || !desk_scale) cfg.burn_in = burn_in;
    if (thin != 20 || !desk_scale) cfg.thin = thin;
    if (desk_scale && iterations == 60000) cfg.iterations = 6000;
    if (desk_scale && burn_in == 40000) cfg.burn_in = 4000;
    if (desk_scale && thin == 20) cfg.thin = 2;
    cfg.seed = seed;
    return cfg;
  }
};

struct DataOpts {
  std::string path;
  std::string response = "y";
  std::vector<std::string> categorical;
  bool standardize = false;
};

struct FamilyOpts {
  std::string family = "csn";
  double nu = 0.0;
  double nu2 = 0.0;
  std::string sign = "pos";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--threads", o.threads, "worker threads");
}

void add_chain(CLI::App* cmd, ChainOpts& o) {
  cmd->add_option("--iters", o.iterations, "MCMC iterations");
  cmd->add_option("--burnin", o.burn_in, "burn-in iterations");
  cmd->add_option("--thin", o.thin, "thinning interval");
  cmd->add_flag("--desk-scale", o.desk_scale,
                "use the 6000/4000/2 desk-scale chain profile");
}

void add_data(CLI::App* cmd, DataOpts& o, bool required = true) {
  auto* opt = cmd->add_option("--data", o.path, "input dataset (CSV)");
  if (required) opt->required();
  cmd->add_option("--response", o.response, "response column name");
  cmd->add_option("--categorical", o.categorical,
                  "categorical covariates (repeatable or comma separated)")
      ->delimiter(',');
  cmd->add_flag("--standardize", o.standardize,
                "standardize continuous covariates");
}

void add_family(CLI::App* cmd, FamilyOpts& o) {
  cmd->add_option("--family", o.family,
                  "link family: probit|csn|cst|css|cscn");
  cmd->add_option("--nu", o.nu, "shape parameter (CST/CSS nu, CSCN nu1)");
  cmd->add_option("--nu2", o.nu2, "CSCN nu2");
  cmd->add_option("--sign", o.sign, "delta sign region: pos|neg|auto");
}

// Placeholder shape values keep LinkSpec valid; the chain samples nu itself.
smcsn::MixingFamily fit_family(const FamilyOpts& o) {
  if (o.family == "cst") return smcsn::MixingFamily::cst(o.nu > 2.0 ? o.nu : 5.0);
  if (o.family == "css") return smcsn::MixingFamily::css(o.nu > 1.0 ? o.nu : 3.0);
  if (o.family == "cscn") {
    const double a = (o.nu > 0.0 && o.nu < 1.0) ? o.nu : 0.5;
    const double b = (o.nu2 > 0.0 && o.nu2 < 1.0) ? o.nu2 : 0.5;
    return smcsn::MixingFamily::cscn(a, b);
  }
  return smcsn::family_from_name(o.family, o.nu, o.nu2);
}

model::BinaryDataset load_data(const DataOpts& o) {
  auto data = model::read_dataset(o.path, o.response, o.categorical,
                                  o.standardize);
  for (const auto& w : data.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  return data;
}

std::string joinpath(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

io::Manifest base_manifest(const std::string& command, const CommonOpts& c) {
  io::Manifest m;
  m.command = command;
  m.set("seed", static_cast<std::int64_t>(c.seed));
  return m;
}

void manifest_chain(io::Manifest& m, const sampler::ChainConfig& cfg) {
  m.set("iterations", static_cast<std::int64_t>(cfg.iterations));
  m.set("burn_in", static_cast<std::int64_t>(cfg.burn_in));
  m.set("thin", static_cast<std::int64_t>(cfg.thin));
}

model::PriorSpec prior_from_flags(const std::string& name, double normal_var) {
  model::PriorSpec prior;
  if (name == "hyperg") {
    prior.kind = model::PriorKind::kHyperG;
  } else if (name == "hyperg-u") {
    prior.kind = model::PriorKind::kHyperGUniformAlpha;
  } else if (name == "normal") {
    prior.kind = model::PriorKind::kNormalFixed;
    prior.normal_var = normal_var;
  } else {
    throw std::domain_error("unknown prior: " + name);
  }
  return prior;
}

int cmd_simulate(const CommonOpts& common, const FamilyOpts& fam_opts,
                 const std::vector<double>& beta, double delta, int n,
                 bool standardize) {
  const auto fam = smcsn::family_from_name(fam_opts.family, fam_opts.nu,
                                           fam_opts.nu2);
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
      beta.data(), static_cast<long>(beta.size()));
  Rng rng(common.seed);
  const auto sim = model::simulate_dataset(b, delta, fam, n, rng, standardize);

  io::Manifest m = base_manifest("simulate", common);
  m.set("family", fam.name());
  m.set("delta", delta);
  m.set("n", static_cast<std::int64_t>(n));
  for (std::size_t j = 0; j < beta.size(); ++j) {
    m.set("beta_" + std::to_string(j), beta[j]);
  }
  io::write_dataset_csv(joinpath(common.out_dir, "dataset.csv"), sim.data, m);

  json truth;
  truth["manifest_digest"] = m.digest();
  truth["seed"] = common.seed;
  truth["family"] = fam.name();
  truth["beta"] = beta;
  truth["delta"] = delta;
  if (fam.shape_count() >= 1) truth["nu1"] = fam.nu1;
  if (fam.shape_count() >= 2) truth["nu2"] = fam.nu2;
  std::ofstream tf(joinpath(common.out_dir, "truth.json"));
  tf << truth.dump(2) << '\n';
  std::cout << "wrote dataset.csv (" << sim.data.n() << " rows) and truth.json\n";
  return kExitOk;
}

struct FitResult {
  sampler::PosteriorDraws draws;
  model::BinaryDataset data;
  io::Manifest manifest;
};

FitResult run_fit(const std::string& command, const CommonOpts& common,
                  const DataOpts& data_opts, const FamilyOpts& fam_opts,
                  const ChainOpts& chain_opts, const std::string& prior_name,
                  double normal_var, bool retain_latents) {
  auto data = load_data(data_opts);
  model::LinkSpec spec;
  spec.family = fit_family(fam_opts);

  auto cfg = chain_opts.config(common.seed);
  cfg.retain_latents = retain_latents;
  const auto prior = prior_from_flags(prior_name, normal_var);

  bool auto_sign = false;
  if (fam_opts.sign == "auto") {
    auto_sign = true;
    if (spec.family.tag == smcsn::Family::kNormal) {
      spec.sign = model::SignRegion::kPositive;
    } else {
      auto pre_cfg = cfg;
      pre_cfg.seed = Rng::derive_seed(common.seed, 0x5167u);
      const auto rep = diagnostics::select_delta_sign(data, pre_cfg);
      spec.sign = rep.sign > 0 ? model::SignRegion::kPositive
                               : model::SignRegion::kNegative;
    }
  } else if (fam_opts.sign == "pos") {
    spec.sign = model::SignRegion::kPositive;
  } else if (fam_opts.sign == "neg") {
    spec.sign = model::SignRegion::kNegative;
  } else {
    throw std::domain_error("unknown sign region: " + fam_opts.sign);
  }

  io::Manifest m = base_manifest(command, common);
  m.set("data", data_opts.path);
  m.set("response", data_opts.response);
  m.set("family", spec.family.name());
  m.set("sign",
        spec.sign == model::SignRegion::kPositive ? "(0,1)" : "(-1,0)");
  m.set("sign_auto", auto_sign ? "true" : "false");
  m.set("prior", prior_name);
  m.set("standardize", data_opts.standardize ? "true" : "false");
  manifest_chain(m, cfg);

  auto draws = sampler::run_chain(data, spec, cfg, prior);
  std::cerr << "chain finished in " << draws.seconds << " s\n";
  return {std::move(draws), std::move(data), std::move(m)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Binary regression with skewed and heavy-tailed link functions "
      "(probit, CSN, CST, CSS, CSCN)"};
  app.require_subcommand(1);

  // ---- simulate ----
  CommonOpts sim_common;
  FamilyOpts sim_family;
  std::vector<double> sim_beta = {1.0, 2.0};
  double sim_delta = 0.99;
  int sim_n = 250;
  bool sim_no_standardize = false;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  add_common(sim, sim_common);
  add_family(sim, sim_family);
  sim->add_option("--beta", sim_beta, "true coefficients")->delimiter(',');
  sim->add_option("--delta", sim_delta, "true link skewness");
  sim->add_option("--n", sim_n, "sample size");
  sim->add_flag("--no-standardize", sim_no_standardize,
                "keep raw simulated covariates");

  // ---- fit ----
  CommonOpts fit_common;
  DataOpts fit_data;
  FamilyOpts fit_fam;
  ChainOpts fit_chain;
  std::string fit_prior = "hyperg";
  double fit_normal_var = 1000.0;
  bool fit_latents = false;
  double fit_hpd = 0.95;
  auto* fit = app.add_subcommand("fit", "run the MCMC fit");
  add_common(fit, fit_common);
  add_data(fit, fit_data);
  add_family(fit, fit_fam);
  add_chain(fit, fit_chain);
  fit->add_option("--prior", fit_prior, "beta prior: hyperg|hyperg-u|normal");
  fit->add_option("--normal-var", fit_normal_var,
                  "variance of the fixed normal prior");
  fit->add_flag("--retain-latents", fit_latents, "store latent draws");
  fit->add_option("--hpd", fit_hpd, "HPD mass for the summary table");

  // ---- sign-select ----
  CommonOpts ss_common;
  DataOpts ss_data;
  ChainOpts ss_chain;
  auto* ss = app.add_subcommand("sign-select",
                                "choose the sign region for delta");
  add_common(ss, ss_common);
  add_data(ss, ss_data);
  add_chain(ss, ss_chain);

  // ---- residuals ----
  CommonOpts res_common;
  DataOpts res_data;
  FamilyOpts res_fam;
  ChainOpts res_chain;
  int res_replicates = 200;
  double res_band = 0.95;
  auto* res = app.add_subcommand(
      "residuals", "latent residual envelope for a fitted model");
  add_common(res, res_common);
  add_data(res, res_data);
  add_family(res, res_fam);
  add_chain(res, res_chain);
  res->add_option("--replicates", res_replicates, "envelope replicates");
  res->add_option("--band", res_band, "envelope band probability");

  // ---- predict ----
  CommonOpts pr_common;
  DataOpts pr_data;
  FamilyOpts pr_fam;
  std::string pr_draws;
  double pr_band = 0.95;
  auto* pr = app.add_subcommand(
      "predict", "posterior success probabilities for each data row");
  add_common(pr, pr_common);
  add_data(pr, pr_data);
  add_family(pr, pr_fam);
  pr->add_option("--draws", pr_draws, "draws.csv from a fit")->required();
  pr->add_option("--band", pr_band, "posterior band probability");

  // ---- link-curve ----
  CommonOpts lc_common;
  FamilyOpts lc_fam;
  std::string lc_draws;
  double lc_lo = -4.0, lc_hi = 4.0;
  int lc_points = 81;
  double lc_band = 0.95;
  auto* lc = app.add_subcommand("link-curve",
                                "success probability curve over eta");
  add_common(lc, lc_common);
  add_family(lc, lc_fam);
  lc->add_option("--draws", lc_draws, "draws.csv from a fit")->required();
  lc->add_option("--eta-min", lc_lo, "grid lower end");
  lc->add_option("--eta-max", lc_hi, "grid upper end");
  lc->add_option("--points", lc_points, "grid size");
  lc->add_option("--band", lc_band, "posterior band probability");

  // ---- studies ----
  CommonOpts st_common;
  std::string st_config;
  auto* recover = app.add_subcommand("recover", "parameter recovery study");
  add_common(recover, st_common);
  recover->add_option("--config", st_config, "study config file")->required();

  CommonOpts sg_common;
  std::string sg_config;
  auto* signstudy = app.add_subcommand("sign-study",
                                       "sign-selection replica study");
  add_common(signstudy, sg_common);
  signstudy->add_option("--config", sg_config, "study config file")->required();

  CommonOpts ps_common;
  std::string ps_config;
  auto* priorstudy = app.add_subcommand("prior-study",
                                        "beta-prior comparison study");
  add_common(priorstudy, ps_common);
  priorstudy->add_option("--config", ps_config, "study config file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(sim_common, sim_family, sim_beta, sim_delta, sim_n,
                          !sim_no_standardize);
    }

    if (fit->parsed()) {
      auto r = run_fit("fit", fit_common, fit_data, fit_fam, fit_chain,
                       fit_prior, fit_normal_var, fit_latents);
      io::write_draws_csv(joinpath(fit_common.out_dir, "draws.csv"), r.draws,
                          r.manifest);
      const auto summary = diagnostics::summarize(r.draws, fit_hpd);
      io::write_summary_csv(joinpath(fit_common.out_dir, "summary.csv"),
                            summary, r.manifest);
      io::write_meta_json(joinpath(fit_common.out_dir, "meta.json"), r.draws,
                          r.data, r.manifest);
      std::cout << "wrote draws.csv, summary.csv, meta.json\n";
      return kExitOk;
    }

    if (ss->parsed()) {
      auto data = load_data(ss_data);
      auto cfg = ss_chain.config(ss_common.seed);
      const auto rep = diagnostics::select_delta_sign(data, cfg);
      io::Manifest m = base_manifest("sign-select", ss_common);
      m.set("data", ss_data.path);
      manifest_chain(m, cfg);
      std::ofstream out(joinpath(ss_common.out_dir, "sign_report.csv"));
      out << "# command=sign-select\n# manifest_digest=" << m.digest() << "\n";
      out << "statistic,value,sign\n";
      out << "mean," << io::fmt(rep.stat_mean) << ','
          << rep.sign_under(diagnostics::Statistic::kMean) << '\n';
      out << "median," << io::fmt(rep.stat_median) << ','
          << rep.sign_under(diagnostics::Statistic::kMedian) << '\n';
      out << "mode," << io::fmt(rep.stat_mode) << ','
          << rep.sign_under(diagnostics::Statistic::kMode) << '\n';
      std::cout << "suggested sign region: "
                << (rep.sign > 0 ? "(0,1)" : "(-1,0)") << "\n";
      return kExitOk;
    }

    if (res->parsed()) {
      auto r = run_fit("residuals", res_common, res_data, res_fam, res_chain,
                       "hyperg", 1000.0, /*retain_latents=*/true);
      const auto resid = diagnostics::latent_residuals(r.draws, r.data);
      Rng band_rng(Rng::derive_seed(res_common.seed, 0xba17du));
      const auto band = diagnostics::normal_envelope(resid, res_replicates,
                                                     res_band, band_rng);
      r.manifest.set("replicates", static_cast<std::int64_t>(res_replicates));
      r.manifest.set("band", res_band);
      io::write_envelope_csv(joinpath(res_common.out_dir, "envelope.csv"),
                             band, r.manifest);
      std::cout << band.inside() << "/" << band.observed.size()
                << " residuals inside the " << res_band * 100 << "% band\n";
      return kExitOk;
    }

    if (pr->parsed() || lc->parsed()) {
      const bool predict = pr->parsed();
      const auto& common = predict ? pr_common : lc_common;
      const auto& fam_opts = predict ? pr_fam : lc_fam;
      const auto table = io::read_draws_csv(predict ? pr_draws : lc_draws);

      // rebuild a draws object from the table
      sampler::PosteriorDraws draws;
      draws.spec.family = fit_family(fam_opts);
      draws.config.iterations = 1;
      const auto col = [&](const std::string& name) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
          if (table.columns[j] == name) return static_cast<int>(j);
        }
        return -1;
      };
      int p = 0;
      while (col("beta_" + std::to_string(p)) >= 0) ++p;
      if (p == 0) throw model::ParseError("draws file has no beta columns", 1, 0);
      const int kept = static_cast<int>(table.values.rows());
      draws.beta.resize(kept, p);
      for (int j = 0; j < p; ++j) {
        draws.beta.col(j) = table.values.col(col("beta_" + std::to_string(j)));
      }
      draws.delta = Eigen::VectorXd::Zero(kept);
      if (col("delta") >= 0) draws.delta = table.values.col(col("delta"));
      draws.g = Eigen::VectorXd::Zero(kept);
      if (col("g") >= 0) draws.g = table.values.col(col("g"));
      draws.nu.resize(kept, std::max(1, draws.spec.family.shape_count()));
      draws.nu.setZero();
      if (draws.spec.family.shape_count() == 1 && col("nu") >= 0) {
        draws.nu.col(0) = table.values.col(col("nu"));
      }
      if (draws.spec.family.shape_count() == 2) {
        if (col("nu1") >= 0) draws.nu.col(0) = table.values.col(col("nu1"));
        if (col("nu2") >= 0) draws.nu.col(1) = table.values.col(col("nu2"));
      }

      if (predict) {
        auto data = load_data(pr_data);
        if (data.p() != p) {
          throw model::ParseError("draws have " + std::to_string(p) +
                                      " coefficients but the design matrix has " +
                                      std::to_string(data.p()) + " columns",
                                  1, 0);
        }
        io::Manifest m = base_manifest("predict", common);
        m.set("data", pr_data.path);
        m.set("draws", pr_draws);
        m.set("family", draws.spec.family.name());
        const Eigen::MatrixXd etas = data.X * draws.beta.transpose();  // n x K
        std::ofstream out(joinpath(common.out_dir, "predictions.csv"));
        out << "# command=predict\n# manifest_digest=" << m.digest() << "\n";
        out << "row,p_mean,p_lower,p_upper\n";
        const double lo_q = 0.5 * (1.0 - pr_band);
        const double hi_q = 0.5 * (1.0 + pr_band);
        std::vector<std::vector<double>> rows(data.n());
        parallel_for(data.n(), common.threads, [&](std::int64_t i) {
          std::vector<double> probs(kept);
          for (int k = 0; k < kept; ++k) {
            auto fam = draws.spec.family;
            if (fam.shape_count() >= 1) fam.nu1 = draws.nu(k, 0);
            if (fam.shape_count() >= 2) fam.nu2 = draws.nu(k, 1);
            const double d = fam.tag == smcsn::Family::kNormal
                                 ? 0.0 : draws.delta[k];
            probs[k] = model::success_prob(etas(i, k), d, fam);
          }
          std::sort(probs.begin(), probs.end());
          rows[i] = std::vector<double>{num::mean(probs),
                                        num::quantile(probs, lo_q),
                                        num::quantile(probs, hi_q)};
        });
        for (int i = 0; i < data.n(); ++i) {
          out << i << ',' << io::fmt(rows[i][0]) << ',' << io::fmt(rows[i][1])
              << ',' << io::fmt(rows[i][2]) << '\n';
        }
        std::cout << "wrote predictions.csv\n";
        return kExitOk;
      }

      std::vector<double> grid(lc_points);
      for (int k = 0; k < lc_points; ++k) {
        grid[k] = lc_lo + (lc_hi - lc_lo) * k / (lc_points - 1);
      }
      const auto curve =
          diagnostics::link_curve(draws, grid, lc_band, common.threads);
      io::Manifest m = base_manifest("link-curve", common);
      m.set("draws", lc_draws);
      m.set("family", draws.spec.family.name());
      m.set("points", static_cast<std::int64_t>(lc_points));
      io::write_curve_csv(joinpath(common.out_dir, "curve.csv"), curve, m);
      if (curve.quad_failures > 0) {
        std::cerr << "warning: " << curve.quad_failures
                  << " quadrature evaluations did not converge\n";
      }
      std::cout << "wrote curve.csv\n";
      return kExitOk;
    }

    if (recover->parsed() || signstudy->parsed() || priorstudy->parsed()) {
      const CommonOpts& common = recover->parsed()
                                     ? st_common
                                     : (signstudy->parsed() ? sg_common
                                                            : ps_common);
      const std::string& cfg_path = recover->parsed()
                                        ? st_config
                                        : (signstudy->parsed() ? sg_config
                                                               : ps_config);
      auto spec = simharness::parse_study_config(cfg_path);
      if (common.threads > 0) spec.threads = common.threads;
      std::ifstream cfg_in(cfg_path);
      std::string cfg_text((std::istreambuf_iterator<char>(cfg_in)),
                           std::istreambuf_iterator<char>());
      io::Manifest m = base_manifest(
          recover->parsed() ? "recover"
                            : (signstudy->parsed() ? "sign-study"
                                                   : "prior-study"),
          common);
      m.set("config_digest",
            static_cast<std::int64_t>(io::fnv1a64(cfg_text)));
      m.set("master_seed", static_cast<std::int64_t>(spec.master_seed));

      if (recover->parsed()) {
        const auto rep = simharness::run_recovery_study(spec);
        io::write_recovery_csv(joinpath(common.out_dir, "recovery.csv"), rep, m);
        std::cerr << "study finished in " << rep.seconds << " s\n";
        std::cout << "wrote recovery.csv\n";
      } else if (signstudy->parsed()) {
        const auto rep = simharness::run_sign_study(spec);
        io::write_sign_study_csv(joinpath(common.out_dir, "sign_study.csv"),
                                 rep, m);
        std::cout << "wrote sign_study.csv (mean statistic: "
                  << rep.correct_mean << "/" << rep.replicas << ")\n";
      } else {
        const auto rep = simharness::run_prior_study(spec);
        io::write_prior_study_csv(joinpath(common.out_dir, "prior_study.csv"),
                                  rep, m);
        std::cerr << "study finished in " << rep.seconds << " s\n";
        std::cout << "wrote prior_study.csv\n";
      }
      return kExitOk;
    }
  } catch (const model::ParseError& e) {
    std::cerr << "parse error";
    if (e.line > 0) std::cerr << " (line " << e.line << ")";
    std::cerr << ": " << e.what() << "\n";
    return kExitParse;
  } catch (const sampler::ChainAbort& e) {
    const std::string dump_path = "skewlink_state_dump.txt";
    std::ofstream dump(dump_path);
    dump << e.what() << "\n" << e.state_dump << "\n";
    std::cerr << "sampler failure: " << e.what() << " (state dump: "
              << dump_path << ")\n";
    return kExitSampler;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
