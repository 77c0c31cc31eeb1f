#ifndef SKEWLINK_SAMPLER_HPP_
#define SKEWLINK_SAMPLER_HPP_

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "skewlink/model.hpp"
#include "skewlink/rng.hpp"

namespace skewlink::sampler {

using model::BinaryDataset;
using model::LinkSpec;
using model::PriorSpec;
using smcsn::MixingFamily;

struct ChainConfig {
  int iterations = 60000;
  int burn_in = 40000;
  int thin = 20;
  std::uint64_t seed = 20240901;
  bool retain_latents = false;

  // Initial random-walk scales; adapted during burn-in only.
  double scale_delta = 0.5;
  double scale_nu = 0.4;
  double scale_g = 0.8;
  double scale_u = 0.8;
  int adapt_window = 50;
  double adapt_target = 0.35;

  static ChainConfig desk_scale() {
    ChainConfig cfg;
    cfg.iterations = 6000;
    cfg.burn_in = 4000;
    cfg.thin = 2;
    return cfg;
  }

  int retained() const { return (iterations - burn_in) / thin; }
  void validate() const;
};

struct PosteriorDraws {
  Eigen::MatrixXd beta;   // retained x p
  Eigen::VectorXd delta;  // retained (zero for probit)
  Eigen::MatrixXd nu;     // retained x shape_count
  Eigen::VectorXd g;      // retained (zero when prior is kNormalFixed)
  std::optional<Eigen::MatrixXd> z, h, u;  // retained x n when requested

  LinkSpec spec;
  PriorSpec prior;
  ChainConfig config;
  std::vector<std::string> beta_names;
  std::map<std::string, double> acceptance;  // post-burn-in rates per block
  double seconds = 0.0;

  int retained() const { return static_cast<int>(beta.rows()); }
  // (name, chain) pairs in deterministic column order.
  std::vector<std::pair<std::string, Eigen::VectorXd>> named_chains() const;
};

// Thrown when a sweep produces a non-finite state.
struct ChainAbort : std::runtime_error {
  int iteration;
  std::string state_dump;
  ChainAbort(int it, std::string dump)
      : std::runtime_error("chain aborted at iteration " + std::to_string(it)),
        iteration(it),
        state_dump(std::move(dump)) {}
};

// Mutable Gibbs state. Delta/tau are the link-derived quantities of the
// current delta and must be refreshed whenever delta changes.
struct SamplerState {
  model::ModelParams theta;
  model::LatentState lat;
  double Delta = 0.0;
  double tau = 1.0;
  void refresh_link();
};

// Per-coordinate full conditionals (exposed for the kernel tests).
void step_z(SamplerState& st, const BinaryDataset& data, Rng& rng);
void step_h(SamplerState& st, const BinaryDataset& data, Rng& rng);
void step_beta(SamplerState& st, const BinaryDataset& data,
               const PriorSpec& prior, Rng& rng);

struct BlockAcceptance {
  int accepted = 0;
  int attempts = 0;
};

// CST/CSS: per-observation random-walk Metropolis on log u. CSCN: exact
// two-atom draw (attempts counted, accepted == attempts).
BlockAcceptance step_u(SamplerState& st, const BinaryDataset& data,
                       const MixingFamily& fam, double scale, Rng& rng);

// Exact CSCN conditional P(u_i = nu2 | rest); exposed for the oracle test.
double cscn_atom_prob(const SamplerState& st, const BinaryDataset& data, int i);

bool step_delta(SamplerState& st, const BinaryDataset& data,
                const LinkSpec& spec, double scale, Rng& rng);
bool step_g(SamplerState& st, const PriorSpec& prior, double scale, Rng& rng);

// CST/CSS update nu on the log scale (first slot of the result); CSCN
// updates nu1 then nu2 on the logit scale (first and second slots).
std::pair<BlockAcceptance, BlockAcceptance> step_nu(
    SamplerState& st, const BinaryDataset& data, const LinkSpec& spec,
    double scale_nu1, double scale_nu2, Rng& rng);

// Log target of the delta block on the logit-transformed scale (likelihood
// + prior + Jacobian); used by the sampler and the detailed-balance test.
double delta_log_target(const SamplerState& st, const BinaryDataset& data,
                        const LinkSpec& spec, double delta);
double g_log_target(const Eigen::VectorXd& beta, double g,
                    const PriorSpec& prior);

SamplerState initial_state(const BinaryDataset& data, const LinkSpec& spec,
                           Rng& rng);

PosteriorDraws run_chain(const BinaryDataset& data, const LinkSpec& spec,
                         const ChainConfig& cfg, const PriorSpec& prior = {});

}  // namespace skewlink::sampler

#endif  // SKEWLINK_SAMPLER_HPP_
