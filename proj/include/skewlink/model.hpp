#ifndef SKEWLINK_MODEL_HPP_
#define SKEWLINK_MODEL_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "skewlink/rng.hpp"
#include "skewlink/smcsn.hpp"

namespace skewlink::model {

using smcsn::MixingFamily;
using smcsn::QuadReport;

struct BinaryDataset {
  Eigen::MatrixXd X;  // n x p, first column all ones
  Eigen::VectorXd y;  // entries in {0,1}
  std::vector<std::string> column_names;  // size p, [0] = "(intercept)"
  std::vector<std::string> warnings;      // degeneracy notes, non-fatal

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
  void validate() const;
};

// Scan for degenerate responses and single-covariate separation; fills
// data.warnings. The sampler still runs on degenerate data (the g-prior
// keeps the posterior proper).
void detect_degeneracies(BinaryDataset& data);

// The fixed sign region A for delta.
enum class SignRegion { kPositive, kNegative };  // (0,1) or (-1,0)

struct LinkSpec {
  MixingFamily family = MixingFamily::csn();
  SignRegion sign = SignRegion::kPositive;

  double delta_lower() const {
    return sign == SignRegion::kPositive ? 0.0 : -1.0;
  }
  double delta_upper() const {
    return sign == SignRegion::kPositive ? 1.0 : 0.0;
  }
};

struct ModelParams {
  Eigen::VectorXd beta;
  double delta = 0.0;
  double nu1 = 0.0;  // CST/CSS nu, or CSCN nu1
  double nu2 = 0.0;  // CSCN only
  double g = 1.0;

  MixingFamily family_with_nu(const MixingFamily& base) const;
};

struct LatentState {
  Eigen::VectorXd z;
  Eigen::VectorXd h;  // positive
  Eigen::VectorXd u;  // positive; CSCN entries in {nu2, 1}
};

// Prior on the regression block. kHyperG: beta|g ~ N(0, g Sigma_b) with
// Sigma_b = diag(1/2) and pi(g) ∝ (1+g)^{-alpha/2}; kHyperGUniformAlpha
// marginalizes alpha ~ U(2,4) in closed form; kNormalFixed: beta ~ N(0, v I)
// with no g update.
enum class PriorKind { kHyperG, kHyperGUniformAlpha, kNormalFixed };

struct PriorSpec {
  PriorKind kind = PriorKind::kHyperG;
  double alpha = 4.0;        // kHyperG only
  double normal_var = 1000;  // kNormalFixed only
};

// P(Y=1 | eta) = F(eta; 0, 1, delta, fam).
double success_prob(double eta, double delta, const MixingFamily& fam,
                    QuadReport* report = nullptr);

// Joint log density of (z, h, u | theta) plus the response indicators, up
// to constants free of (z,h,u,theta). -inf when any sign indicator fails.
double complete_log_likelihood(const ModelParams& theta, const LatentState& lat,
                               const BinaryDataset& data,
                               const MixingFamily& fam);

// CSCN likelihood with U summed out; same dropped-constant convention as
// complete_log_likelihood, so exp of a per-observation term equals the
// two-atom sum exactly.
double cscn_marginal_log_likelihood(const ModelParams& theta,
                                    const Eigen::VectorXd& z,
                                    const Eigen::VectorXd& h,
                                    const BinaryDataset& data);

// log pi(g) kernel for the configured prior (unnormalized for kHyperG).
double log_g_prior_kernel(double g, const PriorSpec& prior);

// log pi(beta,g,delta,nu); -inf outside the support.
double log_prior(const ModelParams& theta, const LinkSpec& spec,
                 const PriorSpec& prior);

struct SimulatedData {
  BinaryDataset data;
  Eigen::VectorXd z_true;
};

// Covariates N(0,1), standardized; Z = X beta + eps with
// eps ~ SMCSN(0, 1, -delta); Y = I(Z > 0). The link CDF of the generated
// data is then F(.;0,1,+delta) (the Prop.-3.1 orientation).
SimulatedData simulate_dataset(const Eigen::VectorXd& beta, double delta,
                               const MixingFamily& fam, int n, Rng& rng,
                               bool standardize = true);

// Delimiter-separated ingestion: header row, response by name, categorical
// columns expanded to indicators against the first (sorted) level.
BinaryDataset read_dataset(const std::string& path, const std::string& response,
                           const std::vector<std::string>& categorical,
                           bool standardize);

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int column_)
      : std::runtime_error(msg), line(line_), column(column_) {}
};

}  // namespace skewlink::model

#endif  // SKEWLINK_MODEL_HPP_
