#ifndef SKEWLINK_SIMHARNESS_HPP_
#define SKEWLINK_SIMHARNESS_HPP_

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "skewlink/diagnostics.hpp"
#include "skewlink/sampler.hpp"

namespace skewlink::simharness {

using diagnostics::Statistic;
using model::LinkSpec;
using model::PriorSpec;
using sampler::ChainConfig;

struct StudySpec {
  LinkSpec link;              // family with true shape values, sign region
  Eigen::VectorXd beta_true;
  double delta_true = 0.99;
  int n = 250;
  int replicas = 10;
  ChainConfig chain;          // per-replica chain configuration
  PriorSpec prior;            // beta prior used in fits
  std::uint64_t master_seed = 20240901;
  int threads = 1;

  // Point-estimate statistic per parameter kind; defaults follow the
  // per-family recommendation.
  Statistic stat_beta = Statistic::kMedian;
  Statistic stat_delta = Statistic::kMode;
  Statistic stat_nu = Statistic::kMode;

  void apply_default_statistics();
  void validate() const;
};

struct RecoveryStats {
  double est = 0, sd = 0, rel_bias = 0, mse = 0;
  bool rel_bias_is_absolute = false;  // truth == 0 fallback
};

// Est = mean, SD = sample sd (divisor R-1), RelBias = |Est-truth|/truth,
// MSE = (Est-truth)^2 + SD^2.
RecoveryStats recovery_stats(std::span<const double> estimates, double truth);

struct RecoveryRow {
  std::string parameter;
  double real = 0;
  RecoveryStats stats;
};

struct RecoveryReport {
  std::vector<RecoveryRow> rows;
  Eigen::MatrixXd per_replica;  // replicas x parameters, NaN when excluded
  std::vector<std::string> parameter_names;
  std::vector<int> excluded_replicas;
  double seconds = 0.0;
};

RecoveryReport run_recovery_study(const StudySpec& spec);

struct SignStudyReport {
  int replicas = 0;
  int correct_mean = 0;
  int correct_median = 0;
  int correct_mode = 0;
  std::vector<int> excluded_replicas;
};

SignStudyReport run_sign_study(const StudySpec& spec);

struct PriorArmResult {
  std::string prior_name;
  // statistic -> per-parameter Est over replicas
  std::map<std::string, std::vector<double>> est;  // keys: mean/median/mode
};

struct PriorStudyReport {
  std::vector<std::string> parameter_names;
  std::vector<PriorArmResult> arms;  // normal, hyper-g a=4, hyper-g a~U(2,4)
  std::vector<int> excluded_replicas;
  double normal_prior_var = 1000.0;
  double seconds = 0.0;
};

PriorStudyReport run_prior_study(const StudySpec& spec);

// key = value study description (unknown keys rejected).
StudySpec parse_study_config(const std::string& path);

}  // namespace skewlink::simharness

#endif  // SKEWLINK_SIMHARNESS_HPP_
