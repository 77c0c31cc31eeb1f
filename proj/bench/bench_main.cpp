// Timing comparison between the serial reference loops and the OpenMP
// kernels: batch sampling, replica studies, and link-curve evaluation.

#include <chrono>
#include <cstdio>

#include "skewlink/diagnostics.hpp"
#include "skewlink/parallel.hpp"
#include "skewlink/simharness.hpp"

using namespace skewlink;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.3f s %10.3f s %8.2fx\n", name, serial, parallel,
              serial / parallel);
}

}  // namespace

int main() {
  const int threads = hardware_threads();
  std::printf("threads: %d\n", threads);
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial", "openmp",
              "speedup");

  {
    const smcsn::CenteredParams p{0.0, 1.0, 0.95};
    const auto fam = smcsn::MixingFamily::cst(3.0);
    const std::size_t n = 8000000;
    auto t0 = Clock::now();
    const auto a = smcsn::sample_many_serial(p, fam, n, 42);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    const auto b = smcsn::sample_many(p, fam, n, 42, threads);
    const double tp = seconds_since(t0);
    if (a != b) {
      std::printf("sample_many mismatch!\n");
      return 1;
    }
    report("sample_many (8e6 CST)", ts, tp);
  }

  {
    simharness::StudySpec spec;
    spec.link.family = smcsn::MixingFamily::csn();
    spec.beta_true = Eigen::Vector2d(1.0, 2.0);
    spec.delta_true = 0.9;
    spec.n = 150;
    spec.replicas = 8;
    spec.chain = sampler::ChainConfig::desk_scale();
    spec.master_seed = 99;
    spec.apply_default_statistics();

    spec.threads = 1;
    auto t0 = Clock::now();
    const auto a = simharness::run_recovery_study(spec);
    const double ts = seconds_since(t0);
    spec.threads = threads;
    t0 = Clock::now();
    const auto b = simharness::run_recovery_study(spec);
    const double tp = seconds_since(t0);
    if ((a.per_replica - b.per_replica).cwiseAbs().maxCoeff() != 0.0) {
      std::printf("recovery study mismatch!\n");
      return 1;
    }
    report("recovery study (8 chains)", ts, tp);
  }

  {
    model::LinkSpec spec{smcsn::MixingFamily::cst(3.0),
                         model::SignRegion::kPositive};
    sampler::PosteriorDraws draws;
    draws.spec = spec;
    const int kept = 500;
    Rng rng(7);
    draws.beta = Eigen::MatrixXd::Zero(kept, 1);
    draws.delta.resize(kept);
    draws.g = Eigen::VectorXd::Ones(kept);
    draws.nu.resize(kept, 1);
    for (int k = 0; k < kept; ++k) {
      draws.delta[k] = rng.uniform(0.5, 0.99);
      draws.nu(k, 0) = rng.uniform(2.5, 10.0);
    }
    std::vector<double> etas;
    for (double e = -4.0; e <= 4.0; e += 0.1) etas.push_back(e);

    auto t0 = Clock::now();
    const auto a = diagnostics::link_curve(draws, etas, 0.95, 1);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    const auto b = diagnostics::link_curve(draws, etas, 0.95, threads);
    const double tp = seconds_since(t0);
    if (a.mean != b.mean) {
      std::printf("link curve mismatch!\n");
      return 1;
    }
    report("link_curve (500x81 CST)", ts, tp);
  }
  return 0;
}
