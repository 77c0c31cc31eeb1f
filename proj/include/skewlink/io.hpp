#ifndef SKEWLINK_IO_HPP_
#define SKEWLINK_IO_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "skewlink/diagnostics.hpp"
#include "skewlink/sampler.hpp"
#include "skewlink/simharness.hpp"

namespace skewlink::io {

// Shortest round-trip decimal form; byte-stable across reruns.
std::string fmt(double x);

std::uint64_t fnv1a64(const std::string& s);

// Canonical manifest of a command invocation; its digest is embedded in
// every output file so replays are verifiable.
struct Manifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> entries;  // sorted on write

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  std::string canonical() const;
  std::string digest() const;  // 16 hex digits
};

void write_draws_csv(const std::string& path,
                     const sampler::PosteriorDraws& draws,
                     const Manifest& manifest);

// Reads a draws file written by write_draws_csv; returns column names and
// the value matrix (comment lines skipped).
struct DrawsTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};
DrawsTable read_draws_csv(const std::string& path);

void write_summary_csv(const std::string& path,
                       const std::vector<diagnostics::SummaryRow>& rows,
                       const Manifest& manifest);

void write_meta_json(const std::string& path,
                     const sampler::PosteriorDraws& draws,
                     const model::BinaryDataset& data, const Manifest& manifest);

void write_envelope_csv(const std::string& path,
                        const diagnostics::EnvelopeBand& band,
                        const Manifest& manifest);

void write_curve_csv(const std::string& path, const diagnostics::LinkCurve& c,
                     const Manifest& manifest);

void write_recovery_csv(const std::string& path,
                        const simharness::RecoveryReport& rep,
                        const Manifest& manifest);

void write_sign_study_csv(const std::string& path,
                          const simharness::SignStudyReport& rep,
                          const Manifest& manifest);

void write_prior_study_csv(const std::string& path,
                           const simharness::PriorStudyReport& rep,
                           const Manifest& manifest);

void write_dataset_csv(const std::string& path,
                       const model::BinaryDataset& data,
                       const Manifest& manifest);

}  // namespace skewlink::io

#endif  // SKEWLINK_IO_HPP_
