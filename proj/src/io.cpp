#include "skewlink/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace skewlink::io {

using json = nlohmann::ordered_json;

std::string fmt(double x) {
  char buf[40];
  // %.17g round-trips every double; trim to the shortest form that does.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void Manifest::set(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}
void Manifest::set(const std::string& key, double value) {
  entries.emplace_back(key, fmt(value));
}
void Manifest::set(const std::string& key, std::int64_t value) {
  entries.emplace_back(key, std::to_string(value));
}

std::string Manifest::canonical() const {
  auto sorted = entries;
  std::sort(sorted.begin(), sorted.end());
  std::ostringstream os;
  os << "command=" << command << '\n';
  for (const auto& [k, v] : sorted) os << k << '=' << v << '\n';
  return os.str();
}

std::string Manifest::digest() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

void write_header(std::ofstream& out, const Manifest& m) {
  out << "# command=" << m.command << "\n";
  out << "# manifest_digest=" << m.digest() << "\n";
  auto sorted = m.entries;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [k, v] : sorted) out << "# " << k << '=' << v << "\n";
}

}  // namespace

void write_draws_csv(const std::string& path,
                     const sampler::PosteriorDraws& draws,
                     const Manifest& manifest) {
  auto out = open_out(path);
  write_header(out, manifest);
  const auto chains = draws.named_chains();
  out << "iter";
  for (const auto& [name, c] : chains) out << ',' << name;
  out << '\n';
  const int kept = draws.retained();
  for (int k = 0; k < kept; ++k) {
    out << draws.config.burn_in + (k + 1) * draws.config.thin;
    for (const auto& [name, c] : chains) out << ',' << fmt(c[k]);
    out << '\n';
  }
}

DrawsTable read_draws_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw model::ParseError("cannot open '" + path + "'", 0, 0);
  DrawsTable table;
  std::string line;
  int lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string tok;
    if (table.columns.empty()) {
      while (std::getline(ss, tok, ',')) table.columns.push_back(tok);
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) {
      char* end = nullptr;
      row.push_back(std::strtod(tok.c_str(), &end));
      if (end != tok.c_str() + tok.size()) {
        throw model::ParseError("bad number '" + tok + "'", lineno, 0);
      }
    }
    if (row.size() != table.columns.size()) {
      throw model::ParseError("ragged row", lineno,
                              static_cast<int>(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw model::ParseError("no header", lineno, 0);
  table.values.resize(static_cast<long>(rows.size()),
                      static_cast<long>(table.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.values(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
    }
  }
  return table;
}

void write_summary_csv(const std::string& path,
                       const std::vector<diagnostics::SummaryRow>& rows,
                       const Manifest& manifest) {
  auto out = open_out(path);
  write_header(out, manifest);
  out << "parameter,mean,median,mode,hpd_lower,hpd_upper,recommended,"
         "recommended_value\n";
  for (const auto& r : rows) {
    double rec = r.mean;
    if (r.recommended == diagnostics::Statistic::kMedian) rec = r.median;
    if (r.recommended == diagnostics::Statistic::kMode) rec = r.mode;
    out << r.name << ',' << fmt(r.mean) << ',' << fmt(r.median) << ','
        << fmt(r.mode) << ',' << fmt(r.hpd_lower) << ',' << fmt(r.hpd_upper)
        << ','
        << (r.recommended_known ? diagnostics::statistic_name(r.recommended)
                                : "-")
        << ',' << fmt(rec) << '\n';
  }
}

void write_meta_json(const std::string& path,
                     const sampler::PosteriorDraws& draws,
                     const model::BinaryDataset& data, const Manifest& manifest) {
  json meta;
  meta["command"] = manifest.command;
  meta["manifest_digest"] = manifest.digest();
  json args = json::object();
  auto sorted = manifest.entries;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [k, v] : sorted) args[k] = v;
  meta["manifest"] = args;
  meta["family"] = draws.spec.family.name();
  meta["sign_region"] =
      draws.spec.sign == model::SignRegion::kPositive ? "(0,1)" : "(-1,0)";
  meta["seed"] = draws.config.seed;
  meta["iterations"] = draws.config.iterations;
  meta["burn_in"] = draws.config.burn_in;
  meta["thin"] = draws.config.thin;
  meta["retained"] = draws.retained();
  json acc = json::object();
  for (const auto& [k, v] : draws.acceptance) acc[k] = v;
  meta["acceptance_rates"] = acc;
  meta["columns"] = data.column_names;
  meta["warnings"] = data.warnings;

  auto out = open_out(path);
  out << meta.dump(2) << '\n';
}

void write_envelope_csv(const std::string& path,
                        const diagnostics::EnvelopeBand& band,
                        const Manifest& manifest) {
  auto out = open_out(path);
  write_header(out, manifest);
  out << "theoretical,observed,lower,upper\n";
  for (std::size_t j = 0; j < band.observed.size(); ++j) {
    out << fmt(band.theoretical[j]) << ',' << fmt(band.observed[j]) << ','
        << fmt(band.lower[j]) << ',' << fmt(band.upper[j]) << '\n';
  }
}

void write_curve_csv(const std::string& path, const diagnostics::LinkCurve& c,
                     const Manifest& manifest) {
  auto out = open_out(path);
  write_header(out, manifest);
  out << "eta,mean,lower,upper\n";
  for (std::size_t j = 0; j < c.eta.size(); ++j) {
    out << fmt(c.eta[j]) << ',' << fmt(c.mean[j]) << ',' << fmt(c.lower[j])
        << ',' << fmt(c.upper[j]) << '\n';
  }
}

void write_recovery_csv(const std::string& path,
                        const simharness::RecoveryReport& rep,
                        const Manifest& manifest) {
  auto out = open_out(path);
  write_header(out, manifest);
  if (!rep.excluded_replicas.empty()) {
    out << "# excluded_replicas=";
    for (std::size_t i = 0; i < rep.excluded_replicas.size(); ++i) {
      out << (i ? ";" : "") << rep.excluded_replicas[i];
    }
    out << '\n';
  }
  out << "Parameter,Real,Est,SD,Rel Bias,MSE\n";
  for (const auto& r : rep.rows) {
    out << r.parameter << ',' << fmt(r.real) << ',' << fmt(r.stats.est) << ','
        << fmt(r.stats.sd) << ',' << fmt(r.stats.rel_bias) << ','
        << fmt(r.stats.mse) << '\n';
  }
}

void write_sign_study_csv(const std::string& path,
                          const simharness::SignStudyReport& rep,
                          const Manifest& manifest) {
  auto out = open_out(path);
  write_header(out, manifest);
  out << "statistic,correct,replicas\n";
  out << "mean," << rep.correct_mean << ',' << rep.replicas << '\n';
  out << "median," << rep.correct_median << ',' << rep.replicas << '\n';
  out << "mode," << rep.correct_mode << ',' << rep.replicas << '\n';
}

void write_prior_study_csv(const std::string& path,
                           const simharness::PriorStudyReport& rep,
                           const Manifest& manifest) {
  auto out = open_out(path);
  write_header(out, manifest);
  out << "parameter,prior,mean,median,mode\n";
  for (std::size_t j = 0; j < rep.parameter_names.size(); ++j) {
    for (const auto& arm : rep.arms) {
      out << rep.parameter_names[j] << ',' << arm.prior_name << ','
          << fmt(arm.est.at("mean")[j]) << ',' << fmt(arm.est.at("median")[j])
          << ',' << fmt(arm.est.at("mode")[j]) << '\n';
    }
  }
}

void write_dataset_csv(const std::string& path,
                       const model::BinaryDataset& data,
                       const Manifest& manifest) {
  auto out = open_out(path);
  write_header(out, manifest);
  for (int j = 1; j < data.p(); ++j) out << data.column_names[j] << ',';
  out << "y\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 1; j < data.p(); ++j) out << fmt(data.X(i, j)) << ',';
    out << static_cast<int>(data.y[i]) << '\n';
  }
}

}  // namespace skewlink::io
