#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "skewlink/model.hpp"

namespace skewlink::model {

namespace {

char detect_delimiter(const std::string& header) {
  for (char c : {',', ';', '\t'}) {
    if (header.find(c) != std::string::npos) return c;
  }
  return ',';
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, delim)) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

// Numeric-aware level ordering so "0" < "2" < "10"; falls back to
// lexicographic for non-numeric levels.
struct LevelLess {
  bool operator()(const std::string& a, const std::string& b) const {
    double x, y;
    const bool na = parse_number(a, x), nb = parse_number(b, y);
    if (na && nb) return x < y;
    if (na != nb) return na;
    return a < b;
  }
};

}  // namespace

BinaryDataset read_dataset(const std::string& path, const std::string& response,
                           const std::vector<std::string>& categorical,
                           bool standardize) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);

  std::string header;
  int header_line = 0;
  do {
    if (!std::getline(in, header)) throw ParseError("empty file", 1, 0);
    ++header_line;
  } while (!header.empty() && header[0] == '#');
  const char delim = detect_delimiter(header);
  const std::vector<std::string> names = split(header, delim);

  int y_col = -1;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == response) y_col = static_cast<int>(j);
  }
  if (y_col < 0) {
    throw ParseError("response column '" + response + "' not found", 1, 0);
  }

  std::vector<std::vector<std::string>> rows;
  std::string line;
  int lineno = header_line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '#') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split(line, delim);
    if (fields.size() != names.size()) {
      throw ParseError("expected " + std::to_string(names.size()) +
                           " fields, got " + std::to_string(fields.size()),
                       lineno, static_cast<int>(fields.size()));
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw ParseError("no data rows", lineno, 0);
  const int n = static_cast<int>(rows.size());

  const std::set<std::string> cat_set(categorical.begin(), categorical.end());

  // Decide per-column handling: categorical columns (flagged, or containing
  // any non-numeric value) expand to indicators against the first level.
  struct Column {
    int src;
    bool is_cat;
    std::vector<std::string> levels;  // categorical only, sorted, [0]=reference
  };
  std::vector<Column> cols;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (static_cast<int>(j) == y_col) continue;
    Column c{static_cast<int>(j), cat_set.count(names[j]) > 0, {}};
    if (!c.is_cat) {
      double v;
      for (const auto& r : rows) {
        if (!parse_number(r[j], v)) {
          c.is_cat = true;
          break;
        }
      }
    }
    if (c.is_cat) {
      std::set<std::string, LevelLess> lv;
      for (const auto& r : rows) lv.insert(r[j]);
      c.levels.assign(lv.begin(), lv.end());
      if (c.levels.size() < 2) {
        throw ParseError("categorical column '" + names[j] +
                             "' has a single level",
                         2, static_cast<int>(j));
      }
    }
    cols.push_back(std::move(c));
  }

  int p = 1;
  for (const auto& c : cols) {
    p += c.is_cat ? static_cast<int>(c.levels.size()) - 1 : 1;
  }

  BinaryDataset data;
  data.X.resize(n, p);
  data.X.col(0).setOnes();
  data.y.resize(n);
  data.column_names.push_back("(intercept)");

  for (int i = 0; i < n; ++i) {
    double v;
    if (!parse_number(rows[i][y_col], v) || (v != 0.0 && v != 1.0)) {
      throw ParseError("response must be 0/1, got '" + rows[i][y_col] + "'",
                       header_line + i + 1, y_col);
    }
    data.y[i] = v;
  }

  int out_j = 1;
  for (const auto& c : cols) {
    if (c.is_cat) {
      for (std::size_t l = 1; l < c.levels.size(); ++l) {
        for (int i = 0; i < n; ++i) {
          data.X(i, out_j) = rows[i][c.src] == c.levels[l] ? 1.0 : 0.0;
        }
        data.column_names.push_back(names[c.src] + "=" + c.levels[l]);
        ++out_j;
      }
    } else {
      for (int i = 0; i < n; ++i) {
        double v;
        if (!parse_number(rows[i][c.src], v)) {
          throw ParseError("bad number '" + rows[i][c.src] + "'",
                           header_line + i + 1, c.src);
        }
        data.X(i, out_j) = v;
      }
      if (standardize) {
        Eigen::VectorXd x = data.X.col(out_j);
        std::set<double> distinct(x.data(), x.data() + n);
        if (distinct.size() > 2) {  // leave indicators alone
          const double m = x.mean();
          const double sd = std::sqrt((x.array() - m).square().sum() / (n - 1));
          if (sd > 0.0) data.X.col(out_j) = (x.array() - m) / sd;
        }
      }
      data.column_names.push_back(names[c.src]);
      ++out_j;
    }
  }

  data.validate();
  detect_degeneracies(data);
  return data;
}

}  // namespace skewlink::model
