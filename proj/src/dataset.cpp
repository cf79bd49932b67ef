#include "lassopv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "lassopv/math.hpp"

namespace lassopv {

namespace {

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  if (begin == end) return false;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Eigen::Index DataMatrix::column_index(const std::string& name) const {
  const auto it = std::find(var_names.begin(), var_names.end(), name);
  if (it == var_names.end()) throw Error("unknown variable '" + name + "'");
  return static_cast<Eigen::Index>(it - var_names.begin());
}

DataMatrix load_matrix(const std::string& path, TableFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  const char delim = format == TableFormat::Tsv ? '\t' : ',';

  std::string line;
  if (!std::getline(in, line)) throw IoError("empty input: '" + path + "'");
  strip_cr(line);
  if (line.empty()) throw IoError("empty input: '" + path + "'");

  DataMatrix m;
  m.var_names = split_fields(line, delim);
  const std::size_t n_vars = m.var_names.size();
  {
    std::unordered_set<std::string> seen;
    for (const auto& name : m.var_names) {
      if (name.empty()) throw IoError(path + ": empty variable name in header");
      if (!seen.insert(name).second) {
        throw IoError(path + ": duplicate variable name '" + name + "'");
      }
    }
  }

  std::vector<double> data;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
    ++n_rows;
    const auto fields = split_fields(line, delim);
    if (fields.size() != n_vars) {
      throw IoError(path + ": row " + std::to_string(n_rows) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(n_vars));
    }
    for (std::size_t c = 0; c < n_vars; ++c) {
      double v;
      if (!parse_double(fields[c], v)) {
        throw IoError(path + ": non-numeric cell at row " + std::to_string(n_rows) +
                      ", column " + std::to_string(c + 1) + " ('" + fields[c] + "')");
      }
      if (!std::isfinite(v)) {
        throw IoError(path + ": non-finite value at row " + std::to_string(n_rows) +
                      ", column " + std::to_string(c + 1));
      }
      data.push_back(v);
    }
  }
  if (n_rows == 0) throw IoError("empty input: '" + path + "' has no data rows");
  if (n_rows < 2) {
    throw IoError(path + ": only " + std::to_string(n_rows) +
                  " data row, at least 2 samples required");
  }

  m.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_vars));
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_vars; ++c) {
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          data[r * n_vars + c];
    }
  }
  m.centered = false;
  return m;
}

void write_matrix(const DataMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (Eigen::Index c = 0; c < m.n_vars(); ++c) {
    if (c > 0) out << '\t';
    out << m.var_names[static_cast<std::size_t>(c)];
  }
  out << '\n';
  char buf[40];
  for (Eigen::Index r = 0; r < m.n_samples(); ++r) {
    for (Eigen::Index c = 0; c < m.n_vars(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m.values(r, c));
      if (c > 0) out << '\t';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

DataMatrix center_columns(DataMatrix m) {
  if (!m.values.allFinite()) throw Error("center_columns: non-finite values");
  m.values.rowwise() -= m.values.colwise().mean();
  m.centered = true;
  return m;
}

DataMatrix rank_inverse_normal(DataMatrix m) {
  const Eigen::Index n = m.n_samples();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < m.n_vars(); ++c) {
    auto col = m.values.col(c);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return col(a) < col(b); });
    if (col(order.front()) == col(order.back())) {
      throw Error("rank_inverse_normal: degenerate column '" +
                  m.var_names[static_cast<std::size_t>(c)] + "' (all values equal)");
    }
    Eigen::VectorXd transformed(n);
    Eigen::Index i = 0;
    while (i < n) {
      Eigen::Index j = i;
      while (j + 1 < n && col(order[static_cast<std::size_t>(j + 1)]) ==
                              col(order[static_cast<std::size_t>(i)])) {
        ++j;
      }
      // ties share the average of their 1-based ranks
      const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
      const double z = normal_quantile((rank - 0.5) / static_cast<double>(n));
      for (Eigen::Index t = i; t <= j; ++t) {
        transformed(order[static_cast<std::size_t>(t)]) = z;
      }
      i = j + 1;
    }
    col = transformed;
  }
  return center_columns(std::move(m));
}

double column_variance(const DataMatrix& m, Eigen::Index i) {
  if (i < 0 || i >= m.n_vars()) {
    throw Error("column_variance: index " + std::to_string(i) + " out of range");
  }
  if (!m.centered) throw Error("column_variance: matrix is not centered");
  return m.values.col(i).squaredNorm() / static_cast<double>(m.n_samples());
}

}  // namespace lassopv
