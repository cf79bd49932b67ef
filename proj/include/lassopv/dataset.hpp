#ifndef LASSOPV_DATASET_HPP
#define LASSOPV_DATASET_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lassopv/error.hpp"

namespace lassopv {

enum class TableFormat { Tsv, Csv };

// Numeric observation matrix, samples by variables, with named columns.
// Values are column-major (Eigen default) so per-variable access is contiguous.
struct DataMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> var_names;
  bool centered = false;

  Eigen::Index n_samples() const { return values.rows(); }
  Eigen::Index n_vars() const { return values.cols(); }

  // Index of a named variable; throws when absent.
  Eigen::Index column_index(const std::string& name) const;
};

// Reads a delimited numeric table. First row is the header of variable names,
// every following row is one sample. Decimal separator is '.', no
// missing-value support: an empty or non-numeric cell is a parse error that
// names the data row and column.
DataMatrix load_matrix(const std::string& path, TableFormat format);

// Writes a TSV with header row, full round-trip precision.
void write_matrix(const DataMatrix& m, const std::string& path);

// Subtracts the column means. Variances are left untouched.
DataMatrix center_columns(DataMatrix m);

// Replaces each entry by the standard normal quantile of its mid-rank ECDF
// value, Phi^-1((rank - 0.5)/n) with average ranks for ties, then centers.
// Constant columns are rejected: their rank transform is undefined.
DataMatrix rank_inverse_normal(DataMatrix m);

// Population variance ||column||^2 / n_samples of a centered matrix column.
double column_variance(const DataMatrix& m, Eigen::Index i);

}  // namespace lassopv

#endif
