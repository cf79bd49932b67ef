#ifndef LASSOPV_LARS_HPP
#define LASSOPV_LARS_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "lassopv/dataset.hpp"
#include "lassopv/error.hpp"

namespace lassopv {

enum class PathEventKind { Enter, Drop, Terminate };

struct PathEvent {
  PathEventKind kind;
  Eigen::Index predictor = -1;  // unused for Terminate
};

// Exact lasso regularization path for (1/2n)||y - X b||^2 + lambda*||b||_1.
// Row t of coefs holds the solution at knots[t]; between adjacent knots the
// coefficients are affine in lambda, so the stored knots determine the whole
// computed path segment.
struct RegularizationPath {
  Eigen::VectorXd knots;              // strictly decreasing, final entry may be 0
  Eigen::MatrixXd coefs;              // (#knots) x n_vars
  std::vector<PathEvent> events;      // one event per knot
  Eigen::VectorXd residual_variance;  // ||y - X b(knot)||^2 / n at each knot
  Eigen::Index n_samples = 0;
  bool truncated = false;             // stopped at max_knots before lambda hit 0
  std::vector<std::string> warnings;  // general-position / tie diagnostics

  Eigen::Index n_knots() const { return knots.size(); }
  Eigen::Index n_vars() const { return coefs.cols(); }

  // Coefficients at an arbitrary lambda inside the computed range, by linear
  // interpolation between the bracketing knots.
  Eigen::VectorXd coefficients_at(double lambda) const;
};

struct PathOptions {
  Eigen::Index max_knots = 0;  // 0 selects the default 8*min(n_samples, n_vars)
  double lambda_floor = 0.0;   // stop once the next knot would fall below this
};

// Homotopy solver with entry and drop events. X must be centered (columns sum
// to 0) and y centered of matching length. The path starts at
// lambda_max = max_i |x_i . y| / n and stops when lambda reaches 0, when the
// active set reaches min(n_samples - 1, n_vars), or at max_knots (truncated).
RegularizationPath compute_path(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const PathOptions& opt = {});
RegularizationPath compute_path(const DataMatrix& X,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const PathOptions& opt = {});

// Per predictor, the lambda of its first Enter event; empty when the predictor
// never became active on the computed path.
std::vector<std::optional<double>> first_activation(const RegularizationPath& p);

struct ResidualAtEntry {
  Eigen::VectorXd y_res;  // y - X b(lambda_i), with b_i(lambda_i) = 0
  double sigma_sq_res = 0.0;
};

// Residual of y at predictor i's first entry knot. The restriction of the full
// solution at that knot solves the reduced problem without column i, so this
// equals the reduced-problem residual the statistic is defined with.
ResidualAtEntry residual_at_entry(const RegularizationPath& p,
                                  const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  Eigen::Index i);

struct KktReport {
  bool ok = true;
  double worst_violation = 0.0;  // relative to lambda_max
  Eigen::Index knot = -1;
  Eigen::Index predictor = -1;
  std::string detail;
};

// Checks stationarity at every knot: active coordinates satisfy
// x_j . r / n = lambda * sign(b_j), inactive ones |x_j . r| / n <= lambda, and
// the predictor entering or dropping at the knot sits exactly on the boundary.
// Violations are reported relative to lambda_max.
KktReport verify_kkt(const RegularizationPath& p,
                     const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& y, double tol);

// Debug TSV: knot_index, lambda, event, predictor, then one coefficient column
// per variable.
void dump_path(const RegularizationPath& p, const std::vector<std::string>& names,
               const std::string& path);

}  // namespace lassopv

#endif
