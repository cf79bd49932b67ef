#ifndef LASSOPV_LASSOPV_HPP
#define LASSOPV_LASSOPV_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lassopv/dataset.hpp"
#include "lassopv/lars.hpp"

namespace lassopv {

// Q(1/2, t) = P(chi2(1) > 2t), via the identity Q(1/2, t) = erfc(sqrt(t)).
// Monotone decreasing, accurate to close to machine precision for t <= 700.
double chi2_survival_half(double t);

struct PredictorSelection {
  std::string name;
  std::optional<double> entry_lambda;   // empty when never active
  double sigma_sq = 0.0;                // predictor variance ||x_i||^2 / n
  std::optional<double> sigma_sq_res;   // residual variance at the entry knot
  double pvalue = 1.0;
};

struct SelectionResult {
  std::string target;
  Eigen::Index n_samples = 0;
  bool truncated = false;
  std::vector<PredictorSelection> predictors;
};

// Runs the lasso path on (X, y) and converts each predictor's first-activation
// strength lambda_i into a p-value, p_i = Q(1/2, n*lambda_i^2 /
// (2*sigma_i^2*sigma_yres^2(lambda_i))). Predictors that never become active
// on the computed path get p = 1.
SelectionResult selection_pvalues(const DataMatrix& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  Eigen::Index max_knots = 0,
                                  const std::string& target = "");

struct McPvalue {
  double p_hat = 0.0;
  double std_error = 0.0;
  long n_sims = 0;
  long n_failed = 0;
};

// Simulation estimate of P(sup{lambda: b_i(lambda) != 0} >= lambda_i) under
// the per-predictor null: column i is redrawn as iid Normal(0, sigma_i^2),
// centered, and the path is recomputed. Covers both terms of the exact
// p-value, so it is free of the activation-at-lambda_i approximation the
// closed form makes. Deterministic per (seed, simulation index).
McPvalue monte_carlo_pvalue(const DataMatrix& X,
                            const Eigen::Ref<const Eigen::VectorXd>& y,
                            Eigen::Index i, double lambda_i, long n_sims,
                            std::uint64_t seed);

// TSV with columns (target, predictor, entry_lambda, sigma, sigma_res,
// pvalue); entry_lambda and sigma_res are blank for never-active predictors.
void write_selection_tsv(const std::vector<SelectionResult>& results,
                         const std::string& path);

}  // namespace lassopv

#endif
