#ifndef LASSOPV_EVALSUITE_HPP
#define LASSOPV_EVALSUITE_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lassopv/error.hpp"

namespace lassopv {

enum class StatKind { Pvalue, Generic };
enum class Direction { SmallerIsSignificant, LargerIsSignificant };

struct Batch {
  std::string id;
  std::vector<double> values;
};

// Named batches of p-values or of a generic significance statistic. For
// p-values smaller is always more significant; a generic statistic carries an
// explicit direction.
struct BatchedStatistics {
  std::vector<Batch> batches;
  StatKind kind = StatKind::Pvalue;
  Direction direction = Direction::SmallerIsSignificant;

  std::size_t total_values() const;
  std::vector<double> pooled() const;
};

// Batches must be non-empty, values finite, and p-values inside [0, 1].
void validate(const BatchedStatistics& s);

struct HistogramRecord {
  double lower = 0.0;
  bool exclude_ones = false;
  std::vector<double> edges;  // n_bins + 1 uniform edges on [lower, 1]
  std::vector<long> counts;
  double expected_count = 0.0;  // per bin; pre-exclusion size when excluding 1s
  long n_retained = 0;
  long n_before_exclusion = 0;
};

// Pools every batch, optionally drops values at 1 (within 1e-12) and values
// below `lower`, and bins the remainder uniformly on [lower, 1]. The expected
// count is the uniform reference line; with exclude_ones it is computed from
// the pre-exclusion size, the reference drawn before 1s are removed.
HistogramRecord histogram_test(const BatchedStatistics& s, int n_bins, double lower,
                               bool exclude_ones);

enum class KsMode { Uniform, OneVsRest };

struct KsUniformResult {
  double d = 0.0;
  double pvalue = 1.0;
  long n = 0;
  bool defined = false;
};

// One-sample KS of `values` (already filtered into [lower, upper]) against the
// uniform distribution on [lower, upper]. Exact p-value for n <= 100,
// asymptotic with the standard finite-n correction beyond. An empty input
// yields an undefined result rather than an error.
KsUniformResult ks_uniform(const std::vector<double>& values, double lower,
                           double upper);

// Two-sample KS of one batch against the pooled remaining batches.
KsUniformResult ks_one_vs_rest(const BatchedStatistics& s, const std::string& batch_id);

struct ScatterPoint {
  std::string batch_id;
  long batch_size = 0;
  long n_significant = 0;
};

struct LinearRelation {
  double threshold_quantile = 0.0;
  double cutoff = 0.0;
  std::vector<ScatterPoint> points;
  std::optional<double> r2;  // empty below 3 batches or for a degenerate fit
};

// Significance cutoff at the pooled threshold quantile (direction-aware for
// generic statistics); per batch the number of significant values, with the
// ordinary least squares R^2 (with intercept) of count against batch size.
LinearRelation linear_relation(const BatchedStatistics& s, double threshold_quantile);

struct CurvePoint {
  double prop_significant = 0.0;
  std::optional<double> r2;
  long max_significant = 0;
};

// R^2 as a function of the proportion of significant hypotheses, thresholds at
// the pooled k/n_thresholds quantiles.
std::vector<CurvePoint> r2_curve(const BatchedStatistics& s, int n_thresholds);

// Mean of r2 over [x_lo, x_hi] on the proportion-significant axis: trapezoidal
// integral divided by the bound width, the curve interpolated linearly and
// extended flat beyond its first and last defined points. Undefined points are
// skipped; a bound containing no defined point is an error.
double partial_auc(const std::vector<CurvePoint>& curve, double x_lo, double x_hi);

struct KsRecord {
  std::string batch_id;
  long batch_size = 0;
  double d = 0.0;
  double pvalue = 1.0;
  KsMode mode = KsMode::Uniform;
  bool defined = false;
};

struct AucEntry {
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> value;
};

struct EvalOptions {
  int n_bins = 50;
  double lower = 0.0;         // non-null trim: drop values below this (quantile for generic)
  bool exclude_ones = false;
  double ks_lower = 0.0;
  double ks_upper = 1.0;
  std::optional<double> ks_top_quantile;  // window = most significant fraction, pooled
  int n_thresholds = 400;
  std::vector<std::pair<double, double>> auc_bounds = {
      {0.0, 0.01}, {0.0, 0.05}, {0.0, 0.2}, {0.0, 1.0}};
  std::vector<double> scatter_quantiles = {0.01, 0.05, 0.2};
};

struct EvalReport {
  std::optional<HistogramRecord> histogram;
  std::vector<KsRecord> ks_records;
  double ks_window_lower = 0.0;
  double ks_window_upper = 1.0;
  double bonferroni_level = 0.0;  // 0.05 / number of batches
  std::vector<LinearRelation> scatters;
  std::vector<CurvePoint> curve;
  std::vector<AucEntry> auc_table;
};

// Runs the whole battery. Histogram and per-batch uniform KS apply to p-values
// only; a generic statistic gets the one-vs-rest KS instead.
EvalReport evaluate_all(const BatchedStatistics& s, const EvalOptions& opt);

// Writes report.json plus plot-ready CSVs into `dir`; returns the file paths.
std::vector<std::string> write_report(const EvalReport& rep, const std::string& dir);

}  // namespace lassopv

#endif
