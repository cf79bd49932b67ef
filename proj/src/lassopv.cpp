#include "lassopv/lassopv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lassopv/rng.hpp"

namespace lassopv {

double chi2_survival_half(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error("chi2_survival_half: t must be finite and nonnegative");
  }
  return std::erfc(std::sqrt(t));
}

SelectionResult selection_pvalues(const DataMatrix& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  Eigen::Index max_knots, const std::string& target) {
  if (!X.centered) throw Error("selection_pvalues: predictors are not centered");
  const Eigen::Index n = X.n_samples();
  const Eigen::Index k = X.n_vars();
  const double dn = static_cast<double>(n);

  PathOptions opt;
  opt.max_knots = max_knots;
  const RegularizationPath path = compute_path(X.values, y, opt);
  const auto activation = first_activation(path);

  // map each predictor's first entry to its knot so the residual variance
  // recorded along the path can be reused
  std::vector<Eigen::Index> entry_knot(static_cast<std::size_t>(k), -1);
  for (Eigen::Index t = 0; t < path.n_knots(); ++t) {
    const PathEvent& ev = path.events[static_cast<std::size_t>(t)];
    if (ev.kind == PathEventKind::Enter &&
        entry_knot[static_cast<std::size_t>(ev.predictor)] < 0) {
      entry_knot[static_cast<std::size_t>(ev.predictor)] = t;
    }
  }

  SelectionResult out;
  out.target = target;
  out.n_samples = n;
  out.truncated = path.truncated;
  out.predictors.resize(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    PredictorSelection& sel = out.predictors[static_cast<std::size_t>(i)];
    sel.name = X.var_names[static_cast<std::size_t>(i)];
    sel.sigma_sq = column_variance(X, i);
    const auto& lam = activation[static_cast<std::size_t>(i)];
    if (!lam.has_value()) {
      sel.pvalue = 1.0;
      continue;
    }
    sel.entry_lambda = *lam;
    const double s2res = path.residual_variance(entry_knot[static_cast<std::size_t>(i)]);
    sel.sigma_sq_res = s2res;
    if (s2res <= 0.0 || sel.sigma_sq <= 0.0) {
      // exact fit at entry: the survival argument diverges
      sel.pvalue = 0.0;
      continue;
    }
    const double t = dn * (*lam) * (*lam) / (2.0 * sel.sigma_sq * s2res);
    sel.pvalue = chi2_survival_half(t);
  }
  return out;
}

McPvalue monte_carlo_pvalue(const DataMatrix& X,
                            const Eigen::Ref<const Eigen::VectorXd>& y,
                            Eigen::Index i, double lambda_i, long n_sims,
                            std::uint64_t seed) {
  if (!X.centered) throw Error("monte_carlo_pvalue: predictors are not centered");
  if (i < 0 || i >= X.n_vars()) throw Error("monte_carlo_pvalue: predictor index out of range");
  if (!(lambda_i > 0.0)) throw Error("monte_carlo_pvalue: lambda_i must be positive");
  if (n_sims < 100) throw Error("monte_carlo_pvalue: need at least 100 simulations");

  const Eigen::Index n = X.n_samples();
  const double sigma = std::sqrt(column_variance(X, i));

  Eigen::MatrixXd work = X.values;
  PathOptions opt;
  opt.lambda_floor = lambda_i;

  long hits = 0;
  long failed = 0;
  Eigen::VectorXd draw(n);
  for (long s = 0; s < n_sims; ++s) {
    SplitMix64 rng(seed, static_cast<std::uint64_t>(s));
    for (Eigen::Index r = 0; r < n; ++r) draw(r) = sigma * rng.next_gaussian();
    draw.array() -= draw.mean();
    work.col(i) = draw;
    try {
      const RegularizationPath path = compute_path(work, y, opt);
      const auto activation = first_activation(path);
      const auto& lam = activation[static_cast<std::size_t>(i)];
      if (lam.has_value() && *lam >= lambda_i) ++hits;
    } catch (const Error&) {
      ++failed;
    }
  }

  McPvalue out;
  out.n_sims = n_sims - failed;
  out.n_failed = failed;
  if (out.n_sims > 0) {
    const double m = static_cast<double>(out.n_sims);
    out.p_hat = static_cast<double>(hits) / m;
    out.std_error = std::sqrt(out.p_hat * (1.0 - out.p_hat) / m);
  }
  return out;
}

void write_selection_tsv(const std::vector<SelectionResult>& results,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "target\tpredictor\tentry_lambda\tsigma\tsigma_res\tpvalue\n";
  char buf[40];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& res : results) {
    for (const auto& sel : res.predictors) {
      out << res.target << '\t' << sel.name << '\t';
      if (sel.entry_lambda) out << num(*sel.entry_lambda);
      out << '\t' << num(std::sqrt(sel.sigma_sq)) << '\t';
      if (sel.sigma_sq_res) out << num(std::sqrt(*sel.sigma_sq_res));
      out << '\t' << num(sel.pvalue) << '\n';
    }
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace lassopv
