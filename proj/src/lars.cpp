#include "lassopv/lars.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace lassopv {

namespace {

constexpr double kTieRelTol = 1e-10;     // near-tie warning threshold
constexpr double kKnotRelGuard = 1e-12;  // roots this close to the current knot
constexpr double kSolveResidualTol = 1e-9;

void check_centered_column(const Eigen::Ref<const Eigen::VectorXd>& col,
                           const char* what) {
  const double n = static_cast<double>(col.size());
  const double mean = col.sum() / n;
  const double rms = col.norm() / std::sqrt(n);
  if (std::abs(mean) > 1e-8 * std::max(rms, 1e-300)) {
    throw Error(std::string("compute_path: ") + what + " is not centered");
  }
}

// Active-set Gram matrix G = X_A^T X_A / n with an incrementally extended
// Cholesky factor R (upper triangular, R^T R = G). Entries append in O(n*|A|);
// a drop deletes the row/column and refactors from scratch, and any solve
// whose residual exceeds kSolveResidualTol triggers a full rebuild from X.
class ActiveSet {
 public:
  ActiveSet(const Eigen::Ref<const Eigen::MatrixXd>& X, Eigen::Index cap)
      : X_(X), n_(static_cast<double>(X.rows())) {
    G_.resize(cap, cap);
    R_.resize(cap, cap);
    active_.reserve(static_cast<std::size_t>(cap));
    signs_.reserve(static_cast<std::size_t>(cap));
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(active_.size()); }
  const std::vector<Eigen::Index>& members() const { return active_; }
  double sign_of(Eigen::Index pos) const { return signs_[static_cast<std::size_t>(pos)]; }

  bool contains(Eigen::Index j) const {
    return std::find(active_.begin(), active_.end(), j) != active_.end();
  }

  void add(Eigen::Index j, double sign) {
    const Eigen::Index m = size();
    Eigen::VectorXd g(m + 1);
    for (Eigen::Index t = 0; t < m; ++t) {
      g(t) = X_.col(active_[static_cast<std::size_t>(t)]).dot(X_.col(j)) / n_;
    }
    g(m) = X_.col(j).squaredNorm() / n_;
    G_.block(0, m, m, 1) = g.head(m);
    G_.block(m, 0, 1, m) = g.head(m).transpose();
    G_(m, m) = g(m);
    Eigen::VectorXd w = R_.topLeftCorner(m, m)
                            .transpose()
                            .triangularView<Eigen::Lower>()
                            .solve(g.head(m));
    const double d = g(m) - w.squaredNorm();
    if (!(d > 1e-12 * std::max(g(m), 1e-300))) {
      throw Error("compute_path: general position violation, predictor " +
                  std::to_string(j) + " is numerically collinear with the active set");
    }
    R_.block(0, m, m, 1) = w;
    R_.block(m, 0, 1, m).setZero();
    R_(m, m) = std::sqrt(d);
    active_.push_back(j);
    signs_.push_back(sign);
  }

  void drop(Eigen::Index pos) {
    const Eigen::Index m = size();
    for (Eigen::Index r = pos; r + 1 < m; ++r) {
      G_.block(r, 0, 1, m) = G_.block(r + 1, 0, 1, m);
    }
    for (Eigen::Index c = pos; c + 1 < m; ++c) {
      G_.block(0, c, m - 1, 1) = G_.block(0, c + 1, m, 1).topRows(m - 1);
    }
    active_.erase(active_.begin() + pos);
    signs_.erase(signs_.begin() + pos);
    refactor();
  }

  // Solves G x = rhs through the Cholesky factor, rebuilding the Gram matrix
  // from X when the solution residual is out of tolerance.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) {
    Eigen::VectorXd x = solve_via_factor(rhs);
    const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    double resid =
        (G_.topLeftCorner(size(), size()) * x - rhs).lpNorm<Eigen::Infinity>();
    if (resid > kSolveResidualTol * scale) {
      rebuild_from_data();
      x = solve_via_factor(rhs);
      resid = (G_.topLeftCorner(size(), size()) * x - rhs).lpNorm<Eigen::Infinity>();
      if (resid > kSolveResidualTol * scale) {
        throw Error("compute_path: active-set system is numerically singular");
      }
    }
    return x;
  }

 private:
  Eigen::VectorXd solve_via_factor(const Eigen::VectorXd& rhs) const {
    const Eigen::Index m = size();
    Eigen::VectorXd w =
        R_.topLeftCorner(m, m).transpose().triangularView<Eigen::Lower>().solve(rhs);
    return R_.topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(w);
  }

  void refactor() {
    const Eigen::Index m = size();
    Eigen::LLT<Eigen::MatrixXd> llt(G_.topLeftCorner(m, m));
    if (llt.info() != Eigen::Success) {
      rebuild_from_data();
      return;
    }
    R_.topLeftCorner(m, m) = llt.matrixU();
  }

  void rebuild_from_data() {
    const Eigen::Index m = size();
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c <= r; ++c) {
        const double g = X_.col(active_[static_cast<std::size_t>(r)])
                             .dot(X_.col(active_[static_cast<std::size_t>(c)])) /
                         n_;
        G_(r, c) = g;
        G_(c, r) = g;
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(G_.topLeftCorner(m, m));
    if (llt.info() != Eigen::Success) {
      throw Error("compute_path: active-set Gram matrix is not positive definite");
    }
    R_.topLeftCorner(m, m) = llt.matrixU();
  }

  const Eigen::Ref<const Eigen::MatrixXd> X_;
  double n_;
  Eigen::MatrixXd G_;
  Eigen::MatrixXd R_;
  std::vector<Eigen::Index> active_;
  std::vector<double> signs_;
};

struct Candidate {
  double lam = -1.0;
  PathEventKind kind = PathEventKind::Enter;
  Eigen::Index pred = -1;
  Eigen::Index active_pos = -1;  // for drops
};

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.lam != b.lam) return a.lam > b.lam;
  if (a.kind != b.kind) return a.kind == PathEventKind::Drop;
  return a.pred < b.pred;
}

}  // namespace

RegularizationPath compute_path(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const PathOptions& opt) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (n < 2) throw Error("compute_path: need at least 2 samples");
  if (k < 1) throw Error("compute_path: need at least 1 predictor");
  if (y.size() != n) {
    throw Error("compute_path: dimension mismatch, X has " + std::to_string(n) +
                " rows but y has " + std::to_string(y.size()));
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw Error("compute_path: non-finite input");
  }
  for (Eigen::Index j = 0; j < k; ++j) check_centered_column(X.col(j), "a predictor column");
  check_centered_column(y, "the response");

  const Eigen::Index max_knots =
      opt.max_knots > 0 ? opt.max_knots : 8 * std::min(n, k);
  const Eigen::Index active_cap = std::min(n - 1, k);
  const double dn = static_cast<double>(n);

  std::vector<double> knots;
  std::vector<PathEvent> events;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> resvars;
  std::vector<std::string> warnings;
  bool truncated = false;

  const Eigen::VectorXd c0 = X.transpose() * y / dn;
  const double lambda_max = c0.cwiseAbs().maxCoeff();

  const auto record = [&](double lam, PathEvent ev, const Eigen::VectorXd& beta,
                          double resvar) {
    knots.push_back(lam);
    events.push_back(ev);
    rows.push_back(beta);
    resvars.push_back(resvar);
  };

  if (lambda_max <= 0.0) {
    // zero response (or all predictors orthogonal to it): the path is the
    // single point lambda = 0 with no active predictors
    record(0.0, {PathEventKind::Terminate, -1}, Eigen::VectorXd::Zero(k),
           y.squaredNorm() / dn);
  } else {
    // first knot: the predictor with the largest absolute covariance enters
    Eigen::Index j0 = -1;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j0 < 0 || std::abs(c0(j)) > std::abs(c0(j0))) j0 = j;
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == j0) continue;
      if (std::abs(std::abs(c0(j)) - lambda_max) <= kTieRelTol * lambda_max) {
        if (X.col(j) == X.col(j0)) {
          throw Error("compute_path: general position violation, predictors " +
                      std::to_string(j0) + " and " + std::to_string(j) +
                      " are exact duplicates");
        }
        warnings.push_back("general position warning: predictors " + std::to_string(j0) +
                           " and " + std::to_string(j) +
                           " tie for entry at lambda_max, lower index enters first");
      }
    }
    record(lambda_max, {PathEventKind::Enter, j0}, Eigen::VectorXd::Zero(k),
           y.squaredNorm() / dn);

    ActiveSet active(X, std::min(active_cap + 1, k));
    active.add(j0, c0(j0) > 0 ? 1.0 : -1.0);
    Eigen::Index last_event_pred = j0;
    double lam_cur = lambda_max;

    Eigen::VectorXd beta0, dvec, v0, r0, v1, avec, bvec, sgn;
    std::vector<Candidate> cands;
    std::vector<char> is_active(static_cast<std::size_t>(k), 0);
    is_active[static_cast<std::size_t>(j0)] = 1;

    while (true) {
      if (active.size() >= active_cap) break;  // saturation stop
      const Eigen::Index m = active.size();

      Eigen::VectorXd c_active(m);
      sgn.resize(m);
      for (Eigen::Index t = 0; t < m; ++t) {
        c_active(t) = c0(active.members()[static_cast<std::size_t>(t)]);
        sgn(t) = active.sign_of(t);
      }
      beta0 = active.solve(c_active);
      dvec = active.solve(sgn);

      v0.setZero(n);
      v1.setZero(n);
      for (Eigen::Index t = 0; t < m; ++t) {
        const Eigen::Index j = active.members()[static_cast<std::size_t>(t)];
        v0 += beta0(t) * X.col(j);
        v1 += dvec(t) * X.col(j);
      }
      r0 = y - v0;
      avec = X.transpose() * r0 / dn;
      bvec = X.transpose() * v1 / dn;

      // collect entry and drop candidates below lam_cur
      cands.clear();
      const double hi_strict = lam_cur * (1.0 - kKnotRelGuard);
      const double hi_loose = lam_cur * (1.0 + 1e-9);
      const auto consider = [&](double lam, PathEventKind kind, Eigen::Index pred,
                                Eigen::Index pos) {
        if (!(lam > 0.0) || !std::isfinite(lam)) return;
        if (lam > hi_loose) return;
        if (lam > hi_strict) {
          // boundary root: the predictor involved in the previous event sits
          // exactly on the constraint there, everyone else is a genuine tie
          if (pred == last_event_pred) return;
          lam = std::nextafter(lam_cur, 0.0);
        }
        cands.push_back({lam, kind, pred, pos});
      };

      for (Eigen::Index j = 0; j < k; ++j) {
        if (is_active[static_cast<std::size_t>(j)]) continue;
        const double den_pos = 1.0 - bvec(j);
        const double den_neg = -1.0 - bvec(j);
        if (den_pos != 0.0) consider(avec(j) / den_pos, PathEventKind::Enter, j, -1);
        if (den_neg != 0.0) consider(avec(j) / den_neg, PathEventKind::Enter, j, -1);
      }
      for (Eigen::Index t = 0; t < m; ++t) {
        if (dvec(t) != 0.0) {
          consider(beta0(t) / dvec(t), PathEventKind::Drop,
                   active.members()[static_cast<std::size_t>(t)], t);
        }
      }

      if (cands.empty()) {
        // no further events: the path runs to lambda = 0 on this active set
        if (opt.lambda_floor > 0.0) {
          truncated = true;
          break;
        }
        if (static_cast<Eigen::Index>(knots.size()) >= max_knots) {
          truncated = true;
          break;
        }
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
        for (Eigen::Index t = 0; t < m; ++t) {
          beta(active.members()[static_cast<std::size_t>(t)]) = beta0(t);
        }
        record(0.0, {PathEventKind::Terminate, -1}, beta, r0.squaredNorm() / dn);
        break;
      }

      std::sort(cands.begin(), cands.end(), candidate_before);
      const Candidate best = cands.front();
      for (std::size_t q = 1; q < cands.size(); ++q) {
        if (best.lam - cands[q].lam > kTieRelTol * best.lam) break;
        if (cands[q].pred == best.pred) continue;
        if (best.kind == PathEventKind::Enter && cands[q].kind == PathEventKind::Enter &&
            X.col(best.pred) == X.col(cands[q].pred)) {
          throw Error("compute_path: general position violation, predictors " +
                      std::to_string(best.pred) + " and " + std::to_string(cands[q].pred) +
                      " are exact duplicates");
        }
        if (warnings.size() < 100) {
          warnings.push_back(
              "general position warning: tied events at lambda = " +
              std::to_string(best.lam) + " (predictors " + std::to_string(best.pred) +
              " and " + std::to_string(cands[q].pred) + ")");
        }
      }

      if (best.lam < opt.lambda_floor) {
        truncated = true;
        break;
      }
      if (static_cast<Eigen::Index>(knots.size()) >= max_knots) {
        truncated = true;
        break;
      }

      Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
      for (Eigen::Index t = 0; t < m; ++t) {
        beta(active.members()[static_cast<std::size_t>(t)]) = beta0(t) - best.lam * dvec(t);
      }
      double resvar = (r0 + best.lam * v1).squaredNorm() / dn;

      if (best.kind == PathEventKind::Enter) {
        record(best.lam, {PathEventKind::Enter, best.pred}, beta, resvar);
        const double c_at = avec(best.pred) + bvec(best.pred) * best.lam;
        active.add(best.pred, c_at > 0 ? 1.0 : -1.0);
        is_active[static_cast<std::size_t>(best.pred)] = 1;
      } else {
        beta(best.pred) = 0.0;  // the dropping coefficient crosses zero here
        record(best.lam, {PathEventKind::Drop, best.pred}, beta, resvar);
        active.drop(best.active_pos);
        is_active[static_cast<std::size_t>(best.pred)] = 0;
      }
      last_event_pred = best.pred;
      lam_cur = best.lam;
    }
  }

  RegularizationPath path;
  const Eigen::Index t = static_cast<Eigen::Index>(knots.size());
  path.knots.resize(t);
  path.coefs.resize(t, k);
  path.residual_variance.resize(t);
  path.events = std::move(events);
  for (Eigen::Index i = 0; i < t; ++i) {
    path.knots(i) = knots[static_cast<std::size_t>(i)];
    path.coefs.row(i) = rows[static_cast<std::size_t>(i)].transpose();
    path.residual_variance(i) = resvars[static_cast<std::size_t>(i)];
  }
  path.n_samples = n;
  path.truncated = truncated;
  path.warnings = std::move(warnings);
  return path;
}

RegularizationPath compute_path(const DataMatrix& X,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const PathOptions& opt) {
  if (!X.centered) throw Error("compute_path: DataMatrix is not centered");
  return compute_path(X.values, y, opt);
}

Eigen::VectorXd RegularizationPath::coefficients_at(double lambda) const {
  if (n_knots() == 0) throw Error("coefficients_at: empty path");
  if (lambda >= knots(0)) return Eigen::VectorXd::Zero(n_vars());
  const double last = knots(n_knots() - 1);
  if (lambda < last) {
    throw Error("coefficients_at: lambda below the computed path range");
  }
  Eigen::Index t = 0;
  while (t + 1 < n_knots() && knots(t + 1) > lambda) ++t;
  if (t + 1 == n_knots()) return coefs.row(t).transpose();
  const double hi = knots(t);
  const double lo = knots(t + 1);
  const double w = (hi - lambda) / (hi - lo);
  return ((1.0 - w) * coefs.row(t) + w * coefs.row(t + 1)).transpose();
}

std::vector<std::optional<double>> first_activation(const RegularizationPath& p) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(p.n_vars()));
  for (Eigen::Index t = 0; t < p.n_knots(); ++t) {
    const PathEvent& ev = p.events[static_cast<std::size_t>(t)];
    if (ev.kind != PathEventKind::Enter) continue;
    auto& slot = out[static_cast<std::size_t>(ev.predictor)];
    if (!slot.has_value()) slot = p.knots(t);
  }
  return out;
}

namespace {

Eigen::Index first_entry_knot(const RegularizationPath& p, Eigen::Index i) {
  for (Eigen::Index t = 0; t < p.n_knots(); ++t) {
    const PathEvent& ev = p.events[static_cast<std::size_t>(t)];
    if (ev.kind == PathEventKind::Enter && ev.predictor == i) return t;
  }
  return -1;
}

}  // namespace

ResidualAtEntry residual_at_entry(const RegularizationPath& p,
                                  const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  Eigen::Index i) {
  if (i < 0 || i >= p.n_vars()) {
    throw Error("residual_at_entry: predictor index out of range");
  }
  const Eigen::Index t = first_entry_knot(p, i);
  if (t < 0) {
    throw Error("residual_at_entry: predictor " + std::to_string(i) +
                " never became active");
  }
  ResidualAtEntry out;
  out.y_res = y - X * p.coefs.row(t).transpose();
  out.sigma_sq_res = out.y_res.squaredNorm() / static_cast<double>(p.n_samples);
  return out;
}

KktReport verify_kkt(const RegularizationPath& p,
                     const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& y, double tol) {
  KktReport rep;
  if (p.n_knots() == 0) return rep;
  const double dn = static_cast<double>(p.n_samples);
  const double scale = std::max(p.knots(0), 1e-300);

  const auto note = [&](double viol, Eigen::Index t, Eigen::Index j,
                        const std::string& what) {
    if (viol > rep.worst_violation) {
      rep.worst_violation = viol;
      rep.knot = t;
      rep.predictor = j;
      rep.detail = what;
    }
  };

  for (Eigen::Index t = 0; t < p.n_knots(); ++t) {
    const double lam = p.knots(t);
    const Eigen::VectorXd r = y - X * p.coefs.row(t).transpose();
    const Eigen::VectorXd c = X.transpose() * r / dn;
    const PathEvent& ev = p.events[static_cast<std::size_t>(t)];
    for (Eigen::Index j = 0; j < p.n_vars(); ++j) {
      const double bj = p.coefs(t, j);
      if (bj != 0.0) {
        const double viol = std::abs(c(j) - lam * (bj > 0 ? 1.0 : -1.0)) / scale;
        note(viol, t, j, "active stationarity");
      } else {
        const double viol = std::max(0.0, std::abs(c(j)) - lam) / scale;
        note(viol, t, j, "inactive bound");
      }
    }
    if (ev.kind != PathEventKind::Terminate) {
      const double viol = std::abs(std::abs(c(ev.predictor)) - lam) / scale;
      note(viol, t, ev.predictor, "boundary equality at event");
    }
  }
  rep.ok = rep.worst_violation <= tol;
  return rep;
}

void dump_path(const RegularizationPath& p, const std::vector<std::string>& names,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "knot_index\tlambda\tevent\tpredictor";
  for (Eigen::Index j = 0; j < p.n_vars(); ++j) {
    out << '\t' << (j < static_cast<Eigen::Index>(names.size())
                        ? names[static_cast<std::size_t>(j)]
                        : "V" + std::to_string(j + 1));
  }
  out << '\n';
  char buf[40];
  for (Eigen::Index t = 0; t < p.n_knots(); ++t) {
    const PathEvent& ev = p.events[static_cast<std::size_t>(t)];
    const char* kind = ev.kind == PathEventKind::Enter  ? "enter"
                       : ev.kind == PathEventKind::Drop ? "drop"
                                                        : "terminate";
    std::snprintf(buf, sizeof(buf), "%.17g", p.knots(t));
    out << t << '\t' << buf << '\t' << kind << '\t';
    if (ev.kind == PathEventKind::Terminate) {
      out << "-";
    } else {
      out << (ev.predictor < static_cast<Eigen::Index>(names.size())
                  ? names[static_cast<std::size_t>(ev.predictor)]
                  : std::to_string(ev.predictor));
    }
    for (Eigen::Index j = 0; j < p.n_vars(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.coefs(t, j));
      out << '\t' << buf;
    }
    out << '\n';
  }
}

}  // namespace lassopv
