#include "lassopv/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "lassopv/ksdist.hpp"

namespace lassopv {

namespace {

constexpr double kOneTol = 1e-12;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// cutoff value at pooled fraction q on the significant side; `sorted`
// ascending. Values as significant as the cutoff count as significant.
double pooled_cutoff(const std::vector<double>& sorted, double q, Direction dir) {
  const std::size_t n = sorted.size();
  std::size_t m = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n) - 1e-9));
  m = std::min(std::max<std::size_t>(m, 1), n);
  return dir == Direction::SmallerIsSignificant ? sorted[m - 1] : sorted[n - m];
}

long count_significant(const std::vector<double>& sorted_batch, double cutoff,
                       Direction dir) {
  if (dir == Direction::SmallerIsSignificant) {
    return static_cast<long>(std::upper_bound(sorted_batch.begin(), sorted_batch.end(),
                                              cutoff) -
                             sorted_batch.begin());
  }
  return static_cast<long>(sorted_batch.end() -
                           std::lower_bound(sorted_batch.begin(), sorted_batch.end(),
                                            cutoff));
}

std::optional<double> ols_r2(const std::vector<ScatterPoint>& pts) {
  if (pts.size() < 3) return std::nullopt;
  const double n = static_cast<double>(pts.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    sx += static_cast<double>(p.batch_size);
    sy += static_cast<double>(p.n_significant);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    const double dx = static_cast<double>(p.batch_size) - mx;
    const double dy = static_cast<double>(p.n_significant) - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  const double r2 = sxy * sxy / (sxx * syy);
  return std::min(1.0, std::max(0.0, r2));
}

Direction effective_direction(const BatchedStatistics& s) {
  return s.kind == StatKind::Pvalue ? Direction::SmallerIsSignificant : s.direction;
}

}  // namespace

std::size_t BatchedStatistics::total_values() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.values.size();
  return n;
}

std::vector<double> BatchedStatistics::pooled() const {
  std::vector<double> out;
  out.reserve(total_values());
  for (const auto& b : batches) out.insert(out.end(), b.values.begin(), b.values.end());
  return out;
}

void validate(const BatchedStatistics& s) {
  for (const auto& b : s.batches) {
    if (b.values.empty()) throw Error("empty batch '" + b.id + "'");
    for (const double v : b.values) {
      if (!std::isfinite(v)) throw Error("non-finite value in batch '" + b.id + "'");
      if (s.kind == StatKind::Pvalue && (v < 0.0 || v > 1.0)) {
        throw Error("p-value " + fmt_short(v) + " in batch '" + b.id +
                    "' outside [0, 1]");
      }
    }
  }
}

HistogramRecord histogram_test(const BatchedStatistics& s, int n_bins, double lower,
                               bool exclude_ones) {
  if (s.kind != StatKind::Pvalue) {
    throw Error("histogram_test: defined for p-values only");
  }
  if (n_bins < 1) throw Error("histogram_test: need at least one bin");
  if (!(lower >= 0.0 && lower < 1.0)) throw Error("histogram_test: lower must be in [0, 1)");
  validate(s);

  HistogramRecord rec;
  rec.lower = lower;
  rec.exclude_ones = exclude_ones;
  rec.edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int b = 0; b <= n_bins; ++b) {
    rec.edges[static_cast<std::size_t>(b)] =
        lower + (1.0 - lower) * static_cast<double>(b) / static_cast<double>(n_bins);
  }
  rec.counts.assign(static_cast<std::size_t>(n_bins), 0);

  const double width = 1.0 - lower;
  for (const auto& batch : s.batches) {
    for (const double v : batch.values) {
      if (v < lower) continue;
      ++rec.n_before_exclusion;
      if (exclude_ones && v >= 1.0 - kOneTol) continue;
      ++rec.n_retained;
      int bin = static_cast<int>((v - lower) / width * static_cast<double>(n_bins));
      bin = std::min(bin, n_bins - 1);
      ++rec.counts[static_cast<std::size_t>(bin)];
    }
  }
  const long reference = exclude_ones ? rec.n_before_exclusion : rec.n_retained;
  rec.expected_count = static_cast<double>(reference) / static_cast<double>(n_bins);
  return rec;
}

KsUniformResult ks_uniform(const std::vector<double>& values, double lower,
                           double upper) {
  if (!(lower < upper)) throw Error("ks_uniform: require lower < upper");
  KsUniformResult out;
  if (values.empty()) return out;
  std::vector<double> u;
  u.reserve(values.size());
  for (const double v : values) {
    if (v < lower - 1e-12 || v > upper + 1e-12) {
      throw Error("ks_uniform: value " + fmt_short(v) + " outside [" +
                  fmt_short(lower) + ", " + fmt_short(upper) + "]");
    }
    u.push_back(std::min(1.0, std::max(0.0, (v - lower) / (upper - lower))));
  }
  std::sort(u.begin(), u.end());
  out.n = static_cast<long>(u.size());
  out.d = ks_statistic_uniform(u);
  out.pvalue = ks_pvalue_one_sample(out.n, out.d);
  out.defined = true;
  return out;
}

KsUniformResult ks_one_vs_rest(const BatchedStatistics& s, const std::string& batch_id) {
  if (s.batches.size() < 2) {
    throw Error("ks_one_vs_rest: need at least 2 batches");
  }
  const Batch* target = nullptr;
  std::vector<double> rest;
  for (const auto& b : s.batches) {
    if (b.id == batch_id && target == nullptr) {
      target = &b;
    } else {
      rest.insert(rest.end(), b.values.begin(), b.values.end());
    }
  }
  if (target == nullptr) throw Error("ks_one_vs_rest: unknown batch '" + batch_id + "'");
  KsUniformResult out;
  if (target->values.empty() || rest.empty()) return out;
  const TwoSampleKs ks = ks_two_sample(target->values, rest);
  out.d = ks.d;
  out.pvalue = ks.pvalue;
  out.n = static_cast<long>(target->values.size());
  out.defined = true;
  return out;
}

LinearRelation linear_relation(const BatchedStatistics& s, double threshold_quantile) {
  if (!(threshold_quantile > 0.0 && threshold_quantile < 1.0)) {
    throw Error("linear_relation: threshold quantile must be in (0, 1)");
  }
  validate(s);
  if (s.batches.empty()) throw Error("linear_relation: no batches");

  std::vector<double> pooled = s.pooled();
  std::sort(pooled.begin(), pooled.end());
  const Direction dir = effective_direction(s);

  LinearRelation rel;
  rel.threshold_quantile = threshold_quantile;
  rel.cutoff = pooled_cutoff(pooled, threshold_quantile, dir);
  for (const auto& b : s.batches) {
    std::vector<double> sorted = b.values;
    std::sort(sorted.begin(), sorted.end());
    rel.points.push_back({b.id, static_cast<long>(b.values.size()),
                          count_significant(sorted, rel.cutoff, dir)});
  }
  rel.r2 = ols_r2(rel.points);
  return rel;
}

std::vector<CurvePoint> r2_curve(const BatchedStatistics& s, int n_thresholds) {
  if (n_thresholds < 1) throw Error("r2_curve: need at least one threshold");
  validate(s);
  if (s.batches.empty()) return {};

  std::vector<double> pooled = s.pooled();
  std::sort(pooled.begin(), pooled.end());
  const double total = static_cast<double>(pooled.size());
  const Direction dir = effective_direction(s);

  std::vector<std::vector<double>> sorted_batches;
  sorted_batches.reserve(s.batches.size());
  for (const auto& b : s.batches) {
    sorted_batches.push_back(b.values);
    std::sort(sorted_batches.back().begin(), sorted_batches.back().end());
  }

  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(n_thresholds));
  std::vector<ScatterPoint> pts(s.batches.size());
  for (int t = 1; t <= n_thresholds; ++t) {
    const double q = static_cast<double>(t) / static_cast<double>(n_thresholds);
    const double cutoff = pooled_cutoff(pooled, q, dir);
    long total_sig = 0;
    long max_sig = 0;
    for (std::size_t b = 0; b < sorted_batches.size(); ++b) {
      const long c = count_significant(sorted_batches[b], cutoff, dir);
      pts[b] = {s.batches[b].id, static_cast<long>(sorted_batches[b].size()), c};
      total_sig += c;
      max_sig = std::max(max_sig, c);
    }
    CurvePoint point;
    point.prop_significant = static_cast<double>(total_sig) / total;
    point.r2 = ols_r2(pts);
    point.max_significant = max_sig;
    curve.push_back(point);
  }
  return curve;
}

double partial_auc(const std::vector<CurvePoint>& curve, double x_lo, double x_hi) {
  if (!(x_lo >= 0.0 && x_lo < x_hi && x_hi <= 1.0)) {
    throw Error("partial_auc: require 0 <= x_lo < x_hi <= 1");
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : curve) {
    if (p.r2.has_value()) pts.emplace_back(p.prop_significant, *p.r2);
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  bool any_inside = false;
  for (const auto& p : pts) {
    if (p.first >= x_lo && p.first <= x_hi) {
      any_inside = true;
      break;
    }
  }
  if (!any_inside) throw Error("partial_auc: no curve points within the bound");

  const auto eval = [&](double x) -> double {
    if (x <= pts.front().first) return pts.front().second;
    if (x >= pts.back().first) return pts.back().second;
    std::size_t i = 0;
    while (i + 1 < pts.size() && pts[i + 1].first < x) ++i;
    // pts[i].first <= ~x <= pts[i+1].first
    const double x0 = pts[i].first;
    const double x1 = pts[i + 1].first;
    if (x1 <= x0) return pts[i + 1].second;
    const double w = (x - x0) / (x1 - x0);
    return (1.0 - w) * pts[i].second + w * pts[i + 1].second;
  };

  std::vector<double> xs;
  xs.push_back(x_lo);
  for (const auto& p : pts) {
    if (p.first > x_lo && p.first < x_hi) xs.push_back(p.first);
  }
  xs.push_back(x_hi);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    integral += 0.5 * (eval(xs[i]) + eval(xs[i + 1])) * (xs[i + 1] - xs[i]);
  }
  const double auc = integral / (x_hi - x_lo);
  return std::min(1.0, std::max(0.0, auc));
}

EvalReport evaluate_all(const BatchedStatistics& s, const EvalOptions& opt) {
  validate(s);
  EvalReport rep;
  if (s.batches.empty()) return rep;

  rep.bonferroni_level = 0.05 / static_cast<double>(s.batches.size());

  if (s.kind == StatKind::Pvalue) {
    rep.histogram = histogram_test(s, opt.n_bins, opt.lower, opt.exclude_ones);
  }

  // per-batch KS: uniform on a window for p-values, one-vs-rest otherwise
  if (s.kind == StatKind::Pvalue) {
    double wl = std::max(opt.lower, opt.ks_lower);
    double wu = opt.ks_upper;
    if (opt.ks_top_quantile.has_value()) {
      std::vector<double> pooled = s.pooled();
      std::sort(pooled.begin(), pooled.end());
      wu = pooled_cutoff(pooled, *opt.ks_top_quantile, Direction::SmallerIsSignificant);
    }
    rep.ks_window_lower = wl;
    rep.ks_window_upper = wu;
    for (const auto& b : s.batches) {
      KsRecord rec;
      rec.batch_id = b.id;
      rec.mode = KsMode::Uniform;
      if (wl < wu) {
        std::vector<double> window;
        for (const double v : b.values) {
          if (v >= wl && v <= wu) window.push_back(v);
        }
        const KsUniformResult r = ks_uniform(window, wl, wu);
        rec.batch_size = r.n;
        rec.d = r.d;
        rec.pvalue = r.pvalue;
        rec.defined = r.defined;
      }
      rep.ks_records.push_back(rec);
    }
  } else {
    BatchedStatistics trimmed = s;
    if (opt.lower > 0.0) {
      // drop the most significant pooled fraction before testing, the
      // generic-statistic analogue of removing small p-values
      std::vector<double> pooled = s.pooled();
      std::sort(pooled.begin(), pooled.end());
      const double cut = pooled_cutoff(pooled, opt.lower, s.direction);
      for (auto& b : trimmed.batches) {
        std::vector<double> kept;
        for (const double v : b.values) {
          const bool drop = s.direction == Direction::SmallerIsSignificant ? v < cut
                                                                           : v > cut;
          if (!drop) kept.push_back(v);
        }
        b.values = std::move(kept);
      }
    }
    BatchedStatistics nonempty;
    nonempty.kind = trimmed.kind;
    nonempty.direction = trimmed.direction;
    for (const auto& ob : trimmed.batches) {
      if (!ob.values.empty()) nonempty.batches.push_back(ob);
    }
    for (const auto& b : trimmed.batches) {
      KsRecord rec;
      rec.batch_id = b.id;
      rec.mode = KsMode::OneVsRest;
      if (!b.values.empty() && nonempty.batches.size() >= 2) {
        const KsUniformResult r = ks_one_vs_rest(nonempty, b.id);
        rec.batch_size = r.n;
        rec.d = r.d;
        rec.pvalue = r.pvalue;
        rec.defined = r.defined;
      }
      rep.ks_records.push_back(rec);
    }
  }

  for (const double q : opt.scatter_quantiles) {
    rep.scatters.push_back(linear_relation(s, q));
  }
  rep.curve = r2_curve(s, opt.n_thresholds);
  for (const auto& bound : opt.auc_bounds) {
    AucEntry entry;
    entry.lo = bound.first;
    entry.hi = bound.second;
    try {
      entry.value = partial_auc(rep.curve, bound.first, bound.second);
    } catch (const Error&) {
      entry.value = std::nullopt;
    }
    rep.auc_table.push_back(entry);
  }
  return rep;
}

std::vector<std::string> write_report(const EvalReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;

  const auto open = [&](const std::string& name) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    written.push_back(path);
    return out;
  };

  using nlohmann::json;
  json doc;
  if (rep.histogram) {
    const HistogramRecord& h = *rep.histogram;
    doc["histogram"] = {{"lower", h.lower},
                        {"exclude_ones", h.exclude_ones},
                        {"edges", h.edges},
                        {"counts", h.counts},
                        {"expected_count", h.expected_count},
                        {"n_retained", h.n_retained},
                        {"n_before_exclusion", h.n_before_exclusion}};
  } else {
    doc["histogram"] = nullptr;
  }
  doc["bonferroni_level"] = rep.bonferroni_level;
  doc["ks_window"] = {{"lower", rep.ks_window_lower}, {"upper", rep.ks_window_upper}};
  json ks = json::array();
  for (const auto& r : rep.ks_records) {
    ks.push_back({{"batch_id", r.batch_id},
                  {"batch_size", r.batch_size},
                  {"d", r.d},
                  {"pvalue", r.pvalue},
                  {"mode", r.mode == KsMode::Uniform ? "uniform" : "one_vs_rest"},
                  {"defined", r.defined}});
  }
  doc["ks"] = ks;
  json scatters = json::array();
  for (const auto& sc : rep.scatters) {
    json pts = json::array();
    for (const auto& p : sc.points) {
      pts.push_back({{"batch_id", p.batch_id},
                     {"batch_size", p.batch_size},
                     {"n_significant", p.n_significant}});
    }
    json entry = {{"quantile", sc.threshold_quantile},
                  {"cutoff", sc.cutoff},
                  {"points", pts}};
    if (sc.r2) {
      entry["r2"] = *sc.r2;
    } else {
      entry["r2"] = nullptr;
    }
    scatters.push_back(entry);
  }
  doc["scatter"] = scatters;
  json curve = json::array();
  for (const auto& p : rep.curve) {
    json entry = {{"prop_significant", p.prop_significant},
                  {"max_significant", p.max_significant}};
    if (p.r2) {
      entry["r2"] = *p.r2;
    } else {
      entry["r2"] = nullptr;
    }
    curve.push_back(entry);
  }
  doc["r2_curve"] = curve;
  json auc = json::array();
  for (const auto& a : rep.auc_table) {
    json entry = {{"lo", a.lo}, {"hi", a.hi}};
    if (a.value) {
      entry["auc"] = *a.value;
    } else {
      entry["auc"] = nullptr;
    }
    auc.push_back(entry);
  }
  doc["auc"] = auc;
  {
    auto out = open("report.json");
    out << doc.dump(2) << '\n';
  }

  {
    auto out = open("histogram.csv");
    out << "bin_lo,bin_hi,count,expected\n";
    if (rep.histogram) {
      const HistogramRecord& h = *rep.histogram;
      for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
        out << fmt(h.edges[b]) << ',' << fmt(h.edges[b + 1]) << ',' << h.counts[b]
            << ',' << fmt(h.expected_count) << '\n';
      }
    }
  }
  {
    auto out = open("ks.csv");
    out << "batch_id,batch_size,d,pvalue,mode,defined\n";
    for (const auto& r : rep.ks_records) {
      out << r.batch_id << ',' << r.batch_size << ',' << fmt(r.d) << ','
          << fmt(r.pvalue) << ','
          << (r.mode == KsMode::Uniform ? "uniform" : "one_vs_rest") << ','
          << (r.defined ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open("r2_curve.csv");
    out << "prop_significant,r2,defined,max_significant\n";
    for (const auto& p : rep.curve) {
      out << fmt(p.prop_significant) << ',' << (p.r2 ? fmt(*p.r2) : "") << ','
          << (p.r2 ? 1 : 0) << ',' << p.max_significant << '\n';
    }
  }
  {
    auto out = open("auc.csv");
    out << "bound_lo,bound_hi,auc,defined\n";
    for (const auto& a : rep.auc_table) {
      out << fmt_short(a.lo) << ',' << fmt_short(a.hi) << ','
          << (a.value ? fmt(*a.value) : "") << ',' << (a.value ? 1 : 0) << '\n';
    }
  }
  for (const auto& sc : rep.scatters) {
    auto out = open("scatter_" + fmt_short(sc.threshold_quantile) + ".csv");
    out << "batch_id,batch_size,n_significant\n";
    for (const auto& p : sc.points) {
      out << p.batch_id << ',' << p.batch_size << ',' << p.n_significant << '\n';
    }
  }
  return written;
}

}  // namespace lassopv
