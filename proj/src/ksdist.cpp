#include "lassopv/ksdist.hpp"

#include <algorithm>
#include <cmath>

#include "lassopv/error.hpp"

namespace lassopv {

double kolmogorov_survival(double x) {
  if (!(x >= 0.0)) throw Error("kolmogorov_survival: x must be nonnegative");
  if (x < 0.04) return 1.0;
  if (x < 1.18) {
    // theta-function inversion, rapidly convergent for small x
    const double v = M_PI * M_PI / (8.0 * x * x);
    const double w = std::sqrt(2.0 * M_PI) / x;
    double sum = 0.0;
    for (int j = 1; j <= 7; j += 2) sum += std::exp(-static_cast<double>(j * j) * v);
    return std::min(1.0, std::max(0.0, 1.0 - w * sum));
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) * x * x);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

double ks_cdf_exact(long n, double d) {
  if (n < 1) throw Error("ks_cdf_exact: n must be positive");
  if (!(d >= 0.0)) throw Error("ks_cdf_exact: d must be nonnegative");
  if (d * static_cast<double>(n) <= 0.5) return 0.0;  // D_n >= 1/(2n) always
  if (d >= 1.0) return 1.0;

  const long k = static_cast<long>(static_cast<double>(n) * d) + 1;
  const double h = static_cast<double>(k) - static_cast<double>(n) * d;
  const long m = 2 * k - 1;

  std::vector<double> H(static_cast<std::size_t>(m * m), 0.0);
  const auto at = [&](long i, long j) -> double& {
    return H[static_cast<std::size_t>(i * m + j)];
  };
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < m; ++j) {
      if (i - j + 1 >= 0) at(i, j) = 1.0;
    }
  }
  for (long i = 0; i < m; ++i) {
    at(i, 0) -= std::pow(h, static_cast<double>(i + 1));
    at(m - 1, i) -= std::pow(h, static_cast<double>(m - i));
  }
  at(m - 1, 0) += (2.0 * h - 1.0 > 0.0) ? std::pow(2.0 * h - 1.0, static_cast<double>(m)) : 0.0;
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < m; ++j) {
      if (i - j + 1 > 0) {
        for (long g = 1; g <= i - j + 1; ++g) at(i, j) /= static_cast<double>(g);
      }
    }
  }

  // H^n with power-of-two rescaling to keep entries in range
  std::vector<double> Q = H;
  std::vector<double> tmp(static_cast<std::size_t>(m * m));
  long e_q = 0;
  long e_h = 0;
  const auto matmul = [&](const std::vector<double>& A, const std::vector<double>& B,
                          std::vector<double>& C) {
    for (long i = 0; i < m; ++i) {
      for (long j = 0; j < m; ++j) {
        double s = 0.0;
        for (long g = 0; g < m; ++g) {
          s += A[static_cast<std::size_t>(i * m + g)] * B[static_cast<std::size_t>(g * m + j)];
        }
        C[static_cast<std::size_t>(i * m + j)] = s;
      }
    }
  };
  const auto renorm = [&](std::vector<double>& A, long& e) {
    const double center = A[static_cast<std::size_t>((m / 2) * m + m / 2)];
    if (center > 1e140) {
      for (auto& v : A) v *= 1e-140;
      e += 140;
    }
  };

  long power = n - 1;
  while (power > 0) {
    if (power & 1) {
      matmul(Q, H, tmp);
      Q.swap(tmp);
      e_q += e_h;
      renorm(Q, e_q);
    }
    matmul(H, H, tmp);
    H.swap(tmp);
    e_h *= 2;
    renorm(H, e_h);
    power >>= 1;
  }

  double t = Q[static_cast<std::size_t>((k - 1) * m + (k - 1))];
  long e_t = e_q;
  // multiply by n!/n^n, folding the scale factor in gradually
  for (long i = 1; i <= n; ++i) {
    t *= static_cast<double>(i) / static_cast<double>(n);
    if (t < 1e-140) {
      t *= 1e140;
      e_t -= 140;
    }
  }
  t *= std::pow(10.0, static_cast<double>(e_t));
  return std::min(1.0, std::max(0.0, t));
}

double ks_pvalue_one_sample(long n, double d) {
  if (n < 1) throw Error("ks_pvalue_one_sample: n must be positive");
  if (n <= 100) return std::min(1.0, std::max(0.0, 1.0 - ks_cdf_exact(n, d)));
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

double ks_statistic_uniform(const std::vector<double>& sorted01) {
  const std::size_t n = sorted01.size();
  if (n == 0) throw Error("ks_statistic_uniform: empty sample");
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = sorted01[i];
    d = std::max(d, (static_cast<double>(i) + 1.0) / dn - u);
    d = std::max(d, u - static_cast<double>(i) / dn);
  }
  return d;
}

TwoSampleKs ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  TwoSampleKs out;
  out.d = d;
  const double ne = na * nb / (na + nb);
  out.pvalue = kolmogorov_survival(std::sqrt(ne) * d);
  return out;
}

}  // namespace lassopv
