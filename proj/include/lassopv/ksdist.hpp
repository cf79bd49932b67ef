#ifndef LASSOPV_KSDIST_HPP
#define LASSOPV_KSDIST_HPP

#include <vector>

namespace lassopv {

// Survival function Q(x) = P(K > x) of the limiting Kolmogorov distribution.
double kolmogorov_survival(double x);

// Exact P(D_n < d) for the one-sample two-sided statistic, Marsaglia-Tsang-
// Wang matrix method. Intended for n up to a few hundred.
double ks_cdf_exact(long n, double d);

// One-sample two-sided p-value P(D_n >= d): exact for n <= 100, otherwise the
// asymptotic distribution with the standard finite-n argument correction
// (sqrt(n) + 0.12 + 0.11/sqrt(n)) * d.
double ks_pvalue_one_sample(long n, double d);

// Sup-norm distance between the ECDF of sorted samples (values already mapped
// to [0,1]) and the uniform CDF.
double ks_statistic_uniform(const std::vector<double>& sorted01);

// Two-sample statistic and asymptotic p-value with effective size
// n1*n2/(n1+n2). Inputs need not be sorted.
struct TwoSampleKs {
  double d = 0.0;
  double pvalue = 1.0;
};
TwoSampleKs ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace lassopv

#endif
