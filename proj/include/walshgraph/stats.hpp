#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "walshgraph/common.hpp"

namespace walshgraph {

// =============================================================================
// Statistics helpers
// =============================================================================

struct MeanSe {
  Real mean = 0.0;
  Real se = 0.0;
  std::size_t n = 0;
};

inline MeanSe mean_and_se(const std::vector<Real>& xs) {
  MeanSe r;
  r.n = xs.size();
  if (xs.empty()) return r;
  Real sum = 0.0;
  for (Real x : xs) sum += x;
  r.mean = sum / static_cast<Real>(xs.size());
  if (xs.size() < 2) return r;
  Real ss = 0.0;
  for (Real x : xs) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / (static_cast<Real>(xs.size()) * static_cast<Real>(xs.size() - 1)));
  return r;
}

/// Half-width of the k-sigma binomial band around probability p at sample
/// size n.
inline Real binomial_band(Real p, std::size_t n, Real k_sigma) {
  return k_sigma * std::sqrt(std::max(p * (1.0 - p), Real(0)) / static_cast<Real>(n));
}

/// Two-sample Kolmogorov-Smirnov distance. Sorts copies of both samples.
inline Real ks_two_sample(std::vector<Real> a, std::vector<Real> b) {
  if (a.empty() || b.empty()) throw InsufficientSample("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  Real d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const Real fa = static_cast<Real>(i) / static_cast<Real>(a.size());
    const Real fb = static_cast<Real>(j) / static_cast<Real>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

/// One-sample Kolmogorov-Smirnov distance against a CDF.
inline Real ks_against_cdf(std::vector<Real> sample, const std::function<Real(Real)>& cdf) {
  if (sample.empty()) throw InsufficientSample("ks_against_cdf: empty sample");
  std::sort(sample.begin(), sample.end());
  const Real n = static_cast<Real>(sample.size());
  Real d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Real c = cdf(sample[i]);
    d = std::max(d, std::abs(static_cast<Real>(i + 1) / n - c));
    d = std::max(d, std::abs(c - static_cast<Real>(i) / n));
  }
  return d;
}

/// CDF of |N(0, variance)| (half-normal), the radial law of a Walsh motion
/// started at the vertex.
inline Real half_normal_cdf(Real x, Real variance) {
  if (x <= 0.0) return 0.0;
  return std::erf(x / std::sqrt(2.0 * variance));
}

/// Least-squares slope of log(y) against log(x); the empirical convergence
/// order of y ~ C x^slope.
inline Real fit_log_log_slope(const std::vector<Real>& x, const std::vector<Real>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error("fit_log_log_slope: need matching samples of size >= 2");
  std::vector<Real> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw Error("fit_log_log_slope: positive data required");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const Real n = static_cast<Real>(lx.size());
  Real sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace walshgraph
