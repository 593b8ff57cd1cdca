#pragma once

// Reference implementations written straight from the formulas, sharing no
// code with the library. Tests compare the library against these.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

constexpr double kPi = 3.14159265358979323846;

inline double mean_weighted(const std::vector<double>& v, const std::vector<double>& t) {
  long double acc = 0;
  for (std::size_t j = 0; j < v.size(); ++j) acc += static_cast<long double>(v[j]) * t[j];
  return static_cast<double>(acc / static_cast<long double>(v.size()));
}

inline double displacement(double x, double y, double px, double py) {
  return std::sqrt((x - px) * (x - px) + (y - py) * (y - py));
}

inline double wait(double e, double emax, double t2, double vr) { return (1.0 - e / emax) * t2 * vr; }

inline double radius(double d, double dmax, double dmin, double a, double rmax) {
  return rmax - rmax * a * (dmax - d) / (dmax - dmin);
}

inline double neighbor_sum(double cx, double cy, const std::vector<std::pair<double, double>>& nb) {
  double s = 0;
  for (const auto& [x, y] : nb) s += displacement(cx, cy, x, y);
  return s;
}

// Index of the minimum sum; ties to the lowest id.
inline std::size_t relay_argmin(const std::vector<std::pair<double, double>>& cand,
                                const std::vector<unsigned>& ids,
                                const std::vector<std::pair<double, double>>& eval) {
  std::vector<std::size_t> order(cand.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sums(cand.size());
  for (std::size_t i = 0; i < cand.size(); ++i) sums[i] = neighbor_sum(cand[i].first, cand[i].second, eval);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sums[a] != sums[b] ? sums[a] < sums[b] : ids[a] < ids[b];
  });
  return order.front();
}

// Cell by scanning every cell's bounds. Cells are [lo, hi) except the last
// one on each axis, which is [lo, side].
inline std::pair<int, int> cell_scan(double x, double y, double side, double cell) {
  const int n = static_cast<int>(std::ceil(side / cell));
  auto axis = [&](double v) {
    for (int i = 0; i < n; ++i) {
      const double lo = i * cell;
      const double hi = std::min((i + 1) * cell, side);
      const bool last = i == n - 1;
      if (v >= lo && (v < hi || (last && v <= hi))) return i;
    }
    return -1;
  };
  return {axis(x), axis(y)};
}

inline double friis(double pt, double lambda, double d) {
  return pt * lambda * lambda / (16.0 * kPi * kPi * d * d);
}

inline double two_ray(double pt, double h, double d) { return pt * h * h * h * h / (d * d * d * d); }

inline double consumed(double erx, double nrx, double etx, double ntx, double pi, double ti,
                       double ps, double ts) {
  return erx * nrx + etx * ntx + pi * ti + ps * ts;
}

// Average ranks (1-based), ties sharing the mean rank.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double mean = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mean;
    i = j + 1;
  }
  return r;
}

// Spearman rank correlation as the Pearson correlation of the ranks.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline double rel_err(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) / scale;
}

}  // namespace oracle
