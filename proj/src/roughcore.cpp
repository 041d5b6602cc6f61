#include "fracheat/roughcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fracheat {

Increment chen_mul(const Increment& a, const Increment& b) {
  if (a.dim() != b.dim() || a.x2.rows() != a.dim() || b.x2.rows() != b.dim())
    throw DimensionError("chen_mul: increments of dimension " + std::to_string(a.dim()) + " and " +
                         std::to_string(b.dim()));
  return {a.x1 + b.x1, a.x2 + b.x2 + a.x1 * b.x1.transpose()};
}

GeometricRoughPath2::GeometricRoughPath2(std::vector<double> grid, Mat lvl1, std::vector<Mat> lvl2)
    : grid_(std::move(grid)), lvl1_(std::move(lvl1)), lvl2_(std::move(lvl2)) {
  const auto n = static_cast<std::size_t>(lvl1_.cols());
  if (grid_.size() != n + 1 || lvl2_.size() != n)
    throw DimensionError("rough path: grid has " + std::to_string(grid_.size()) + " points for " +
                         std::to_string(n) + " steps");
  for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
    if (!(grid_[k] < grid_[k + 1])) throw DimensionError("rough path: grid not strictly increasing");
  for (const auto& m : lvl2_)
    if (m.rows() != lvl1_.rows() || m.cols() != lvl1_.rows())
      throw DimensionError("rough path: second level has wrong shape");
  build_prefix();
}

GeometricRoughPath2 GeometricRoughPath2::from_linear_path(std::vector<double> grid, const Mat& values) {
  const Eigen::Index n = values.cols() - 1;
  if (n < 1) throw DimensionError("linear path needs at least two points");
  Mat lvl1 = values.rightCols(n) - values.leftCols(n);
  std::vector<Mat> lvl2(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) lvl2[k] = 0.5 * lvl1.col(k) * lvl1.col(k).transpose();
  return {std::move(grid), std::move(lvl1), std::move(lvl2)};
}

void GeometricRoughPath2::build_prefix() {
  const int d = dim();
  const int n = steps();
  prefix1_ = Mat::Zero(d, n + 1);
  prefix2_.assign(static_cast<std::size_t>(n) + 1, Mat::Zero(d, d));
  for (int k = 0; k < n; ++k) {
    prefix2_[k + 1] = prefix2_[k] + lvl2_[k] + prefix1_.col(k) * lvl1_.col(k).transpose();
    prefix1_.col(k + 1) = prefix1_.col(k) + lvl1_.col(k);
  }
}

Increment GeometricRoughPath2::span(int i, int j) const {
  if (i > j || i < 0 || j > steps()) throw DimensionError("rough path span out of range");
  if (j == i + 1) return step(i);
  Increment r;
  r.x1 = prefix1_.col(j) - prefix1_.col(i);
  r.x2 = prefix2_[j] - prefix2_[i] - prefix1_.col(i) * r.x1.transpose();
  return r;
}

GeometricRoughPath2 GeometricRoughPath2::scaled(double c) const {
  std::vector<Mat> l2(lvl2_.size());
  for (std::size_t k = 0; k < l2.size(); ++k) l2[k] = c * c * lvl2_[k];
  return {grid_, c * lvl1_, std::move(l2)};
}

double default_p(double hurst) { return 1.0 / (0.95 * hurst); }

namespace {

// Longest-path DP over grid partitions of [i, j]: best[k] = max_{l < k} best[l] + cost(l, k).
template <class Cost>
double partition_sup(int i, int j, Cost cost) {
  if (j <= i) return 0.0;
  std::vector<double> best(static_cast<std::size_t>(j - i + 1), 0.0);
  for (int k = i + 1; k <= j; ++k) {
    double b = 0.0;
    for (int l = i; l < k; ++l) b = std::max(b, best[l - i] + cost(l, k));
    best[k - i] = b;
  }
  return best.back();
}

}  // namespace

double control_value(const GeometricRoughPath2& x, int i, int j, double p) {
  if (i > j) throw Error("control_value: s > t");
  const Mat& v = x.values();
  const double lvl1 = partition_sup(i, j, [&](int l, int k) { return std::pow((v.col(k) - v.col(l)).norm(), p); });
  const double lvl2 = partition_sup(i, j, [&](int l, int k) { return std::pow(x.span(l, k).x2.norm(), p / 2); });
  return lvl1 + lvl2;
}

double pvar_norm(const Mat& values, double p) {
  const int n = static_cast<int>(values.cols()) - 1;
  const double s = partition_sup(0, n, [&](int l, int k) { return std::pow((values.col(k) - values.col(l)).norm(), p); });
  return std::pow(s, 1.0 / p);
}

GreedyPartition greedy_partition(const GeometricRoughPath2& x, double alpha, double p) {
  if (!(alpha > 0)) throw Error("greedy_partition: alpha must be positive");
  GreedyPartition out;
  out.alpha = alpha;
  out.taus.push_back(0);
  const int n = x.steps();
  const Mat& v = x.values();
  int s = 0;
  while (s < n) {
    // Incremental DP of both variation sums from the fixed left end s.
    std::vector<double> b1{0.0}, b2{0.0};
    int next = n;
    for (int k = s + 1; k <= n; ++k) {
      double m1 = 0.0, m2 = 0.0;
      for (int l = s; l < k; ++l) {
        m1 = std::max(m1, b1[l - s] + std::pow((v.col(k) - v.col(l)).norm(), p));
        m2 = std::max(m2, b2[l - s] + std::pow(x.span(l, k).x2.norm(), p / 2));
      }
      b1.push_back(m1);
      b2.push_back(m2);
      if (m1 + m2 >= alpha) {
        next = k;
        break;
      }
    }
    out.taus.push_back(next);
    s = next;
  }
  out.count = 0;
  for (std::size_t i = 1; i < out.taus.size(); ++i)
    if (out.taus[i] < n) out.count = static_cast<int>(i);
  return out;
}

double besov_norm(const GeometricRoughPath2& x, int level, double alpha_prime, int m) {
  if (level != 1 && level != 2) throw Error("besov_norm: level must be 1 or 2");
  if (m <= 0) throw Error("besov_norm: m must be positive");
  const auto& g = x.grid();
  const int n = x.steps();
  double h = g[1] - g[0];
  for (int k = 1; k < n; ++k) h = std::min(h, g[k + 1] - g[k]);
  // Trapezoid weights of the grid points.
  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    w[k] += 0.5 * (g[k + 1] - g[k]);
    w[k + 1] += 0.5 * (g[k + 1] - g[k]);
  }
  const double power = static_cast<double>(m) / level;
  const double decay = 1.0 + m * alpha_prime;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const double dt = g[j] - g[i];
      if (dt < h * (1 - 1e-12)) continue;
      const double size = level == 1 ? (x.values().col(j) - x.values().col(i)).norm() : x.span(i, j).x2.norm();
      if (size == 0.0) continue;
      sum += 2.0 * w[i] * w[j] * std::pow(size, power) / std::pow(dt, decay);
    }
  }
  return std::pow(sum, 1.0 / power);
}

GeometricRoughPath2 sew_rough_integral(const OneForm& f, const GeometricRoughPath2& z, const Vec& z0,
                                       int fine_per_step) {
  if (!f.value || !f.deriv) throw Error("sew_rough_integral: one-form lacks its first derivative");
  if (z.dim() != f.drv_dim || z0.size() != f.in_dim || f.in_dim != f.drv_dim)
    throw DimensionError("sew_rough_integral: one-form and path dimensions differ");
  if (fine_per_step < 1 || z.steps() % fine_per_step != 0)
    throw DimensionError("sew_rough_integral: output steps must group whole grid steps");
  const int e = f.in_dim;
  const int n_out = z.steps() / fine_per_step;
  Mat lvl1(f.out_dim, n_out);
  std::vector<Mat> lvl2(static_cast<std::size_t>(n_out));
  std::vector<double> grid(static_cast<std::size_t>(n_out) + 1);
  grid[0] = z.grid()[0];
  for (int q = 0; q < n_out; ++q) {
    Increment acc = Increment::zero(f.out_dim);
    for (int r = 0; r < fine_per_step; ++r) {
      const int k = q * fine_per_step + r;
      const Vec zs = z0 + z.values().col(k);
      const Increment zk = z.step(k);
      const Mat fz = f.value(zs);
      Vec a1 = fz * zk.x1;
      for (int a = 0; a < e; ++a) {
        if (zk.x2.row(a).isZero(0.0)) continue;
        a1 += f.deriv(zs, Vec::Unit(e, a)) * zk.x2.row(a).transpose();
      }
      const Mat full = fz * zk.x2 * fz.transpose();
      const Mat a2 = 0.5 * (full - full.transpose()) + 0.5 * a1 * a1.transpose();
      acc = chen_mul(acc, {a1, a2});
    }
    lvl1.col(q) = acc.x1;
    lvl2[q] = acc.x2;
    grid[q + 1] = z.grid()[(q + 1) * fine_per_step];
  }
  return {std::move(grid), std::move(lvl1), std::move(lvl2)};
}

}  // namespace fracheat
