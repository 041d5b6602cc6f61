#include "fracheat/young.hpp"

#include <cmath>
#include <string>

namespace fracheat {

void check_young_exponents(double p, double q) {
  if (!(1.0 / p + 1.0 / q > 1.0))
    throw ExponentConditionError("Young integration needs 1/p + 1/q > 1 (p=" + std::to_string(p) +
                                 ", q=" + std::to_string(q) + ")");
}

namespace {

void check_same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("paths live on different grids");
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k] - b[k]) > 1e-14) throw DimensionError("paths live on different grids");
}

// Cumulative trapezoid sums of x dy using every `stride`-th grid point.
Mat trapezoid(const YoungPath& x, const YoungPath& y, int stride) {
  const int ex = x.dim(), ey = y.dim();
  const int n = x.steps() / stride;
  Mat out = Mat::Zero(ex * ey, n + 1);
  for (int k = 0; k < n; ++k) {
    const int i = k * stride, j = (k + 1) * stride;
    const Vec xm = 0.5 * (x.values.col(i) + x.values.col(j));
    const Vec dy = y.values.col(j) - y.values.col(i);
    for (int a = 0; a < ex; ++a)
      for (int b = 0; b < ey; ++b) out(a * ey + b, k + 1) = out(a * ey + b, k) + xm[a] * dy[b];
  }
  return out;
}

}  // namespace

YoungPath young_integral(const YoungPath& x, const YoungPath& y, YoungOptions opts) {
  return young_integral(x, x.q, y, opts);
}

YoungPath young_integral(const YoungPath& x, double px, const YoungPath& y, YoungOptions opts) {
  check_young_exponents(px, y.q);
  check_same_grid(x.grid, y.grid);
  YoungPath out;
  out.grid = x.grid;
  out.q = y.q;
  out.values = trapezoid(x, y, 1);
  const int n = x.steps();
  if (opts.richardson && n >= 2 && n % 2 == 0) {
    const Mat coarse = trapezoid(x, y, 2);
    Mat corrected = out.values;
    for (int k = 0; k <= n / 2; ++k) {
      const Vec c = (4.0 * out.values.col(2 * k) - coarse.col(k)) / 3.0;
      const Vec shift = c - out.values.col(2 * k);
      corrected.col(2 * k) = c;
      if (2 * k + 1 <= n) corrected.col(2 * k + 1) += shift;
    }
    out.values = std::move(corrected);
  }
  return out;
}

GeometricRoughPath2 young_pairing(const GeometricRoughPath2& x, const YoungPath& h, double p) {
  check_young_exponents(p, h.q);
  check_same_grid(x.grid(), h.grid);
  const int d = x.dim(), e = h.dim(), n = x.steps();
  Mat lvl1(d + e, n);
  std::vector<Mat> lvl2(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Vec hk = h.increment(k);
    lvl1.col(k) << x.lvl1().col(k), hk;
    Mat m(d + e, d + e);
    m.topLeftCorner(d, d) = x.lvl2()[k];
    m.topRightCorner(d, e) = 0.5 * x.lvl1().col(k) * hk.transpose();
    m.bottomLeftCorner(e, d) = 0.5 * hk * x.lvl1().col(k).transpose();
    m.bottomRightCorner(e, e) = 0.5 * hk * hk.transpose();
    lvl2[k] = std::move(m);
  }
  return {x.grid(), std::move(lvl1), std::move(lvl2)};
}

GeometricRoughPath2 young_translate(const GeometricRoughPath2& x, const YoungPath& gamma, double p) {
  check_young_exponents(p, gamma.q);
  check_same_grid(x.grid(), gamma.grid);
  if (gamma.dim() != x.dim()) throw DimensionError("young_translate: gamma has the wrong dimension");
  const int n = x.steps();
  Mat lvl1(x.dim(), n);
  std::vector<Mat> lvl2(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Vec g = gamma.increment(k);
    const Vec x1 = x.lvl1().col(k);
    lvl1.col(k) = x1 + g;
    lvl2[k] = x.lvl2()[k] + 0.5 * g * g.transpose() + 0.5 * (x1 * g.transpose() + g * x1.transpose());
  }
  return {x.grid(), std::move(lvl1), std::move(lvl2)};
}

namespace {

double young_2d_sum(const std::vector<double>& t, const std::vector<double>& f, const TwoParamFunction& r) {
  const std::size_t n = t.size() - 1;
  std::vector<double> fbar(n);
  for (std::size_t k = 0; k < n; ++k) fbar[k] = 0.5 * (f[k] + f[k + 1]);
  // R on the grid, then rectangular increments.
  Mat rg(n + 1, n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = i; j <= n; ++j) rg(i, j) = rg(j, i) = r.eval(t[i], t[j]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      row += fbar[j] * (rg(i + 1, j + 1) - rg(i + 1, j) - rg(i, j + 1) + rg(i, j));
    total += fbar[i] * row;
  }
  return total;
}

}  // namespace

double young_2d(const YoungPath& f, const TwoParamFunction& r, double t_end, double alpha_f, Young2dOptions opts) {
  if (!(alpha_f + 1.0 / r.variation > 1.0))
    throw ExponentConditionError("2D Young integral needs alpha + 2H > 1");
  if (f.dim() != 1) throw DimensionError("young_2d expects a scalar path");
  std::vector<double> t, v;
  for (int k = 0; k <= f.steps(); ++k) {
    const double tk = f.grid[k];
    if (tk <= t_end + 1e-14) {
      t.push_back(tk);
      v.push_back(f.values(0, k));
    } else {
      const double tp = f.grid[k - 1];
      if (t_end - tp > 1e-14) {
        const double w = (t_end - tp) / (tk - tp);
        t.push_back(t_end);
        v.push_back((1 - w) * f.values(0, k - 1) + w * f.values(0, k));
      }
      break;
    }
  }
  if (t.size() < 2) return 0.0;
  const double fine = young_2d_sum(t, v, r);
  if (!opts.extrapolate || (t.size() - 1) % 2 != 0) return fine;
  std::vector<double> tc, vc;
  for (std::size_t k = 0; k < t.size(); k += 2) {
    tc.push_back(t[k]);
    vc.push_back(v[k]);
  }
  return (4.0 * fine - young_2d_sum(tc, vc, r)) / 3.0;
}

}  // namespace fracheat
