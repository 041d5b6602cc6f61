#include "fracheat/rde.hpp"

#include <cmath>
#include <string>

namespace fracheat {

Mat step_jacobian(const VectorFieldSet& fields, FieldLayout layout, const Vec& y, const Vec& z1, const Mat& z2) {
  using D = Jet<1, 1>;
  const Eigen::Index n = y.size();
  const VecT<D> zj1 = z1.cast<D>();
  const MatT<D> zj2 = z2.cast<D>();
  Mat jac(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    VecT<D> yj = y.cast<D>();
    yj[k][1] = 1.0;
    const VecT<D> out = davie_step<D>(fields, layout, yj, zj1, zj2);
    for (Eigen::Index i = 0; i < n; ++i) jac(i, k) = out[i][1];
  }
  return jac;
}

SolutionBundle solve_rde(const GeometricRoughPath2& driver, const VectorFieldSet& fields, FieldLayout layout,
                         const Vec& a, bool with_jacobian) {
  if (driver.dim() != fields.columns(layout))
    throw DimensionError("solve_rde: driver has dimension " + std::to_string(driver.dim()) + ", fields expect " +
                         std::to_string(fields.columns(layout)));
  if (a.size() != fields.n()) throw DimensionError("solve_rde: starting point has the wrong dimension");
  const int n_steps = driver.steps();
  SolutionBundle out;
  out.grid = driver.grid();
  out.y.resize(fields.n(), n_steps + 1);
  out.y.col(0) = a;
  if (with_jacobian) {
    out.jac.reserve(static_cast<std::size_t>(n_steps) + 1);
    out.inv.reserve(static_cast<std::size_t>(n_steps) + 1);
    out.jac.push_back(Mat::Identity(fields.n(), fields.n()));
    out.inv.push_back(Mat::Identity(fields.n(), fields.n()));
  }
  for (int k = 0; k < n_steps; ++k) {
    const Vec y = out.y.col(k);
    const Vec z1 = driver.lvl1().col(k);
    const Mat& z2 = driver.lvl2()[k];
    out.y.col(k + 1) = davie_step<double>(fields, layout, y, z1, z2);
    fields.check_domain(out.y.col(k + 1));
    if (with_jacobian) {
      const Mat step = step_jacobian(fields, layout, y, z1, z2);
      out.jac.push_back(step * out.jac.back());
      out.inv.push_back(out.inv.back() * step.partialPivLu().inverse());
    }
  }
  return out;
}

SolutionBundle solve_skeleton(const CameronMartinPath& gamma, const VectorFieldSet& fields, const Vec& a,
                              const std::vector<double>& grid, bool with_jacobian) {
  if (gamma.dim() != fields.d()) throw DimensionError("solve_skeleton: gamma and fields disagree on d");
  const YoungPath g = gamma.on_grid(grid);
  return solve_rde(GeometricRoughPath2::from_linear_path(grid, g.values), fields, FieldLayout::Sigma, a,
                   with_jacobian);
}

SolutionBundle solve_scaled_shifted(const GeometricRoughPath2& x, const CameronMartinPath& gamma, double eps,
                                    const VectorFieldSet& fields, const Vec& a, const Hurst& hurst, double p,
                                    bool with_jacobian) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw Error("solve_scaled_shifted: eps must lie in [0, 1]");
  const GeometricRoughPath2 shifted = young_translate(x.scaled(eps), gamma.on_grid(x.grid()), p);
  const double eta = eps == 0.0 ? 0.0 : std::pow(eps, hurst.inverse());
  const GeometricRoughPath2 driver = young_pairing(shifted, time_path(x.grid(), eta), p);
  SolutionBundle out = solve_rde(driver, fields, FieldLayout::SigmaDrift, a, with_jacobian);
  out.eps = eps;
  return out;
}

SolutionBundle solve_scaled(const GeometricRoughPath2& x, double eps, const VectorFieldSet& fields, const Vec& a,
                            const Hurst& hurst, double p, bool with_jacobian) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error("solve_scaled: eps must lie in (0, 1]");
  SolutionBundle out = solve_rde(scaled_driver(x, eps, hurst, p), fields, FieldLayout::SigmaDrift, a, with_jacobian);
  out.eps = eps;
  return out;
}

}  // namespace fracheat
