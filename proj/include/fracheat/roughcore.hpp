#pragma once

// Level-2 geometric rough paths on a time grid: Chen algebra, controls,
// p-variation, Besov norms, greedy partitions and sewing of rough integrals.

#include "fracheat/jet.hpp"
#include "fracheat/types.hpp"

#include <functional>
#include <vector>

namespace fracheat {

/// A level-2 increment (x^1, x^2) over one time span.
struct Increment {
  Vec x1;
  Mat x2;

  static Increment zero(int d) { return {Vec::Zero(d), Mat::Zero(d, d)}; }
  int dim() const { return static_cast<int>(x1.size()); }
};

/// Chen product: increment over [s,u] followed by increment over [u,t].
Increment chen_mul(const Increment& a, const Increment& b);

/// Rough path stored as per-step increments on a strictly increasing grid.
/// Increments over arbitrary grid spans are reconstructed in O(d^2) from
/// prefix signatures computed once at construction.
class GeometricRoughPath2 {
 public:
  GeometricRoughPath2() = default;
  /// grid has N+1 points from 0 to 1; lvl1 is d x N; lvl2[k] is the d x d second level of step k.
  GeometricRoughPath2(std::vector<double> grid, Mat lvl1, std::vector<Mat> lvl2);

  /// Canonical lift of a piecewise-linear path given by its values (d x (N+1)).
  static GeometricRoughPath2 from_linear_path(std::vector<double> grid, const Mat& values);

  int dim() const { return static_cast<int>(lvl1_.rows()); }
  int steps() const { return static_cast<int>(lvl1_.cols()); }
  const std::vector<double>& grid() const { return grid_; }
  const Mat& lvl1() const { return lvl1_; }
  const std::vector<Mat>& lvl2() const { return lvl2_; }

  /// Increment of step k (between grid points k and k+1).
  Increment step(int k) const { return {lvl1_.col(k), lvl2_[k]}; }
  /// Increment over grid indices i <= j.
  Increment span(int i, int j) const;
  /// Path values x_{t_k} - x_0, d x (N+1).
  const Mat& values() const { return prefix1_; }

  /// The rough path multiplied by a scalar (dilation: level i scales by c^i).
  GeometricRoughPath2 scaled(double c) const;

 private:
  void build_prefix();

  std::vector<double> grid_;
  Mat lvl1_;
  std::vector<Mat> lvl2_;
  Mat prefix1_;                // d x (N+1)
  std::vector<Mat> prefix2_;   // N+1 matrices
};

/// Default roughness exponent p = 1/(0.95 H).
double default_p(double hurst);

/// Control omega(s,t) = ||x^1||_{p-var}^p + ||x^2||_{p/2-var}^{p/2} on grid indices i <= j.
double control_value(const GeometricRoughPath2& x, int i, int j, double p);

/// Grid p-variation (the norm, not its p-th power) of a path given by values (e x (N+1)).
double pvar_norm(const Mat& values, double p);

struct GreedyPartition {
  double alpha = 0.0;
  std::vector<int> taus;  // grid indices, starting at 0
  int count = 0;          // N_alpha
};

GreedyPartition greedy_partition(const GeometricRoughPath2& x, double alpha, double p);

/// Grid discretization of the (alpha', m)-Besov norm of level 1 or 2:
/// ( sum_{|t_j - t_i| >= h} |x^lvl_{t_i t_j}|^{m/lvl} / |t_j - t_i|^{1 + m alpha'} dt_i dt_j )^{lvl/m}.
double besov_norm(const GeometricRoughPath2& x, int level, double alpha_prime, int m);

/// One-form f: R^e -> L(R^d, R^n) together with its partial derivatives.
struct OneForm {
  int in_dim = 0;   // e, state dimension of z
  int drv_dim = 0;  // d, direction dimension
  int out_dim = 0;  // n
  std::function<Mat(const Vec&)> value;                // n x d
  std::function<Mat(const Vec&, const Vec&)> deriv;    // directional derivative, n x d

  /// Builds a one-form from a generic callable `f(VecT<S>) -> MatT<S>`; derivatives by dual numbers.
  template <class F>
  static OneForm from_generic(int in_dim, int drv_dim, int out_dim, F f) {
    OneForm w;
    w.in_dim = in_dim;
    w.drv_dim = drv_dim;
    w.out_dim = out_dim;
    w.value = [f](const Vec& z) -> Mat { return f(z); };
    w.deriv = [f](const Vec& z, const Vec& v) -> Mat {
      using D = Jet<1, 1>;
      VecT<D> zj(z.size());
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        zj[k] = D(z[k]);
        zj[k][1] = v[k];
      }
      const MatT<D> out = f(zj);
      Mat d(out.rows(), out.cols());
      for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c) d(r, c) = out(r, c)[1];
      return d;
    };
    return w;
  }
};

/// Rough integral of f(z) dz.  The per-step germ is
/// (f(z_s) z^1 + Df(z_s) z^2,  f(z_s) z^2 f(z_s)^T) whose symmetric second level is
/// replaced by the geometric value; spans of `fine_per_step` grid steps are sewn by
/// Chen products.  `z0` is the starting point of z.
GeometricRoughPath2 sew_rough_integral(const OneForm& f, const GeometricRoughPath2& z, const Vec& z0,
                                       int fine_per_step = 1);

}  // namespace fracheat
