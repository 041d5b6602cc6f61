#pragma once

// Young integrals, Young pairing and translation of rough paths, and 2D Young
// integrals against a covariance function.

#include "fracheat/roughcore.hpp"
#include "fracheat/types.hpp"

#include <functional>
#include <vector>

namespace fracheat {

/// Path of finite q-variation, q in [1, 2), sampled on a grid.
struct YoungPath {
  std::vector<double> grid;
  Mat values;  // e x (N+1)
  double q = 1.0;

  int dim() const { return static_cast<int>(values.rows()); }
  int steps() const { return static_cast<int>(values.cols()) - 1; }
  Vec increment(int k) const { return values.col(k + 1) - values.col(k); }
};

/// Throws ExponentConditionError unless 1/p + 1/q > 1.
void check_young_exponents(double p, double q);

struct YoungOptions {
  /// Combine the trapezoid sums on the grid and on every other grid point,
  /// (4 I_h - I_2h) / 3, when the grid has an even number of steps.
  bool richardson = true;
};

/// Cumulative integral of x dy, returned as a path in R^{e_x * e_y} with
/// component (a, b) stored at row a * e_y + b.  `px` is the variation exponent
/// declared for x (its own q is used when x is itself a Young path).
YoungPath young_integral(const YoungPath& x, const YoungPath& y, YoungOptions opts = {});
YoungPath young_integral(const YoungPath& x, double px, const YoungPath& y, YoungOptions opts = {});

/// Joint rough path over R^{d+e} of X and h; cross blocks are the iterated
/// integrals of the piecewise-linear interpolations.  `p` is the roughness of X.
GeometricRoughPath2 young_pairing(const GeometricRoughPath2& x, const YoungPath& h, double p);

/// Young translation tau_gamma(X).
GeometricRoughPath2 young_translate(const GeometricRoughPath2& x, const YoungPath& gamma, double p);

/// Two-parameter function R(s, t), symmetric, typically an fBm covariance.
struct TwoParamFunction {
  std::function<double(double, double)> eval;
  double variation = 1.0;  // R has finite `variation`-variation in the 2D sense
};

struct Young2dOptions {
  bool extrapolate = false;  // one Richardson step against every other grid point
};

/// Discrete 2D Young integral sum_{i,j} f_i f_j box(R)_{ij} over [0, T], with f
/// averaged over each step; `alpha_f` is the declared Hoelder exponent of f.
double young_2d(const YoungPath& f, const TwoParamFunction& r, double t_end, double alpha_f,
                Young2dOptions opts = {});

}  // namespace fracheat
