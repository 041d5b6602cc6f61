#pragma once

// Level-2 RDE solver (Davie-type area-corrected Euler scheme), Jacobian and
// inverse Jacobian, skeleton ODE and the scaled-and-shifted equation.

#include "fracheat/fbm.hpp"
#include "fracheat/fields.hpp"
#include "fracheat/jet.hpp"
#include "fracheat/roughcore.hpp"
#include "fracheat/types.hpp"

#include <vector>

namespace fracheat {

/// One step y -> y + F(y) z1 + sum_r DF(y)[F_r(y)] z2(r, :)^T, on any scalar type.
template <class S>
VecT<S> davie_step(const VectorFieldSet& fields, FieldLayout layout, const VecT<S>& y, const VecT<S>& z1,
                   const MatT<S>& z2) {
  const MatT<S> f = fields.one_form<S>(y, layout);
  VecT<S> out = y + f * z1;
  for (Eigen::Index r = 0; r < f.cols(); ++r) {
    const VecT<S> fr = f.col(r);
    out += fields.done_form<S>(y, fr, layout) * z2.row(r).transpose();
  }
  return out;
}

/// Driver of the scaled-and-shifted equation on one step, as a function of
/// (eps, eta) with eta standing for eps^{1/H}: the Young pairing of the
/// translated increment (eps x + gamma) with the time increment eta dt.
template <class S>
void assemble_driver(const Vec& x1, const Mat& x2, const Vec& g1, double dt, const S& eps, const S& eta, VecT<S>& z1,
                     MatT<S>& z2) {
  const Eigen::Index d = x1.size();
  z1.resize(d + 1);
  z2.resize(d + 1, d + 1);
  VecT<S> u(d);
  for (Eigen::Index i = 0; i < d; ++i) u[i] = eps * x1[i] + S(g1[i]);
  const S time = eta * dt;
  for (Eigen::Index i = 0; i < d; ++i) {
    z1[i] = u[i];
    for (Eigen::Index j = 0; j < d; ++j)
      z2(i, j) = eps * eps * x2(i, j) + S(0.5 * g1[i] * g1[j]) + eps * (0.5 * (x1[i] * g1[j] + g1[i] * x1[j]));
    z2(i, d) = S(0.5) * u[i] * time;
    z2(d, i) = z2(i, d);
  }
  z1[d] = time;
  z2(d, d) = S(0.5) * time * time;
}

/// Derivative of one step with respect to the starting point, by dual numbers.
Mat step_jacobian(const VectorFieldSet& fields, FieldLayout layout, const Vec& y, const Vec& z1, const Mat& z2);

struct SolutionBundle {
  std::vector<double> grid;
  Mat y;                 // n x (N+1)
  std::vector<Mat> jac;  // J_k, empty unless requested
  std::vector<Mat> inv;  // K_k = J_k^{-1}
  double eps = 0.0;

  bool has_jacobian() const { return !jac.empty(); }
  Vec endpoint() const { return y.col(y.cols() - 1); }
};

/// Solves dy = F(y) dz, y_0 = a.  The inverse Jacobian is the exact inverse of
/// the discrete flow derivative, so K_k J_k = Id up to rounding.
SolutionBundle solve_rde(const GeometricRoughPath2& driver, const VectorFieldSet& fields, FieldLayout layout,
                         const Vec& a, bool with_jacobian = false);

/// dphi = sigma(phi) dgamma, phi_0 = a, on the given grid.
SolutionBundle solve_skeleton(const CameronMartinPath& gamma, const VectorFieldSet& fields, const Vec& a,
                              const std::vector<double>& grid, bool with_jacobian = false);

/// d y = sigma(y)(eps dx + dgamma) + eps^{1/H} b(y) dt, y_0 = a.  eps = 0 gives
/// the skeleton.  `p` is the roughness exponent of x.
SolutionBundle solve_scaled_shifted(const GeometricRoughPath2& x, const CameronMartinPath& gamma, double eps,
                                    const VectorFieldSet& fields, const Vec& a, const Hurst& hurst, double p,
                                    bool with_jacobian = false);

/// Same, for gamma = 0 (no translation).
SolutionBundle solve_scaled(const GeometricRoughPath2& x, double eps, const VectorFieldSet& fields, const Vec& a,
                            const Hurst& hurst, double p, bool with_jacobian = false);

}  // namespace fracheat
