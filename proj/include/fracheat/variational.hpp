#pragma once

// Energy minimization over {gamma : phi^0_1(gamma) = a'} in a finite-rank
// Cameron-Martin representation, Lagrange multipliers, and the second-order
// test sup Spec(A_hat) < 1/2 on the kernel of the endpoint derivative.

#include "fracheat/fbm.hpp"
#include "fracheat/fields.hpp"
#include "fracheat/rde.hpp"
#include "fracheat/types.hpp"

#include <cstdint>
#include <vector>

namespace fracheat {

/// Coefficient vectors of Cameron-Martin paths are flattened column-major:
/// entry (node j, coordinate i) sits at i * M + j.
Vec flatten_coeffs(const Mat& coeffs);
Mat unflatten_coeffs(const Vec& flat, int num_nodes, int dim);

struct EndpointJacobian {
  Vec endpoint;        // phi^0_1(gamma)
  Mat jac;             // n x (M d): D_k phi^0_1 for k = R(., s_j) e_i
  Mat representers;    // (M d) x n: column l holds the coefficients of the representer of component l
};

/// Derivative of the (discrete) skeleton endpoint in the directions R(., s_j) e_i
/// for the nodes `basis` (defaults to the nodes of gamma).
EndpointJacobian endpoint_jacobian(const CameronMartinPath& gamma, const VectorFieldSet& fields, const Vec& a,
                                   const std::vector<double>& grid);
EndpointJacobian endpoint_jacobian(const CameronMartinPath& gamma, const VectorFieldSet& fields, const Vec& a,
                                   const std::vector<double>& grid, const Vec& basis);

struct VariationalOptions {
  int grid_depth = 10;
  int max_outer = 200;
  int max_inner = 60;
  double endpoint_tol = 1e-10;
  double residual_tol = 1e-6;
  int starts = 8;
  double start_scale = 0.2;
  std::uint64_t seed = 2024;
  double basin_tol = 1e-4;
};

struct MinimizerResult {
  CameronMartinPath gamma_bar{Rational(1, 2), Vec(), Mat()};
  Vec nu_bar;
  double energy = 0.0;
  double endpoint_residual = 0.0;
  double lagrange_residual = 0.0;
  bool converged = false;
  int outer_iterations = 0;
  std::vector<double> trace;  // endpoint residual per outer iteration of the best start
  int distinct_basins = 1;
  bool unique_up_to_tolerance = true;

  // Problem data, kept for certificates.
  VectorFieldSet fields{ConstantFields{Mat::Zero(1, 1), Vec::Zero(1)}};
  Vec a, a_prime;
  std::vector<double> grid;
};

/// Uniform nodes j / M, j = 1..M.
Vec uniform_nodes(int m);

MinimizerResult minimize_energy(const Vec& a, const Vec& a_prime, const VectorFieldSet& fields, const Hurst& hurst,
                                const Vec& nodes, const VariationalOptions& opts = {});

/// max over probes of |<gamma_bar, k>_H - <nu_bar, D_k phi^0_1>|; probes are
/// flattened coefficient vectors over the nodes of gamma_bar (columns of `probes`).
double lagrange_residual(const MinimizerResult& result, const Mat& probes);

struct HessianReport {
  Vec basis;        // nodes of the basis R(., b_j) e_i
  Mat gram;         // (B d) x (B d)
  Mat a_hat;        // pi^T A pi in basis coordinates
  Mat projection;   // pi in basis coordinates
  Mat representers; // (B d) x n
  Vec spectrum;     // generalized eigenvalues of a_hat v = theta gram v, ascending
  double sup = 0.0;
  bool verdict = false;  // sup < 1/2
  Mat a_full;            // A before projection, 1/2 <nu_bar, D^2 phi^0_1>
};

HessianReport hessian_spectrum(const MinimizerResult& result, const Hurst& hurst, int basis_size);

/// Energy 1/2 ||f(u)||^2 along the constrained curve through gamma_bar with
/// velocity `direction` (flattened coefficients over the minimizer nodes; it
/// should lie in the kernel of the endpoint derivative).  The curve is pulled
/// back onto the constraint by Newton steps along the representers.
double constrained_energy(const MinimizerResult& result, const Vec& direction, double u);

/// phi^0_1(gamma) on the grid.
Vec skeleton_endpoint(const CameronMartinPath& gamma, const VectorFieldSet& fields, const Vec& a,
                      const std::vector<double>& grid);

}  // namespace fracheat
