#pragma once

// Malliavin covariance of the scaled-and-shifted solution via 2D Young
// integration against the fBm covariance, non-degeneracy scans and the
// interpolation inequality for 2D Young integrals.

#include "fracheat/fbm.hpp"
#include "fracheat/fields.hpp"
#include "fracheat/rde.hpp"
#include "fracheat/types.hpp"
#include "fracheat/young.hpp"

#include <cstdint>
#include <vector>

namespace fracheat {

/// Rectangular increments box(R^H)_{ij} of the covariance over grid cells,
/// computed once per (H, grid) and shared read-only.
class CovarianceIncrements {
 public:
  CovarianceIncrements(double hurst, const std::vector<double>& grid);
  const Mat& matrix() const { return box_; }
  double hurst() const { return hurst_; }
  int steps() const { return static_cast<int>(box_.rows()); }

 private:
  double hurst_;
  Mat box_;
};

struct MalliavinCov {
  double eps = 0.0;
  Mat q;                        // n x n
  double min_eig = 0.0;
  std::vector<Mat> components;  // per driver direction, summing to q
};

/// Q = J_1 [ sum_{ij} g_i g_j^T box(R)_{ij} ] J_1^T with g = K sigma(y) averaged over each step.
/// `alpha` is the Hoelder exponent declared for the integrand; alpha + 2H > 1 is required.
MalliavinCov malliavin_cov(const SolutionBundle& bundle, const VectorFieldSet& fields, const Hurst& hurst,
                           double eps, const CovarianceIncrements& box, double alpha);
MalliavinCov malliavin_cov(const SolutionBundle& bundle, const VectorFieldSet& fields, const Hurst& hurst,
                           double eps);

/// Default Hoelder exponent of the integrand, 0.95 H.
double default_alpha(double hurst);

struct ScanModel {
  VectorFieldSet fields;
  Vec a;
  Rational hurst{1, 2};
  int depth = 8;
  std::uint64_t seed = 1;
};

struct ScanRow {
  double eps;
  int sample;
  double min_eig;
};

struct ScanSummary {
  double eps;
  std::vector<std::pair<double, double>> quantiles;  // (level, value)
  std::vector<std::pair<double, double>> tail;       // (rho, P(min_eig < rho))
};

struct ScanResult {
  std::vector<ScanRow> rows;  // ordered by (eps index, sample)
  std::vector<ScanSummary> summary;
};

/// Samples fBm, solves the scaled equation with its Jacobian and records the
/// smallest eigenvalue of Q_eps for every (eps, sample).
ScanResult nondegeneracy_scan(const ScanModel& model, const std::vector<double>& eps_grid, int n_samples,
                              const std::vector<double>& rho_grid = {0.0, 1e-3, 1e-2, 1e-1, 1.0});

/// Throws ConfigError unless sigma(a) has full row rank.
void check_ellipticity(const VectorFieldSet& fields, const Vec& a);

struct CllReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double delta = 0.0;   // Delta_T(f)
  double holder = 0.0;  // alpha-Hoelder seminorm of f on [0, T]
  /// Largest C_H for which the inequality holds (infinity if the first branch suffices).
  double critical_constant = 0.0;
};

CllReport cll_interpolation_check(const YoungPath& f, const Hurst& hurst, double alpha, double c_h, double t_end = 1.0);
/// Same over the whole grid, with precomputed covariance increments.
CllReport cll_interpolation_check(const YoungPath& f, const Hurst& hurst, double alpha, double c_h,
                                  const CovarianceIncrements& box);

/// alpha-Hoelder seminorm on grid points in [0, T].
double holder_seminorm(const YoungPath& f, double alpha, double t_end = 1.0);

/// Random trigonometric path sum_{k <= modes} (a_k cos 2 pi k t + b_k sin 2 pi k t) / k + c, keyed by (seed, index).
YoungPath random_trig_path(std::uint64_t seed, std::uint64_t index, const std::vector<double>& grid, int modes = 6);

/// Calibrates C_H as the smallest critical constant over `count` random trigonometric paths.
double calibrate_cll_constant(const Hurst& hurst, double alpha, std::uint64_t seed, int count,
                              const std::vector<double>& grid);

}  // namespace fracheat
