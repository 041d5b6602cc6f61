#pragma once

// Fractional Brownian motion: covariance, exact sampling on dyadic grids,
// dyadic lifts, the scaled driver, and finite-rank Cameron-Martin paths.

#include "fracheat/roughcore.hpp"
#include "fracheat/types.hpp"
#include "fracheat/young.hpp"

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace fracheat {

/// R^H(s, t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.
double r_cov(double hurst, double s, double t);

TwoParamFunction fbm_covariance(double hurst);

/// Uniform grid k / 2^depth, k = 0..2^depth.
std::vector<double> dyadic_grid(int depth);

/// Independent random stream for one (seed, sample, coordinate) key.  The
/// stream depends only on the key, so results do not depend on which worker
/// draws which sample.
std::mt19937_64 keyed_stream(std::uint64_t seed, std::uint64_t sample, std::uint64_t coord);

enum class SamplerKind { Auto, Cholesky, Circulant };

struct FbmModel {
  Rational hurst{1, 2};
  int dim = 1;
  int depth = 10;
  std::uint64_t seed = 1;
  SamplerKind kind = SamplerKind::Auto;
};

/// Exact Gaussian sampler of fBm on the dyadic grid of the model.  The
/// factorization is computed once; sampling is const and thread-safe.
class FbmSampler {
 public:
  explicit FbmSampler(FbmModel model);

  const FbmModel& model() const { return model_; }
  const std::vector<double>& grid() const { return grid_; }
  SamplerKind kind() const { return kind_; }
  /// Diagonal jitter that had to be added to make the covariance factorizable.
  double jitter() const { return jitter_; }

  /// Sample `index`: d x (N+1) path values with w_0 = 0.
  Mat sample(std::uint64_t index) const;

 private:
  Vec sample_coordinate(std::mt19937_64& rng) const;

  FbmModel model_;
  SamplerKind kind_;
  std::vector<double> grid_;
  double jitter_ = 0.0;
  Mat chol_;                 // lower factor of the covariance of w at t_1..t_N
  Vec sqrt_eigs_;            // circulant embedding of the increments
};

/// Canonical lift of the piecewise-linear interpolation of `values` (d x (N+1),
/// N = 2^k >= 2^depth) at dyadic level `depth`.
GeometricRoughPath2 lift_dyadic(const Mat& values, int depth);

/// The deterministic path t -> t on a grid, as a one-dimensional Young path.
YoungPath time_path(const std::vector<double>& grid, double scale = 1.0);

/// Young pairing of eps*X with eps^{1/H} lambda, lambda_t = t.
GeometricRoughPath2 scaled_driver(const GeometricRoughPath2& x, double eps, const Hurst& hurst, double p);

/// gamma_t^{(i)} = sum_j c_{j,i} R^H(t, s_j).
class CameronMartinPath {
 public:
  CameronMartinPath(Rational hurst, Vec nodes, Mat coeffs);

  /// Uniformly spaced nodes j / M, j = 1..M, with zero coefficients.
  static CameronMartinPath zero(Rational hurst, int dim, int num_nodes);

  const Rational& hurst() const { return hurst_; }
  const Vec& nodes() const { return nodes_; }
  const Mat& coeffs() const { return coeffs_; }
  int dim() const { return static_cast<int>(coeffs_.cols()); }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  CameronMartinPath with_coeffs(Mat coeffs) const { return {hurst_, nodes_, std::move(coeffs)}; }

  /// G_jk = R^H(s_j, s_k).
  Mat gram() const;
  Vec eval(double t) const;
  /// Values on a grid as a Young path with q = 1 / (H + 1/2).
  YoungPath on_grid(const std::vector<double>& grid) const;
  double norm_squared() const;

 private:
  Rational hurst_;
  Vec nodes_;
  Mat coeffs_;  // M x d
};

/// Variation exponent of Cameron-Martin paths, 1 / (H + 1/2).
double cameron_martin_q(double hurst);

/// B_{kj} = R^H(t_k, s_j): maps node coefficients to grid values.
Mat representer_matrix(double hurst, const std::vector<double>& grid, const Vec& nodes);
Mat cross_gram(double hurst, const Vec& a, const Vec& b);

double cm_inner(const CameronMartinPath& g1, const CameronMartinPath& g2);

}  // namespace fracheat
