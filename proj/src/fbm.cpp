#include "fracheat/fbm.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <string>

namespace fracheat {

double r_cov(double hurst, double s, double t) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

TwoParamFunction fbm_covariance(double hurst) {
  return {[hurst](double s, double t) { return r_cov(hurst, s, t); }, 1.0 / (2.0 * hurst)};
}

std::vector<double> dyadic_grid(int depth) {
  const int n = 1 << depth;
  std::vector<double> g(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) g[k] = static_cast<double>(k) / n;
  return g;
}

std::mt19937_64 keyed_stream(std::uint64_t seed, std::uint64_t sample, std::uint64_t coord) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(sample >> 32),
                    static_cast<std::uint32_t>(coord), static_cast<std::uint32_t>(coord >> 32)};
  return std::mt19937_64(seq);
}

FbmSampler::FbmSampler(FbmModel model) : model_(std::move(model)), grid_(dyadic_grid(model_.depth)) {
  Hurst hurst(model_.hurst);  // validates the range
  const double h = hurst.value();
  const int n = 1 << model_.depth;
  kind_ = model_.kind;
  if (kind_ == SamplerKind::Auto) kind_ = n >= 4096 ? SamplerKind::Circulant : SamplerKind::Cholesky;

  if (kind_ == SamplerKind::Cholesky) {
    Mat cov(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) cov(i, j) = cov(j, i) = r_cov(h, grid_[i + 1], grid_[j + 1]);
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) {
      jitter_ = 1e-12;
      cov.diagonal().array() += jitter_;
      llt.compute(cov);
      if (llt.info() != Eigen::Success) throw Error("fBm covariance is not positive definite");
    }
    chol_ = llt.matrixL();
  } else {
    // Davies-Harte: embed the fractional Gaussian noise autocovariance in a
    // circulant matrix of size 2n and diagonalize it with the FFT.
    const double scale = std::pow(1.0 / n, 2.0 * h);
    auto acov = [&](int k) {
      const double kk = k;
      return 0.5 * scale *
             (std::pow(kk + 1, 2 * h) - 2 * std::pow(kk, 2 * h) + std::pow(std::abs(kk - 1), 2 * h));
    };
    std::vector<double> c(2 * static_cast<std::size_t>(n));
    for (int k = 0; k <= n; ++k) c[k] = acov(k);
    for (int k = n + 1; k < 2 * n; ++k) c[k] = acov(2 * n - k);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> lam;
    fft.fwd(lam, c);
    sqrt_eigs_.resize(2 * n);
    for (int k = 0; k < 2 * n; ++k) {
      double l = lam[k].real();
      if (l < 0) {
        if (l < -1e-10) throw Error("circulant embedding has a negative eigenvalue " + std::to_string(l));
        l = 0;
      }
      sqrt_eigs_[k] = std::sqrt(l / (2.0 * n));
    }
  }
}

Vec FbmSampler::sample_coordinate(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal;
  const int n = 1 << model_.depth;
  Vec w(n + 1);
  w[0] = 0.0;
  if (kind_ == SamplerKind::Cholesky) {
    Vec z(n);
    for (int k = 0; k < n; ++k) z[k] = normal(rng);
    w.tail(n) = chol_.triangularView<Eigen::Lower>() * z;
  } else {
    std::vector<std::complex<double>> z(2 * static_cast<std::size_t>(n)), out;
    for (int k = 0; k < 2 * n; ++k) {
      const double re = normal(rng);
      const double im = normal(rng);
      z[k] = sqrt_eigs_[k] * std::complex<double>(re, im);
    }
    Eigen::FFT<double> fft;
    fft.fwd(out, z);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      acc += out[k].real();
      w[k + 1] = acc;
    }
  }
  return w;
}

Mat FbmSampler::sample(std::uint64_t index) const {
  const int n = 1 << model_.depth;
  Mat out(model_.dim, n + 1);
  for (int i = 0; i < model_.dim; ++i) {
    auto rng = keyed_stream(model_.seed, index, static_cast<std::uint64_t>(i));
    out.row(i) = sample_coordinate(rng).transpose();
  }
  return out;
}

GeometricRoughPath2 lift_dyadic(const Mat& values, int depth) {
  const auto points = values.cols() - 1;
  const Eigen::Index n = Eigen::Index{1} << depth;
  if (depth < 0 || points < n || points % n != 0)
    throw DimensionError("lift_dyadic: depth " + std::to_string(depth) + " exceeds the data resolution");
  const Eigen::Index stride = points / n;
  Mat coarse(values.rows(), n + 1);
  for (Eigen::Index k = 0; k <= n; ++k) coarse.col(k) = values.col(k * stride);
  return GeometricRoughPath2::from_linear_path(dyadic_grid(depth), coarse);
}

YoungPath time_path(const std::vector<double>& grid, double scale) {
  YoungPath p;
  p.grid = grid;
  p.values.resize(1, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) p.values(0, static_cast<Eigen::Index>(k)) = scale * grid[k];
  p.q = 1.0;
  return p;
}

GeometricRoughPath2 scaled_driver(const GeometricRoughPath2& x, double eps, const Hurst& hurst, double p) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error("scaled_driver: eps must lie in (0, 1]");
  return young_pairing(x.scaled(eps), time_path(x.grid(), std::pow(eps, hurst.inverse())), p);
}

double cameron_martin_q(double hurst) { return 1.0 / (hurst + 0.5); }

CameronMartinPath::CameronMartinPath(Rational hurst, Vec nodes, Mat coeffs)
    : hurst_(hurst), nodes_(std::move(nodes)), coeffs_(std::move(coeffs)) {
  if (coeffs_.rows() != nodes_.size()) throw DimensionError("Cameron-Martin path: one coefficient row per node");
}

CameronMartinPath CameronMartinPath::zero(Rational hurst, int dim, int num_nodes) {
  Vec nodes(num_nodes);
  for (int j = 0; j < num_nodes; ++j) nodes[j] = static_cast<double>(j + 1) / num_nodes;
  return {hurst, std::move(nodes), Mat::Zero(num_nodes, dim)};
}

Mat cross_gram(double hurst, const Vec& a, const Vec& b) {
  Mat g(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) g(i, j) = r_cov(hurst, a[i], b[j]);
  return g;
}

Mat CameronMartinPath::gram() const { return cross_gram(hurst_.value(), nodes_, nodes_); }

Vec CameronMartinPath::eval(double t) const {
  Vec r(nodes_.size());
  for (Eigen::Index j = 0; j < nodes_.size(); ++j) r[j] = r_cov(hurst_.value(), t, nodes_[j]);
  return coeffs_.transpose() * r;
}

Mat representer_matrix(double hurst, const std::vector<double>& grid, const Vec& nodes) {
  Mat b(static_cast<Eigen::Index>(grid.size()), nodes.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    for (Eigen::Index j = 0; j < nodes.size(); ++j) b(static_cast<Eigen::Index>(k), j) = r_cov(hurst, grid[k], nodes[j]);
  return b;
}

YoungPath CameronMartinPath::on_grid(const std::vector<double>& grid) const {
  YoungPath p;
  p.grid = grid;
  p.values = (representer_matrix(hurst_.value(), grid, nodes_) * coeffs_).transpose();
  p.q = cameron_martin_q(hurst_.value());
  return p;
}

double CameronMartinPath::norm_squared() const { return cm_inner(*this, *this); }

double cm_inner(const CameronMartinPath& g1, const CameronMartinPath& g2) {
  if (!(g1.hurst() == g2.hurst())) throw Error("cm_inner: Hurst parameters differ");
  if (g1.dim() != g2.dim()) throw DimensionError("cm_inner: dimensions differ");
  const Mat g12 = cross_gram(g1.hurst().value(), g1.nodes(), g2.nodes());
  return (g1.coeffs().transpose() * g12 * g2.coeffs()).trace();
}

}  // namespace fracheat
