#include "fracheat/malliavin.hpp"

#include "fracheat/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracheat {

CovarianceIncrements::CovarianceIncrements(double hurst, const std::vector<double>& grid) : hurst_(hurst) {
  const auto n = static_cast<Eigen::Index>(grid.size()) - 1;
  Mat r(n + 1, n + 1);
  for (Eigen::Index i = 0; i <= n; ++i)
    for (Eigen::Index j = i; j <= n; ++j) r(i, j) = r(j, i) = r_cov(hurst, grid[i], grid[j]);
  box_ = r.bottomRightCorner(n, n) - r.block(1, 0, n, n) - r.block(0, 1, n, n) + r.topLeftCorner(n, n);
}

double default_alpha(double hurst) { return 0.95 * hurst; }

MalliavinCov malliavin_cov(const SolutionBundle& bundle, const VectorFieldSet& fields, const Hurst& hurst,
                           double eps, const CovarianceIncrements& box, double alpha) {
  if (!bundle.has_jacobian()) throw Error("malliavin_cov: the solution carries no Jacobian");
  if (!(alpha + 2.0 * hurst.value() > 1.0)) throw ExponentConditionError("malliavin_cov needs alpha + 2H > 1");
  const int n_steps = static_cast<int>(bundle.y.cols()) - 1;
  if (box.steps() != n_steps) throw DimensionError("malliavin_cov: covariance increments on a different grid");
  const int n = fields.n(), d = fields.d();
  std::vector<Mat> g(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) g[k] = bundle.inv[k] * fields.sigma<double>(bundle.y.col(k));
  MalliavinCov out;
  out.eps = eps;
  out.q = Mat::Zero(n, n);
  const Mat& j1 = bundle.jac.back();
  for (int r = 0; r < d; ++r) {
    Mat a(n_steps, n);
    for (int k = 0; k < n_steps; ++k) a.row(k) = 0.5 * (g[k].col(r) + g[k + 1].col(r)).transpose();
    const Mat inner = a.transpose() * box.matrix() * a;
    Mat comp = j1 * inner * j1.transpose();
    comp = 0.5 * (comp + comp.transpose());
    out.q += comp;
    out.components.push_back(std::move(comp));
  }
  out.min_eig = Eigen::SelfAdjointEigenSolver<Mat>(out.q, Eigen::EigenvaluesOnly).eigenvalues()[0];
  return out;
}

MalliavinCov malliavin_cov(const SolutionBundle& bundle, const VectorFieldSet& fields, const Hurst& hurst,
                           double eps) {
  return malliavin_cov(bundle, fields, hurst, eps, CovarianceIncrements(hurst.value(), bundle.grid),
                       default_alpha(hurst.value()));
}

void check_ellipticity(const VectorFieldSet& fields, const Vec& a) {
  const Mat s = fields.sigma<double>(a);
  const Mat ss = s * s.transpose();
  const double lo = Eigen::SelfAdjointEigenSolver<Mat>(ss, Eigen::EigenvaluesOnly).eigenvalues()[0];
  if (!(lo > 1e-12 * std::max(1.0, ss.norm())))
    throw ConfigError("ellipticity fails at the starting point: sigma(a) does not have full rank");
}

namespace {

double quantile(std::vector<double> v, double level) {
  std::sort(v.begin(), v.end());
  const double pos = level * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

ScanResult nondegeneracy_scan(const ScanModel& model, const std::vector<double>& eps_grid, int n_samples,
                              const std::vector<double>& rho_grid) {
  check_ellipticity(model.fields, model.a);
  const Hurst hurst(model.hurst);
  FbmSampler sampler({model.hurst, model.fields.d(), model.depth, model.seed, SamplerKind::Auto});
  const CovarianceIncrements box(hurst.value(), sampler.grid());
  const double p = default_p(hurst.value());
  const double alpha = default_alpha(hurst.value());
  const std::size_t m = eps_grid.size();
  std::vector<double> eig(m * static_cast<std::size_t>(n_samples));
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t s) {
    const GeometricRoughPath2 x = lift_dyadic(sampler.sample(s), model.depth);
    for (std::size_t e = 0; e < m; ++e) {
      const SolutionBundle sol = solve_scaled(x, eps_grid[e], model.fields, model.a, hurst, p, true);
      eig[e * n_samples + s] = malliavin_cov(sol, model.fields, hurst, eps_grid[e], box, alpha).min_eig;
    }
  });
  ScanResult out;
  for (std::size_t e = 0; e < m; ++e) {
    std::vector<double> v(eig.begin() + static_cast<std::ptrdiff_t>(e * n_samples),
                          eig.begin() + static_cast<std::ptrdiff_t>((e + 1) * n_samples));
    for (int s = 0; s < n_samples; ++s) out.rows.push_back({eps_grid[e], s, v[s]});
    ScanSummary sum;
    sum.eps = eps_grid[e];
    for (double level : {0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0}) sum.quantiles.emplace_back(level, quantile(v, level));
    for (double rho : rho_grid) {
      const auto below = std::count_if(v.begin(), v.end(), [rho](double x) { return x < rho; });
      sum.tail.emplace_back(rho, static_cast<double>(below) / n_samples);
    }
    out.summary.push_back(std::move(sum));
  }
  return out;
}

double holder_seminorm(const YoungPath& f, double alpha, double t_end) {
  int last = 0;
  while (last < f.steps() && f.grid[last + 1] <= t_end + 1e-14) ++last;
  // On uniform grids the denominators depend on the lag only.
  const double h = last > 0 ? f.grid[1] - f.grid[0] : 1.0;
  bool uniform = true;
  for (int k = 0; k < last && uniform; ++k) uniform = std::abs(f.grid[k + 1] - f.grid[k] - h) < 1e-12;
  std::vector<double> inv_pow;
  if (uniform)
    for (int lag = 0; lag <= last; ++lag) inv_pow.push_back(lag ? std::pow(lag * h, -alpha) : 0.0);
  double best = 0.0;
  for (int i = 0; i <= last; ++i)
    for (int j = i + 1; j <= last; ++j) {
      const double w = uniform ? inv_pow[j - i] : std::pow(f.grid[j] - f.grid[i], -alpha);
      best = std::max(best, (f.values.col(j) - f.values.col(i)).norm() * w);
    }
  return best;
}

namespace {

CllReport cll_report(const YoungPath& f, const Hurst& hurst, double alpha, double c_h, double t_end, double delta_value) {
  const double h = hurst.value();
  CllReport rep;
  rep.delta = delta_value;
  if (rep.delta < -1e-10) throw Error("cll_interpolation_check: negative 2D Young integral (integration failure)");
  const double delta = std::max(rep.delta, 0.0);
  for (int k = 0; k <= f.steps() && f.grid[k] <= t_end + 1e-14; ++k) rep.lhs = std::max(rep.lhs, std::abs(f.values(0, k)));
  rep.holder = holder_seminorm(f, alpha, t_end);
  const double first = std::sqrt(delta) / std::sqrt(r_cov(h, t_end, t_end));
  const double second_num = std::pow(delta, alpha / (2 * alpha + 2 * h)) * std::pow(rep.holder, 2 * h / (2 * alpha + 2 * h));
  rep.rhs = 2.0 * std::max(first, second_num / std::sqrt(c_h));
  rep.holds = rep.lhs <= rep.rhs;
  if (rep.lhs <= 2.0 * first)
    rep.critical_constant = std::numeric_limits<double>::infinity();
  else
    rep.critical_constant = std::pow(2.0 * second_num / rep.lhs, 2);
  return rep;
}

}  // namespace

CllReport cll_interpolation_check(const YoungPath& f, const Hurst& hurst, double alpha, double c_h, double t_end) {
  return cll_report(f, hurst, alpha, c_h, t_end, young_2d(f, fbm_covariance(hurst.value()), t_end, alpha));
}

CllReport cll_interpolation_check(const YoungPath& f, const Hurst& hurst, double alpha, double c_h,
                                  const CovarianceIncrements& box) {
  if (f.dim() != 1 || box.steps() != f.steps()) throw DimensionError("cll_interpolation_check: grid mismatch");
  if (!(alpha + 2.0 * hurst.value() > 1.0)) throw ExponentConditionError("2D Young integral needs alpha + 2H > 1");
  const Vec fbar = 0.5 * (f.values.row(0).head(f.steps()) + f.values.row(0).tail(f.steps())).transpose();
  return cll_report(f, hurst, alpha, c_h, f.grid.back(), fbar.dot(box.matrix() * fbar));
}

YoungPath random_trig_path(std::uint64_t seed, std::uint64_t index, const std::vector<double>& grid, int modes) {
  auto rng = keyed_stream(seed, index, 0);
  std::normal_distribution<double> normal;
  const double c = normal(rng);
  std::vector<double> a(static_cast<std::size_t>(modes)), b(a.size());
  for (int k = 0; k < modes; ++k) {
    a[k] = normal(rng) / (k + 1);
    b[k] = normal(rng) / (k + 1);
  }
  YoungPath f;
  f.grid = grid;
  f.q = 1.0;
  f.values.resize(1, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = c;
    for (int k = 0; k < modes; ++k) {
      const double w = 2.0 * M_PI * (k + 1) * grid[i];
      v += a[k] * std::cos(w) + b[k] * std::sin(w);
    }
    f.values(0, static_cast<Eigen::Index>(i)) = v;
  }
  return f;
}

double calibrate_cll_constant(const Hurst& hurst, double alpha, std::uint64_t seed, int count,
                              const std::vector<double>& grid) {
  const CovarianceIncrements box(hurst.value(), grid);
  std::vector<double> crit(static_cast<std::size_t>(count));
  parallel_for(crit.size(), [&](std::size_t i) {
    crit[i] = cll_interpolation_check(random_trig_path(seed, i, grid), hurst, alpha, 1.0, box).critical_constant;
  });
  return *std::min_element(crit.begin(), crit.end());
}

}  // namespace fracheat
