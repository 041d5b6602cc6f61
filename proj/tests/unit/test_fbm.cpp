#include "doctest.h"

#include "fracheat/fbm.hpp"

#include <cmath>
#include <numbers>

using namespace fracheat;

namespace {

struct Moments {
  double mean = 0.0, var = 0.0, stderr_var = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) m.mean += x / n;
  double m4 = 0.0;
  for (double x : xs) {
    m.var += (x - m.mean) * (x - m.mean) / (n - 1);
    m4 += std::pow(x - m.mean, 4) / n;
  }
  m.stderr_var = std::sqrt((m4 - m.var * m.var) / n);
  return m;
}

}  // namespace

TEST_SUITE("fbm") {
  TEST_CASE("covariance closed forms") {
    CHECK(r_cov(0.5, 0.3, 0.7) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(r_cov(0.4, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r_cov(0.4, 0.3, 0.3) == doctest::Approx(std::pow(0.3, 0.8)).epsilon(1e-14));
    CHECK(r_cov(0.4, 1.0, 2.0) == doctest::Approx(std::pow(2.0, 0.8) / 2.0).epsilon(1e-14));
    CHECK(r_cov(0.4, 1.0, 2.0) == doctest::Approx(0.870551).epsilon(1e-6));
  }

  TEST_CASE("dyadic grid") {
    const auto g = dyadic_grid(3);
    REQUIRE(g.size() == 9);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g[3] == 0.375);
  }

  TEST_CASE("sampler marginal variance and independent Brownian increments") {
    const int count = 100000;
    for (auto kind : {SamplerKind::Cholesky, SamplerKind::Circulant}) {
      const FbmSampler bm({Rational(1, 2), 1, 4, 17, kind});
      std::vector<double> end(count), first(count), second(count);
      for (int s = 0; s < count; ++s) {
        const Mat w = bm.sample(static_cast<std::uint64_t>(s));
        end[s] = w(0, 16);
        first[s] = w(0, 8);
        second[s] = w(0, 16) - w(0, 8);
      }
      const Moments m = moments(end);
      CHECK(std::abs(m.var - 1.0) < 3 * m.stderr_var);
      double cov = 0.0, cov2 = 0.0;
      for (int s = 0; s < count; ++s) {
        cov += first[s] * second[s] / count;
        cov2 += first[s] * first[s] * second[s] * second[s] / count;
      }
      CHECK(std::abs(cov) < 3 * std::sqrt(cov2 / count));
    }
  }

  TEST_CASE("self-similarity of the marginal variance") {
    const int count = 100000;
    const FbmSampler sampler({Rational(2, 5), 1, 4, 23, SamplerKind::Auto});
    std::vector<double> half(count), full(count);
    for (int s = 0; s < count; ++s) {
      const Mat w = sampler.sample(static_cast<std::uint64_t>(s));
      half[s] = w(0, 8);
      full[s] = w(0, 16);
    }
    const Moments a = moments(half), b = moments(full);
    const double ratio = a.var / b.var;
    const double se = ratio * std::hypot(a.stderr_var / a.var, b.stderr_var / b.var);
    CHECK(std::abs(ratio - std::pow(0.5, 0.8)) < 3 * se);
  }

  TEST_CASE("samples are keyed and reproducible") {
    const FbmSampler s1({Rational(2, 5), 2, 6, 99, SamplerKind::Auto});
    const FbmSampler s2({Rational(2, 5), 2, 6, 99, SamplerKind::Auto});
    CHECK((s1.sample(42) - s2.sample(42)).norm() == 0.0);
    CHECK((s1.sample(42) - s1.sample(43)).norm() > 0.0);
    CHECK(s1.sample(0).col(0).norm() == 0.0);
  }

  TEST_CASE("lift of a line is symmetric and the circle encloses pi") {
    const auto g = dyadic_grid(4);
    Mat line(2, g.size());
    for (std::size_t k = 0; k < g.size(); ++k) line.col(k) << 2.0 * g[k], -g[k];
    const auto x = lift_dyadic(line, 4);
    const Increment inc = x.span(0, x.steps());
    CHECK((inc.x2 - 0.5 * inc.x1 * inc.x1.transpose()).norm() < 1e-15);

    const auto gc = dyadic_grid(12);
    Mat circle(2, gc.size());
    for (std::size_t k = 0; k < gc.size(); ++k)
      circle.col(k) << std::cos(2 * std::numbers::pi * gc[k]) - 1.0, std::sin(2 * std::numbers::pi * gc[k]);
    const Increment c = lift_dyadic(circle, 12).span(0, 4096);
    CHECK(std::abs(0.5 * (c.x2(0, 1) - c.x2(1, 0)) - std::numbers::pi) < 1e-3);
  }

  TEST_CASE("lift commutes with scaling") {
    const FbmSampler sampler({Rational(2, 5), 2, 6, 4, SamplerKind::Auto});
    const Mat w = sampler.sample(1);
    const auto a = lift_dyadic(w, 6).scaled(0.25);
    const auto b = lift_dyadic(0.25 * w, 6);
    for (int k = 0; k < a.steps(); ++k) CHECK((a.lvl2()[k] - b.lvl2()[k]).norm() < 1e-15);
  }

  TEST_CASE("scaled driver blocks") {
    const Hurst h(Rational(2, 5));
    const auto g = dyadic_grid(10);
    Mat v(1, g.size());
    for (std::size_t k = 0; k < g.size(); ++k) v(0, k) = std::sin(3 * g[k]);
    const auto x = GeometricRoughPath2::from_linear_path(g, v);
    const double eps = 0.3;
    const auto z = scaled_driver(x, eps, h, 2.5);
    REQUIRE(z.dim() == 2);
    const Increment inc = z.span(0, z.steps());
    CHECK(inc.x1[1] == doctest::Approx(std::pow(eps, 2.5)).epsilon(1e-14));
    // int_0^1 x_{0,t} dt = (1 - cos 3) / 3.
    const double oracle = std::pow(eps, 1.0 + 2.5) * (1.0 - std::cos(3.0)) / 3.0;
    CHECK(inc.x2(0, 1) == doctest::Approx(oracle).epsilon(1e-6));
  }

  TEST_CASE("Cameron-Martin norms") {
    const Rational h(2, 5);
    CameronMartinPath zero = CameronMartinPath::zero(h, 1, 4);
    CHECK(zero.norm_squared() == 0.0);
    Vec node(1);
    node << 0.6;
    const CameronMartinPath single(h, node, Mat::Ones(1, 1));
    CHECK(single.norm_squared() == doctest::Approx(std::pow(0.6, 0.8)).epsilon(1e-14));
    CHECK(cm_inner(single, single) == doctest::Approx(single.norm_squared()).epsilon(1e-14));

    Vec one(1);
    one << 1.0;
    const CameronMartinPath line(Rational(1, 2), one, Mat::Constant(1, 1, 1.7));
    CHECK(line.eval(0.3)[0] == doctest::Approx(0.51).epsilon(1e-14));
    CHECK(line.norm_squared() == doctest::Approx(1.7 * 1.7).epsilon(1e-14));

    Mat c(4, 2);
    c << 0.3, -0.2, 0.1, 0.5, -0.4, 0.2, 0.7, 0.0;
    const auto g = CameronMartinPath::zero(h, 2, 4).with_coeffs(c);
    CHECK(g.norm_squared() > 0.0);
  }

  TEST_CASE("representer matrix evaluates the path on the grid") {
    const Rational h(2, 5);
    Mat c(3, 1);
    c << 0.5, -1.0, 0.25;
    const auto gamma = CameronMartinPath::zero(h, 1, 3).with_coeffs(c);
    const auto g = dyadic_grid(4);
    const Mat b = representer_matrix(h.value(), g, gamma.nodes());
    const Vec vals = b * c.col(0);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(vals[k] == doctest::Approx(gamma.eval(g[k])[0]).epsilon(1e-14));
  }
}
