#include "doctest.h"

#include "fracheat/fbm.hpp"
#include "fracheat/young.hpp"

#include <cmath>

using namespace fracheat;

namespace {

YoungPath power_path(const std::vector<double>& grid, double power, double q = 1.0) {
  YoungPath y{grid, Mat(1, grid.size()), q};
  for (std::size_t k = 0; k < grid.size(); ++k) y.values(0, k) = std::pow(grid[k], power);
  return y;
}

YoungPath smooth_pair(const std::vector<double>& grid, double a, double b) {
  YoungPath y{grid, Mat(2, grid.size()), 1.0};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    y.values(0, k) = std::sin(a * grid[k]);
    y.values(1, k) = grid[k] * std::cos(b * grid[k]);
  }
  return y;
}

}  // namespace

TEST_SUITE("young") {
  TEST_CASE("integral of dh is the increment of h") {
    const auto g = dyadic_grid(6);
    YoungPath one{g, Mat::Ones(1, g.size()), 1.0};
    const auto h = smooth_pair(g, 2.0, 1.0);
    const auto r = young_integral(one, h);
    CHECK((r.values.col(r.steps()) - (h.values.col(h.steps()) - h.values.col(0))).norm() < 1e-13);
  }

  TEST_CASE("integral of t d(t^2) is 2/3") {
    const auto g = dyadic_grid(10);
    const auto r = young_integral(power_path(g, 1.0), power_path(g, 2.0));
    CHECK(r.values(0, r.steps()) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }

  TEST_CASE("young integral is bilinear") {
    const auto g = dyadic_grid(7);
    const auto x1 = smooth_pair(g, 1.0, 2.0), x2 = smooth_pair(g, 3.0, 0.5), y = smooth_pair(g, 2.5, 1.5);
    YoungPath x = x1;
    x.values = 2.0 * x1.values - 0.7 * x2.values;
    const auto lhs = young_integral(x, y);
    const Mat rhs = 2.0 * young_integral(x1, y).values - 0.7 * young_integral(x2, y).values;
    CHECK((lhs.values - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("young exponent condition is enforced") {
    CHECK_NOTHROW(check_young_exponents(2.5, 1.1));
    CHECK_THROWS_AS(check_young_exponents(2.5, 2.0), ExponentConditionError);
  }

  TEST_CASE("pairing with a zero path embeds X") {
    const auto g = dyadic_grid(6);
    const FbmSampler sampler({Rational(2, 5), 2, 6, 3, SamplerKind::Auto});
    const auto x = lift_dyadic(sampler.sample(0), 6);
    YoungPath h{g, Mat::Zero(1, g.size()), 1.0};
    const auto z = young_pairing(x, h, 2.6);
    REQUIRE(z.dim() == 3);
    const Increment a = z.span(0, z.steps()), b = x.span(0, x.steps());
    CHECK((a.x1.head(2) - b.x1).norm() < 1e-14);
    CHECK((a.x2.topLeftCorner(2, 2) - b.x2).norm() < 1e-14);
    CHECK(a.x2.row(2).norm() + a.x2.col(2).norm() < 1e-14);
  }

  TEST_CASE("pairing cross block of t and t^2") {
    const auto g = dyadic_grid(10);
    const auto x = GeometricRoughPath2::from_linear_path(g, power_path(g, 1.0).values);
    const auto z = young_pairing(x, power_path(g, 2.0), 2.0);
    CHECK(z.span(0, z.steps()).x2(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  }

  TEST_CASE("pairing of smooth lifts is the lift of the joint path") {
    const auto g = dyadic_grid(8);
    const auto a = smooth_pair(g, 1.0, 2.0);
    const auto b = smooth_pair(g, 0.5, 3.0);
    Mat joint(4, g.size());
    joint << a.values, b.values;
    const auto z = young_pairing(GeometricRoughPath2::from_linear_path(g, a.values), b, 2.0);
    const auto lift = GeometricRoughPath2::from_linear_path(g, joint);
    CHECK((z.span(0, z.steps()).x2 - lift.span(0, lift.steps()).x2).norm() < 1e-12);
  }

  TEST_CASE("translation of the zero path is the lift of gamma") {
    const auto g = dyadic_grid(7);
    const auto gamma = smooth_pair(g, 1.0, 1.0);
    const auto zero = GeometricRoughPath2::from_linear_path(g, Mat::Zero(2, g.size()));
    const auto t = young_translate(zero, gamma, 2.5);
    const auto lift = GeometricRoughPath2::from_linear_path(g, gamma.values);
    CHECK((t.span(0, t.steps()).x2 - lift.span(0, lift.steps()).x2).norm() < 1e-12);
  }

  TEST_CASE("translation group property and first-level additivity") {
    const Rational h(2, 5);
    const FbmSampler sampler({h, 2, 8, 5, SamplerKind::Auto});
    const double p = default_p(h.value());
    CameronMartinPath gamma = CameronMartinPath::zero(h, 2, 5);
    Mat c(5, 2);
    c << 0.3, -0.2, 0.1, 0.5, -0.4, 0.2, 0.7, 0.0, 0.2, -0.3;
    gamma = gamma.with_coeffs(c);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto w = lift_dyadic(sampler.sample(s), 8).scaled(0.3);
      YoungPath up = gamma.on_grid(w.grid());
      YoungPath down = up;
      down.values = -up.values;
      const auto there = young_translate(w, up, p);
      const auto back = young_translate(there, down, p);
      for (int k = 0; k < w.steps(); ++k) {
        CHECK((back.lvl1().col(k) - w.lvl1().col(k)).norm() < 1e-10);
        CHECK((back.lvl2()[k] - w.lvl2()[k]).norm() < 1e-10);
      }
      const Vec g1 = up.values.col(up.steps()) - up.values.col(0);
      CHECK((there.span(0, there.steps()).x1 - w.span(0, w.steps()).x1 - g1).norm() < 1e-12);
    }
  }

  TEST_CASE("2D Young integral against the covariance") {
    const auto g = dyadic_grid(10);
    for (double hv : {0.4, 0.5}) {
      const auto r = fbm_covariance(hv);
      YoungPath one{g, Mat::Ones(1, g.size()), 1.0};
      CHECK(young_2d(one, r, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(young_2d(one, r, 0.5, 1.0) == doctest::Approx(std::pow(0.5, 2 * hv)).epsilon(1e-12));
      YoungPath zero{g, Mat::Zero(1, g.size()), 1.0};
      CHECK(young_2d(zero, r, 1.0, 1.0) == 0.0);
    }
    CHECK(young_2d(power_path(g, 1.0), fbm_covariance(0.5), 1.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  }
}
