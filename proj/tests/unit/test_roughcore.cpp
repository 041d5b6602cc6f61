#include "doctest.h"

#include "fracheat/fbm.hpp"
#include "fracheat/roughcore.hpp"

#include <cmath>
#include <random>

using namespace fracheat;

namespace {

std::vector<double> uniform_grid(int n) {
  std::vector<double> g(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) g[k] = static_cast<double>(k) / n;
  return g;
}

GeometricRoughPath2 linear_path(int n, double speed) {
  const auto g = uniform_grid(n);
  Mat v(1, n + 1);
  for (int k = 0; k <= n; ++k) v(0, k) = speed * g[k];
  return GeometricRoughPath2::from_linear_path(g, v);
}

GeometricRoughPath2 smooth_2d(int depth) {
  const auto g = dyadic_grid(depth);
  Mat v(2, g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g[k];
    v(0, k) = std::sin(2.0 * t) + 0.3 * t;
    v(1, k) = std::cos(3.0 * t) - 1.0 + t * t;
  }
  return GeometricRoughPath2::from_linear_path(g, v);
}

}  // namespace

TEST_SUITE("roughcore") {
  TEST_CASE("chen product of zero increments is zero") {
    const Increment z = Increment::zero(2);
    const Increment r = chen_mul(z, z);
    CHECK(r.x1.norm() == 0.0);
    CHECK(r.x2.norm() == 0.0);
  }

  TEST_CASE("chen product of the halves of a unit-speed line") {
    Increment a{Vec::Constant(1, 0.5), Mat::Constant(1, 1, 0.125)};
    const Increment r = chen_mul(a, a);
    CHECK(r.x1[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.x2(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("chen product over halves equals the direct span") {
    const auto x = smooth_2d(8);
    const int half = x.steps() / 2;
    const Increment r = chen_mul(x.span(0, half), x.span(half, x.steps()));
    const Increment direct = x.span(0, x.steps());
    CHECK((r.x1 - direct.x1).norm() < 1e-13);
    CHECK((r.x2 - direct.x2).norm() < 1e-13);
    // The direct span is the sum of step germs composed left to right.
    Increment acc = Increment::zero(2);
    for (int k = 0; k < x.steps(); ++k) acc = chen_mul(acc, x.step(k));
    CHECK((acc.x2 - direct.x2).norm() < 1e-12);
  }

  TEST_CASE("canonical lifts are geometric") {
    const auto x = smooth_2d(8);
    const Increment s = x.span(3, 200);
    const Mat sym = 0.5 * (s.x2 + s.x2.transpose());
    CHECK((sym - 0.5 * s.x1 * s.x1.transpose()).norm() < 1e-12);
  }

  TEST_CASE("control of the zero path and a linear path") {
    const auto g = uniform_grid(16);
    const auto zero = GeometricRoughPath2::from_linear_path(g, Mat::Zero(1, 17));
    CHECK(control_value(zero, 0, 16, 2.0) == 0.0);
    const double v = 1.7;
    const auto x = linear_path(16, v);
    CHECK(control_value(x, 0, 16, 2.0) == doctest::Approx(v * v + v * v / 2).epsilon(1e-12));
  }

  TEST_CASE("control is superadditive on a random lift") {
    const FbmSampler sampler({Rational(2, 5), 2, 6, 7, SamplerKind::Auto});
    const auto x = lift_dyadic(sampler.sample(0), 6);
    const double p = default_p(0.4);
    const int mid = x.steps() / 2;
    CHECK(control_value(x, 0, mid, p) + control_value(x, mid, x.steps(), p) <=
          control_value(x, 0, x.steps(), p) * (1 + 1e-12));
  }

  TEST_CASE("p-variation of a monotone path is its range") {
    Mat v(1, 5);
    v << 0.0, 0.5, 0.7, 1.0, 1.5;
    CHECK(pvar_norm(v, 1.0) == doctest::Approx(1.5));
    CHECK(pvar_norm(v, 2.5) == doctest::Approx(1.5));
  }

  TEST_CASE("greedy partition of a unit-speed line") {
    const auto x = linear_path(10, 1.0);
    const auto part = greedy_partition(x, 1.5 * 0.16, 2.0);
    CHECK(part.count == 2);
    REQUIRE(part.taus.size() >= 3);
    CHECK(x.grid()[part.taus[1]] == doctest::Approx(0.4));
    CHECK(x.grid()[part.taus[2]] == doctest::Approx(0.8));
    CHECK(greedy_partition(x, 2.0, 2.0).count == 0);
  }

  TEST_CASE("greedy partition respects alpha N <= omega(0,1)") {
    const FbmSampler sampler({Rational(2, 5), 2, 7, 19, SamplerKind::Auto});
    const double p = default_p(0.4);
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto x = lift_dyadic(sampler.sample(s), 7);
      const double total = control_value(x, 0, x.steps(), p);
      const double alpha = 0.1 * total + 1e-3;
      const auto part = greedy_partition(x, alpha, p);
      CHECK(alpha * part.count <= total * (1 + 1e-12));
    }
  }

  TEST_CASE("besov norm: zero path, scaling and double-sum oracle") {
    const auto g = uniform_grid(64);
    const auto zero = GeometricRoughPath2::from_linear_path(g, Mat::Zero(2, 65));
    CHECK(besov_norm(zero, 1, 0.36, 8) == 0.0);

    const auto x = smooth_2d(6);
    const double eps = 0.3;
    for (int level : {1, 2})
      CHECK(besov_norm(x.scaled(eps), level, 0.36, 8) ==
            doctest::Approx(std::pow(eps, level) * besov_norm(x, level, 0.36, 8)).epsilon(1e-12));

    // Unit-speed line: the integrand only depends on the lag k h.  Pairs at lag
    // k < N carry total trapezoid weight (N - k) h^2, the single pair at lag N
    // carries h^2 / 4.
    const int n = 4096;
    const double ap = 0.45, h = 1.0 / n;
    const int m = 4;
    double sum = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double weight = k < n ? (n - k) * h * h : 0.25 * h * h;
      sum += 2.0 * weight * std::pow(k * h, m - 1.0 - m * ap);
    }
    const double oracle = std::pow(sum, 1.0 / m);
    CHECK(besov_norm(linear_path(n, 1.0), 1, ap, m) == doctest::Approx(oracle).epsilon(1e-10));
  }

  TEST_CASE("sewing a constant one-form") {
    Mat c(2, 2);
    c << 1.0, 2.0, -0.5, 0.25;
    const auto f = OneForm::from_generic(2, 2, 2, [c](const auto& z) {
      using S = typename std::decay_t<decltype(z)>::Scalar;
      return MatT<S>(c.cast<S>());
    });
    const auto z = smooth_2d(6);
    const auto out = sew_rough_integral(f, z, Vec::Zero(2));
    const Increment zi = z.span(0, z.steps());
    const Increment oi = out.span(0, out.steps());
    CHECK((oi.x1 - c * zi.x1).norm() < 1e-12);
    CHECK((oi.x2 - c * zi.x2 * c.transpose()).norm() < 1e-12);
  }

  TEST_CASE("sewing z dz over [0,1]") {
    const auto z = linear_path(64, 1.0);
    const auto f = OneForm::from_generic(1, 1, 1, [](const auto& zz) {
      using S = typename std::decay_t<decltype(zz)>::Scalar;
      MatT<S> m(1, 1);
      m(0, 0) = zz[0];
      return m;
    });
    const auto out = sew_rough_integral(f, z, Vec::Zero(1), 4);
    CHECK(out.steps() == 16);
    CHECK(out.values()(0, out.steps()) == doctest::Approx(0.5).epsilon(1e-13));
  }

  TEST_CASE("sewing matches a fine Riemann-Stieltjes sum") {
    const auto f = OneForm::from_generic(2, 2, 1, [](const auto& z) {
      using S = typename std::decay_t<decltype(z)>::Scalar;
      MatT<S> m(1, 2);
      using std::sin;
      m(0, 0) = sin(z[1]);
      m(0, 1) = z[0] * z[0];
      return m;
    });
    const auto coarse = sew_rough_integral(f, smooth_2d(10), Vec::Zero(2));
    const auto fine = smooth_2d(14);
    double rs = 0.0;
    for (int k = 0; k < fine.steps(); ++k) {
      const Vec mid = 0.5 * (fine.values().col(k) + fine.values().col(k + 1));
      rs += (f.value(mid) * fine.lvl1().col(k))(0);
    }
    CHECK(std::abs(coarse.values()(0, coarse.steps()) - rs) < 1e-6);
  }
}
