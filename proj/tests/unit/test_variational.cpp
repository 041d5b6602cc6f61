#include "doctest.h"

#include "fracheat/variational.hpp"

#include <cmath>

using namespace fracheat;

namespace {

VectorFieldSet trig_1d() {
  Mat s(1, 1), amp(1, 1);
  s << 1.0;
  amp << 0.5;
  return make_trig_fields(s, amp, Vec::Constant(1, 0.3), Vec::Constant(1, 0.2), 1.0);
}

VariationalOptions quick() {
  VariationalOptions o;
  o.grid_depth = 8;
  o.starts = 3;
  return o;
}

}  // namespace

TEST_SUITE("variational") {
  TEST_CASE("coefficient flattening round trip") {
    Mat c(3, 2);
    c << 1, 2, 3, 4, 5, 6;
    const Vec f = flatten_coeffs(c);
    CHECK(f[1] == 3.0);
    CHECK(f[3] == 2.0);
    CHECK((unflatten_coeffs(f, 3, 2) - c).norm() == 0.0);
    CHECK(uniform_nodes(4)[0] == 0.25);
  }

  TEST_CASE("endpoint derivative under the identity and the linear field") {
    const Rational h(2, 5);
    const auto grid = dyadic_grid(8);
    const auto gamma = CameronMartinPath::zero(h, 2, 4);
    const auto jac = endpoint_jacobian(gamma, make_identity_fields(2), Vec::Zero(2), grid);
    // D_k phi^0_1 = k_1 = R(1, s_j) e_i.
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 4; ++j) {
        Vec expect = Vec::Zero(2);
        expect[i] = r_cov(0.4, 1.0, gamma.nodes()[j]);
        CHECK((jac.jac.col(i * 4 + j) - expect).norm() < 1e-14);
      }
    const auto lin = endpoint_jacobian(CameronMartinPath::zero(h, 1, 4), make_linear_fields({Mat::Ones(1, 1)}),
                                       Vec::Ones(1), grid);
    for (int j = 0; j < 4; ++j) CHECK(lin.jac(0, j) == doctest::Approx(r_cov(0.4, 1.0, (j + 1) / 4.0)).epsilon(1e-12));

    Mat c(4, 1);
    c << 0.3, -0.1, 0.2, 0.4;
    const auto trig = endpoint_jacobian(CameronMartinPath::zero(h, 1, 4).with_coeffs(c), trig_1d(), Vec::Zero(1), grid);
    const Mat gram = trig.jac * CameronMartinPath::zero(h, 1, 4).gram().inverse() * trig.jac.transpose();
    CHECK(gram(0, 0) > 0.0);
  }

  TEST_CASE("identity diffusion: closed-form minimizer") {
    for (Rational h : {Rational(2, 5), Rational(1, 2)}) {
      Vec a(2), ap(2);
      a << 0.2, -0.1;
      ap << 1.2, 0.4;
      const auto r = minimize_energy(a, ap, make_identity_fields(2), Hurst(h), uniform_nodes(6), quick());
      CHECK(r.converged);
      CHECK(r.energy == doctest::Approx((ap - a).squaredNorm() / 2).epsilon(1e-8));
      CHECK((r.nu_bar - (ap - a)).norm() < 1e-6);
      CHECK(r.lagrange_residual <= 1e-10);
      for (double t : {0.1, 0.37, 0.8, 1.0})
        CHECK((r.gamma_bar.eval(t) - (ap - a) * r_cov(h.value(), t, 1.0)).norm() < 1e-8);
      const auto hs = hessian_spectrum(r, Hurst(h), 6);
      CHECK(hs.sup == doctest::Approx(0.0).epsilon(1e-10));
      CHECK(hs.verdict);
    }
  }

  TEST_CASE("zero displacement gives the zero path") {
    const Vec a = Vec::Constant(1, 0.3);
    const auto r = minimize_energy(a, a, trig_1d(), Hurst(Rational(2, 5)), uniform_nodes(6), quick());
    CHECK(r.energy == 0.0);
    CHECK(r.gamma_bar.coeffs().norm() == 0.0);
    CHECK(r.nu_bar.norm() == 0.0);
    CHECK(lagrange_residual(r, Mat::Identity(6, 6)) == 0.0);
  }

  TEST_CASE("perturbed minimizer residual grows linearly") {
    const Hurst h(Rational(2, 5));
    Vec a(1), ap(1);
    a << 0.0;
    ap << 1.0;
    auto r = minimize_energy(a, ap, make_identity_fields(1), h, uniform_nodes(4), quick());
    Vec probe = Vec::Zero(4);
    probe[1] = 1.0;
    const Mat g = r.gamma_bar.gram();
    double prev = 0.0;
    for (double delta : {1e-3, 2e-3, 4e-3}) {
      MinimizerResult p = r;
      p.gamma_bar = r.gamma_bar.with_coeffs(r.gamma_bar.coeffs() + delta * unflatten_coeffs(probe, 4, 1));
      const double res = lagrange_residual(p, probe);
      CHECK(res == doctest::Approx(delta * probe.dot(g * probe)).epsilon(1e-6));
      CHECK(res > prev);
      prev = res;
    }
  }

  TEST_CASE("Hessian: polarization, projection and the second-difference identity") {
    const Hurst h(Rational(2, 5));
    Vec a(1), ap(1);
    a << 0.1;
    ap << 1.2;
    const auto r = minimize_energy(a, ap, trig_1d(), h, uniform_nodes(6), quick());
    REQUIRE(r.converged);
    const auto hs = hessian_spectrum(r, h, 6);
    const Mat& A = hs.a_hat;
    const auto form = [&](const Vec& u, const Vec& v) { return u.dot(A * v); };
    Vec k = Vec::Zero(6), k2 = Vec::Zero(6);
    k[1] = 1.0;
    k[4] = -0.3;
    k2[2] = 0.5;
    k2[5] = 1.0;
    CHECK(std::abs(form(k, k2) - 0.25 * (form(k + k2, k + k2) - form(k - k2, k - k2))) < 1e-9);
    CHECK((hs.projection * hs.projection - hs.projection).norm() < 1e-8);
    CHECK(hs.sup < 0.5);

    Vec e = Vec::Zero(6);
    e[2] = 1.0;
    e[4] = -0.5;
    const Vec v = hs.projection * e;
    const double du = 1e-3;
    const double fd = (constrained_energy(r, v, du) - 2 * constrained_energy(r, v, 0.0) + constrained_energy(r, v, -du)) /
                      (du * du);
    const double predicted = v.dot(hs.gram * v) - 2 * v.dot(hs.a_full * v);
    CHECK(std::abs(fd - predicted) < 1e-4);
  }
}
