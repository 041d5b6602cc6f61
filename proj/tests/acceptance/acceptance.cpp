// Acceptance checks, one per criterion.  Each criterion prints a single line
//   [PASS] criterion N: <summary>
// or [FAIL], and the process exits non-zero on failure.

#include "fracheat/expansion.hpp"
#include "fracheat/io.hpp"
#include "fracheat/kernel_lab.hpp"
#include "fracheat/malliavin.hpp"
#include "fracheat/variational.hpp"
#include "fracheat/young.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace fracheat;

namespace {

constexpr std::uint64_t kSeed = 2024;

/// Collects sub-checks of one criterion into a single verdict line.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    if (!notes_.empty()) notes_ += "; ";
    notes_ += (ok ? "" : "FAILED ") + what;
  }
  bool pass() const { return pass_; }
  const std::string& notes() const { return notes_; }

 private:
  bool pass_ = true;
  std::string notes_;
};

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

VectorFieldSet trig_1d() {
  Mat s(1, 1), amp(1, 1);
  s << 1.0;
  amp << 0.5;
  return make_trig_fields(s, amp, Vec::Constant(1, 0.3), Vec::Constant(1, 0.2), 1.0);
}

GeometricRoughPath2 smooth_1d(int depth) {
  const auto g = dyadic_grid(depth);
  Mat v(1, g.size());
  for (std::size_t k = 0; k < g.size(); ++k) v(0, k) = std::sin(3.0 * g[k]) + 0.5 * g[k] * g[k];
  return GeometricRoughPath2::from_linear_path(g, v);
}

// --- 1. index sets -----------------------------------------------------------

void index_sets(Verdict& v) {
  auto l1 = index_set(IndexFamily::Lambda1, Hurst(Rational(2, 5)), 6.0).elements;
  l1.resize(9);
  const std::vector<Rational> expect{0, 1, 2, Rational(5, 2), 3, Rational(7, 2), 4, Rational(9, 2), 5};
  v.check(l1 == expect, "H=2/5 first nine = (0,1,2,2.5,3,3.5,4,4.5,5)");
  const auto half = index_set(IndexFamily::Lambda1, Hurst(Rational(1, 2)), 6.0).elements;
  v.check(half == std::vector<Rational>{0, 1, 2, 3, 4, 5, 6}, "H=1/2 ladder on [0,6] = {0..6}");
}

// --- 2. rough calculus -------------------------------------------------------

void rough_calculus(Verdict& v) {
  const auto gc = dyadic_grid(12);
  Mat circle(2, gc.size());
  for (std::size_t k = 0; k < gc.size(); ++k)
    circle.col(k) << std::cos(2 * std::numbers::pi * gc[k]) - 1.0, std::sin(2 * std::numbers::pi * gc[k]);
  const Increment c = lift_dyadic(circle, 12).span(0, 4096);
  const double area = 0.5 * (c.x2(0, 1) - c.x2(1, 0));
  v.check(std::abs(area - std::numbers::pi) < 1e-3, "Levy area " + fmt("%.7f", area));

  const auto g = dyadic_grid(10);
  YoungPath x{g, Mat(1, g.size()), 1.0}, y{g, Mat(1, g.size()), 1.0};
  for (std::size_t k = 0; k < g.size(); ++k) {
    x.values(0, k) = g[k];
    y.values(0, k) = g[k] * g[k];
  }
  const double integral = young_integral(x, y).values(0, g.size() - 1);
  v.check(std::abs(integral - 2.0 / 3.0) < 1e-8, "int t d(t^2) error " + fmt("%.1e", std::abs(integral - 2.0 / 3.0)));

  const FbmSampler sampler({Rational(2, 5), 3, 8, kSeed, SamplerKind::Auto});
  double assoc = 0.0, sym = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto w = lift_dyadic(sampler.sample(s), 8);
    const Increment a = w.span(0, 70), b = w.span(70, 150), cc = w.span(150, 256);
    const Increment l = chen_mul(chen_mul(a, b), cc), r = chen_mul(a, chen_mul(b, cc));
    assoc = std::max(assoc, (l.x1 - r.x1).norm() + (l.x2 - r.x2).norm());
    for (const Increment& inc : {a, b, cc, l}) {
      const Mat symm = 0.5 * (inc.x2 + inc.x2.transpose());
      sym = std::max(sym, (symm - 0.5 * inc.x1 * inc.x1.transpose()).norm());
    }
  }
  v.check(assoc <= 1e-13, "associativity defect " + fmt("%.1e", assoc));
  v.check(sym <= 1e-12, "symmetry defect " + fmt("%.1e", sym));
}

// --- 3. RDE solver -----------------------------------------------------------

void rde_solver(Verdict& v) {
  const auto fields = make_linear_fields({Mat::Ones(1, 1)});
  auto sup_error = [&](int depth) {
    const auto x = smooth_1d(depth);
    const auto sol = solve_rde(x, fields, FieldLayout::Sigma, Vec::Constant(1, 0.7));
    double err = 0.0;
    for (int k = 0; k <= x.steps(); ++k) err = std::max(err, std::abs(sol.y(0, k) - 0.7 * std::exp(x.values()(0, k))));
    return err;
  };
  std::vector<double> hs, errs;
  for (int depth : {6, 7, 8, 9, 10}) {
    hs.push_back(std::ldexp(1.0, -depth));
    errs.push_back(sup_error(depth));
  }
  v.check(errs.back() <= 1e-4, "sup error at depth 10 " + fmt("%.1e", errs.back()));
  const double slope = fit_order(hs, errs).slope;
  v.check(slope >= 1.0, "convergence slope " + fmt("%.2f", slope));

  const Hurst h(Rational(2, 5));
  Mat s(2, 2), amp(2, 2);
  s << 1.0, 0.2, -0.1, 0.9;
  amp << 0.3, 0.1, 0.2, -0.3;
  const auto trig = make_trig_fields(s, amp, Vec::Constant(2, 0.1), Vec::Constant(2, 0.2), 1.0);
  const FbmSampler sampler({h.exact(), 2, 12, kSeed, SamplerKind::Auto});
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto sol = solve_scaled(lift_dyadic(sampler.sample(i), 12), 1.0, trig, Vec::Zero(2), h, default_p(0.4), true);
    for (std::size_t k = 0; k < sol.jac.size(); ++k)
      worst = std::max(worst, (sol.inv[k] * sol.jac[k] - Mat::Identity(2, 2)).norm());
  }
  v.check(worst <= 1e-6, "max |KJ - I| " + fmt("%.1e", worst));
}

// --- 4. Taylor expansion -----------------------------------------------------

void taylor_expansion(Verdict& v) {
  const Hurst h(Rational(2, 5));
  const auto x = smooth_1d(10);
  auto gamma = CameronMartinPath::zero(h.exact(), 1, 8);
  Mat c(8, 1);
  for (int j = 0; j < 8; ++j) c(j, 0) = 0.3 * std::cos(j);
  gamma = gamma.with_coeffs(c);
  const Vec a = Vec::Constant(1, 0.1);
  const double p = default_p(h.value());
  const auto eps = log_space(1e-3, 2e-2, 6);
  const double targets[] = {1.0, 2.0, 2.5, 3.0};
  for (int k = 0; k <= 3; ++k) {
    const auto bundle = expand(x, gamma, trig_1d(), a, h, k, p);
    std::vector<double> norms;
    for (const auto& row : remainder_norms(bundle, eps)) norms.push_back(row.pvar_norm);
    const double slope = fit_order(eps, norms).slope;
    v.check(std::abs(bundle.kappa_next.value() - targets[k]) < 1e-12 && std::abs(slope - targets[k]) <= 0.2,
            "k=" + std::to_string(k) + " slope " + fmt("%.3f", slope));
  }

  const auto linear = make_linear_fields({Mat::Ones(1, 1)});
  const auto bundle = expand(x, gamma, linear, Vec::Constant(1, 0.8), h, 1, p);
  const double g1 = gamma.eval(1.0)[0], x1 = x.values()(0, x.steps());
  double worst = 0.0;
  for (double e : eps) {
    const Mat r = remainder_path(bundle, e);
    const double exact = 0.8 * std::exp(g1) * (std::exp(e * x1) - 1.0 - e * x1);
    worst = std::max(worst, std::abs(r(0, r.cols() - 1) - exact));
  }
  v.check(worst <= 1e-8, "linear closed form error " + fmt("%.1e", worst));
}

// --- 5. moment shadow --------------------------------------------------------

void moment_shadow(Verdict& v) {
  const Hurst h(Rational(2, 5));
  const int depth = 8, count = 200;
  const double p = default_p(h.value());
  const FbmSampler sampler({h.exact(), 1, depth, kSeed, SamplerKind::Auto});
  const auto eps = log_space(0.02, 0.2, 6);
  const auto gamma = CameronMartinPath::zero(h.exact(), 1, 4);
  std::vector<double> mean_sq(eps.size(), 0.0);
  for (int s = 0; s < count; ++s) {
    const auto x = lift_dyadic(sampler.sample(static_cast<std::uint64_t>(s)), depth);
    const auto bundle = expand(x, gamma, trig_1d(), Vec::Constant(1, 0.1), h, 0, p);
    const auto rows = remainder_norms(bundle, eps);
    for (std::size_t i = 0; i < eps.size(); ++i) mean_sq[i] += rows[i].pvar_norm * rows[i].pvar_norm / count;
  }
  std::vector<double> l2;
  for (double m : mean_sq) l2.push_back(std::sqrt(m));
  const double slope = fit_order(eps, l2).slope;
  v.check(slope >= 0.9, "L2 p-variation slope " + fmt("%.3f", slope) + " over 200 samples");
}

// --- 6. Malliavin covariance -------------------------------------------------

void malliavin(Verdict& v) {
  const Hurst h(Rational(2, 5));
  const FbmSampler sampler({h.exact(), 2, 8, kSeed, SamplerKind::Auto});
  const auto x = lift_dyadic(sampler.sample(0), 8);
  const auto id = make_identity_fields(2);
  double worst = 0.0;
  for (double eps : {0.25, 0.5, 1.0}) {
    const auto sol = solve_scaled(x, eps, id, Vec::Zero(2), h, default_p(0.4), true);
    worst = std::max(worst, (malliavin_cov(sol, id, h, eps).q - Mat::Identity(2, 2)).norm());
  }
  v.check(worst <= 1e-6, "sigma=Id |Q - I| " + fmt("%.1e", worst));

  ScanModel model{trig_1d(), Vec::Constant(1, 0.1), h.exact(), 8, kSeed};
  const auto scan = nondegeneracy_scan(model, {0.25, 0.5, 1.0}, 100);
  double lowest = INFINITY;
  for (const auto& r : scan.rows) lowest = std::min(lowest, r.min_eig);
  v.check(scan.rows.size() == 300 && lowest > 0.0, "elliptic min eigenvalue " + fmt("%.3e", lowest) + " on 300 draws");

  const Hurst bm(Rational(1, 2));
  const auto g = dyadic_grid(12);
  Mat path(1, g.size());
  for (std::size_t k = 0; k < g.size(); ++k) path(0, k) = std::sin(5.0 * g[k]) + 0.3 * g[k];
  const auto fields = trig_1d();
  const auto sol = solve_scaled(GeometricRoughPath2::from_linear_path(g, path), 0.5, fields, Vec::Constant(1, 0.1), bm,
                                2.0, true);
  const double q = malliavin_cov(sol, fields, bm, 0.5).q(0, 0);
  const auto integrand = [&](std::size_t k) {
    const Vec y = sol.y.col(static_cast<Eigen::Index>(k));
    return std::pow(sol.inv[k](0, 0) * fields.sigma<double>(y)(0, 0), 2);
  };
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) integral += 0.5 * (integrand(k) + integrand(k + 1)) * (g[k + 1] - g[k]);
  const double oracle = std::pow(sol.jac.back()(0, 0), 2) * integral;
  v.check(std::abs(q - oracle) <= 1e-6, "H=1/2 quadrature gap " + fmt("%.1e", std::abs(q - oracle)));
}

// --- 7. interpolation inequality ---------------------------------------------

void cll(Verdict& v) {
  const Hurst h(Rational(2, 5));
  const double alpha = default_alpha(h.value());
  const auto grid = dyadic_grid(8);
  const double c_h = calibrate_cll_constant(h, alpha, kSeed, 2000, grid);
  const CovarianceIncrements box(h.value(), grid);
  int violations = 0;
  for (std::uint64_t i = 0; i < 1000; ++i)
    violations += !cll_interpolation_check(random_trig_path(kSeed + 1, i, grid), h, alpha, c_h, box).holds;
  v.check(std::isfinite(c_h) && c_h > 0.0, "calibrated C_H " + fmt("%.4g", c_h) + " on 2000 paths");
  v.check(violations == 0, std::to_string(violations) + " violations on 1000 fresh paths");
}

// --- 8. variational ----------------------------------------------------------

void variational(Verdict& v) {
  VariationalOptions opts;
  opts.seed = kSeed;
  for (Rational hr : {Rational(2, 5), Rational(1, 2)}) {
    const Hurst h(hr);
    Vec a(2), ap(2);
    a << 0.2, -0.1;
    ap << 1.0, 0.5;
    const auto r = minimize_energy(a, ap, make_identity_fields(2), h, uniform_nodes(16), opts);
    const double err = std::abs(r.energy - (ap - a).squaredNorm() / 2);
    const auto hs = hessian_spectrum(r, h, 8);
    v.check(err <= 1e-4 && r.lagrange_residual <= 1e-6 && hs.verdict && hs.spectrum.cwiseAbs().maxCoeff() < 1e-10,
            "H=" + hr.str() + " energy error " + fmt("%.1e", err) + ", Lagrange " + fmt("%.1e", r.lagrange_residual) +
                ", spectrum {0}");
  }

  const Hurst h(Rational(2, 5));
  opts.grid_depth = 8;
  const auto r = minimize_energy(Vec::Constant(1, 0.1), Vec::Constant(1, 1.2), trig_1d(), h, uniform_nodes(6), opts);
  const auto hs = hessian_spectrum(r, h, 6);
  Vec e = Vec::Zero(6);
  e[2] = 1.0;
  e[4] = -0.5;
  const Vec dir = hs.projection * e;
  const double du = 1e-3;
  const double fd = (constrained_energy(r, dir, du) - 2 * constrained_energy(r, dir, 0.0) +
                     constrained_energy(r, dir, -du)) / (du * du);
  const double predicted = dir.dot(hs.gram * dir) - 2 * dir.dot(hs.a_full * dir);
  v.check(r.converged && std::abs(fd - predicted) <= 1e-4,
          "second difference " + fmt("%.7f", fd) + " vs " + fmt("%.7f", predicted));
}

// --- 9 / 10. heat kernel -----------------------------------------------------

ExperimentConfig density_config(const std::string& text) { return ExperimentConfig::from_kv(KeyValueConfig::parse(text)); }

void ondiag(Verdict& v) {
  const auto bm = density_config(
      "fields = identity\na = 0\na_prime = 0\nhurst = 1/2\ndepth = 0\n"
      "t_grid = 0.01, 0.02, 0.04, 0.08, 0.16, 0.32\nn_samples = 200000\nseed = 2024\noutput = unused\n");
  const auto fit = ondiag_fit(estimate_densities(bm, bm.a), bm.hurst_value(), 1);
  const double c0 = 1.0 / std::sqrt(2 * std::numbers::pi);
  v.check(std::abs(fit.exponent + 0.5) <= 0.05, "Brownian exponent " + fmt("%.4f", fit.exponent));
  v.check(std::abs(fit.c0_hat / c0 - 1.0) <= 0.05, "Brownian c0 " + fmt("%.4f", fit.c0_hat));

  const auto frac = density_config(
      "fields = trig\nfields.sigma = 1\nfields.amp = 0.5\nfields.drift = 0.3\nfields.drift_amp = 0.2\n"
      "fields.freq = 1\na = 0.1\na_prime = 0.1\nhurst = 2/5\ndepth = 4\n"
      "t_grid = 0.01, 0.02, 0.04, 0.08, 0.16, 0.32\nn_samples = 1000000\nseed = 2024\noutput = unused\n");
  const auto ff = ondiag_fit(estimate_densities(frac, frac.a), frac.hurst_value(), 1);
  v.check(std::abs(ff.exponent - ff.target_exponent) <= 0.1,
          "H=2/5 exponent " + fmt("%.4f", ff.exponent) + " (target " + fmt("%.2f", ff.target_exponent) + ")");
  v.check(std::abs(ff.gap - ff.target_gap) <= 0.1,
          "H=2/5 gap " + fmt("%.3f", ff.gap) + " (target " + fmt("%.2f", ff.target_gap) + ")");
}

void offdiag(Verdict& v) {
  auto run = [](const std::string& text) {
    const auto cfg = density_config(text);
    VariationalOptions opts;
    opts.seed = cfg.seed;
    const auto m = minimize_energy(cfg.a, cfg.a_prime, cfg.fields, cfg.hurst_value(), uniform_nodes(16), opts);
    return offdiag_fit(estimate_densities(cfg, cfg.a_prime), cfg.hurst_value(), 1, 2.0 * m.energy);
  };
  const auto bm = run("fields = identity\na = 0\na_prime = 1\nhurst = 1/2\ndepth = 0\n"
                      "t_grid = 0.05, 0.07, 0.1, 0.14, 0.2, 0.3\nn_samples = 1000000\nseed = 2024\noutput = unused\n");
  v.check(bm.agreement <= 0.10, "Brownian energy " + fmt("%.4f", bm.energy_hat) + " vs " + fmt("%.4f", bm.target));
  const auto fr = run("fields = identity\nfields.drift = 1\na = 0\na_prime = 1\nhurst = 2/5\ndepth = 0\n"
                      "t_grid = 0.04, 0.06, 0.09, 0.13, 0.2, 0.3\nn_samples = 1000000\nseed = 2024\noutput = unused\n");
  v.check(fr.agreement <= 0.15, "H=2/5 energy " + fmt("%.4f", fr.energy_hat) + " vs " + fmt("%.4f", fr.target));
  v.check(std::abs(fr.residual_slope - fr.gap_exponent) <= 0.3,
          "H=2/5 residual slope " + fmt("%.3f", fr.residual_slope) + " (gap " + fmt("%.2f", fr.gap_exponent) + ")");
}

// --- 11. determinism ---------------------------------------------------------

void determinism(Verdict& v) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("fracheat_determinism_" + std::to_string(::getpid()));
  auto run = [&](const std::string& workers, const std::string& tag) {
    ::setenv("FRACHEAT_WORKERS", workers.c_str(), 1);
    auto kv = KeyValueConfig::parse(
        "fields = trig\nfields.sigma = 1\nfields.amp = 0.5\nfields.drift = 0.3\nfields.drift_amp = 0.2\n"
        "fields.freq = 1\na = 0.1\na_prime = 0.6\nhurst = 2/5\ndepth = 4\nt_grid = 0.05, 0.1, 0.2, 0.4\n"
        "n_samples = 2000\nseed = 2024\nminimizer.nodes = 8\nminimizer.depth = 7\nlocalization.samples = 64\n"
        "localization.depth = 5\n");
    kv.set("output", (root / tag).string());
    run_experiment(ExperimentConfig::from_kv(kv));
    std::map<std::string, std::string> files;
    for (const char* name : {"densities.csv", "localization.csv", "minimizer.jsonl"})
      files[name] = read_text_file((root / tag / name).string());
    return files;
  };
  const auto one = run("1", "w1");
  const auto four = run("4", "w4");
  const auto again = run("4", "w4b");
  ::unsetenv("FRACHEAT_WORKERS");
  fs::remove_all(root);
  for (const auto& [name, text] : one) {
    v.check(!text.empty() && text == four.at(name) && text == again.at(name),
            name + " identical across 1/4 workers and reruns");
  }
}

const std::map<int, std::pair<const char*, std::function<void(Verdict&)>>>& criteria() {
  static const std::map<int, std::pair<const char*, std::function<void(Verdict&)>>> table{
      {1, {"index sets", index_sets}},
      {2, {"rough calculus", rough_calculus}},
      {3, {"RDE solver", rde_solver}},
      {4, {"Taylor expansion", taylor_expansion}},
      {5, {"moment shadow", moment_shadow}},
      {6, {"Malliavin covariance", malliavin}},
      {7, {"interpolation inequality", cll}},
      {8, {"variational problem", variational}},
      {9, {"on-diagonal kernel", ondiag}},
      {10, {"off-diagonal kernel", offdiag}},
      {11, {"determinism", determinism}},
  };
  return table;
}

bool run_criterion(int id) {
  const auto& [name, body] = criteria().at(id);
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %d (%s): %s [%.1f s]\n", v.pass() ? "PASS" : "FAIL", id, name, v.notes().c_str(), secs);
  std::fflush(stdout);
  return v.pass();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "Criterion to run (1-11); all when omitted")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  bool ok = true;
  if (criterion != 0) {
    ok = run_criterion(criterion);
  } else {
    for (const auto& [id, entry] : criteria()) ok = run_criterion(id) && ok;
  }
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
