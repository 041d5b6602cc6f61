#include "fracheat/variational.hpp"

#include "fracheat/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracheat {

Vec flatten_coeffs(const Mat& coeffs) { return Eigen::Map<const Vec>(coeffs.data(), coeffs.size()); }

Mat unflatten_coeffs(const Vec& flat, int num_nodes, int dim) {
  if (flat.size() != static_cast<Eigen::Index>(num_nodes) * dim) throw DimensionError("coefficient vector has the wrong length");
  return Eigen::Map<const Mat>(flat.data(), num_nodes, dim);
}

Vec uniform_nodes(int m) {
  if (m < 1) throw ConfigError("need at least one node");
  Vec v(m);
  for (int j = 0; j < m; ++j) v[j] = static_cast<double>(j + 1) / m;
  return v;
}

namespace {

// The skeleton step as a function of the state and of the increment g of gamma.
template <class S>
VecT<S> skeleton_step(const VectorFieldSet& fields, const VecT<S>& y, const VecT<S>& g) {
  const MatT<S> z2 = S(0.5) * g * g.transpose();
  return davie_step<S>(fields, FieldLayout::Sigma, y, g, z2);
}

struct Linearization {
  Mat y;               // n x (N+1)
  Mat g;               // d x N increments of gamma
  std::vector<Mat> a;  // dT/dy
  std::vector<Mat> b;  // dT/dg
  std::vector<Mat> w;  // M_N M_{k+1}^{-1}
};

Linearization linearize(const CameronMartinPath& gamma, const VectorFieldSet& fields, const Vec& a,
                        const std::vector<double>& grid) {
  using D = Jet<1, 1>;
  const int n = fields.n(), d = fields.d();
  const int n_steps = static_cast<int>(grid.size()) - 1;
  const Mat vals = gamma.on_grid(grid).values;
  Linearization lin;
  lin.g = vals.rightCols(n_steps) - vals.leftCols(n_steps);
  lin.y.resize(n, n_steps + 1);
  lin.y.col(0) = a;
  lin.a.resize(static_cast<std::size_t>(n_steps));
  lin.b.resize(static_cast<std::size_t>(n_steps));
  for (int k = 0; k < n_steps; ++k) {
    const Vec y = lin.y.col(k);
    const Vec g = lin.g.col(k);
    lin.y.col(k + 1) = skeleton_step<double>(fields, y, g);
    fields.check_domain(lin.y.col(k + 1));
    Mat ak(n, n), bk(n, d);
    for (int c = 0; c < n + d; ++c) {
      VecT<D> yj = y.cast<D>();
      VecT<D> gj = g.cast<D>();
      if (c < n)
        yj[c][1] = 1.0;
      else
        gj[c - n][1] = 1.0;
      const VecT<D> out = skeleton_step<D>(fields, yj, gj);
      for (int i = 0; i < n; ++i) (c < n ? ak(i, c) : bk(i, c - n)) = out[i][1];
    }
    lin.a[k] = std::move(ak);
    lin.b[k] = std::move(bk);
  }
  lin.w.resize(static_cast<std::size_t>(n_steps));
  Mat w = Mat::Identity(n, n);
  for (int k = n_steps - 1; k >= 0; --k) {
    lin.w[k] = w;
    w = w * lin.a[k];
  }
  return lin;
}

// Increments over grid steps of R(., b_j): N x B.
Mat basis_increments(double hurst, const std::vector<double>& grid, const Vec& basis) {
  const Mat r = representer_matrix(hurst, grid, basis);
  const auto n = r.rows() - 1;
  return r.bottomRows(n) - r.topRows(n);
}

Mat jacobian_from(const Linearization& lin, const Mat& dr, int n, int d) {
  const auto n_steps = static_cast<int>(lin.a.size());
  const auto m = dr.cols();
  Mat jac(n, m * d);
  for (int i = 0; i < d; ++i) {
    Mat c(n, n_steps);
    for (int k = 0; k < n_steps; ++k) c.col(k) = lin.w[k] * lin.b[k].col(i);
    jac.middleCols(i * m, m) = c * dr;
  }
  return jac;
}

Mat block_gram(const Mat& g, int d) {
  const auto m = g.rows();
  Mat out = Mat::Zero(m * d, m * d);
  for (int i = 0; i < d; ++i) out.block(i * m, i * m, m, m) = g;
  return out;
}

Mat representers_from(const Mat& jac, const Mat& gram, int d) {
  const auto m = gram.rows();
  const Eigen::LDLT<Mat> ldlt(gram);
  Mat rep(jac.cols(), jac.rows());
  for (int i = 0; i < d; ++i) rep.middleRows(i * m, m) = ldlt.solve(jac.middleCols(i * m, m).transpose());
  return rep;
}

}  // namespace

Vec skeleton_endpoint(const CameronMartinPath& gamma, const VectorFieldSet& fields, const Vec& a,
                      const std::vector<double>& grid) {
  return solve_skeleton(gamma, fields, a, grid).endpoint();
}

EndpointJacobian endpoint_jacobian(const CameronMartinPath& gamma, const VectorFieldSet& fields, const Vec& a,
                                   const std::vector<double>& grid) {
  return endpoint_jacobian(gamma, fields, a, grid, gamma.nodes());
}

EndpointJacobian endpoint_jacobian(const CameronMartinPath& gamma, const VectorFieldSet& fields, const Vec& a,
                                   const std::vector<double>& grid, const Vec& basis) {
  for (Eigen::Index i = 0; i < basis.size(); ++i)
    for (Eigen::Index j = i + 1; j < basis.size(); ++j)
      if (std::abs(basis[i] - basis[j]) < 1e-14) throw Error("endpoint_jacobian: singular Gram matrix (duplicate nodes)");
  const double h = gamma.hurst().value();
  const Linearization lin = linearize(gamma, fields, a, grid);
  EndpointJacobian out;
  out.endpoint = lin.y.col(lin.y.cols() - 1);
  out.jac = jacobian_from(lin, basis_increments(h, grid, basis), fields.n(), fields.d());
  out.representers = representers_from(out.jac, cross_gram(h, basis, basis), fields.d());
  return out;
}

namespace {

struct Problem {
  const VectorFieldSet& fields;
  Vec a, a_prime;
  Rational hurst;
  Vec nodes;
  std::vector<double> grid;
  Mat chol_l;  // G = L L^T
  int m, d;

  CameronMartinPath path(const Vec& u) const {
    Mat c(m, d);
    for (int i = 0; i < d; ++i)
      c.col(i) = chol_l.transpose().triangularView<Eigen::Upper>().solve(u.segment(i * m, m));
    return {hurst, nodes, c};
  }
  // Residual Phi(u) - a' and Jacobian with respect to whitened coordinates.
  void eval(const Vec& u, Vec& r, Mat* jac_u) const {
    const CameronMartinPath g = path(u);
    if (!jac_u) {
      r = skeleton_endpoint(g, fields, a, grid) - a_prime;
      return;
    }
    const EndpointJacobian ej = endpoint_jacobian(g, fields, a, grid);
    r = ej.endpoint - a_prime;
    jac_u->resize(ej.jac.rows(), ej.jac.cols());
    for (int i = 0; i < d; ++i)
      jac_u->middleCols(i * m, m) = chol_l.triangularView<Eigen::Lower>()
                                        .solve(ej.jac.middleCols(i * m, m).transpose())
                                        .transpose();
  }
};

struct StartResult {
  Vec u, nu;
  double endpoint_residual = std::numeric_limits<double>::infinity();
  double stationarity = std::numeric_limits<double>::infinity();
  bool converged = false;
  int outer = 0;
  std::vector<double> trace;
};

StartResult solve_from(const Problem& prob, Vec u, const VariationalOptions& opts) {
  StartResult res;
  Vec r;
  Mat j;
  // Feasibility: minimal-norm Newton steps onto the constraint.
  for (int it = 0; it < 50; ++it) {
    prob.eval(u, r, &j);
    if (r.norm() <= opts.endpoint_tol) break;
    const Vec step = j.transpose() * (j * j.transpose()).ldlt().solve(r);
    double t = 1.0;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      Vec rt;
      prob.eval(u - t * step, rt, nullptr);
      if (rt.norm() < r.norm()) break;
    }
    u -= t * step;
  }
  prob.eval(u, r, &j);
  Vec nu = (j * j.transpose()).ldlt().solve(j * u);
  double mu = 10.0;
  double last_r = r.norm();
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    res.outer = outer + 1;
    auto lagrangian = [&](const Vec& uu, const Vec& rr) {
      return 0.5 * uu.squaredNorm() - nu.dot(rr) + 0.5 * mu * rr.squaredNorm();
    };
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      prob.eval(u, r, &j);
      const Vec grad = u - j.transpose() * nu + mu * j.transpose() * r;
      if (grad.norm() < 1e-13 * std::max(1.0, u.norm())) break;
      Mat h = mu * j.transpose() * j;
      h.diagonal().array() += 1.0;
      const Vec step = -h.ldlt().solve(grad);
      const double l0 = lagrangian(u, r);
      double t = 1.0;
      Vec ut, rt;
      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        ut = u + t * step;
        prob.eval(ut, rt, nullptr);
        if (lagrangian(ut, rt) <= l0 + 1e-4 * t * grad.dot(step)) break;
      }
      const double change = (ut - u).norm();
      u = ut;
      if (change < 1e-15 * std::max(1.0, u.norm())) break;
    }
    prob.eval(u, r, &j);
    nu -= mu * r;
    res.trace.push_back(r.norm());
    const double stat = (u - j.transpose() * nu).norm();
    if (r.norm() <= opts.endpoint_tol && stat <= 1e-3 * opts.residual_tol) {
      res.converged = true;
      break;
    }
    if (r.norm() > 0.25 * last_r) mu = std::min(mu * 2.0, 1e12);
    last_r = r.norm();
  }
  prob.eval(u, r, &j);
  res.u = u;
  res.nu = nu;
  res.endpoint_residual = r.norm();
  res.stationarity = (u - j.transpose() * nu).norm();
  res.converged = res.converged || (res.endpoint_residual <= opts.endpoint_tol && res.stationarity <= opts.residual_tol);
  return res;
}

}  // namespace

MinimizerResult minimize_energy(const Vec& a, const Vec& a_prime, const VectorFieldSet& fields, const Hurst& hurst,
                                const Vec& nodes, const VariationalOptions& opts) {
  if (a.size() != fields.n() || a_prime.size() != fields.n())
    throw DimensionError("minimize_energy: endpoints have the wrong dimension");
  const int m = static_cast<int>(nodes.size()), d = fields.d();
  Mat g = cross_gram(hurst.value(), nodes, nodes);
  g.diagonal().array() += 1e-12 * g.diagonal().maxCoeff();
  const Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw Error("minimize_energy: singular Gram matrix (duplicate nodes?)");
  const Problem prob{fields, a, a_prime, hurst.exact(), nodes, dyadic_grid(opts.grid_depth), llt.matrixL(), m, d};

  MinimizerResult out;
  out.fields = fields;
  out.a = a;
  out.a_prime = a_prime;
  out.grid = prob.grid;
  if ((a - a_prime).norm() == 0.0) {
    out.gamma_bar = CameronMartinPath(hurst.exact(), nodes, Mat::Zero(m, d));
    out.nu_bar = Vec::Zero(fields.n());
    out.converged = true;
    return out;
  }
  std::vector<StartResult> starts(static_cast<std::size_t>(std::max(1, opts.starts)));
  parallel_for(starts.size(), [&](std::size_t s) {
    Vec u0 = Vec::Zero(m * d);
    if (s > 0) {
      auto rng = keyed_stream(opts.seed, s, 0);
      std::normal_distribution<double> normal;
      for (Eigen::Index i = 0; i < u0.size(); ++i) u0[i] = opts.start_scale * normal(rng);
    }
    try {
      starts[s] = solve_from(prob, u0, opts);
    } catch (const FieldDomainError&) {
      starts[s] = StartResult{};
    }
  });
  // Best feasible start by energy; basins are distinct if they differ in H-norm.
  std::size_t best = starts.size();
  for (std::size_t s = 0; s < starts.size(); ++s) {
    if (starts[s].u.size() == 0 || starts[s].endpoint_residual > 1e-6) continue;
    if (best == starts.size() || starts[s].u.squaredNorm() < starts[best].u.squaredNorm()) best = s;
  }
  if (best == starts.size()) {
    for (std::size_t s = 0; s < starts.size(); ++s)
      if (starts[s].u.size() && (best == starts.size() || starts[s].endpoint_residual < starts[best].endpoint_residual))
        best = s;
    if (best == starts.size()) throw Error("minimize_energy: every start left the field domain");
  }
  std::vector<Vec> basins;
  for (const auto& s : starts) {
    if (s.u.size() == 0 || s.endpoint_residual > 1e-6) continue;
    bool seen = false;
    for (const auto& b : basins) seen = seen || (b - s.u).norm() < opts.basin_tol;
    if (!seen) basins.push_back(s.u);
  }
  const StartResult& r = starts[best];
  out.gamma_bar = prob.path(r.u);
  out.nu_bar = r.nu;
  out.energy = 0.5 * r.u.squaredNorm();
  out.endpoint_residual = r.endpoint_residual;
  out.converged = r.converged;
  out.outer_iterations = r.outer;
  out.trace = r.trace;
  out.distinct_basins = std::max<int>(1, static_cast<int>(basins.size()));
  out.unique_up_to_tolerance = basins.size() <= 1;
  Mat probes = Mat::Identity(m * d, m * d);
  out.lagrange_residual = lagrange_residual(out, probes);
  return out;
}

double lagrange_residual(const MinimizerResult& result, const Mat& probes) {
  const CameronMartinPath& g = result.gamma_bar;
  const int m = g.num_nodes(), d = g.dim();
  if (probes.rows() != static_cast<Eigen::Index>(m) * d) throw DimensionError("lagrange_residual: probe length");
  if (result.nu_bar.size() == 0) return 0.0;
  const EndpointJacobian ej = endpoint_jacobian(g, result.fields, result.a, result.grid);
  const Vec gc = block_gram(g.gram(), d) * flatten_coeffs(g.coeffs());
  const Vec resid = gc - ej.jac.transpose() * result.nu_bar;
  return (probes.transpose() * resid).cwiseAbs().maxCoeff();
}

HessianReport hessian_spectrum(const MinimizerResult& result, const Hurst& hurst, int basis_size) {
  using J2 = Jet<2, 2>;
  if (basis_size < 1) throw ConfigError("hessian_spectrum: basis too small");
  const VectorFieldSet& fields = result.fields;
  const int n = fields.n(), d = fields.d();
  const double h = hurst.value();
  const auto& grid = result.grid;
  const int n_steps = static_cast<int>(grid.size()) - 1;
  HessianReport rep;
  rep.basis = uniform_nodes(basis_size);
  const int p = basis_size * d;
  const Linearization lin = linearize(result.gamma_bar, fields, result.a, grid);
  const Mat dr = basis_increments(h, grid, rep.basis);
  const Mat jac = jacobian_from(lin, dr, n, d);
  const Mat g_small = cross_gram(h, rep.basis, rep.basis);
  rep.gram = block_gram(g_small, d);
  rep.representers = representers_from(jac, g_small, d);
  const Vec nu = result.nu_bar.size() ? result.nu_bar : Vec::Zero(n);

  // Second variation of <nu, phi^0_1>: sum_k V_k^T q_k V_k with tangents V_k = (dy_k, dg_k).
  Mat second = Mat::Zero(p, p);
  Mat dy = Mat::Zero(n, p);
  for (int k = 0; k < n_steps; ++k) {
    Mat dg = Mat::Zero(d, p);
    for (int i = 0; i < d; ++i) dg.row(i).segment(i * basis_size, basis_size) = dr.row(k);
    const Vec wk = lin.w[k].transpose() * nu;
    Mat q(n + d, n + d);
    const Vec y = lin.y.col(k), g = lin.g.col(k);
    for (int r = 0; r < n + d; ++r)
      for (int c = r; c < n + d; ++c) {
        VecT<J2> yj = y.cast<J2>(), gj = g.cast<J2>();
        (r < n ? yj[r] : gj[r - n]) += J2::variable(0);
        (c < n ? yj[c] : gj[c - n]) += J2::variable(1);
        const VecT<J2> out = skeleton_step<J2>(fields, yj, gj);
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += wk[i] * out[i].coeff({1, 1});
        q(r, c) = q(c, r) = v;
      }
    Mat tangent(n + d, p);
    tangent << dy, dg;
    second += tangent.transpose() * q * tangent;
    dy = lin.a[k] * dy + lin.b[k] * dg;
  }
  rep.a_full = 0.25 * (second + second.transpose());

  const Eigen::LDLT<Mat> gram_ldlt(rep.gram);
  const Mat ginv_jt = gram_ldlt.solve(jac.transpose());
  const Mat kmat = (jac * ginv_jt).inverse();
  rep.projection = Mat::Identity(p, p) - ginv_jt * kmat * jac;
  rep.a_hat = rep.projection.transpose() * rep.a_full * rep.projection;
  rep.a_hat = 0.5 * (rep.a_hat + rep.a_hat.transpose());
  const Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(rep.a_hat, rep.gram, Eigen::EigenvaluesOnly);
  rep.spectrum = ges.eigenvalues();
  rep.sup = rep.spectrum.maxCoeff();
  rep.verdict = rep.sup < 0.5;
  return rep;
}

double constrained_energy(const MinimizerResult& result, const Vec& direction, double u) {
  const CameronMartinPath& g = result.gamma_bar;
  const int m = g.num_nodes(), d = g.dim();
  const Vec c0 = flatten_coeffs(g.coeffs());
  const EndpointJacobian ej0 = endpoint_jacobian(g, result.fields, result.a, result.grid);
  Vec lambda = Vec::Zero(result.fields.n());
  Vec c = c0 + u * direction;
  for (int it = 0; it < 50; ++it) {
    c = c0 + u * direction + ej0.representers * lambda;
    const CameronMartinPath cur = g.with_coeffs(unflatten_coeffs(c, m, d));
    const EndpointJacobian ej = endpoint_jacobian(cur, result.fields, result.a, result.grid);
    const Vec r = ej.endpoint - result.a_prime;
    if (r.norm() < 1e-14) break;
    lambda -= (ej.jac * ej0.representers).partialPivLu().solve(r);
  }
  const Mat gram = block_gram(g.gram(), d);
  return 0.5 * c.dot(gram * c);
}

}  // namespace fracheat
