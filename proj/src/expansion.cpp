#include "fracheat/expansion.hpp"

#include "fracheat/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace fracheat {

IndexFamily parse_index_family(const std::string& name) {
  if (name == "L1") return IndexFamily::Lambda1;
  if (name == "L2") return IndexFamily::Lambda2;
  if (name == "L2p") return IndexFamily::Lambda2Prime;
  if (name == "L3") return IndexFamily::Lambda3;
  if (name == "L3p") return IndexFamily::Lambda3Prime;
  if (name == "L4") return IndexFamily::Lambda4;
  throw ConfigError("unknown index family '" + name + "' (expected L1, L2, L2p, L3, L3p or L4)");
}

std::string to_string(IndexFamily family) {
  switch (family) {
    case IndexFamily::Lambda1: return "L1";
    case IndexFamily::Lambda2: return "L2";
    case IndexFamily::Lambda2Prime: return "L2p";
    case IndexFamily::Lambda3: return "L3";
    case IndexFamily::Lambda3Prime: return "L3p";
    case IndexFamily::Lambda4: return "L4";
  }
  return "?";
}

std::vector<double> IndexSet::values() const {
  std::vector<double> v;
  v.reserve(elements.size());
  for (const auto& e : elements) v.push_back(e.value());
  return v;
}

Rational IndexSet::first_gap() const {
  for (const auto& e : elements)
    if (e > Rational(0)) return e;
  throw Error("index set has no positive element below the cutoff");
}

namespace {

using RSet = std::set<Rational>;

bool below(const Rational& r, double cutoff) { return r.value() <= cutoff + 1e-12; }

// {n1 + n2 / H} below the cutoff.
RSet lambda1(const Hurst& hurst, double cutoff) {
  RSet out;
  const Rational inv = hurst.exact().inverse();
  for (std::int64_t n2 = 0; below(Rational(n2) * inv, cutoff); ++n2)
    for (std::int64_t n1 = 0; below(Rational(n1) + Rational(n2) * inv, cutoff); ++n1)
      out.insert(Rational(n1) + Rational(n2) * inv);
  return out;
}

RSet shifted(const RSet& base, std::int64_t drop_below, std::int64_t shift, double cutoff) {
  RSet out;
  for (const auto& e : base)
    if (e >= Rational(drop_below) && below(e - Rational(shift), cutoff)) out.insert(e - Rational(shift));
  return out;
}

// All finite sums a_1 + ... + a_m (m >= 1) of generators, below the cutoff.
RSet additive_closure(const RSet& gens, double cutoff) {
  RSet out = gens;
  std::vector<Rational> frontier(gens.begin(), gens.end());
  while (!frontier.empty()) {
    std::vector<Rational> next;
    for (const auto& a : frontier)
      for (const auto& g : gens) {
        if (g == Rational(0)) continue;
        const Rational s = a + g;
        if (below(s, cutoff) && out.insert(s).second) next.push_back(s);
      }
    frontier = std::move(next);
  }
  return out;
}

RSet family_set(IndexFamily family, const Hurst& hurst, double cutoff) {
  switch (family) {
    case IndexFamily::Lambda1: return lambda1(hurst, cutoff);
    case IndexFamily::Lambda2: return shifted(lambda1(hurst, cutoff + 1), 1, 1, cutoff);
    case IndexFamily::Lambda2Prime: return shifted(lambda1(hurst, cutoff + 2), 2, 2, cutoff);
    case IndexFamily::Lambda3: return additive_closure(family_set(IndexFamily::Lambda2, hurst, cutoff), cutoff);
    case IndexFamily::Lambda3Prime:
      return additive_closure(family_set(IndexFamily::Lambda2Prime, hurst, cutoff), cutoff);
    case IndexFamily::Lambda4: {
      const RSet a = family_set(IndexFamily::Lambda3, hurst, cutoff);
      const RSet b = family_set(IndexFamily::Lambda3Prime, hurst, cutoff);
      RSet out;
      for (const auto& x : a)
        for (const auto& y : b)
          if (below(x + y, cutoff)) out.insert(x + y);
      return out;
    }
  }
  return {};
}

}  // namespace

IndexSet index_set(IndexFamily family, const Hurst& hurst, double cutoff) {
  if (!(cutoff > 0)) throw ConfigError("index_set: cutoff must be positive");
  const RSet s = family_set(family, hurst, cutoff);
  return {family, hurst.exact(), cutoff, std::vector<Rational>(s.begin(), s.end())};
}

Mat ExpansionBundle::partial_sum(double eps) const {
  Mat out = Mat::Zero(terms.front().path.rows(), terms.front().path.cols());
  for (const auto& t : terms) {
    const double w = t.kappa == Rational(0) ? 1.0 : std::pow(eps, t.kappa.value());
    out += w * t.path;
  }
  return out;
}

const Mat* ExpansionBundle::multi_index_term(int i, int j) const {
  for (const auto& [ij, m] : raw_terms)
    if (ij.first == i && ij.second == j) return &m;
  return nullptr;
}

namespace {

constexpr int kMaxJetDegree = 4;

template <int D>
void expand_terms(ExpansionBundle& b, const std::vector<std::pair<int, int>>& needed) {
  using S = Jet<2, D>;
  using Exp = typename S::Layout::Exponent;
  const auto& x = b.driver;
  const int n_steps = x.steps();
  const int n = b.fields.n();
  const Mat gam = b.gamma.on_grid(x.grid()).values;
  const auto& grid = x.grid();
  const FieldLayout layout = FieldLayout::SigmaDrift;

  // Jet-valued driver of every step; eps and eta are the two jet variables.
  std::vector<VecT<S>> z1(static_cast<std::size_t>(n_steps));
  std::vector<MatT<S>> z2(static_cast<std::size_t>(n_steps));
  std::vector<Vec> z1_skel(z1.size());
  std::vector<Mat> z2_skel(z1.size());
  const S eps = S::variable(0), eta = S::variable(1);
  for (int k = 0; k < n_steps; ++k) {
    const Vec g1 = gam.col(k + 1) - gam.col(k);
    const double dt = grid[k + 1] - grid[k];
    assemble_driver<S>(x.lvl1().col(k), x.lvl2()[k], g1, dt, eps, eta, z1[k], z2[k]);
    VecT<double> s1;
    MatT<double> s2;
    assemble_driver<double>(x.lvl1().col(k), x.lvl2()[k], g1, dt, 0.0, 0.0, s1, s2);
    z1_skel[k] = s1;
    z2_skel[k] = s2;
  }

  // Skeleton and fundamental solution M_{k+1} = (dS/dy) M_k.
  Mat phi0(n, n_steps + 1);
  phi0.col(0) = b.start;
  b.fundamental.assign(1, Mat::Identity(n, n));
  b.fundamental_inv.assign(1, Mat::Identity(n, n));
  for (int k = 0; k < n_steps; ++k) {
    const Vec y = phi0.col(k);
    phi0.col(k + 1) = davie_step<double>(b.fields, layout, y, z1_skel[k], z2_skel[k]);
    b.fields.check_domain(phi0.col(k + 1));
    const Mat step = step_jacobian(b.fields, layout, y, z1_skel[k], z2_skel[k]);
    b.fundamental.push_back(step * b.fundamental.back());
    b.fundamental_inv.push_back(b.fundamental_inv.back() * step.partialPivLu().inverse());
  }

  // Graded order of the needed multi-indices (the jet layout order).
  std::vector<std::pair<int, int>> order;
  for (const auto& e : S::Layout::exponents) {
    const std::pair<int, int> ij{e[0], e[1]};
    if (std::find(needed.begin(), needed.end(), ij) != needed.end()) order.push_back(ij);
  }
  std::map<std::pair<int, int>, Mat> phi;
  phi[{0, 0}] = phi0;
  for (const auto& alpha : order) {
    if (alpha == std::pair<int, int>{0, 0}) continue;
    const Exp ea{alpha.first, alpha.second};
    Mat path = Mat::Zero(n, n_steps + 1);
    Vec acc = Vec::Zero(n);
    for (int k = 0; k < n_steps; ++k) {
      // Jet of all lower terms at step k; the alpha coefficient itself is zero,
      // so the alpha coefficient of the step is the inhomogeneity g^alpha_k.
      VecT<S> y(n);
      for (int i = 0; i < n; ++i) {
        y[i] = S(0.0);
        for (const auto& [ij, m] : phi) {
          const Exp e{ij.first, ij.second};
          y[i].set_coeff(e, m(i, k));
        }
      }
      const VecT<S> out = davie_step<S>(b.fields, layout, y, z1[k], z2[k]);
      Vec g(n);
      for (int i = 0; i < n; ++i) g[i] = out[i].coeff(ea);
      acc += b.fundamental_inv[k + 1] * g;
      path.col(k + 1) = b.fundamental[k + 1] * acc;
    }
    phi[alpha] = std::move(path);
  }
  for (auto& [ij, m] : phi) b.raw_terms.emplace_back(ij, m);
}

}  // namespace

ExpansionBundle expand(const GeometricRoughPath2& x, const CameronMartinPath& gamma, const VectorFieldSet& fields,
                       const Vec& a, const Hurst& hurst, int k, double p) {
  if (k < 0) throw ConfigError("expand: order must be nonnegative");
  if (gamma.dim() != x.dim() || fields.d() != x.dim()) throw DimensionError("expand: driver, gamma and fields disagree");
  check_young_exponents(p, gamma.num_nodes() ? cameron_martin_q(hurst.value()) : 1.0);
  ExpansionBundle b;
  b.hurst = hurst;
  b.order = k;
  b.p = p;
  b.driver = x;
  b.gamma = gamma;
  b.fields = fields;
  b.start = a;

  double cutoff = 2.0 * (k + 2);
  IndexSet l1 = index_set(IndexFamily::Lambda1, hurst, cutoff);
  while (static_cast<int>(l1.elements.size()) < k + 2) l1 = index_set(IndexFamily::Lambda1, hurst, cutoff *= 2);
  b.kappa_next = l1.elements[static_cast<std::size_t>(k) + 1];

  // Multi-indices (i, j) with i + j/H among kappa_0..kappa_k.
  const Rational inv = hurst.exact().inverse();
  std::vector<std::pair<int, int>> needed;
  int degree = 1;
  for (int j = 0; Rational(j) * inv <= l1.elements[k]; ++j)
    for (int i = 0; Rational(i) + Rational(j) * inv <= l1.elements[k]; ++i) {
      needed.emplace_back(i, j);
      degree = std::max(degree, i + j);
    }
  if (degree > kMaxJetDegree)
    throw Error("expand: missing derivative order (order " + std::to_string(k) + " needs derivatives of order " +
                std::to_string(degree) + ", at most 4 are available)");
  switch (degree) {
    case 1: expand_terms<1>(b, needed); break;
    case 2: expand_terms<2>(b, needed); break;
    case 3: expand_terms<3>(b, needed); break;
    default: expand_terms<4>(b, needed); break;
  }
  for (int j = 0; j <= k; ++j) {
    ExpansionTerm term;
    term.kappa = l1.elements[j];
    term.path = Mat::Zero(fields.n(), x.steps() + 1);
    for (const auto& [ij, m] : b.raw_terms)
      if (Rational(ij.first) + Rational(ij.second) * inv == term.kappa) {
        term.multi_indices.push_back(ij);
        term.path += m;
      }
    b.terms.push_back(std::move(term));
  }
  return b;
}

Mat remainder_path(const ExpansionBundle& bundle, double eps) {
  const SolutionBundle sol =
      solve_scaled_shifted(bundle.driver, bundle.gamma, eps, bundle.fields, bundle.start, bundle.hurst, bundle.p);
  return sol.y - bundle.partial_sum(eps);
}

std::vector<RemainderRow> remainder_norms(const ExpansionBundle& bundle, const std::vector<double>& eps_list) {
  std::vector<RemainderRow> rows(eps_list.size());
  parallel_for(eps_list.size(), [&](std::size_t i) {
    const double eps = eps_list[i];
    const Mat r = remainder_path(bundle, eps);
    rows[i] = {eps, bundle.order, bundle.kappa_next.value(), pvar_norm(r, bundle.p)};
  });
  return rows;
}

namespace {

double student_t975(int dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                 2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086};
  if (dof < 1) return 0.0;
  if (dof <= 20) return table[dof - 1];
  return 1.96 + 2.4 / dof;
}

}  // namespace

OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& norms) {
  if (eps.size() != norms.size()) throw DimensionError("fit_order: eps and norms differ in length");
  if (eps.size() < 4) throw Error("fit_order: at least 4 points are needed");
  const auto n = static_cast<Eigen::Index>(eps.size());
  Mat a(n, 2);
  Vec y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(norms[i] > 0) || !(eps[i] > 0)) throw Error("fit_order: norms and eps must be positive");
    a(i, 0) = 1.0;
    a(i, 1) = std::log(eps[i]);
    y[i] = std::log(norms[i]);
  }
  const Vec beta = a.colPivHouseholderQr().solve(y);
  const Vec resid = y - a * beta;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  OrderFit fit;
  fit.intercept = beta[0];
  fit.slope = beta[1];
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  const double sxx = (a.col(1).array() - a.col(1).mean()).square().sum();
  const double sigma2 = n > 2 ? ss_res / static_cast<double>(n - 2) : 0.0;
  fit.slope_stderr = sxx > 0 ? std::sqrt(sigma2 / sxx) : 0.0;
  fit.slope_band = student_t975(static_cast<int>(n) - 2) * fit.slope_stderr;
  return fit;
}

std::vector<double> log_space(double lo, double hi, int count) {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    v[i] = count == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1));
  return v;
}

}  // namespace fracheat
