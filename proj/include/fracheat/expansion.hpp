#pragma once

// Exponent ladders (index sets) and the fractional Taylor expansion
// y^eps = sum_j eps^{kappa_j} phi^{kappa_j} + r_eps of the scaled-and-shifted RDE.

#include "fracheat/fbm.hpp"
#include "fracheat/fields.hpp"
#include "fracheat/rde.hpp"
#include "fracheat/roughcore.hpp"
#include "fracheat/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace fracheat {

enum class IndexFamily { Lambda1, Lambda2, Lambda2Prime, Lambda3, Lambda3Prime, Lambda4 };

/// Parses "L1", "L2", "L2p", "L3", "L3p", "L4".
IndexFamily parse_index_family(const std::string& name);
std::string to_string(IndexFamily family);

struct IndexSet {
  IndexFamily family;
  Rational hurst;
  double cutoff;
  std::vector<Rational> elements;  // sorted, strictly increasing, starting at 0

  std::vector<double> values() const;
  /// Smallest element strictly greater than 0.
  Rational first_gap() const;
};

/// Exact enumeration of the family below `cutoff`.
IndexSet index_set(IndexFamily family, const Hurst& hurst, double cutoff);

/// One expansion term phi^kappa, the sum of the multi-index terms (i, j) with
/// i + j/H = kappa (coefficient of eps^i eta^j, eta = eps^{1/H}).
struct ExpansionTerm {
  Rational kappa;
  std::vector<std::pair<int, int>> multi_indices;
  Mat path;  // n x (N+1)
};

struct ExpansionBundle {
  Hurst hurst{Rational(1, 2)};
  int order = 0;
  double p = 2.5;
  std::vector<ExpansionTerm> terms;  // kappa_0, ..., kappa_order
  Rational kappa_next;
  std::vector<Mat> fundamental;      // M_k
  std::vector<Mat> fundamental_inv;  // M_k^{-1}

  // Inputs, kept so that remainders can be evaluated on the same grid.
  GeometricRoughPath2 driver;
  CameronMartinPath gamma{Rational(1, 2), Vec(), Mat()};
  VectorFieldSet fields{ConstantFields{Mat::Zero(1, 1), Vec::Zero(1)}};
  Vec start;

  const std::vector<double>& grid() const { return driver.grid(); }
  /// sum_{j <= order} eps^{kappa_j} phi^{kappa_j}.
  Mat partial_sum(double eps) const;
  /// The multi-index term (i, j) itself, if it was computed.
  const Mat* multi_index_term(int i, int j) const;

  std::vector<std::pair<std::pair<int, int>, Mat>> raw_terms;  // every (i, j) computed
};

/// Builds phi^{kappa_0..kappa_k} by discrete variation of constants along the
/// skeleton: phi^alpha_N = M_N sum_k M_{k+1}^{-1} g^alpha_k.
ExpansionBundle expand(const GeometricRoughPath2& x, const CameronMartinPath& gamma, const VectorFieldSet& fields,
                       const Vec& a, const Hurst& hurst, int k, double p);

struct RemainderRow {
  double eps;
  int k;
  double kappa_next;
  double pvar_norm;
};

/// p-variation of y^eps - sum_{j <= k} eps^{kappa_j} phi^{kappa_j} for each eps.
std::vector<RemainderRow> remainder_norms(const ExpansionBundle& bundle, const std::vector<double>& eps_list);

/// Remainder path itself.
Mat remainder_path(const ExpansionBundle& bundle, double eps);

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  /// 95% band for the slope (Student t quantile times stderr).
  double slope_band = 0.0;
};

/// Least squares of log(norm) on log(eps).
OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& norms);

/// Log-spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int count);

}  // namespace fracheat
