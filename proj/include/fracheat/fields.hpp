#pragma once

// Catalog of smooth vector fields sigma = [V_1, ..., V_d] and drift b = V_0.
//
// Every entry evaluates on any Eigen scalar (double or jets) and ships exact
// first directional derivatives; higher derivatives come from jets.

#include "fracheat/jet.hpp"
#include "fracheat/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace fracheat {

/// sigma(y) = S, b(y) = c.
struct ConstantFields {
  Mat s;  // n x d
  Vec c;  // n

  template <class S>
  MatT<S> sigma(const VecT<S>&) const { return s.cast<S>(); }
  template <class S>
  VecT<S> drift(const VecT<S>&) const { return c.cast<S>(); }
  template <class S>
  MatT<S> dsigma(const VecT<S>&, const VecT<S>&) const { return MatT<S>::Zero(s.rows(), s.cols()); }
  template <class S>
  VecT<S> ddrift(const VecT<S>&, const VecT<S>&) const { return VecT<S>::Zero(c.size()); }
};

/// Column r of sigma is A_r y + s_r; b(y) = B y + c.
struct AffineFields {
  std::vector<Mat> a;  // d matrices n x n
  Mat s;               // n x d
  Mat b;               // n x n
  Vec c;               // n

  template <class S>
  MatT<S> sigma(const VecT<S>& y) const {
    MatT<S> out = s.cast<S>();
    for (std::size_t r = 0; r < a.size(); ++r) out.col(static_cast<Eigen::Index>(r)) += a[r].cast<S>() * y;
    return out;
  }
  template <class S>
  VecT<S> drift(const VecT<S>& y) const { return b.cast<S>() * y + c.cast<S>(); }
  template <class S>
  MatT<S> dsigma(const VecT<S>&, const VecT<S>& v) const {
    MatT<S> out(s.rows(), s.cols());
    for (std::size_t r = 0; r < a.size(); ++r) out.col(static_cast<Eigen::Index>(r)) = a[r].cast<S>() * v;
    return out;
  }
  template <class S>
  VecT<S> ddrift(const VecT<S>&, const VecT<S>& v) const { return b.cast<S>() * v; }
};

/// sigma_ij(y) = S_ij + A_ij sin(f y_i + j),  b_i(y) = c_i + B_i cos(f y_i).
struct TrigFields {
  Mat s, amp;  // n x d
  Vec c, bamp; // n
  double freq = 1.0;

  template <class S>
  MatT<S> sigma(const VecT<S>& y) const {
    using std::sin;
    MatT<S> out(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      for (Eigen::Index j = 0; j < s.cols(); ++j) out(i, j) = S(s(i, j)) + amp(i, j) * sin(freq * y[i] + S(double(j)));
    }
    return out;
  }
  template <class S>
  VecT<S> drift(const VecT<S>& y) const {
    using std::cos;
    VecT<S> out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) out[i] = S(c[i]) + bamp[i] * cos(freq * y[i]);
    return out;
  }
  template <class S>
  MatT<S> dsigma(const VecT<S>& y, const VecT<S>& v) const {
    using std::cos;
    MatT<S> out(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (Eigen::Index j = 0; j < s.cols(); ++j)
        out(i, j) = (amp(i, j) * freq) * cos(freq * y[i] + S(double(j))) * v[i];
    return out;
  }
  template <class S>
  VecT<S> ddrift(const VecT<S>& y, const VecT<S>& v) const {
    using std::sin;
    VecT<S> out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) out[i] = (-bamp[i] * freq) * sin(freq * y[i]) * v[i];
    return out;
  }
};

/// Polynomials in the smooth clamp u_i = L tanh(y_i / L):
/// sigma_ij(y) = S_ij + sum_k p_k u_i^k,  b_i(y) = c_i + sum_k q_k u_i^k.
struct ClampedPolyFields {
  Mat s;            // n x d
  Vec c;            // n
  Vec sigma_poly;   // p_1, p_2, ...
  Vec drift_poly;   // q_1, q_2, ...
  double scale = 1.0;

  template <class S>
  static S poly(const Vec& coef, const S& u) {
    S acc(0.0);
    for (Eigen::Index k = coef.size(); k-- > 0;) acc = (acc + S(coef[k])) * u;
    return acc;
  }
  template <class S>
  static S dpoly(const Vec& coef, const S& u) {
    S acc(0.0);
    for (Eigen::Index k = coef.size(); k-- > 0;) acc = acc * u + S(double(k + 1) * coef[k]);
    return acc;
  }
  template <class S>
  S clamp(const S& y) const {
    using std::tanh;
    return scale * tanh(y / scale);
  }
  template <class S>
  S dclamp(const S& y) const {
    using std::tanh;
    const S t = tanh(y / scale);
    return S(1.0) - t * t;
  }
  template <class S>
  MatT<S> sigma(const VecT<S>& y) const {
    MatT<S> out(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const S p = poly(sigma_poly, clamp(y[i]));
      for (Eigen::Index j = 0; j < s.cols(); ++j) out(i, j) = S(s(i, j)) + p;
    }
    return out;
  }
  template <class S>
  VecT<S> drift(const VecT<S>& y) const {
    VecT<S> out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) out[i] = S(c[i]) + poly(drift_poly, clamp(y[i]));
    return out;
  }
  template <class S>
  MatT<S> dsigma(const VecT<S>& y, const VecT<S>& v) const {
    MatT<S> out(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const S dp = dpoly(sigma_poly, clamp(y[i])) * dclamp(y[i]) * v[i];
      for (Eigen::Index j = 0; j < s.cols(); ++j) out(i, j) = dp;
    }
    return out;
  }
  template <class S>
  VecT<S> ddrift(const VecT<S>& y, const VecT<S>& v) const {
    VecT<S> out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) out[i] = dpoly(drift_poly, clamp(y[i])) * dclamp(y[i]) * v[i];
    return out;
  }
};

/// How the columns of the driving one-form are arranged.
enum class FieldLayout {
  Sigma,       // F = sigma, driver in R^d
  SigmaDrift,  // F = [sigma | b], driver in R^{d+1} with the time block last
};

class VectorFieldSet {
 public:
  using Entry = std::variant<ConstantFields, AffineFields, TrigFields, ClampedPolyFields>;

  VectorFieldSet(Entry entry, std::string name = "");

  int n() const { return n_; }
  int d() const { return d_; }
  const std::string& name() const { return name_; }
  const Entry& entry() const { return entry_; }
  /// Solutions must stay in [-box, box]^n.
  double box() const { return box_; }
  void set_box(double box) { box_ = box; }

  template <class S>
  MatT<S> sigma(const VecT<S>& y) const {
    return std::visit([&](const auto& f) { return f.template sigma<S>(y); }, entry_);
  }
  template <class S>
  VecT<S> drift(const VecT<S>& y) const {
    return std::visit([&](const auto& f) { return f.template drift<S>(y); }, entry_);
  }
  template <class S>
  MatT<S> dsigma(const VecT<S>& y, const VecT<S>& v) const {
    return std::visit([&](const auto& f) { return f.template dsigma<S>(y, v); }, entry_);
  }
  template <class S>
  VecT<S> ddrift(const VecT<S>& y, const VecT<S>& v) const {
    return std::visit([&](const auto& f) { return f.template ddrift<S>(y, v); }, entry_);
  }

  int columns(FieldLayout layout) const { return layout == FieldLayout::Sigma ? d_ : d_ + 1; }

  template <class S>
  MatT<S> one_form(const VecT<S>& y, FieldLayout layout) const {
    MatT<S> f(n_, columns(layout));
    f.leftCols(d_) = sigma<S>(y);
    if (layout == FieldLayout::SigmaDrift) f.col(d_) = drift<S>(y);
    return f;
  }
  template <class S>
  MatT<S> done_form(const VecT<S>& y, const VecT<S>& v, FieldLayout layout) const {
    MatT<S> f(n_, columns(layout));
    f.leftCols(d_) = dsigma<S>(y, v);
    if (layout == FieldLayout::SigmaDrift) f.col(d_) = ddrift<S>(y, v);
    return f;
  }

  /// nabla^j sigma(y)<v_1, ..., v_j> for j = dirs.size() <= 4, exact via jets.
  Mat sigma_derivative(const Vec& y, const std::vector<Vec>& dirs) const;
  /// nabla^j b(y)<v_1, ..., v_j>.
  Vec drift_derivative(const Vec& y, const std::vector<Vec>& dirs) const;

  /// Throws FieldDomainError if y has left the box.
  void check_domain(const Vec& y) const;

 private:
  Entry entry_;
  std::string name_;
  int n_ = 0;
  int d_ = 0;
  double box_ = 1e10;
};

/// Convenience constructors used by configs, tests and examples.
VectorFieldSet make_constant_fields(const Mat& s, const Vec& c);
VectorFieldSet make_identity_fields(int n, double drift = 0.0);
VectorFieldSet make_linear_fields(std::vector<Mat> a, const Mat& b = Mat());
VectorFieldSet make_trig_fields(const Mat& s, const Mat& amp, const Vec& c, const Vec& bamp, double freq);
VectorFieldSet make_clamped_poly_fields(const Mat& s, const Vec& c, const Vec& sigma_poly, const Vec& drift_poly,
                                        double scale);

}  // namespace fracheat
