#include "fracheat/fields.hpp"

#include <cmath>
#include <sstream>

namespace fracheat {

namespace {

struct Shape {
  int n, d;
};

Shape shape_of(const ConstantFields& f) { return {static_cast<int>(f.s.rows()), static_cast<int>(f.s.cols())}; }
Shape shape_of(const AffineFields& f) { return {static_cast<int>(f.s.rows()), static_cast<int>(f.s.cols())}; }
Shape shape_of(const TrigFields& f) { return {static_cast<int>(f.s.rows()), static_cast<int>(f.s.cols())}; }
Shape shape_of(const ClampedPolyFields& f) { return {static_cast<int>(f.s.rows()), static_cast<int>(f.s.cols())}; }

void validate(const ConstantFields& f, Shape) {
  if (f.c.size() != f.s.rows()) throw DimensionError("constant fields: drift has the wrong size");
}
void validate(const AffineFields& f, Shape sh) {
  if (static_cast<int>(f.a.size()) != sh.d) throw DimensionError("linear fields: need one matrix per driver");
  for (const auto& m : f.a)
    if (m.rows() != sh.n || m.cols() != sh.n) throw DimensionError("linear fields: matrices must be n x n");
  if (f.b.rows() != sh.n || f.b.cols() != sh.n || f.c.size() != sh.n)
    throw DimensionError("linear fields: drift has the wrong shape");
}
void validate(const TrigFields& f, Shape sh) {
  if (f.amp.rows() != sh.n || f.amp.cols() != sh.d || f.c.size() != sh.n || f.bamp.size() != sh.n)
    throw DimensionError("trig fields: parameter shapes disagree");
}
void validate(const ClampedPolyFields& f, Shape sh) {
  if (f.c.size() != sh.n) throw DimensionError("clamped fields: drift has the wrong size");
  if (!(f.scale > 0)) throw ConfigError("clamped fields: scale must be positive");
}

template <int J>
Mat sigma_jet(const VectorFieldSet& f, const Vec& y, const std::vector<Vec>& dirs) {
  using S = Jet<J, J>;
  VecT<S> yj(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    yj[i] = S(y[i]);
    for (int k = 0; k < J; ++k) yj[i] += S::variable(k) * dirs[k][i];
  }
  const MatT<S> out = f.sigma<S>(yj);
  typename S::Layout::Exponent e;
  e.fill(1);
  Mat r(out.rows(), out.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) r(i, j) = out(i, j).coeff(e);
  return r;
}

template <int J>
Vec drift_jet(const VectorFieldSet& f, const Vec& y, const std::vector<Vec>& dirs) {
  using S = Jet<J, J>;
  VecT<S> yj(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    yj[i] = S(y[i]);
    for (int k = 0; k < J; ++k) yj[i] += S::variable(k) * dirs[k][i];
  }
  const VecT<S> out = f.drift<S>(yj);
  typename S::Layout::Exponent e;
  e.fill(1);
  Vec r(out.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) r[i] = out[i].coeff(e);
  return r;
}

}  // namespace

VectorFieldSet::VectorFieldSet(Entry entry, std::string name) : entry_(std::move(entry)), name_(std::move(name)) {
  std::visit(
      [&](const auto& f) {
        const Shape sh = shape_of(f);
        validate(f, sh);
        n_ = sh.n;
        d_ = sh.d;
      },
      entry_);
  if (n_ <= 0 || d_ <= 0) throw DimensionError("vector fields need positive dimensions");
}

Mat VectorFieldSet::sigma_derivative(const Vec& y, const std::vector<Vec>& dirs) const {
  switch (dirs.size()) {
    case 0: return sigma<double>(y);
    case 1: return sigma_jet<1>(*this, y, dirs);
    case 2: return sigma_jet<2>(*this, y, dirs);
    case 3: return sigma_jet<3>(*this, y, dirs);
    case 4: return sigma_jet<4>(*this, y, dirs);
    default: throw Error("derivatives of order above 4 are not provided");
  }
}

Vec VectorFieldSet::drift_derivative(const Vec& y, const std::vector<Vec>& dirs) const {
  switch (dirs.size()) {
    case 0: return drift<double>(y);
    case 1: return drift_jet<1>(*this, y, dirs);
    case 2: return drift_jet<2>(*this, y, dirs);
    case 3: return drift_jet<3>(*this, y, dirs);
    case 4: return drift_jet<4>(*this, y, dirs);
    default: throw Error("derivatives of order above 4 are not provided");
  }
}

void VectorFieldSet::check_domain(const Vec& y) const {
  if (!y.allFinite() || y.cwiseAbs().maxCoeff() > box_) {
    std::ostringstream os;
    os << "field-domain exceeded: |y| = " << y.cwiseAbs().maxCoeff() << " > " << box_;
    throw FieldDomainError(os.str());
  }
}

VectorFieldSet make_constant_fields(const Mat& s, const Vec& c) { return {ConstantFields{s, c}, "constant"}; }

VectorFieldSet make_identity_fields(int n, double drift) {
  return {ConstantFields{Mat::Identity(n, n), Vec::Constant(n, drift)}, "identity"};
}

VectorFieldSet make_linear_fields(std::vector<Mat> a, const Mat& b) {
  const auto n = a.empty() ? 0 : a.front().rows();
  const auto d = static_cast<Eigen::Index>(a.size());
  AffineFields f{std::move(a), Mat::Zero(n, d), b.size() ? b : Mat::Zero(n, n), Vec::Zero(n)};
  return {std::move(f), "linear"};
}

VectorFieldSet make_trig_fields(const Mat& s, const Mat& amp, const Vec& c, const Vec& bamp, double freq) {
  return {TrigFields{s, amp, c, bamp, freq}, "trig"};
}

VectorFieldSet make_clamped_poly_fields(const Mat& s, const Vec& c, const Vec& sigma_poly, const Vec& drift_poly,
                                        double scale) {
  return {ClampedPolyFields{s, c, sigma_poly, drift_poly, scale}, "clamped_poly"};
}

}  // namespace fracheat
