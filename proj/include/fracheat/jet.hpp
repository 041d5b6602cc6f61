#pragma once

// Truncated multivariate Taylor polynomials ("jets") usable as an Eigen scalar.
//
// A Jet<V, K> holds the coefficients of a polynomial in V small variables
// truncated at total degree K.  Evaluating a smooth function on jets yields its
// Taylor coefficients exactly up to rounding, which is how the library gets the
// derivatives of vector fields, of the one-step solver map, and the expansion
// terms in (eps, eps^{1/H}).

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>

namespace fracheat {

namespace detail {

constexpr int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

template <int V, int K>
struct JetLayout {
  static constexpr int size = binomial(V + K, K);
  using Exponent = std::array<int, V>;

  // Graded order: all monomials of degree 0, then degree 1, ...
  static constexpr std::array<Exponent, size> make_exponents() {
    std::array<Exponent, size> out{};
    int n = 0;
    for (int deg = 0; deg <= K; ++deg) {
      Exponent e{};
      while (true) {
        int sum = 0;
        for (int v = 0; v < V; ++v) sum += e[v];
        if (sum == deg) out[n++] = e;
        int v = V - 1;
        while (v >= 0 && e[v] == K) {
          e[v] = 0;
          --v;
        }
        if (v < 0) break;
        ++e[v];
      }
    }
    return out;
  }
  static constexpr std::array<Exponent, size> exponents = make_exponents();

  static constexpr int degree(int i) {
    int s = 0;
    for (int v = 0; v < V; ++v) s += exponents[i][v];
    return s;
  }

  static constexpr int index_of(const Exponent& e) {
    for (int i = 0; i < size; ++i) {
      bool same = true;
      for (int v = 0; v < V; ++v) same = same && exponents[i][v] == e[v];
      if (same) return i;
    }
    return -1;
  }

  static constexpr int count_products() {
    int c = 0;
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j)
        if (degree(i) + degree(j) <= K) ++c;
    return c;
  }
  static constexpr int product_count = count_products();

  struct Product {
    int lhs, rhs, out;
  };
  static constexpr std::array<Product, product_count> make_products() {
    std::array<Product, product_count> out{};
    int n = 0;
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j)
        if (degree(i) + degree(j) <= K) {
          Exponent e{};
          for (int v = 0; v < V; ++v) e[v] = exponents[i][v] + exponents[j][v];
          out[n++] = Product{i, j, index_of(e)};
        }
    return out;
  }
  static constexpr std::array<Product, product_count> products = make_products();
};

}  // namespace detail

template <int V, int K>
class Jet {
 public:
  using Layout = detail::JetLayout<V, K>;
  static constexpr int kVars = V;
  static constexpr int kDegree = K;
  static constexpr int kSize = Layout::size;

  constexpr Jet() : c_{} {}
  constexpr Jet(double value) : c_{} { c_[0] = value; }  // NOLINT: implicit by design for Eigen

  /// value + t_var (a seed for differentiation along variable `var`).
  static Jet variable(int var, double value = 0.0) {
    Jet j(value);
    if constexpr (K >= 1) {
      typename Layout::Exponent e{};
      e[var] = 1;
      j.c_[Layout::index_of(e)] = 1.0;
    }
    return j;
  }

  double value() const { return c_[0]; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  /// Coefficient of t^e (not the derivative: no factorials applied).
  double coeff(const typename Layout::Exponent& e) const { return c_[Layout::index_of(e)]; }
  void set_coeff(const typename Layout::Exponent& e, double v) { c_[Layout::index_of(e)] = v; }

  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < kSize; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < kSize; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }
  Jet& operator*=(double s) {
    for (auto& x : c_) x *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) {
    for (auto& x : a.c_) x = -x;
    return a;
  }
  friend Jet operator+(const Jet& a) { return a; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (const auto& p : Layout::products) r.c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
    return r;
  }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }

  // Comparisons look at the value only; they exist so generic Eigen code compiles.
  friend bool operator<(const Jet& a, const Jet& b) { return a.value() < b.value(); }
  friend bool operator>(const Jet& a, const Jet& b) { return a.value() > b.value(); }
  friend bool operator<=(const Jet& a, const Jet& b) { return a.value() <= b.value(); }
  friend bool operator>=(const Jet& a, const Jet& b) { return a.value() >= b.value(); }
  friend bool operator==(const Jet& a, const Jet& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Jet& a, const Jet& b) { return !(a == b); }

  /// f(a + d) = sum_m derivs[m] / m! d^m, with derivs[m] = f^{(m)}(a).
  static Jet compose(const Jet& x, const std::array<double, K + 1>& derivs) {
    Jet d = x;
    d.c_[0] = 0.0;
    Jet result(derivs[0]);
    Jet power(1.0);
    double factorial = 1.0;
    for (int m = 1; m <= K; ++m) {
      power = power * d;
      factorial *= m;
      result += power * (derivs[m] / factorial);
    }
    return result;
  }

  friend Jet reciprocal(const Jet& x) {
    std::array<double, K + 1> d{};
    const double inv = 1.0 / x.value();
    double v = inv;
    for (int m = 0; m <= K; ++m) {
      d[m] = v;
      v *= -(m + 1) * inv;
    }
    return compose(x, d);
  }
  friend Jet sin(const Jet& x) {
    std::array<double, K + 1> d{};
    const double s = std::sin(x.value()), c = std::cos(x.value());
    for (int m = 0; m <= K; ++m) d[m] = (m % 4 == 0) ? s : (m % 4 == 1) ? c : (m % 4 == 2) ? -s : -c;
    return compose(x, d);
  }
  friend Jet cos(const Jet& x) {
    std::array<double, K + 1> d{};
    const double s = std::sin(x.value()), c = std::cos(x.value());
    for (int m = 0; m <= K; ++m) d[m] = (m % 4 == 0) ? c : (m % 4 == 1) ? -s : (m % 4 == 2) ? -c : s;
    return compose(x, d);
  }
  friend Jet exp(const Jet& x) {
    std::array<double, K + 1> d{};
    d.fill(std::exp(x.value()));
    return compose(x, d);
  }
  friend Jet log(const Jet& x) {
    std::array<double, K + 1> d{};
    d[0] = std::log(x.value());
    double v = 1.0 / x.value();
    for (int m = 1; m <= K; ++m) {
      d[m] = v;
      v *= -m / x.value();
    }
    return compose(x, d);
  }
  friend Jet sqrt(const Jet& x) {
    std::array<double, K + 1> d{};
    const double a = x.value();
    double coef = 1.0, power = 0.5;
    for (int m = 0; m <= K; ++m) {
      d[m] = coef * std::pow(a, power);
      coef *= power;
      power -= 1.0;
    }
    return compose(x, d);
  }
  friend Jet tanh(const Jet& x) {
    // d/dx P(u) = P'(u)(1 - u^2) with u = tanh(x); track P as a polynomial in u.
    std::array<double, K + 2> poly{};
    poly[1] = 1.0;
    std::array<double, K + 1> d{};
    const double u = std::tanh(x.value());
    for (int m = 0; m <= K; ++m) {
      double val = 0.0;
      for (int i = K + 1; i >= 0; --i) val = val * u + poly[i];
      d[m] = val;
      std::array<double, K + 2> next{};
      for (int i = 1; i <= K + 1; ++i) {
        const double dp = i * poly[i];
        if (i - 1 <= K + 1) next[i - 1] += dp;
        if (i + 1 <= K + 1) next[i + 1] -= dp;
      }
      poly = next;
    }
    return compose(x, d);
  }
  friend Jet pow(const Jet& x, int n) {
    Jet r(1.0);
    Jet b = n < 0 ? reciprocal(x) : x;
    for (int k = n < 0 ? -n : n; k > 0; --k) r = r * b;
    return r;
  }
  friend Jet abs(const Jet& x) { return x.value() < 0 ? -x : x; }

  friend std::ostream& operator<<(std::ostream& os, const Jet& j) {
    os << "Jet[";
    for (int i = 0; i < kSize; ++i) os << (i ? ", " : "") << j.c_[i];
    return os << "]";
  }

 private:
  std::array<double, kSize> c_;
};

/// Value part of a scalar that may or may not be a jet.
inline double scalar_value(double x) { return x; }
template <int V, int K>
double scalar_value(const Jet<V, K>& x) {
  return x.value();
}

}  // namespace fracheat

namespace Eigen {

template <int V, int K>
struct NumTraits<fracheat::Jet<V, K>> : NumTraits<double> {
  using Real = fracheat::Jet<V, K>;
  using NonInteger = Real;
  using Nested = Real;
  using Literal = Real;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = fracheat::Jet<V, K>::kSize,
    AddCost = fracheat::Jet<V, K>::kSize,
    MulCost = fracheat::Jet<V, K>::kSize * fracheat::Jet<V, K>::kSize
  };
  static Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static Real dummy_precision() { return Real(1e-12); }
  static Real highest() { return Real(std::numeric_limits<double>::max()); }
  static Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
  static int digits10() { return std::numeric_limits<double>::digits10; }
};

template <int V, int K, typename BinaryOp>
struct ScalarBinaryOpTraits<fracheat::Jet<V, K>, double, BinaryOp> {
  using ReturnType = fracheat::Jet<V, K>;
};
template <int V, int K, typename BinaryOp>
struct ScalarBinaryOpTraits<double, fracheat::Jet<V, K>, BinaryOp> {
  using ReturnType = fracheat::Jet<V, K>;
};

}  // namespace Eigen
