#pragma once

#include <cmath>
#include <span>
#include <type_traits>
#include <vector>

#include "htype/linalg.hpp"

namespace htype {

/// Second-order forward-mode derivative: value, gradient and Hessian with
/// respect to a fixed set of coordinates.
struct Jet {
  double v = 0.0;
  Vector g;
  Matrix h;

  Jet() = default;
  Jet(double value, Eigen::Index dim) : v(value), g(Vector::Zero(dim)), h(Matrix::Zero(dim, dim)) {}

  static Jet constant(double value, Eigen::Index dim) { return Jet(value, dim); }
  static Jet variable(double value, Eigen::Index index, Eigen::Index dim) {
    Jet j(value, dim);
    j.g(index) = 1.0;
    return j;
  }

  Eigen::Index dim() const { return g.size(); }

  /// Chain rule for a scalar function with derivatives d1, d2 at v.
  Jet chain(double value, double d1, double d2) const {
    Jet r;
    r.v = value;
    r.g = d1 * g;
    r.h = d1 * h + d2 * (g * g.transpose());
    return r;
  }

  Jet& operator+=(const Jet& o) { v += o.v; g += o.g; h += o.h; return *this; }
  Jet& operator-=(const Jet& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
  Jet& operator+=(double c) { v += c; return *this; }
  Jet& operator-=(double c) { v -= c; return *this; }
  Jet& operator*=(double c) { v *= c; g *= c; h *= c; return *this; }
  Jet& operator/=(double c) { return *this *= 1.0 / c; }
  Jet& operator*=(const Jet& o) {
    Matrix cross = g * o.g.transpose();
    h = h * o.v + o.h * v + cross + cross.transpose();
    g = g * o.v + o.g * v;
    v *= o.v;
    return *this;
  }
  Jet& operator/=(const Jet& o) { return *this *= o.chain(1.0 / o.v, -1.0 / (o.v * o.v), 2.0 / (o.v * o.v * o.v)); }
};

inline Jet operator-(Jet a) { a *= -1.0; return a; }
inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator+(Jet a, double c) { return a += c; }
inline Jet operator+(double c, Jet a) { return a += c; }
inline Jet operator-(Jet a, double c) { return a -= c; }
inline Jet operator-(double c, Jet a) { a *= -1.0; return a += c; }
inline Jet operator*(Jet a, double c) { return a *= c; }
inline Jet operator*(double c, Jet a) { return a *= c; }
inline Jet operator/(Jet a, double c) { return a /= c; }
inline Jet operator/(double c, const Jet& a) { return a.chain(c / a.v, -c / (a.v * a.v), 2.0 * c / (a.v * a.v * a.v)); }

inline Jet exp(const Jet& a) { const double e = std::exp(a.v); return a.chain(e, e, e); }
inline Jet log(const Jet& a) { return a.chain(std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet sin(const Jet& a) { return a.chain(std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet cos(const Jet& a) { return a.chain(std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet pow(const Jet& a, double p) {
  const double v = std::pow(a.v, p);
  return a.chain(v, p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0));
}
inline Jet sqrt(const Jet& a) { return pow(a, 0.5); }

/// Independent coordinate jets seeded at `point`.
inline std::vector<Jet> seed_coordinates(const Vector& point) {
  std::vector<Jet> out;
  out.reserve(point.size());
  for (Eigen::Index i = 0; i < point.size(); ++i) out.push_back(Jet::variable(point(i), i, point.size()));
  return out;
}

/// Scalar helpers that let templated formulas run on double and Jet alike.
inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

template <class S>
S zero_like(const S& ref) {
  if constexpr (std::is_same_v<S, double>) {
    return 0.0;
  } else {
    return S::constant(0.0, ref.dim());
  }
}

}  // namespace htype
