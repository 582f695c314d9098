#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "htype/clifford.hpp"
#include "htype/jet.hpp"

namespace htype {

/// Point of G = R^{2n} x R^k in exponential coordinates.
struct GroupPoint {
  Vector x;
  Vector t;

  Vector coords() const {
    Vector c(x.size() + t.size());
    c << x, t;
    return c;
  }
  static GroupPoint from_coords(const Vector& c, int n2) {
    return GroupPoint{c.head(n2), c.tail(c.size() - n2)};
  }
  bool is_finite() const { return x.allFinite() && t.allFinite(); }
};

/// Group of Heisenberg type built from a verified Clifford module.
///
/// Structure constants c[j](a,b) = <J_j e_a, e_b>, bracket
/// [x,y]_j = sum_ab c[j](a,b) x_a y_b, group law
/// (x,t)(x',t') = (x + x', t + t' + [x,x']/2).
class HTypeGroup {
 public:
  static HTypeGroup from_module(CliffordModule module) {
    require_verified(module, "HTypeGroup::from_module");
    HTypeGroup g;
    g.module_ = std::move(module);
    g.n2_ = g.module_.n2;
    g.k_ = g.module_.k;
    for (const auto& j : g.module_.generators) g.c_.push_back(j.transpose());
    g.frame_derivatives_.assign(g.n2_, Matrix::Zero(g.dim(), g.dim()));
    for (int a = 0; a < g.n2_; ++a)
      for (int j = 0; j < g.k_; ++j)
        for (int b = 0; b < g.n2_; ++b) g.frame_derivatives_[a](b, g.n2_ + j) = 0.5 * g.module_.generators[j](a, b);
    return g;
  }

  const CliffordModule& module() const { return module_; }
  const Matrix& generator(int j) const { return module_.generators[j]; }
  int n2() const { return n2_; }
  int k() const { return k_; }
  int dim() const { return n2_ + k_; }
  /// Homogeneous dimension Q = 2n + 2k.
  int homogeneous_dimension() const { return n2_ + 2 * k_; }
  const std::vector<Matrix>& structure_constants() const { return c_; }

  Vector bracket(const Vector& x, const Vector& y) const {
    Vector out(k_);
    for (int j = 0; j < k_; ++j) out(j) = x.dot(c_[j] * y);
    return out;
  }

  /// Group law on flat coordinate vectors; S is double or Jet.
  template <class S>
  std::vector<S> multiply(std::span<const S> p, std::span<const S> q) const {
    std::vector<S> out(p.begin(), p.end());
    for (int i = 0; i < dim(); ++i) out[i] += q[i];
    for (int j = 0; j < k_; ++j) {
      S acc = zero_like(p[0]);
      for (int a = 0; a < n2_; ++a)
        for (int b = 0; b < n2_; ++b) {
          const double cab = c_[j](a, b);
          if (cab != 0.0) acc += (p[a] * q[b]) * cab;
        }
      out[n2_ + j] += 0.5 * acc;
    }
    return out;
  }

  template <class S>
  std::vector<S> dilate(double lambda, std::span<const S> p) const {
    if (!(lambda > 0.0)) throw InvalidArgument("dilation: lambda must be positive");
    std::vector<S> out(p.begin(), p.end());
    for (int i = 0; i < n2_; ++i) out[i] *= lambda;
    for (int j = 0; j < k_; ++j) out[n2_ + j] *= lambda * lambda;
    return out;
  }

  GroupPoint multiply(const GroupPoint& p, const GroupPoint& q) const {
    const Vector a = p.coords(), b = q.coords();
    std::vector<double> r = multiply<double>(std::span<const double>(a.data(), a.size()),
                                             std::span<const double>(b.data(), b.size()));
    return GroupPoint::from_coords(Eigen::Map<Vector>(r.data(), r.size()), n2_);
  }
  GroupPoint inverse(const GroupPoint& p) const { return GroupPoint{-p.x, -p.t}; }
  GroupPoint identity() const { return GroupPoint{Vector::Zero(n2_), Vector::Zero(k_)}; }
  GroupPoint dilate(double lambda, const GroupPoint& p) const {
    if (!(lambda > 0.0)) throw InvalidArgument("dilation: lambda must be positive");
    return GroupPoint{lambda * p.x, lambda * lambda * p.t};
  }

  /// Left-invariant horizontal frame at p, one row per X_a:
  /// X_a = d/dx_a + 1/2 sum_j (J_j x)_a d/dt_j.
  Matrix frame(const GroupPoint& p) const {
    Matrix f = Matrix::Zero(n2_, dim());
    f.leftCols(n2_).setIdentity();
    for (int j = 0; j < k_; ++j) f.col(n2_ + j) = 0.5 * (module_.generators[j] * p.x);
    return f;
  }

  /// Constant coordinate derivatives of the frame: (d_mu F_a^nu) for each a.
  const std::vector<Matrix>& frame_derivatives() const { return frame_derivatives_; }

 private:
  HTypeGroup() = default;

  CliffordModule module_;
  int n2_ = 0;
  int k_ = 0;
  std::vector<Matrix> c_;
  std::vector<Matrix> frame_derivatives_;
};

/// Positive (or general) scalar function with exact 2-jets, evaluated by
/// second-order forward differentiation of its defining expression.
class ScalarField {
 public:
  using Fn = std::function<Jet(std::span<const Jet>)>;

  ScalarField() = default;
  ScalarField(int dim, Fn fn, std::string name = "field") : dim_(dim), fn_(std::move(fn)), name_(std::move(name)) {}

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }

  /// Evaluate on arbitrary coordinate jets (used for composition).
  Jet operator()(std::span<const Jet> coords) const { return fn_(coords); }

  Jet jet(const Vector& coords) const {
    const std::vector<Jet> seeded = seed_coordinates(coords);
    return fn_(seeded);
  }
  Jet jet(const GroupPoint& p) const { return jet(p.coords()); }
  double value(const GroupPoint& p) const { return jet(p).v; }

 private:
  int dim_ = 0;
  Fn fn_;
  std::string name_;
};

/// u o L_p, i.e. q -> u(p q).
inline ScalarField compose_left_translation(const HTypeGroup& g, const ScalarField& u, const GroupPoint& p) {
  const Vector pc = p.coords();
  return ScalarField(u.dim(), [g, u, pc](std::span<const Jet> q) {
    std::vector<Jet> pj;
    for (Eigen::Index i = 0; i < pc.size(); ++i) pj.push_back(Jet::constant(pc(i), q[0].dim()));
    const std::vector<Jet> moved = g.multiply<Jet>(pj, q);
    return u(moved);
  }, u.name() + "oL_p");
}

/// u o delta_lambda.
inline ScalarField compose_dilation(const HTypeGroup& g, const ScalarField& u, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("dilation: lambda must be positive");
  return ScalarField(u.dim(), [g, u, lambda](std::span<const Jet> q) {
    const std::vector<Jet> moved = g.dilate<Jet>(lambda, q);
    return u(moved);
  }, u.name() + "odelta");
}

/// Frame derivatives of a field at a point.
struct HorizontalJet {
  double value = 0.0;
  Vector x_f;   // X_a f
  Matrix xx_f;  // (a,b) -> X_a X_b f
  Vector t_f;   // d/dt_j f
};

inline HorizontalJet horizontal_jet(const HTypeGroup& g, const Jet& f, const GroupPoint& p) {
  const Matrix fr = g.frame(p);
  HorizontalJet hj;
  hj.value = f.v;
  hj.x_f = fr * f.g;
  hj.xx_f = fr * f.h * fr.transpose();
  const auto& df = g.frame_derivatives();
  // X_a X_b f = F_a^mu F_b^nu d2f + F_a^mu (d_mu F_b^nu) d_nu f
  for (int b = 0; b < g.n2(); ++b) {
    const Vector first_order = df[b] * f.g;  // mu -> sum_nu d_mu F_b^nu d_nu f
    hj.xx_f.col(b) += fr * first_order;
  }
  hj.t_f = f.g.tail(g.k());
  return hj;
}

inline HorizontalJet horizontal_jet(const HTypeGroup& g, const ScalarField& u, const GroupPoint& p) {
  return horizontal_jet(g, u.jet(p), p);
}

/// (X_1 u, ..., X_2n u) at p.
inline Vector horizontal_gradient(const HTypeGroup& g, const ScalarField& u, const GroupPoint& p) {
  return g.frame(p) * u.jet(p).g;
}

/// Delta u = sum_a X_a^2 u at p.
inline double sublaplacian(const HTypeGroup& g, const Jet& u, const GroupPoint& p) {
  return horizontal_jet(g, u, p).xx_f.trace();
}
inline double sublaplacian(const HTypeGroup& g, const ScalarField& u, const GroupPoint& p) {
  return sublaplacian(g, u.jet(p), p);
}

}  // namespace htype
