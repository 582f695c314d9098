#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "htype/group.hpp"
#include "htype/random.hpp"

namespace htype {

/// Coordinate torus prod_d [-P_d/2, P_d/2) with cell-centered nodes, carrying
/// the left-invariant frame evaluated at the node coordinates. The frame
/// coefficients 1/2 (J_j x) are not periodic in x; they are taken at x reduced to
/// the fundamental cell, so this is a model surrogate for a nilmanifold quotient.
class TorusGrid {
 public:
  TorusGrid(HTypeGroup group, std::vector<int> resolution, std::vector<double> periods, int stencil_order = 2)
      : group_(std::move(group)), res_(std::move(resolution)), periods_(std::move(periods)), order_(stencil_order) {
    const int d = group_.dim();
    if (static_cast<int>(res_.size()) != d || static_cast<int>(periods_.size()) != d)
      throw InvalidArgument("TorusGrid: need one resolution and one period per coordinate");
    if (order_ != 2 && order_ != 4) throw InvalidArgument("TorusGrid: stencil order must be 2 or 4");
    nodes_ = 1;
    volume_ = 1.0;
    for (int i = 0; i < d; ++i) {
      if (res_[i] < 2 * order_) throw InvalidArgument("TorusGrid: resolution too small for the stencil");
      if (!(periods_[i] > 0.0)) throw InvalidArgument("TorusGrid: periods must be positive");
      step_.push_back(periods_[i] / res_[i]);
      volume_ *= step_.back();
      nodes_ *= res_[i];
    }
    stride_.assign(d, 1);
    for (int i = d - 2; i >= 0; --i) stride_[i] = stride_[i + 1] * res_[i + 1];
    // frame(a, mu) per node, row-major nodes
    frame_.resize(group_.n2());
    for (auto& f : frame_) f = Matrix::Zero(nodes_, d);
    for (Eigen::Index n = 0; n < nodes_; ++n) {
      const Matrix fr = group_.frame(GroupPoint::from_coords(coords(n), group_.n2()));
      for (int a = 0; a < group_.n2(); ++a) frame_[a].row(n) = fr.row(a);
    }
  }

  static TorusGrid uniform(HTypeGroup group, int resolution, double period = 1.0, int stencil_order = 2) {
    const int d = group.dim();
    return TorusGrid(std::move(group), std::vector<int>(d, resolution), std::vector<double>(d, period), stencil_order);
  }

  const HTypeGroup& group() const { return group_; }
  Eigen::Index nodes() const { return nodes_; }
  double cell_volume() const { return volume_; }
  const std::vector<int>& resolution() const { return res_; }
  const std::vector<double>& periods() const { return periods_; }
  int stencil_order() const { return order_; }

  int index_along(Eigen::Index node, int axis) const { return static_cast<int>((node / stride_[axis]) % res_[axis]); }

  /// Node reached by moving `offset` steps along `axis`, with wrap-around.
  Eigen::Index shifted(Eigen::Index node, int axis, int offset) const {
    const int i = index_along(node, axis);
    const int j = ((i + offset) % res_[axis] + res_[axis]) % res_[axis];
    return node + static_cast<Eigen::Index>(j - i) * stride_[axis];
  }

  Vector coords(Eigen::Index node) const {
    Vector c(group_.dim());
    for (int d = 0; d < group_.dim(); ++d) c(d) = -0.5 * periods_[d] + (index_along(node, d) + 0.5) * step_[d];
    return c;
  }

  /// Periodic central difference along one axis.
  Vector partial(const Vector& u, int axis) const {
    Vector out(nodes_);
    const double h = step_[axis];
    for (Eigen::Index n = 0; n < nodes_; ++n) {
      if (order_ == 2) {
        out(n) = (u(shifted(n, axis, 1)) - u(shifted(n, axis, -1))) / (2.0 * h);
      } else {
        out(n) = (-u(shifted(n, axis, 2)) + 8.0 * u(shifted(n, axis, 1)) - 8.0 * u(shifted(n, axis, -1)) +
                  u(shifted(n, axis, -2))) / (12.0 * h);
      }
    }
    return out;
  }

  /// D_a u = X_a u at the nodes.
  std::vector<Vector> horizontal_gradient(const Vector& u) const {
    std::vector<Vector> d;
    for (int mu = 0; mu < group_.dim(); ++mu) d.push_back(partial(u, mu));
    std::vector<Vector> out(group_.n2(), Vector::Zero(nodes_));
    for (int a = 0; a < group_.n2(); ++a)
      for (int mu = 0; mu < group_.dim(); ++mu) out[a] += frame_[a].col(mu).cwiseProduct(d[mu]);
    return out;
  }

  /// sum_a D_a^T D_a u, the discrete counterpart of -Delta u.
  Vector dirichlet_operator(const Vector& u) const {
    const auto du = horizontal_gradient(u);
    Vector out = Vector::Zero(nodes_);
    // central differences are antisymmetric, so D_a^T v = -sum_mu partial_mu(F_a^mu v)
    for (int mu = 0; mu < group_.dim(); ++mu) {
      Vector acc = Vector::Zero(nodes_);
      for (int a = 0; a < group_.n2(); ++a) acc += frame_[a].col(mu).cwiseProduct(du[a]);
      out -= partial(acc, mu);
    }
    return out;
  }

  /// Samples a field at the nodes.
  Vector sample(const ScalarField& u) const {
    Vector out(nodes_);
    for (Eigen::Index n = 0; n < nodes_; ++n) out(n) = u.jet(coords(n)).v;
    return out;
  }

 private:
  HTypeGroup group_;
  std::vector<int> res_;
  std::vector<double> periods_;
  int order_;
  std::vector<double> step_;
  std::vector<Eigen::Index> stride_;
  Eigen::Index nodes_ = 0;
  double volume_ = 0.0;
  std::vector<Matrix> frame_;
};

struct GridField {
  Vector values;
  bool positive = false;

  static GridField positive_field(Vector v) {
    GridField g{std::move(v), true};
    g.validate();
    return g;
  }
  void validate() const {
    if (!values.allFinite()) throw DomainError("GridField: non-finite entry");
    if (positive && !(values.minCoeff() > 0.0)) throw DomainError("GridField: positivity flag set but entry <= 0");
  }
};

inline double critical_exponent(const HTypeGroup& g) {
  const double q = g.homogeneous_dimension();
  return 2.0 * q / (q - 2.0);
}

namespace detail {

inline void require_positive(const Vector& u, const char* where) {
  if (!u.allFinite() || !(u.minCoeff() > 0.0)) throw DomainError(std::string(where) + ": u must be positive");
}

}  // namespace detail

/// Q(u) = sum [C |D u|^2 + K u^2] vol / (sum u^p vol)^{2/p}, p = 2Q/(Q-2).
inline double yamabe_quotient(const TorusGrid& grid, const Vector& u, double c, const Vector& k) {
  detail::require_positive(u, "yamabe_quotient");
  const double p = critical_exponent(grid.group());
  const auto du = grid.horizontal_gradient(u);
  double num = 0.0;
  for (const auto& d : du) num += c * d.squaredNorm();
  num += k.dot(u.cwiseProduct(u));
  num *= grid.cell_volume();
  const double den = grid.cell_volume() * u.array().pow(p).sum();
  return num / std::pow(den, 2.0 / p);
}

/// dQ/du by the quotient rule.
inline Vector yamabe_gradient(const TorusGrid& grid, const Vector& u, double c, const Vector& k) {
  detail::require_positive(u, "yamabe_gradient");
  const double p = critical_exponent(grid.group());
  const double vol = grid.cell_volume();
  const auto du = grid.horizontal_gradient(u);
  double num = 0.0;
  for (const auto& d : du) num += c * d.squaredNorm();
  num += k.dot(u.cwiseProduct(u));
  num *= vol;
  const double s = vol * u.array().pow(p).sum();
  const double den = std::pow(s, 2.0 / p);
  const Vector dnum = vol * (2.0 * c * grid.dirichlet_operator(u) + 2.0 * k.cwiseProduct(u));
  const Vector dden = (2.0 * vol * std::pow(s, 2.0 / p - 1.0)) * u.array().pow(p - 1.0).matrix();
  return (dnum - (num / den) * dden) / den;
}

struct YamabeOptions {
  int max_iters = 5000;
  double tol = 1e-10;        // relative decrease over `window` accepted steps
  int window = 20;
  double armijo = 1e-4;
  int max_halvings = 60;
  double initial_step = 1.0;
  double target = 0.0;       // stop once the quotient is <= target (0 disables)
};

struct YamabeResult {
  double quotient = 0.0;
  int iterations = 0;
  std::vector<double> history;     // quotient per accepted step, starting with Q(u0)
  std::vector<double> step_sizes;  // accepted step per entry of history (0 for the initial entry)
  bool converged = false;
  bool stagnated = false;
  Vector u;
  double c = 0.0;
};

/// Gradient descent on v = log u with backtracking line search; u is renormalized to
/// unit critical norm after every step.
inline YamabeResult minimize(const TorusGrid& grid, const Vector& u0, double c, const Vector& k,
                             const YamabeOptions& opt = {}) {
  detail::require_positive(u0, "minimize");
  const double p = critical_exponent(grid.group());
  auto normalize = [&](Vector u) {
    const double norm = std::pow(grid.cell_volume() * u.array().pow(p).sum(), 1.0 / p);
    return Vector(u / norm);
  };
  YamabeResult res;
  res.c = c;
  Vector u = normalize(u0);
  double q = yamabe_quotient(grid, u, c, k);
  res.history.push_back(q);
  res.step_sizes.push_back(0.0);
  double step = opt.initial_step;
  for (int it = 0; it < opt.max_iters; ++it) {
    if (opt.target > 0.0 && q <= opt.target) {
      res.converged = true;
      break;
    }
    const Vector g = u.cwiseProduct(yamabe_gradient(grid, u, c, k));
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) {
      res.converged = true;
      break;
    }
    const Vector v = u.array().log().matrix();
    bool accepted = false;
    double trial = std::min(2.0 * step, 1e6);
    for (int h = 0; h <= opt.max_halvings; ++h, trial *= 0.5) {
      const Vector cand = normalize((v - trial * g).array().exp().matrix());
      if (!cand.allFinite()) continue;
      const double qc = yamabe_quotient(grid, cand, c, k);
      if (qc <= q - opt.armijo * trial * g2) {
        u = cand;
        q = qc;
        step = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.stagnated = true;
      break;
    }
    res.history.push_back(q);
    res.step_sizes.push_back(step);
    res.iterations = it + 1;
    const auto n = res.history.size();
    if (n > static_cast<std::size_t>(opt.window)) {
      const double old = res.history[n - 1 - opt.window];
      if (old - q <= opt.tol * std::abs(old)) {
        res.converged = true;
        break;
      }
    }
  }
  res.quotient = q;
  res.u = u;
  return res;
}

/// Discrete curvature of the changed structure v^{4/(Q-2)} g on the flat torus,
/// K~ = C v^{-(Q+2)/(Q-2)} (sum_a D_a^T D_a v), matching the quotient's stencil.
inline Vector discrete_conformal_curvature(const TorusGrid& grid, const Vector& v, double c) {
  detail::require_positive(v, "discrete_conformal_curvature");
  const double q = grid.group().homogeneous_dimension();
  return c * v.array().pow(-(q + 2.0) / (q - 2.0)).matrix().cwiseProduct(grid.dirichlet_operator(v));
}

/// Quotient of u for the changed structure g~ = v^{4/(Q-2)} g with curvature k_tilde:
/// |grad u|^2_g~ dvol~ = v^2 |D u|^2 dvol and dvol~ = v^p dvol.
inline double conformal_quotient(const TorusGrid& grid, const Vector& u, const Vector& v, double c,
                                 const Vector& k_tilde) {
  detail::require_positive(u, "conformal_quotient");
  detail::require_positive(v, "conformal_quotient");
  const double p = critical_exponent(grid.group());
  const auto du = grid.horizontal_gradient(u);
  const Vector v2 = v.cwiseProduct(v);
  const Vector vp = v.array().pow(p).matrix();
  double num = 0.0;
  for (const auto& d : du) num += c * v2.dot(d.cwiseProduct(d));
  num += vp.dot(k_tilde.cwiseProduct(u.cwiseProduct(u)));
  const double den = vp.dot(u.array().pow(p).matrix());
  return grid.cell_volume() * num / std::pow(grid.cell_volume() * den, 2.0 / p);
}

struct GroupYamabeEstimate {
  double value = 0.0;        // extrapolated
  double box_value = 0.0;    // truncated box of radius R
  double tail_bound = 0.0;   // |value - box_value|
  double radius = 0.0;
  double energy = 0.0;       // int |grad_h U|^2
  double critical_mass = 0.0;  // int U^p
};

/// Y(G) = C int |grad_h U|^2 / (int U^p)^{2/p} for the profile U = ((1+|x|^2)^2 + 16|t|^2)^{-(Q-2)/4}.
/// U depends on r = |x| and s = |t| only, and |grad_h U|^2 = |d_x U|^2 + r^2 |d_t U|^2 / 4,
/// so both integrals reduce to the box [0,R] x [0,R^2] in (r, s). The tail beyond the box
/// is estimated from the R/2 box by the known decay rates.
inline GroupYamabeEstimate group_yamabe_constant(const HTypeGroup& g, double c, double radius = 16.0) {
  const int n2 = g.n2(), k = g.k();
  const double q = g.homogeneous_dimension();
  const double p = critical_exponent(g);
  const double e = -(q - 2.0) / 4.0;
  auto sphere = [](int m) { return 2.0 * std::pow(std::numbers::pi, m / 2.0) / boost::math::tgamma(m / 2.0); };
  const double measure = sphere(n2) * sphere(k);
  using boost::math::quadrature::gauss_kronrod;
  auto integrate = [&](double rmax, auto&& integrand) {
    auto inner = [&](double r) {
      return gauss_kronrod<double, 31>::integrate([&](double s) { return integrand(r, s); }, 0.0, rmax * rmax, 12,
                                                  1e-13);
    };
    return measure * gauss_kronrod<double, 31>::integrate(inner, 0.0, rmax, 12, 1e-13);
  };
  auto energy = [&](double r, double s) {
    const double a = 1.0 + r * r;
    const double base = a * a + 16.0 * s * s;
    const double du = e * std::pow(base, e - 1.0);
    const double dx = du * 4.0 * a * r;    // |d_x U|
    const double dt = du * 32.0 * s;       // |d_t U|
    return (dx * dx + 0.25 * r * r * dt * dt) * std::pow(r, n2 - 1) * std::pow(s, k - 1);
  };
  auto mass = [&](double r, double s) {
    const double a = 1.0 + r * r;
    return std::pow(a * a + 16.0 * s * s, e * p) * std::pow(r, n2 - 1) * std::pow(s, k - 1);
  };
  const double e_full = integrate(radius, energy), e_half = integrate(radius / 2.0, energy);
  const double m_full = integrate(radius, mass), m_half = integrate(radius / 2.0, mass);
  // tails decay like R^{-(Q-2)} (energy) and R^{-Q} (mass)
  const double e_ext = e_full + (e_full - e_half) / (std::pow(2.0, q - 2.0) - 1.0);
  const double m_ext = m_full + (m_full - m_half) / (std::pow(2.0, q) - 1.0);
  GroupYamabeEstimate out;
  out.radius = radius;
  out.energy = e_ext;
  out.critical_mass = m_ext;
  out.box_value = c * e_full / std::pow(m_full, 2.0 / p);
  out.value = c * e_ext / std::pow(m_ext, 2.0 / p);
  out.tail_bound = std::abs(out.value - out.box_value);
  return out;
}

}  // namespace htype
