#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "htype/fields.hpp"
#include "htype/group.hpp"
#include "htype/random.hpp"

namespace htype {

/// The group as a contact manifold: theta^j = dt_j - 1/2 (J_j x) . dx,
/// Reeb fields T_j = d/dt_j.
class FlatContactStructure {
 public:
  explicit FlatContactStructure(HTypeGroup group) : group_(std::move(group)) {}

  const HTypeGroup& group() const { return group_; }

  /// Row j holds the coordinate coefficients of theta^j at p.
  Matrix theta(const GroupPoint& p) const {
    const int n2 = group_.n2(), k = group_.k();
    Matrix th = Matrix::Zero(k, n2 + k);
    for (int j = 0; j < k; ++j) {
      th.row(j).head(n2) = -0.5 * (group_.generator(j) * p.x).transpose();
      th(j, n2 + j) = 1.0;
    }
    return th;
  }

  /// Coordinate matrix W of d theta^j, d theta^j(u, v) = u^T W v (constant).
  Matrix dtheta(int j) const {
    const int n2 = group_.n2(), d = group_.dim();
    Matrix w = Matrix::Zero(d, d);
    w.topLeftCorner(n2, n2) = group_.generator(j);
    return w;
  }

  /// Row j holds T_j in coordinates.
  Matrix reeb() const {
    Matrix r = Matrix::Zero(group_.k(), group_.dim());
    r.rightCols(group_.k()).setIdentity();
    return r;
  }

 private:
  HTypeGroup group_;
};

struct ContactInvariants {
  double theta_on_frame = 0.0;   // max |theta^j(X_a)|
  double dtheta_on_frame = 0.0;  // max |dtheta^j(X_a, X_b) - <e_a, J_j e_b>|
  double reeb_contraction = 0.0; // max |i_{T_j} dtheta^i|
  double reeb_duality = 0.0;     // max |theta^i(T_j) - delta_ij|
};

inline ContactInvariants check_contact_invariants(const FlatContactStructure& s, const std::vector<GroupPoint>& pts) {
  const HTypeGroup& g = s.group();
  ContactInvariants out;
  const Matrix reeb = s.reeb();
  for (const auto& p : pts) {
    const Matrix fr = g.frame(p);
    const Matrix th = s.theta(p);
    out.theta_on_frame = std::max(out.theta_on_frame, max_abs(th * fr.transpose()));
    out.reeb_duality = std::max(out.reeb_duality,
                                max_abs(th * reeb.transpose() - Matrix::Identity(g.k(), g.k())));
    for (int j = 0; j < g.k(); ++j) {
      const Matrix w = s.dtheta(j);
      out.dtheta_on_frame = std::max(out.dtheta_on_frame, max_abs(fr * w * fr.transpose() - g.generator(j)));
      out.reeb_contraction = std::max(out.reeb_contraction, max_abs(reeb * w));
    }
  }
  return out;
}

inline ScalarField gv_profile(const HTypeGroup& g, double c) { return fields::gv_profile(g.n2(), g.k(), c); }

/// Sample points for calibrations and checks.
inline std::vector<GroupPoint> sample_points(const HTypeGroup& g, int count, std::uint64_t seed) {
  std::vector<GroupPoint> pts;
  for (const Vector& c : quasi_random_points(count, g.dim(), seed)) pts.push_back(GroupPoint::from_coords(c, g.n2()));
  return pts;
}

/// Gauge norm rho(p) = (|x|^4 + 16|t|^2)^{1/4}, homogeneous of degree 1.
inline double gauge_norm(const GroupPoint& p) {
  return std::pow(p.x.squaredNorm() * p.x.squaredNorm() + 16.0 * p.t.squaredNorm(), 0.25);
}

/// Quasi-random points dilated onto the unit gauge sphere rho = 1.
inline std::vector<GroupPoint> gauge_sphere_points(const HTypeGroup& g, int count, std::uint64_t seed) {
  std::vector<GroupPoint> pts = sample_points(g, count, seed);
  for (auto& p : pts) p = g.dilate(1.0 / gauge_norm(p), p);
  return pts;
}

/// Unit gauge sphere points with |x|^4 >= margin and 16|t|^2 >= margin, i.e. away
/// from the slices x = 0 and t = 0.
inline std::vector<GroupPoint> generic_sphere_points(const HTypeGroup& g, int count, std::uint64_t seed,
                                                     double margin = 0.2) {
  if (!(margin > 0.0 && margin < 0.5)) throw InvalidArgument("generic_sphere_points: margin must lie in (0, 1/2)");
  std::vector<GroupPoint> out;
  for (int batch = 1; static_cast<int>(out.size()) < count; batch *= 2) {
    out.clear();
    for (const auto& p : gauge_sphere_points(g, 4 * batch * count, seed)) {
      const double x4 = p.x.squaredNorm() * p.x.squaredNorm();
      if (x4 >= margin && 1.0 - x4 >= margin) out.push_back(p);
      if (static_cast<int>(out.size()) == count) break;
    }
    if (batch > 1024) throw InvalidArgument("generic_sphere_points: margin leaves no points");
  }
  return out;
}

/// Normalization constants and the statistics of the runs behind them.
struct CalibrationRecord {
  double c_g = 0.0;
  double ratio_mean = 0.0;
  double spread = 0.0;  // (max - min) / |mean|
  double spread_tolerance = 1e-8;
  int samples = 0;
  double max_residual = 0.0;  // fresh-point PDE residual after calibration
  double residual_tolerance = 1e-8;
  bool pass = false;
};

/// Relative residual |-Delta U - U^{(Q+2)/(Q-2)}| / U^{(Q+2)/(Q-2)} at p.
inline double yamabe_residual(const HTypeGroup& g, const ScalarField& u, const GroupPoint& p) {
  const double q = g.homogeneous_dimension();
  const Jet j = u.jet(p);
  const double rhs = std::pow(j.v, (q + 2.0) / (q - 2.0));
  return std::abs(-sublaplacian(g, j, p) - rhs) / rhs;
}

/// Finds C_G with -Delta U = U^{(Q+2)/(Q-2)} for U = gv_profile(C_G).
/// The ratio r = -Delta U_1 / U_1^{(Q+2)/(Q-2)} must be constant; then C_G = r^{(Q-2)/4}.
inline CalibrationRecord calibrate_profile(const HTypeGroup& g, int samples = 200, std::uint64_t seed = 1,
                                           double spread_tolerance = 1e-8) {
  if (samples < 1) throw InvalidArgument("calibrate_profile: samples must be positive");
  const double q = g.homogeneous_dimension();
  const ScalarField u1 = gv_profile(g, 1.0);
  const auto pts = sample_points(g, samples, seed);
  std::vector<double> ratios;
  for (const auto& p : pts) {
    const Jet j = u1.jet(p);
    ratios.push_back(-sublaplacian(g, j, p) / std::pow(j.v, (q + 2.0) / (q - 2.0)));
  }
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CalibrationRecord rec;
  rec.samples = samples;
  rec.ratio_mean = mean;
  rec.spread = (*hi - *lo) / std::abs(mean);
  rec.spread_tolerance = spread_tolerance;
  if (!(rec.spread <= spread_tolerance) || !(mean > 0.0)) {
    const auto lo_i = lo - ratios.begin(), hi_i = hi - ratios.begin();
    throw ConventionMismatch("calibrate_profile: ratio not constant (spread " + std::to_string(rec.spread) +
                             ", min at sample " + std::to_string(lo_i) + ", max at sample " + std::to_string(hi_i) +
                             ")");
  }
  rec.c_g = std::pow(mean, (q - 2.0) / 4.0);
  const ScalarField u = gv_profile(g, rec.c_g);
  for (const auto& p : sample_points(g, samples, seed + 0x9e3779b97f4a7c15ULL))
    rec.max_residual = std::max(rec.max_residual, yamabe_residual(g, u, p));
  rec.pass = rec.max_residual <= rec.residual_tolerance;
  return rec;
}

/// Spherical inversion sigma(x,t) = ((-|x|^2 I - 4 J_t)^{-1} x, -t / rho^4),
/// rho^4 = |x|^4 + 16|t|^2. The matrix satisfies A A^T = rho^4 I, so the solve is
/// x~ = (-|x|^2 x + 4 J_t x) / rho^4.
template <class S>
std::vector<S> spherical_inversion(const HTypeGroup& g, std::span<const S> p) {
  const int n2 = g.n2(), k = g.k();
  S x2 = zero_like(p[0]);
  for (int a = 0; a < n2; ++a) x2 += p[a] * p[a];
  S t2 = zero_like(p[0]);
  for (int j = 0; j < k; ++j) t2 += p[n2 + j] * p[n2 + j];
  S rho4 = x2 * x2 + 16.0 * t2;
  if (!(value_of(rho4) >= 1e-300)) throw SingularPoint("spherical_inversion: point too close to the origin");
  std::vector<S> out(n2 + k, zero_like(p[0]));
  for (int a = 0; a < n2; ++a) {
    S jtx = zero_like(p[0]);
    for (int j = 0; j < k; ++j)
      for (int b = 0; b < n2; ++b) {
        const double e = g.generator(j)(a, b);
        if (e != 0.0) jtx += (p[n2 + j] * p[b]) * e;
      }
    out[a] = (4.0 * jtx - x2 * p[a]) / rho4;
  }
  for (int j = 0; j < k; ++j) out[n2 + j] = -p[n2 + j] / rho4;
  return out;
}

inline GroupPoint spherical_inversion(const HTypeGroup& g, const GroupPoint& p) {
  if (!p.is_finite()) throw InvalidArgument("spherical_inversion: non-finite point");
  const Vector c = p.coords();
  const auto r = spherical_inversion<double>(g, std::span<const double>(c.data(), c.size()));
  return GroupPoint::from_coords(Eigen::Map<const Vector>(r.data(), r.size()), g.n2());
}

/// Exact Jacobian d sigma_p (rows: output coordinates).
inline Matrix inversion_jacobian(const HTypeGroup& g, const GroupPoint& p) {
  const auto jets = seed_coordinates(p.coords());
  const auto r = spherical_inversion<Jet>(g, jets);
  Matrix jac(g.dim(), g.dim());
  for (int i = 0; i < g.dim(); ++i) jac.row(i) = r[i].g.transpose();
  return jac;
}

/// max_{a,j} |theta^j_{sigma(p)}(d sigma_p X_a(p))|; zero iff sigma keeps the
/// horizontal distribution at p.
inline double horizontal_leakage(const HTypeGroup& g, const GroupPoint& p) {
  const FlatContactStructure s(g);
  const GroupPoint q = spherical_inversion(g, p);
  return max_abs(s.theta(q) * inversion_jacobian(g, p) * g.frame(p).transpose());
}

struct SphereTransition {
  GroupPoint image;
  double weight = 0.0;  // U(p)^{4/(Q-2)}
};

inline void require_iwasawa(const HTypeGroup& g, const char* where) {
  const IwasawaResult iw = is_iwasawa_type(g.module());
  if (!iw.iwasawa) {
    const IwasawaWitness& w = *iw.witness;
    throw NotIwasawa(std::string(where) + ": the group is not of Iwasawa type (J_" + std::to_string(w.t1 + 1) + " J_" +
                     std::to_string(w.t2 + 1) + " e_" + std::to_string(w.x_index + 1) +
                     " leaves span{J_i e} with residual " + std::to_string(w.residual) +
                     "), so the inversion does not preserve the horizontal distribution");
  }
}

/// Chart change of the two-chart sphere: sigma(p) and the conformal weight U^{4/(Q-2)}.
inline SphereTransition iwasawa_sphere_transition(const HTypeGroup& g, const GroupPoint& p, double c_g) {
  require_iwasawa(g, "iwasawa_sphere_transition");
  const double q = g.homogeneous_dimension();
  return SphereTransition{spherical_inversion(g, p), std::pow(gv_profile(g, c_g).value(p), 4.0 / (q - 2.0))};
}

struct PullbackDiagnostics {
  double span_residual = 0.0;        // sigma^*(w theta^j) minus its projection on span{w theta^i}
  double orthogonality = 0.0;        // |A^T A - I| for the recombination matrix A
  double horizontal_conformality = 0.0;  // |w(sigma p) H^T H - w(p) I| / w(p)
  Matrix recombination;
};

/// Pullback of the glued structure {w theta}, w = U^{4/(Q-2)}, through sigma at p.
inline PullbackDiagnostics sphere_pullback(const HTypeGroup& g, const GroupPoint& p, double c_g) {
  require_iwasawa(g, "sphere_pullback");
  const FlatContactStructure s(g);
  const double q = g.homogeneous_dimension();
  const ScalarField u = gv_profile(g, c_g);
  const GroupPoint img = spherical_inversion(g, p);
  const double w_p = std::pow(u.value(p), 4.0 / (q - 2.0));
  const double w_img = std::pow(u.value(img), 4.0 / (q - 2.0));
  const Matrix jac = inversion_jacobian(g, p);
  const Matrix pulled = w_img * s.theta(img) * jac;  // rows: covectors at p
  const Matrix basis = w_p * s.theta(p);
  // pulled ~= A basis; least squares per row
  const Matrix a = basis.transpose().colPivHouseholderQr().solve(pulled.transpose()).transpose();
  PullbackDiagnostics d;
  d.recombination = a;
  d.span_residual = max_abs(pulled - a * basis);
  d.orthogonality = max_abs(a.transpose() * a - Matrix::Identity(g.k(), g.k()));
  const Matrix h = (jac * g.frame(p).transpose()).topRows(g.n2());
  d.horizontal_conformality = max_abs(w_img * h.transpose() * h - w_p * Matrix::Identity(g.n2(), g.n2())) / w_p;
  return d;
}

/// Reeb fields of (f g, f theta): T~_j = T_j / f + X_{theta^j,f}, with
/// X_{theta^j,f} = J_j (grad_h f) / f^2 solving i_X dtheta^j|_h = df|_h / f^2.
/// Row j holds T~_j in coordinates.
inline Matrix reeb_correction(const HTypeGroup& g, const ScalarField& f, const GroupPoint& p) {
  const HorizontalJet hj = horizontal_jet(g, f, p);
  if (!(hj.value > 0.0)) throw DomainError("reeb_correction: f must be positive");
  const Matrix fr = g.frame(p);
  Matrix out = Matrix::Zero(g.k(), g.dim());
  for (int j = 0; j < g.k(); ++j) {
    const Vector y = g.generator(j) * hj.x_f / (hj.value * hj.value);
    out.row(j) = (fr.transpose() * y).transpose();
    out(j, g.n2() + j) += 1.0 / hj.value;
  }
  return out;
}

struct ConformalClosure {
  double duality = 0.0;        // max |f theta^i(T~_j) - delta_ij|
  double linearity = 0.0;      // max |(i_{T~_i} dtheta~^j + i_{T~_j} dtheta~^i)|_h|
  double j_invariance = 0.0;   // max |J~_j - J_j| with J~ from (f g, d(f theta))
};

/// Axioms of the conformally changed structure, computed from coordinates.
inline ConformalClosure conformal_closure(const HTypeGroup& g, const ScalarField& f, const GroupPoint& p) {
  const FlatContactStructure s(g);
  const Jet fj = f.jet(p);
  const Matrix th = s.theta(p);
  const Matrix reeb = reeb_correction(g, f, p);
  const Matrix fr = g.frame(p);
  ConformalClosure out;
  std::vector<Matrix> w_tilde;
  for (int j = 0; j < g.k(); ++j) {
    // d(f theta^j) = df ^ theta^j + f dtheta^j
    const Vector df = fj.g;
    const Vector tj = th.row(j).transpose();
    w_tilde.push_back(df * tj.transpose() - tj * df.transpose() + fj.v * s.dtheta(j));
  }
  for (int i = 0; i < g.k(); ++i) {
    for (int j = 0; j < g.k(); ++j) {
      out.duality = std::max(out.duality, std::abs(fj.v * th.row(i).dot(reeb.row(j)) - (i == j ? 1.0 : 0.0)));
      const Vector lin = fr * (w_tilde[j].transpose() * reeb.row(i).transpose() +
                               w_tilde[i].transpose() * reeb.row(j).transpose());
      out.linearity = std::max(out.linearity, lin.cwiseAbs().maxCoeff());
    }
    // g~(X, J~ Y) = dtheta~(X, Y) on the horizontal frame, g~ = f I there
    const Matrix jt = (fr * w_tilde[i] * fr.transpose()) / fj.v;
    out.j_invariance = std::max(out.j_invariance, max_abs(jt - g.generator(i)));
  }
  return out;
}

}  // namespace htype
