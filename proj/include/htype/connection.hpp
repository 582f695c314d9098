#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "htype/flat_model.hpp"
#include "htype/projectors.hpp"

namespace htype {

/// Residual families of the defining conditions at one point.
struct ConnectionResiduals {
  double metric = 0.0;          // Gamma_a antisymmetric
  double j_span = 0.0;          // [Gamma_a, J_i] in span{J}
  double q_theta = 0.0;         // Q_theta^i = 0
  double sigma_torsion = 0.0;   // P_Sigma(pi_h T) = 0
  double reeb_metric = 0.0;     // Gamma_{T_j} antisymmetric
  double reeb_parallel = 0.0;   // nabla_{T_j} J_i = 0
  double xi_torsion = 0.0;      // P_Xi T(T_j, .) = 0
  double algebraic() const { return std::max({metric, j_span, sigma_torsion, reeb_metric, xi_torsion}); }
  double first_derivative() const { return std::max(q_theta, reeb_parallel); }
};

inline constexpr double kAlgebraicBudget = 1e-8;
inline constexpr double kFirstDerivativeBudget = 1e-7;

/// Rank certificate of the (point-independent) linear system.
struct UniquenessCertificate {
  int unknowns = 0;
  int equations = 0;
  RankInfo rank;
  double reeb_coupling = 0.0;  // max |d Gamma_h / d B|, expected 0
};

/// Connection coefficients at a point, in the g~-orthonormal frame X~_a = f^{-1/2} X_a
/// and the Reeb fields T~_j.
///   gamma_h[a](c, b): X~_c coefficient of nabla_{X~_a} X~_b
///   gamma_t[j](c, b): X~_c coefficient of nabla_{T~_j} X~_b
///   torsion_h(tensor_index(a, b, c)): X~_c coefficient of T(X~_a, X~_b)
///   torsion_partial[j](c, b): X~_c coefficient of T(T~_j, X~_b)
///   torsion_v[j](a, b): T~_j coefficient of T(X~_a, X~_b)
struct ConnectionAtPoint {
  std::vector<Matrix> gamma_h;
  std::vector<Matrix> gamma_t;
  Vector torsion_h;
  std::vector<Matrix> torsion_partial;
  std::vector<Matrix> torsion_v;
  ConnectionResiduals residuals;
};

struct CurvatureSummary {
  double k = 0.0;
  bool rotated_frame = false;
  double max_connection_residual = 0.0;
};

class ConnectionEngine {
 public:
  explicit ConnectionEngine(const HTypeGroup& group)
      : group_(group), proj_(build_projectors(group.module())), n_(group.n2()), k_(group.k()) {
    n3_ = static_cast<Eigen::Index>(n_) * n_ * n_;
    nn_ = static_cast<Eigen::Index>(n_) * n_;
    unknowns_ = n3_ + k_ * nn_;
    Matrix span_j(nn_, k_);
    for (int i = 0; i < k_; ++i) span_j.col(i) = detail::flatten(group.generator(i));
    const Matrix q = range_basis(span_j);
    p_perp_j_ = Matrix::Identity(nn_, nn_) - q * q.transpose();

    row_metric_ = 0;
    row_jspan_ = row_metric_ + n3_;
    row_q_ = row_jspan_ + n3_ * k_;
    row_sigma_ = row_q_ + n3_ * k_;
    row_reeb_ = row_sigma_ + n3_;
    reeb_block_ = nn_ * (2 + k_);
    rows_ = row_reeb_ + k_ * reeb_block_;

    system_ = matrix_of([this](const Vector& z) { return homogeneous(z); }, unknowns_);
    Eigen::BDCSVD<Matrix> svd(system_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    cert_.unknowns = static_cast<int>(unknowns_);
    cert_.equations = static_cast<int>(rows_);
    cert_.rank = detail::rank_from_singular_values(svd.singularValues(), kRankCutoff);
    if (cert_.rank.rank < unknowns_ || cert_.rank.gap < kMinGap)
      throw UniquenessViolation("connection system is rank deficient: rank " + std::to_string(cert_.rank.rank) +
                                " of " + std::to_string(unknowns_) + " unknowns (kernel dimension " +
                                std::to_string(unknowns_ - cert_.rank.rank) + ")");
    pinv_ = svd.matrixV() * svd.singularValues().cwiseInverse().asDiagonal() * svd.matrixU().transpose();

    // Gamma as a linear function of w = f^{-3/2} grad f and of the Reeb sources B_j.
    from_w_ = matrix_of([this](const Vector& w) { return Vector(pinv_ * rhs(horizontal_source(w), {})); }, n_);
    from_b_ = matrix_of([this](const Vector& b) {
      std::vector<Matrix> bs;
      for (int j = 0; j < k_; ++j) bs.push_back(detail::endomorphism(b.segment(j * nn_, nn_), n_));
      return Vector(pinv_ * rhs(Vector::Zero(n3_), bs));
    }, k_ * nn_);
    cert_.reeb_coupling = max_abs(from_b_.topRows(n3_));
  }

  const HTypeGroup& group() const { return group_; }
  const ProjectorPair& projectors() const { return proj_; }
  const UniquenessCertificate& certificate() const { return cert_; }
  const Matrix& system() const { return system_; }

  /// Constant connection of the flat structure: Gamma = 0, T(X_a, X_b) = -[X_a, X_b].
  ConnectionAtPoint flat_connection() const {
    ConnectionAtPoint c;
    c.gamma_h.assign(n_, Matrix::Zero(n_, n_));
    c.gamma_t.assign(k_, Matrix::Zero(n_, n_));
    c.torsion_h = Vector::Zero(n3_);
    c.torsion_partial.assign(k_, Matrix::Zero(n_, n_));
    for (int j = 0; j < k_; ++j) c.torsion_v.push_back(-group_.structure_constants()[j]);
    fill_residuals(c, Vector::Zero(n3_), std::vector<Matrix>(k_, Matrix::Zero(n_, n_)));
    return c;
  }

  /// Connection of (f g, f theta) at p.
  ConnectionAtPoint solve(const ScalarField& f, const GroupPoint& p) const {
    return solve(horizontal_jet(group_, f, p));
  }

  ConnectionAtPoint solve(const HorizontalJet& hj) const {
    if (!(hj.value > 0.0)) throw DomainError("solve_connection: conformal factor must be positive");
    const Vector w = std::pow(hj.value, -1.5) * hj.x_f;
    const Vector s = horizontal_source(w);
    const std::vector<Matrix> b = reeb_sources(hj);
    const Vector z = pinv_ * rhs(s, b);
    ConnectionAtPoint c = unpack(z);
    c.torsion_h = Vector(n3_);
    for (int a = 0; a < n_; ++a)
      for (int bb = 0; bb < n_; ++bb)
        for (int g = 0; g < n_; ++g)
          c.torsion_h(tensor_index(n_, a, bb, g)) =
              c.gamma_h[a](g, bb) - c.gamma_h[bb](g, a) + s(tensor_index(n_, a, bb, g));
    for (int j = 0; j < k_; ++j) {
      c.torsion_partial.push_back(c.gamma_t[j] - b[j]);
      c.torsion_v.push_back(-group_.structure_constants()[j]);
    }
    fill_residuals(c, s, b);
    return c;
  }

  /// Independent assembly of the horizontal part from the displayed conformal formula
  /// nabla~_X Y = nabla_X Y + (Xf/2f) Y + c_X(Y), c = -Theta(pi_Sigma((Xf/2f) Y - (Yf/2f) X + alpha)),
  /// alpha(X, Y, Z) = (1/f) sum_j g(X, J_j Y) df(J_j Z), converted to the g~-orthonormal frame.
  std::vector<Matrix> closed_form_horizontal(const ScalarField& f, const GroupPoint& p) const {
    const HorizontalJet hj = horizontal_jet(group_, f, p);
    const double fv = hj.value;
    const Vector& df = hj.x_f;
    Vector t = Vector::Zero(n3_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        for (int g = 0; g < n_; ++g) {
          double v = 0.0;
          if (b == g) v += df(a) / (2.0 * fv);
          if (a == g) v -= df(b) / (2.0 * fv);
          for (int j = 0; j < k_; ++j) {
            const Matrix& jj = group_.generator(j);
            v += jj(a, b) * (jj.transpose() * df)(g) / fv;
          }
          t(tensor_index(n_, a, b, g)) = v;
        }
    const Vector c = -(proj_.theta * (proj_.p_sigma * t));
    std::vector<Matrix> out(n_, Matrix(n_, n_));
    // nabla~_{X~_a} X~_b = f^{-1} (c_a X_b) = f^{-1/2} (c_a)(g, b) X~_g;
    // the (X_a f / 2f) terms cancel against the derivative of f^{-1/2}
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        for (int g = 0; g < n_; ++g) out[a](g, b) = c(tensor_index(n_, a, b, g)) / std::sqrt(fv);
    return out;
  }

  /// Q_theta^i(X, Y) on vector fields given at p by values and frame derivatives
  /// (column a of dX holds X~_a applied to the component vector of X).
  Vector q_on_fields(const ConnectionAtPoint& c, int i, const Vector& x, const Matrix& dx, const Vector& y,
                     const Matrix& dy) const {
    const Matrix& j = group_.generator(i);
    auto nabla = [&](const Vector& u, const Vector& v, const Matrix& dv) {
      Vector out = Vector::Zero(n_);
      for (int a = 0; a < n_; ++a) out += u(a) * (dv.col(a) + c.gamma_h[a] * v);
      return out;
    };
    // (nabla_U J) V = nabla_U (J V) - J nabla_U V
    auto nabla_j = [&](const Vector& u, const Vector& v, const Matrix& dv) {
      return Vector(nabla(u, j * v, j * dv) - j * nabla(u, v, dv));
    };
    return j * nabla_j(x, y, dy) - j * nabla_j(y, x, dx) + nabla_j(j * y, x, dx) - nabla_j(j * x, y, dy);
  }

  /// Scalar curvature K = sum_ab g~(R(X~_a, X~_b) X~_b, X~_a) of (f g, f theta) at p.
  /// The optional constant rotation r replaces the frame by X^_a = sum_m r(m, a) X~_m.
  CurvatureSummary scalar_curvature(const ScalarField& f, const GroupPoint& p, const Matrix* r = nullptr) const {
    const HorizontalJet hj = horizontal_jet(group_, f, p);
    const ConnectionAtPoint c = solve(hj);
    const double fv = hj.value;
    const Vector w = std::pow(fv, -1.5) * hj.x_f;
    const Matrix xw = std::pow(fv, -1.5) * hj.xx_f - 1.5 * std::pow(fv, -2.5) * hj.x_f * hj.x_f.transpose();
    // dg[a][b] = X~_a (Gamma_b): Gamma_h is linear in w with constant coefficients
    std::vector<std::vector<Matrix>> dg(n_);
    for (int a = 0; a < n_; ++a) {
      const Vector dgamma = from_w_.topRows(n3_) * (xw.row(a).transpose() / std::sqrt(fv));
      for (int b = 0; b < n_; ++b)
        dg[a].push_back(detail::endomorphism(dgamma.segment(b * nn_, nn_), n_));
    }
    const auto& cs = group_.structure_constants();
    std::vector<std::vector<Matrix>> rt(n_, std::vector<Matrix>(n_));
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        // [X~_a, X~_b] = h_ab^g X~_g + c[j](a, b) T~_j
        Vector h = Vector::Zero(n_);
        h(b) -= 0.5 * w(a);
        h(a) += 0.5 * w(b);
        Matrix rab = dg[a][b] - dg[b][a] + c.gamma_h[a] * c.gamma_h[b] - c.gamma_h[b] * c.gamma_h[a];
        for (int j = 0; j < k_; ++j) {
          h -= cs[j](a, b) * (group_.generator(j) * w);
          rab -= cs[j](a, b) * c.gamma_t[j];
        }
        for (int g = 0; g < n_; ++g) rab -= h(g) * c.gamma_h[g];
        rt[a][b] = rab;
      }
    CurvatureSummary out;
    out.max_connection_residual = std::max(c.residuals.algebraic(), c.residuals.first_derivative());
    if (r == nullptr) {
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b) out.k += rt[a][b](a, b);
      return out;
    }
    out.rotated_frame = true;
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        Matrix rhat = Matrix::Zero(n_, n_);
        for (int m = 0; m < n_; ++m)
          for (int l = 0; l < n_; ++l) rhat += (*r)(m, a) * (*r)(l, b) * rt[m][l];
        out.k += r->col(a).dot(rhat * r->col(b));
      }
    return out;
  }

  /// Horizontal Laplacian of the changed structure, sum_a (X~_a X~_a u - (nabla~_{X~_a} X~_a) u).
  double conformal_sublaplacian(const ScalarField& f, const ScalarField& u, const GroupPoint& p) const {
    const HorizontalJet hf = horizontal_jet(group_, f, p);
    const HorizontalJet hu = horizontal_jet(group_, u, p);
    const ConnectionAtPoint c = solve(hf);
    const double fv = hf.value;
    double out = hu.xx_f.trace() / fv - 0.5 * hf.x_f.dot(hu.x_f) / (fv * fv);
    for (int a = 0; a < n_; ++a) out -= c.gamma_h[a].col(a).dot(hu.x_f) / std::sqrt(fv);
    return out;
  }

 private:
  Vector horizontal_source(const Vector& w) const {
    // s(a,b,.) = sum_l c[l](a,b) J_l w + w_a e_b / 2 - w_b e_a / 2, i.e. -pi_h [X~_a, X~_b]
    Vector s = Vector::Zero(n3_);
    const auto& cs = group_.structure_constants();
    std::vector<Vector> jw;
    for (int l = 0; l < k_; ++l) jw.push_back(group_.generator(l) * w);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        Vector v = Vector::Zero(n_);
        for (int l = 0; l < k_; ++l) v += cs[l](a, b) * jw[l];
        v(b) += 0.5 * w(a);
        v(a) -= 0.5 * w(b);
        s.segment(tensor_index(n_, a, b, 0), n_) = v;
      }
    return s;
  }

  /// B_j(., b) = pi_h [T~_j, X~_b] in the frame X~.
  std::vector<Matrix> reeb_sources(const HorizontalJet& hj) const {
    const double f = hj.value;
    std::vector<Vector> y;
    for (int j = 0; j < k_; ++j) y.push_back(group_.generator(j) * hj.x_f / (f * f));
    std::vector<Matrix> out;
    for (int j = 0; j < k_; ++j) {
      const Matrix& jj = group_.generator(j);
      // xy(d, b) = X_b (y_j)_d
      const Matrix xy = jj * hj.xx_f.transpose() / (f * f) - 2.0 * (jj * hj.x_f) * hj.x_f.transpose() / (f * f * f);
      const double ttf = hj.t_f(j) / f;
      Matrix bj(n_, n_);
      for (int b = 0; b < n_; ++b) {
        Vector v = -0.5 * ttf / f * Vector::Unit(n_, b) - (hj.x_f(b) / f) * y[j] - xy.col(b);
        for (int l = 0; l < k_; ++l) v -= f * (group_.generator(l) * y[j])(b) * y[l];
        bj.col(b) = v;
      }
      out.push_back(bj);
    }
    return out;
  }

  Vector rhs(const Vector& s, const std::vector<Matrix>& b) const {
    Vector r = Vector::Zero(rows_);
    r.segment(row_sigma_, n3_) = -(proj_.p_sigma * s);
    for (int j = 0; j < static_cast<int>(b.size()); ++j)
      r.segment(row_reeb_ + j * reeb_block_ + nn_ * (1 + k_), nn_) = proj_.p_xi * detail::flatten(b[j]);
    return r;
  }

  ConnectionAtPoint unpack(const Vector& z) const {
    ConnectionAtPoint c;
    for (int a = 0; a < n_; ++a) c.gamma_h.push_back(detail::endomorphism(z.segment(a * nn_, nn_), n_));
    for (int j = 0; j < k_; ++j) c.gamma_t.push_back(detail::endomorphism(z.segment(n3_ + j * nn_, nn_), n_));
    return c;
  }

  Vector q_tensor(const std::vector<Matrix>& gh, int i) const {
    const Matrix& j = group_.generator(i);
    std::vector<Matrix> nj;
    for (int a = 0; a < n_; ++a) nj.push_back(gh[a] * j - j * gh[a]);
    Vector out(n3_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        Matrix njy = Matrix::Zero(n_, n_), njx = Matrix::Zero(n_, n_);
        for (int m = 0; m < n_; ++m) {
          njy += j(m, b) * nj[m];
          njx += j(m, a) * nj[m];
        }
        out.segment(tensor_index(n_, a, b, 0), n_) =
            j * nj[a].col(b) - j * nj[b].col(a) + njy.col(a) - njx.col(b);
      }
    return out;
  }

  Vector homogeneous(const Vector& z) const {
    const ConnectionAtPoint c = unpack(z);
    Vector out = Vector::Zero(rows_);
    for (int a = 0; a < n_; ++a) {
      const Matrix& g = c.gamma_h[a];
      out.segment(row_metric_ + a * nn_, nn_) = detail::flatten(g + g.transpose());
      for (int i = 0; i < k_; ++i) {
        const Matrix& j = group_.generator(i);
        out.segment(row_jspan_ + (a * k_ + i) * nn_, nn_) = p_perp_j_ * detail::flatten(g * j - j * g);
      }
    }
    for (int i = 0; i < k_; ++i) out.segment(row_q_ + i * n3_, n3_) = q_tensor(c.gamma_h, i);
    Vector tau(n3_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        for (int g = 0; g < n_; ++g)
          tau(tensor_index(n_, a, b, g)) = c.gamma_h[a](g, b) - c.gamma_h[b](g, a);
    out.segment(row_sigma_, n3_) = proj_.p_sigma * tau;
    for (int jx = 0; jx < k_; ++jx) {
      const Matrix& g = c.gamma_t[jx];
      const Eigen::Index base = row_reeb_ + jx * reeb_block_;
      out.segment(base, nn_) = detail::flatten(g + g.transpose());
      for (int i = 0; i < k_; ++i) {
        const Matrix& j = group_.generator(i);
        out.segment(base + nn_ * (1 + i), nn_) = detail::flatten(g * j - j * g);
      }
      out.segment(base + nn_ * (1 + k_), nn_) = proj_.p_xi * detail::flatten(g);
    }
    return out;
  }

  void fill_residuals(ConnectionAtPoint& c, const Vector& s, const std::vector<Matrix>& b) const {
    Vector z(unknowns_);
    for (int a = 0; a < n_; ++a) z.segment(a * nn_, nn_) = detail::flatten(c.gamma_h[a]);
    for (int j = 0; j < k_; ++j) z.segment(n3_ + j * nn_, nn_) = detail::flatten(c.gamma_t[j]);
    const Vector res = homogeneous(z) - rhs(s, b);
    auto block = [&](Eigen::Index start, Eigen::Index len) {
      return len == 0 ? 0.0 : res.segment(start, len).cwiseAbs().maxCoeff();
    };
    ConnectionResiduals& r = c.residuals;
    r.metric = block(row_metric_, n3_);
    r.j_span = block(row_jspan_, n3_ * k_);
    r.q_theta = block(row_q_, n3_ * k_);
    r.sigma_torsion = block(row_sigma_, n3_);
    for (int j = 0; j < k_; ++j) {
      const Eigen::Index base = row_reeb_ + j * reeb_block_;
      r.reeb_metric = std::max(r.reeb_metric, block(base, nn_));
      r.reeb_parallel = std::max(r.reeb_parallel, block(base + nn_, nn_ * k_));
      r.xi_torsion = std::max(r.xi_torsion, block(base + nn_ * (1 + k_), nn_));
    }
  }

  HTypeGroup group_;
  ProjectorPair proj_;
  int n_ = 0;
  int k_ = 0;
  Eigen::Index n3_ = 0, nn_ = 0, unknowns_ = 0, rows_ = 0;
  Eigen::Index row_metric_ = 0, row_jspan_ = 0, row_q_ = 0, row_sigma_ = 0, row_reeb_ = 0, reeb_block_ = 0;
  Matrix p_perp_j_;
  Matrix system_;
  Matrix pinv_;
  Matrix from_w_;
  Matrix from_b_;
  UniquenessCertificate cert_;
};

/// Relative spread (max - min) / |mean| of a sample.
inline double relative_spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) / std::abs(mean);
}

struct ConformalSample {
  int field = 0;
  GroupPoint point;
  double lhs = 0.0;  // K~ u^{(Q+2)/(Q-2)}
  double rhs = 0.0;  // -Delta u
  double relative_residual = 0.0;
};

struct ConformalCalibration {
  double c = 0.0;
  std::vector<double> slopes;  // one per field
  double slope_spread = 0.0;
  double max_relative_residual = 0.0;
  double tolerance = 1e-4;
  std::vector<ConformalSample> samples;
  bool pass = false;
};

/// Regresses K~ u^{(Q+2)/(Q-2)} on -Delta u for f = u^{4/(Q-2)} over the given fields
/// and points. Throws TheoremViolation when the relation is not a proportionality.
inline ConformalCalibration calibrate_conformal_constant(const ConnectionEngine& engine,
                                                         const std::vector<ScalarField>& fields,
                                                         const std::vector<GroupPoint>& points,
                                                         double tolerance = 1e-4) {
  const HTypeGroup& g = engine.group();
  const double q = g.homogeneous_dimension();
  const double e = (q + 2.0) / (q - 2.0);
  ConformalCalibration cal;
  cal.tolerance = tolerance;
  for (std::size_t fi = 0; fi < fields.size(); ++fi) {
    const ScalarField f = fields::power(fields[fi], 4.0 / (q - 2.0));
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : points) {
      const Jet uj = fields[fi].jet(p);
      ConformalSample s;
      s.field = static_cast<int>(fi);
      s.point = p;
      s.lhs = engine.scalar_curvature(f, p).k * std::pow(uj.v, e);
      s.rhs = -sublaplacian(g, uj, p);
      sxy += s.lhs * s.rhs;
      sxx += s.rhs * s.rhs;
      cal.samples.push_back(s);
    }
    if (!(sxx > 0.0)) throw TheoremViolation("calibrate_conformal_constant: field has vanishing sublaplacian at all points");
    cal.slopes.push_back(sxy / sxx);
  }
  double mean = 0.0;
  for (double s : cal.slopes) mean += s;
  cal.c = mean / static_cast<double>(cal.slopes.size());
  cal.slope_spread = relative_spread(cal.slopes);
  const ConformalSample* worst = nullptr;
  for (auto& s : cal.samples) {
    s.relative_residual = std::abs(s.lhs - cal.c * s.rhs) / std::max(std::abs(cal.c * s.rhs), 1e-12);
    if (!worst || s.relative_residual > worst->relative_residual) worst = &s;
  }
  cal.max_relative_residual = worst ? worst->relative_residual : 0.0;
  cal.pass = cal.slope_spread <= tolerance && cal.max_relative_residual <= tolerance && cal.c > 0.0;
  if (!cal.pass) {
    std::string where;
    if (worst) {
      where = " worst sample: field " + std::to_string(worst->field) + ", K~u^e = " + std::to_string(worst->lhs) +
              ", -Delta u = " + std::to_string(worst->rhs);
    }
    throw TheoremViolation("calibrate_conformal_constant: no proportionality (slope spread " +
                           std::to_string(cal.slope_spread) + ", max relative residual " +
                           std::to_string(cal.max_relative_residual) + ")" + where);
  }
  return cal;
}

}  // namespace htype
