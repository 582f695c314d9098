#include <cmath>

#include <gtest/gtest.h>

#include "htype/connection.hpp"

using namespace htype;

namespace {

HTypeGroup group(int k, int m = 1) { return HTypeGroup::from_module(build_generators(k, m)); }

double conformal_power(const HTypeGroup& g) { return 4.0 / (g.homogeneous_dimension() - 2.0); }

// Cayley transform of an antisymmetric A: orthogonal, and commutes with whatever A commutes with.
Matrix cayley(const Matrix& a) {
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  return (id - 0.5 * a).inverse() * (id + 0.5 * a);
}

Matrix conjugation_on_tensors(const Matrix& o) {
  const int n = static_cast<int>(o.rows());
  const Eigen::Index n3 = static_cast<Eigen::Index>(n) * n * n;
  Matrix out = Matrix::Zero(n3, n3);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
              out(tensor_index(n, a, b, c), tensor_index(n, i, j, l)) = o(a, i) * o(b, j) * o(c, l);
  return out;
}

}  // namespace

TEST(Projectors, XiDimensions) {
  const ProjectorPair h1 = build_projectors(build_generators(1, 1));
  ASSERT_EQ(h1.dim_xi(), 1);
  const Vector j = detail::flatten(build_generators(1, 1).generators[0]).normalized();
  EXPECT_NEAR(std::abs(h1.basis_xi.col(0).dot(j)), 1.0, 1e-12);
  EXPECT_EQ(build_projectors(build_generators(1, 2)).dim_xi(), 4);
  EXPECT_EQ(build_projectors(build_generators(2, 1)).dim_xi(), 3);
}

TEST(Projectors, SigmaDimensionsAndInjectivity) {
  const ProjectorPair h1 = build_projectors(build_generators(1, 1));
  EXPECT_EQ(h1.dim_d(), 2);
  EXPECT_EQ(h1.dim_sigma(), 2);
  for (auto [k, m] : {std::pair{1, 2}, {2, 1}, {3, 1}}) {
    const ProjectorPair pp = build_projectors(build_generators(k, m));
    EXPECT_EQ(pp.injectivity.rank, pp.dim_d());
    EXPECT_EQ(pp.dim_sigma(), pp.dim_d());
    EXPECT_GE(pp.injectivity.gap, kMinGap);
    const Matrix a12 = detail::antisymmetrize_first_two(pp.n2);
    EXPECT_LE(max_abs(pp.theta * a12 * pp.basis_d - pp.basis_d), 1e-10);
  }
  const ProjectorPair k2 = build_projectors(build_generators(2, 1));
  EXPECT_EQ(k2.dim_d(), 12);
}

TEST(Projectors, AlgebraicProperties) {
  Rng rng(4);
  for (auto [k, m] : {std::pair{1, 1}, {1, 2}, {2, 1}, {3, 1}}) {
    const CliffordModule mod = build_generators(k, m);
    const ProjectorPair pp = build_projectors(mod);
    for (const Matrix* p : {&pp.p_sigma, &pp.p_xi}) {
      EXPECT_LE(max_abs(*p * *p - *p), 1e-10);
      EXPECT_LE(max_abs(*p - p->transpose()), 1e-10);
    }
    for (Eigen::Index c = 0; c < pp.basis_xi.cols(); ++c) {
      const Matrix a = detail::endomorphism(pp.basis_xi.col(c), mod.n2);
      EXPECT_LE(max_abs(a + a.transpose()), 1e-10);
      for (const auto& j : mod.generators) EXPECT_LE(max_abs(a * j - j * a), 1e-10);
    }
    const int n = mod.n2;
    for (Eigen::Index c = 0; c < pp.basis_d.cols(); ++c) {
      const Vector& t = pp.basis_d.col(c);
      for (int a = 0; a < n; ++a) {
        Matrix ma(n, n);
        for (int b = 0; b < n; ++b)
          for (int g = 0; g < n; ++g) {
            EXPECT_NEAR(t(tensor_index(n, a, b, g)), -t(tensor_index(n, a, g, b)), 1e-10);
            ma(g, b) = t(tensor_index(n, a, b, g));
          }
        for (const auto& j : mod.generators) EXPECT_LE(max_abs(ma * j - j * ma), 1e-10);
      }
    }
    const Vector t = rng.normal_vector(static_cast<Eigen::Index>(n) * n * n);
    const Vector rest = t - pp.p_sigma * t;
    EXPECT_LE((pp.basis_sigma.transpose() * rest).cwiseAbs().maxCoeff(), 1e-10);
    const Vector e = rng.normal_vector(static_cast<Eigen::Index>(n) * n);
    EXPECT_LE((pp.basis_xi.transpose() * (e - pp.p_xi * e)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Projectors, InvariantUnderCommutingRotations) {
  Rng rng(8);
  for (auto [k, m] : {std::pair{1, 1}, {1, 2}, {2, 1}}) {
    const CliffordModule mod = build_generators(k, m);
    const ProjectorPair pp = build_projectors(mod);
    const Matrix a = detail::endomorphism(pp.basis_xi * rng.normal_vector(pp.dim_xi()), mod.n2);
    const Matrix o = cayley(a);
    for (const auto& j : mod.generators) ASSERT_LE(max_abs(o * j - j * o), 1e-12);
    const Matrix r3 = conjugation_on_tensors(o);
    EXPECT_LE(max_abs(r3 * pp.p_sigma * r3.transpose() - pp.p_sigma), 1e-10);
    const Matrix r2 = detail::kron(o, o);
    EXPECT_LE(max_abs(r2 * pp.p_xi * r2.transpose() - pp.p_xi), 1e-10);
  }
}

TEST(Projectors, Deterministic) {
  const ProjectorPair a = build_projectors(build_generators(2, 1)), b = build_projectors(build_generators(2, 1));
  EXPECT_EQ(a.p_sigma, b.p_sigma);
  EXPECT_EQ(a.p_xi, b.p_xi);
}

TEST(Connection, FlatStructure) {
  const ConnectionEngine e(group(1));
  const ConnectionAtPoint c = e.flat_connection();
  for (const auto& g : c.gamma_h) EXPECT_EQ(g, Matrix::Zero(2, 2));
  for (const auto& g : c.gamma_t) EXPECT_EQ(g, Matrix::Zero(2, 2));
  EXPECT_EQ(c.torsion_h, Vector::Zero(8));
  EXPECT_EQ(c.torsion_v[0](0, 1), -1.0);
  EXPECT_EQ(c.torsion_v[0](1, 0), 1.0);
  EXPECT_EQ(c.residuals.algebraic(), 0.0);
  EXPECT_EQ(c.residuals.first_derivative(), 0.0);
  const ScalarField one = fields::constant(3, 1.0);
  EXPECT_EQ(e.scalar_curvature(one, sample_points(e.group(), 1, 2).front()).k, 0.0);
}

TEST(Connection, ConstantFactorGivesFlatConnection) {
  const ConnectionEngine e(group(1));
  const ScalarField c = fields::constant(3, 2.5);
  for (const auto& p : sample_points(e.group(), 5, 3)) {
    const ConnectionAtPoint s = e.solve(c, p);
    for (const auto& g : s.gamma_h) EXPECT_LE(max_abs(g), 1e-15);
    for (const auto& g : s.gamma_t) EXPECT_LE(max_abs(g), 1e-15);
    EXPECT_EQ(e.scalar_curvature(c, p).k, 0.0);
  }
}

TEST(Connection, Certificate) {
  for (auto [k, m] : {std::pair{1, 1}, {1, 2}, {2, 1}}) {
    const ConnectionEngine e(group(k, m));
    const UniquenessCertificate& c = e.certificate();
    EXPECT_EQ(c.rank.rank, c.unknowns);
    EXPECT_GE(c.rank.gap, 1e6);
    EXPECT_LE(c.reeb_coupling, 1e-12);
  }
  EXPECT_THROW(ConnectionEngine(group(3)), UniquenessViolation);
}

TEST(Connection, DefiningConditionsHoldForRandomFactors) {
  const ConnectionEngine e(group(1));
  const HTypeGroup& g = e.group();
  const ProjectorPair& pp = e.projectors();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ScalarField f = fields::random_positive(3, seed, 3, 0.4, 1.0);
    for (const auto& p : sample_points(g, 8, seed)) {
      const ConnectionAtPoint c = e.solve(f, p);
      EXPECT_LE(c.residuals.algebraic(), 1e-8);
      EXPECT_LE(c.residuals.first_derivative(), 1e-7);
      for (const auto& gh : c.gamma_h) EXPECT_LE(max_abs(gh + gh.transpose()), 1e-8);
      EXPECT_LE((pp.p_sigma * c.torsion_h).cwiseAbs().maxCoeff(), 1e-8);
      for (int j = 0; j < g.k(); ++j) {
        EXPECT_LE((pp.p_xi * detail::flatten(c.torsion_partial[j])).cwiseAbs().maxCoeff(), 1e-8);
        for (int i = 0; i < g.k(); ++i)
          EXPECT_LE(max_abs(c.gamma_t[j] * g.generator(i) - g.generator(i) * c.gamma_t[j]), 1e-7);
      }
      const Matrix zero = Matrix::Zero(2, 2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          EXPECT_LE(e.q_on_fields(c, 0, Vector::Unit(2, a), zero, Vector::Unit(2, b), zero).cwiseAbs().maxCoeff(), 1e-7);
      const auto closed = e.closed_form_horizontal(f, p);
      for (int a = 0; a < 2; ++a) EXPECT_LE(max_abs(closed[a] - c.gamma_h[a]), 1e-6);
    }
  }
}

TEST(Connection, QIsTensorial) {
  const ConnectionEngine e(group(1, 2));
  Rng rng(12);
  const ScalarField f = fields::random_positive(5, 9, 3, 0.4, 1.0);
  const GroupPoint p = sample_points(e.group(), 1, 4).front();
  const ConnectionAtPoint c = e.solve(f, p);
  const Vector x = rng.normal_vector(4), y = rng.normal_vector(4);
  const Matrix dx = Matrix::Random(4, 4), dy = Matrix::Random(4, 4);
  // rescaling by phi with phi(p) = 1 adds x (d phi)^T to the frame derivatives
  const Vector dphi = rng.normal_vector(4), dpsi = rng.normal_vector(4);
  const Vector q0 = e.q_on_fields(c, 0, x, dx, y, dy);
  const Vector q1 = e.q_on_fields(c, 0, x, dx + x * dphi.transpose(), y, dy + y * dpsi.transpose());
  EXPECT_LE((q0 - q1).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(q0.cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Connection, DifferentFactorsGiveDifferentConnections) {
  // guards against a solver that ignores its sources
  const ConnectionEngine e(group(1));
  const GroupPoint p = sample_points(e.group(), 1, 6).front();
  const ConnectionAtPoint a = e.solve(fields::random_positive(3, 1, 3, 0.4, 1.0), p);
  EXPECT_GT(max_abs(a.gamma_h[0]) + max_abs(a.gamma_h[1]), 1e-3);
}

TEST(Curvature, FrameCovariance) {
  const HTypeGroup g = group(1);
  const ConnectionEngine e(g);
  Rng rng(14);
  const ScalarField f = fields::power(fields::random_positive(3, 4, 3, 0.3, 0.8), conformal_power(g));
  for (const auto& p : sample_points(g, 5, 7)) {
    const Matrix r = rng.orthogonal(2);
    EXPECT_NEAR(e.scalar_curvature(f, p, &r).k, e.scalar_curvature(f, p).k, 1e-6);
  }
  // same structure in rotated coordinates: generators R^T J R, field composed with x -> R x
  const Matrix r = rng.orthogonal(2);
  CliffordModule rotated = g.module();
  for (auto& j : rotated.generators) j = r.transpose() * j * r;
  const HTypeGroup gr = HTypeGroup::from_module(rotated);
  const ConnectionEngine er(gr);
  const ScalarField fr(3, [f, r](std::span<const Jet> y) {
    std::vector<Jet> z(y.begin(), y.end());
    for (int a = 0; a < 2; ++a) z[a] = r(a, 0) * y[0] + r(a, 1) * y[1];
    return f(z);
  });
  for (const auto& p : sample_points(g, 5, 8)) {
    const GroupPoint pr{r.transpose() * p.x, p.t};
    EXPECT_NEAR(er.scalar_curvature(fr, pr).k, e.scalar_curvature(f, p).k, 1e-6);
  }
}

TEST(Curvature, ConformalConstantHeisenberg) {
  const HTypeGroup g = group(1);
  const ConnectionEngine e(g);
  std::vector<ScalarField> us;
  for (std::uint64_t s = 1; s <= 10; ++s) us.push_back(fields::random_positive(3, s, 3, 0.3, 0.8));
  const ConformalCalibration cal = calibrate_conformal_constant(e, us, sample_points(g, 6, 3));
  EXPECT_NEAR(cal.c, 8.0, 1e-10);
  EXPECT_LE(cal.slope_spread, 1e-4);
  EXPECT_LE(cal.max_relative_residual, 1e-4);
}

TEST(Curvature, ConformalConstantSecondHeisenberg) {
  const HTypeGroup g = group(1, 2);
  const ConnectionEngine e(g);
  std::vector<ScalarField> us;
  for (std::uint64_t s = 1; s <= 3; ++s) us.push_back(fields::random_positive(5, s, 3, 0.3, 0.8));
  EXPECT_NEAR(calibrate_conformal_constant(e, us, sample_points(g, 3, 3)).c, 6.0, 1e-10);
}

TEST(Curvature, HarmonicFactorHasZeroCurvature) {
  const HTypeGroup g = group(1);
  const ConnectionEngine e(g);
  const ScalarField u(3, [](std::span<const Jet> y) { return 1.0 + y[0]; });
  EXPECT_NEAR(e.scalar_curvature(fields::power(u, conformal_power(g)), g.identity()).k, 0.0, 1e-14);
}

TEST(Curvature, IwasawaSphereIsConstant) {
  const HTypeGroup g = group(1);
  const ConnectionEngine e(g);
  const ScalarField f = fields::power(gv_profile(g, calibrate_profile(g).c_g), conformal_power(g));
  std::vector<double> ks;
  for (const auto& p : sample_points(g, 30, 5)) ks.push_back(e.scalar_curvature(f, p).k);
  EXPECT_LE(relative_spread(ks), 1e-4);
  EXPECT_NEAR(ks.front(), 8.0, 1e-9);
}

TEST(Curvature, TwoStepConformalChange) {
  const HTypeGroup g = group(1);
  const ConnectionEngine e(g);
  const double c = 8.0, ex = 3.0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const ScalarField u1 = fields::random_positive(3, s, 3, 0.3, 0.8);
    const ScalarField u2 = fields::random_positive(3, s + 100, 3, 0.3, 0.8);
    const ScalarField f1 = fields::power(u1, conformal_power(g));
    const ScalarField f12 = fields::power(fields::product(u1, u2), conformal_power(g));
    for (const auto& p : sample_points(g, 4, s)) {
      const double k1 = e.scalar_curvature(f1, p).k;
      const double v2 = u2.value(p);
      const double twice = std::pow(v2, -ex) * (-c * e.conformal_sublaplacian(f1, u2, p) + k1 * v2);
      const double once = e.scalar_curvature(f12, p).k;
      EXPECT_NEAR(twice, once, 1e-4 * std::max(1.0, std::abs(once)));
    }
  }
}

TEST(Curvature, NonProportionalForKTwo) {
  const HTypeGroup g = group(2);
  const ConnectionEngine e(g);
  std::vector<ScalarField> us;
  for (std::uint64_t s = 1; s <= 2; ++s) us.push_back(fields::random_positive(6, s, 3, 0.3, 0.8));
  EXPECT_THROW(calibrate_conformal_constant(e, us, sample_points(g, 3, 3)), TheoremViolation);
}
