#include <cstring>

#include <gtest/gtest.h>

#include "htype/group.hpp"
#include "htype/random.hpp"

using namespace htype;

namespace {

Matrix rows4(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(4, 4);
  int i = 0;
  for (const auto& row : r) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Left multiplication by i, j, k on the quaternions, basis (1, i, j, k), written out by hand.
std::vector<Matrix> quaternion_oracle() {
  return {rows4({{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}}),
          rows4({{0, 0, -1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, -1, 0, 0}}),
          rows4({{0, 0, 0, -1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}})};
}

double brute_relation_residual(const std::vector<Matrix>& j) {
  double worst = 0.0;
  const Eigen::Index n = j.front().rows();
  for (std::size_t a = 0; a < j.size(); ++a) {
    worst = std::max(worst, (j[a] + j[a].transpose()).cwiseAbs().maxCoeff());
    for (std::size_t b = 0; b < j.size(); ++b) {
      Matrix r = j[a] * j[b] + j[b] * j[a];
      if (a == b) r += 2.0 * Matrix::Identity(n, n);
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

HTypeGroup group(int k, int m) { return HTypeGroup::from_module(build_generators(k, m)); }

GroupPoint random_point(const HTypeGroup& g, Rng& rng) { return GroupPoint{rng.normal_vector(g.n2()), rng.normal_vector(g.k())}; }

}  // namespace

TEST(Clifford, HeisenbergGeneratorSign) {
  const CliffordModule m = build_generators(1, 1);
  ASSERT_EQ(m.n2, 2);
  Matrix expected(2, 2);
  expected << 0, -1, 1, 0;
  EXPECT_EQ(m.generators[0], expected);
  EXPECT_EQ(Vector::Unit(2, 1).dot(m.generators[0] * Vector::Unit(2, 0)), 1.0);
}

TEST(Clifford, QuaternionicModuleIsLeftMultiplication) {
  const CliffordModule m = build_generators(3, 1);
  const auto oracle = quaternion_oracle();
  ASSERT_EQ(m.n2, 4);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(m.generators[i], oracle[i]) << "generator " << i;
  EXPECT_EQ(brute_relation_residual(oracle), 0.0);
  EXPECT_TRUE(verify_clifford(m).pass);
}

TEST(Clifford, AllCentersAndMultiplicitiesVerify) {
  const int table[] = {2, 4, 4, 8, 8, 8, 8, 16, 32};
  for (int k = 1; k <= 9; ++k)
    for (int mult = 1; mult <= 2; ++mult) {
      const CliffordModule m = build_generators(k, mult);
      EXPECT_EQ(m.n2, mult * table[k - 1]);
      EXPECT_EQ(minimal_module_dimension(k), table[k - 1]);
      const VerificationReport r = verify_clifford(m);
      EXPECT_LE(r.max_antisymmetry, 1e-12) << k << "," << mult;
      EXPECT_LE(r.max_relation, 1e-12) << k << "," << mult;
      EXPECT_LE(brute_relation_residual(m.generators), 1e-12);
      EXPECT_TRUE(r.pass);
    }
  EXPECT_EQ(minimal_module_dimension(17), 16 * 16 * 2);
}

TEST(Clifford, KTwoMultiplicityTwo) {
  const CliffordModule m = build_generators(2, 2);
  EXPECT_EQ(m.n2, 8);
  const VerificationReport r = verify_clifford(m);
  EXPECT_LE(std::max(r.max_antisymmetry, r.max_relation), 1e-12);
}

TEST(Clifford, Deterministic) {
  for (int k : {1, 5, 9}) {
    const CliffordModule a = build_generators(k, 2), b = build_generators(k, 2);
    for (int i = 0; i < k; ++i)
      EXPECT_EQ(std::memcmp(a.generators[i].data(), b.generators[i].data(), sizeof(double) * a.generators[i].size()), 0);
  }
}

TEST(Clifford, UnitCenterVectorsActIsometrically) {
  Rng rng(11);
  for (int k = 1; k <= 9; ++k) {
    const CliffordModule m = build_generators(k, 1);
    for (int s = 0; s < 5; ++s) {
      Vector t = rng.normal_vector(k);
      t.normalize();
      const Matrix jt = m.j_of(t);
      EXPECT_LE((jt.transpose() * jt - Matrix::Identity(m.n2, m.n2)).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Clifford, PerturbationFailsVerification) {
  CliffordModule m = build_generators(1, 1);
  m.generators[0](0, 1) += 1e-3;
  const VerificationReport r = verify_clifford(m);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_relation, 1e-4);
  EXPECT_LT(r.max_relation, 1e-2);
  EXPECT_THROW(HTypeGroup::from_module(m), UnverifiedModule);
}

TEST(Clifford, RejectsDegenerateInputs) {
  EXPECT_THROW(build_generators(0, 1), InvalidArgument);
  EXPECT_THROW(build_generators(1, 0), InvalidArgument);
}

TEST(Iwasawa, Classification) {
  EXPECT_TRUE(is_iwasawa_type(build_generators(1, 1)).iwasawa);
  EXPECT_TRUE(is_iwasawa_type(build_generators(3, 1)).iwasawa);
  const IwasawaResult r = is_iwasawa_type(build_generators(2, 1));
  EXPECT_FALSE(r.iwasawa);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_GT(r.witness->residual, 1e-9);
  // J_1 J_2 1 = i j = k, orthogonal to span{i, j}: residual |k| = 1
  const auto q = quaternion_oracle();
  const Vector v = q[0] * q[1] * Vector::Unit(4, 0);
  Matrix span(4, 2);
  span << q[0] * Vector::Unit(4, 0), q[1] * Vector::Unit(4, 0);
  const Vector coef = span.colPivHouseholderQr().solve(v);
  EXPECT_NEAR((span * coef - v).norm(), 1.0, 1e-12);
  EXPECT_NEAR(r.max_residual, 1.0, 1e-12);
}

TEST(Iwasawa, InvariantUnderCenterRotation) {
  Rng rng(5);
  for (int k : {1, 2, 3}) {
    const CliffordModule m = build_generators(k, 1);
    const bool expected = is_iwasawa_type(m).iwasawa;
    for (int s = 0; s < 4; ++s) {
      const Matrix r = rng.orthogonal(k);
      CliffordModule rot = m;
      for (int i = 0; i < k; ++i) {
        rot.generators[i].setZero();
        for (int j = 0; j < k; ++j) rot.generators[i] += r(i, j) * m.generators[j];
      }
      EXPECT_EQ(is_iwasawa_type(rot).iwasawa, expected);
    }
  }
}

TEST(Group, StructureConstants) {
  const HTypeGroup h = group(1, 1);
  const auto& c = h.structure_constants();
  EXPECT_EQ(c[0](0, 1), 1.0);
  EXPECT_EQ(c[0](1, 0), -1.0);
  EXPECT_EQ(c[0](0, 0), 0.0);
  EXPECT_EQ(c[0](1, 1), 0.0);
  for (int k : {2, 3, 5}) {
    const HTypeGroup g = group(k, 1);
    for (const auto& cj : g.structure_constants()) EXPECT_EQ(cj, Matrix(-cj.transpose()));
  }
  EXPECT_EQ(group(3, 1).homogeneous_dimension(), 10);
}

TEST(Group, BracketMatchesJ) {
  Rng rng(3);
  for (int k : {1, 2, 3, 7}) {
    const HTypeGroup g = group(k, 1);
    for (int s = 0; s < 10; ++s) {
      const Vector x = rng.normal_vector(g.n2()), y = rng.normal_vector(g.n2());
      Vector t = rng.normal_vector(k);
      t.normalize();
      EXPECT_NEAR(g.bracket(x, y).dot(t), (g.module().j_of(t) * x).dot(y), 1e-12);
    }
  }
}

TEST(Group, LawIdentityInverseAndExample) {
  const HTypeGroup h = group(1, 1);
  Rng rng(1);
  const GroupPoint p = random_point(h, rng);
  EXPECT_EQ(h.multiply(h.identity(), p).coords(), p.coords());
  EXPECT_LE(h.multiply(p, h.inverse(p)).coords().cwiseAbs().maxCoeff(), 0.0);
  const GroupPoint e1{Vector::Unit(2, 0), Vector::Zero(1)}, e2{Vector::Unit(2, 1), Vector::Zero(1)};
  const GroupPoint prod = h.multiply(e1, e2);
  EXPECT_EQ(prod.x, Vector::Ones(2));
  EXPECT_EQ(prod.t(0), 0.5);
}

TEST(Group, Associativity) {
  Rng rng(2);
  for (int k : {1, 2, 3}) {
    const HTypeGroup g = group(k, 1);
    for (int s = 0; s < 50; ++s) {
      const GroupPoint a = random_point(g, rng), b = random_point(g, rng), c = random_point(g, rng);
      const Vector l = g.multiply(g.multiply(a, b), c).coords(), r = g.multiply(a, g.multiply(b, c)).coords();
      EXPECT_LE((l - r).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Group, Dilation) {
  const HTypeGroup h = group(1, 1);
  const GroupPoint p{Vector::Unit(2, 0), Vector::Ones(1)};
  EXPECT_EQ(h.dilate(1.0, p).coords(), p.coords());
  const GroupPoint d = h.dilate(2.0, p);
  EXPECT_EQ(d.x, 2.0 * Vector::Unit(2, 0));
  EXPECT_EQ(d.t(0), 4.0);
  EXPECT_THROW(h.dilate(0.0, p), InvalidArgument);
  EXPECT_THROW(h.dilate(-1.0, p), InvalidArgument);
  Rng rng(4);
  const HTypeGroup g = group(3, 1);
  for (int s = 0; s < 100; ++s) {
    const double lambda = rng.uniform(0.1, 3.0);
    const GroupPoint a = random_point(g, rng), b = random_point(g, rng);
    const Vector l = g.dilate(lambda, g.multiply(a, b)).coords();
    const Vector r = g.multiply(g.dilate(lambda, a), g.dilate(lambda, b)).coords();
    EXPECT_LE((l - r).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Group, FrameAtOriginAndExample) {
  const HTypeGroup h = group(1, 1);
  Matrix id = Matrix::Zero(2, 3);
  id.leftCols(2).setIdentity();
  EXPECT_EQ(h.frame(h.identity()), id);
  const Matrix f = h.frame(GroupPoint{Vector::Unit(2, 0), Vector::Zero(1)});
  EXPECT_EQ(f(1, 1), 1.0);
  EXPECT_EQ(f(1, 2), 0.5);
  EXPECT_EQ(f(0, 2), 0.0);
}

TEST(Group, FrameIsPushforwardOfLeftTranslation) {
  Rng rng(6);
  for (int k : {1, 2, 3}) {
    const HTypeGroup g = group(k, 1);
    for (int s = 0; s < 10; ++s) {
      const GroupPoint p = random_point(g, rng);
      const Matrix f = g.frame(p);
      const double h = 1e-4;
      for (int a = 0; a < g.n2(); ++a) {
        const GroupPoint plus{h * Vector::Unit(g.n2(), a), Vector::Zero(k)};
        const GroupPoint minus{-h * Vector::Unit(g.n2(), a), Vector::Zero(k)};
        const Vector fd = (g.multiply(p, plus).coords() - g.multiply(p, minus).coords()) / (2.0 * h);
        EXPECT_LE((fd - f.row(a).transpose()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_EQ(f.row(a).head(g.n2()), Vector::Unit(g.n2(), a).transpose());
      }
    }
  }
}

TEST(Group, FrameCommutators) {
  // [X_a, X_b]^nu = X_a(X_b^nu) - X_b(X_a^nu), coefficients differentiated numerically
  Rng rng(7);
  for (int k : {1, 2, 3}) {
    const HTypeGroup g = group(k, 1);
    const GroupPoint p = random_point(g, rng);
    const double h = 1e-3;
    std::vector<Matrix> dframe;  // dframe[mu] = d_mu frame
    for (int mu = 0; mu < g.dim(); ++mu) {
      Vector c = p.coords();
      c(mu) += h;
      const Matrix fp = g.frame(GroupPoint::from_coords(c, g.n2()));
      c(mu) -= 2 * h;
      dframe.push_back((fp - g.frame(GroupPoint::from_coords(c, g.n2()))) / (2 * h));
    }
    const Matrix f = g.frame(p);
    for (int a = 0; a < g.n2(); ++a)
      for (int b = 0; b < g.n2(); ++b) {
        Vector comm = Vector::Zero(g.dim());
        for (int mu = 0; mu < g.dim(); ++mu)
          comm += f(a, mu) * dframe[mu].row(b).transpose() - f(b, mu) * dframe[mu].row(a).transpose();
        Vector expected = Vector::Zero(g.dim());
        for (int j = 0; j < k; ++j) expected(g.n2() + j) = g.structure_constants()[j](a, b);
        EXPECT_LE((comm - expected).cwiseAbs().maxCoeff(), 1e-12);
      }
  }
}

TEST(Group, HorizontalGradientExamples) {
  const HTypeGroup h = group(1, 1);
  const GroupPoint p{Vector::Unit(2, 0), Vector::Zero(1)};
  const ScalarField one(3, [](std::span<const Jet> y) { return Jet::constant(1.0, y[0].dim()); });
  const ScalarField x1(3, [](std::span<const Jet> y) { return y[0]; });
  const ScalarField t1(3, [](std::span<const Jet> y) { return y[2]; });
  EXPECT_EQ(horizontal_gradient(h, one, p), Vector::Zero(2));
  EXPECT_EQ(horizontal_gradient(h, x1, p), Vector::Unit(2, 0));
  EXPECT_EQ(horizontal_gradient(h, x1, GroupPoint{Vector::Ones(2), Vector::Ones(1)}), Vector::Unit(2, 0));
  const Vector gt = horizontal_gradient(h, t1, p);
  EXPECT_EQ(gt(0), 0.0);
  EXPECT_EQ(gt(1), 0.5);
}

TEST(Group, SublaplacianExamples) {
  for (int k : {1, 3}) {
    const HTypeGroup g = group(k, 2);
    Rng rng(8);
    const GroupPoint p = random_point(g, rng);
    const ScalarField one(g.dim(), [](std::span<const Jet> y) { return Jet::constant(1.0, y[0].dim()); });
    const int n2 = g.n2();
    const ScalarField x2(g.dim(), [n2](std::span<const Jet> y) {
      Jet s = Jet::constant(0.0, y[0].dim());
      for (int a = 0; a < n2; ++a) s += y[a] * y[a];
      return s;
    });
    EXPECT_EQ(sublaplacian(g, one, p), 0.0);
    EXPECT_NEAR(sublaplacian(g, x2, p), 2.0 * n2, 1e-12);
  }
}

TEST(Group, SublaplacianLeftInvariantAndHomogeneous) {
  Rng rng(9);
  for (int k : {1, 2}) {
    const HTypeGroup g = group(k, 1);
    const ScalarField u(g.dim(), [](std::span<const Jet> y) {
      return sin(y[0] * 0.7 + y[1] * y[2]) + y[1] * y[1] * y[2] + exp(0.3 * y.back());
    });
    for (int s = 0; s < 50; ++s) {
      const GroupPoint p = random_point(g, rng), q = random_point(g, rng);
      const ScalarField moved = compose_left_translation(g, u, p);
      EXPECT_NEAR(sublaplacian(g, moved, q), sublaplacian(g, u, g.multiply(p, q)), 1e-9);
    }
    const ScalarField poly(g.dim(), [](std::span<const Jet> y) {
      return y[0] * y[0] * y[1] + 3.0 * y[1] * y.back() - y[0] * y.back() * y.back();
    });
    for (int s = 0; s < 20; ++s) {
      const double lambda = rng.uniform(0.3, 2.5);
      const GroupPoint p = random_point(g, rng);
      const double lhs = sublaplacian(g, compose_dilation(g, poly, lambda), p);
      const double rhs = lambda * lambda * sublaplacian(g, poly, g.dilate(lambda, p));
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(Jet, MatchesFiniteDifferences) {
  const ScalarField u(3, [](std::span<const Jet> y) {
    return exp(0.2 * y[0] * y[1]) / (1.0 + y[2] * y[2]) + pow(2.0 + cos(y[1]), 1.5) + sqrt(3.0 + y[0] * y[2]) +
           log(2.0 + sin(y[2]));
  });
  Rng rng(10);
  for (int s = 0; s < 10; ++s) {
    const Vector p = 0.7 * rng.normal_vector(3);
    const Jet j = u.jet(p);
    EXPECT_LE((j.h - j.h.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const double h = 1e-4;
    for (int i = 0; i < 3; ++i) {
      const Vector e = h * Vector::Unit(3, i);
      const Jet jp = u.jet(p + e), jm = u.jet(p - e);
      EXPECT_NEAR((jp.v - jm.v) / (2 * h), j.g(i), 1e-7);
      for (int l = 0; l < 3; ++l) EXPECT_NEAR((jp.g(l) - jm.g(l)) / (2 * h), j.h(i, l), 1e-7);
    }
  }
}
