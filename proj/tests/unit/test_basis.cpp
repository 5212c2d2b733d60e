#include <gtest/gtest.h>

#include <cmath>

#include "ehdg/basis.hpp"
#include "ehdg/errors.hpp"
#include "test_support.hpp"

namespace ehdg {
namespace {

// (1 - x^2) P_p'(x) through the Legendre three-term recurrence.
double lobatto_polynomial(int p, double x) {
  double pm1 = 1.0, pc = x;
  for (int k = 1; k < p; ++k) {
    const double next = ((2.0 * k + 1.0) * x * pc - k * pm1) / (k + 1.0);
    pm1 = pc;
    pc = next;
  }
  // (1 - x^2) P_p' = p (P_{p-1} - x P_p)
  return p * (pm1 - x * pc);
}

std::vector<double> bisection_roots(int p) {
  std::vector<double> roots;
  const int samples = 20000;
  for (int i = 0; i < samples; ++i) {
    double a = -1.0 + 2.0 * i / samples + 1e-9;
    double b = -1.0 + 2.0 * (i + 1) / samples + 1e-9;
    if (b >= 1.0) break;
    double fa = lobatto_polynomial(p, a);
    if (fa * lobatto_polynomial(p, b) > 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = lobatto_polynomial(p, m);
      if (fa * fm <= 0.0) {
        b = m;
      } else {
        a = m;
        fa = fm;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

TEST(GllNodes, LowOrders) {
  EXPECT_EQ(gll_nodes(1).points, (std::vector<double>{-1.0, 1.0}));
  const auto p2 = gll_nodes(2).points;
  ASSERT_EQ(p2.size(), 3u);
  EXPECT_DOUBLE_EQ(p2[0], -1.0);
  EXPECT_NEAR(p2[1], 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(p2[2], 1.0);
  const auto p0 = gll_nodes(0);
  ASSERT_EQ(p0.size(), 1u);
  EXPECT_EQ(p0.points[0], 0.0);
  EXPECT_EQ(p0.weights[0], 2.0);
}

TEST(GllNodes, OrderFourMatchesBisection) {
  const auto nodes = gll_nodes(4).points;
  const auto interior = bisection_roots(4);
  ASSERT_EQ(interior.size(), 3u);
  ASSERT_EQ(nodes.size(), 5u);
  EXPECT_DOUBLE_EQ(nodes.front(), -1.0);
  EXPECT_DOUBLE_EQ(nodes.back(), 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(nodes[i + 1], interior[i], 1e-14);
  EXPECT_NEAR(nodes[1], -std::sqrt(3.0 / 7.0), 1e-14);
}

TEST(GllNodes, HigherOrdersMatchBisection) {
  for (int p = 3; p <= 8; ++p) {
    const auto nodes = gll_nodes(p).points;
    const auto interior = bisection_roots(p);
    ASSERT_EQ(interior.size(), static_cast<std::size_t>(p - 1)) << "p=" << p;
    for (int i = 0; i < p - 1; ++i) EXPECT_NEAR(nodes[i + 1], interior[i], 1e-13) << "p=" << p;
  }
}

TEST(GaussQuadrature, ClosedForms) {
  const auto one = gauss_quadrature(1);
  EXPECT_EQ(one.points, std::vector<double>{0.0});
  EXPECT_EQ(one.weights, std::vector<double>{2.0});
  const auto two = gauss_quadrature(2);
  EXPECT_NEAR(two.points[0], -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(two.points[1], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(two.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(two.weights[1], 1.0, 1e-15);
  const auto three = gauss_quadrature(3);
  double s = 0.0;
  for (std::size_t q = 0; q < 3; ++q) s += three.weights[q] * std::pow(three.points[q], 4);
  EXPECT_NEAR(s, 0.4, 1e-15);
  EXPECT_THROW(gauss_quadrature(0), ConfigError);
}

TEST(GaussQuadrature, ExactnessDegree) {
  for (int n = 1; n <= 10; ++n) {
    const auto r = gauss_quadrature(n);
    EXPECT_EQ(r.degree(), 2 * n - 1);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q], k);
      const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1.0);
      EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

TEST(MassMatrix, LinearAndConstant) {
  const Matrix m1 = reference_mass_matrix(NodalBasis1D(1), gauss_quadrature(3));
  EXPECT_NEAR(m1(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m1(0, 1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m1(1, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m1(1, 1), 2.0 / 3.0, 1e-15);
  const Matrix m0 = reference_mass_matrix(NodalBasis1D(0), gauss_quadrature(2));
  ASSERT_EQ(m0.rows(), 1);
  EXPECT_NEAR(m0(0, 0), 2.0, 1e-15);
}

TEST(MassMatrix, CubicMatchesDoubleResolution) {
  const NodalBasis1D b(3);
  const Matrix m = reference_mass_matrix(b, gauss_quadrature(5));
  const auto dense = gauss_quadrature(10);
  Matrix ref = Matrix::Zero(4, 4);
  for (std::size_t q = 0; q < dense.size(); ++q) {
    const Vector v = b.evaluate(dense.points[q]);
    ref += dense.weights[q] * v * v.transpose();
  }
  EXPECT_LT((m - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MassMatrix, UnderIntegrationRejected) {
  EXPECT_THROW(reference_mass_matrix(NodalBasis1D(3), gauss_quadrature(3)), ConfigError);
}

TEST(MassMatrix, SymmetricPositiveDefinite) {
  for (int dim = 2; dim <= 3; ++dim) {
    for (int p = 1; p <= 4; ++p) {
      const TensorBasis basis(dim, p);
      const Matrix& m = basis.mass();
      EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-15);
      const Eigen::LLT<Matrix> llt(m);
      EXPECT_EQ(llt.info(), Eigen::Success);
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff(), 0.0);
      const Eigen::LLT<Matrix> face(basis.face_mass());
      EXPECT_EQ(face.info(), Eigen::Success);
    }
  }
}

TEST(NodalBasis, DifferentiatesMonomialsExactly) {
  for (int p = 1; p <= 6; ++p) {
    const NodalBasis1D b(p);
    const auto& x = b.nodes();
    for (int a = 0; a <= p; ++a) {
      Vector f(static_cast<Eigen::Index>(x.size())), df(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) {
        f[i] = std::pow(x[i], a);
        df[i] = a == 0 ? 0.0 : a * std::pow(x[i], a - 1);
      }
      EXPECT_LT((b.differentiation() * f - df).cwiseAbs().maxCoeff(), 1e-11) << "p=" << p << " a=" << a;
    }
  }
}

TEST(NodalBasis, PartitionOfUnityAndCardinality) {
  const NodalBasis1D b(4);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vector v = b.evaluate(b.nodes()[i]);
    for (Eigen::Index j = 0; j < v.size(); ++j) EXPECT_NEAR(v[j], j == static_cast<Eigen::Index>(i) ? 1.0 : 0.0, 1e-14);
  }
  EXPECT_NEAR(b.evaluate(0.3141).sum(), 1.0, 1e-14);
}

TEST(TensorBasis, VolumeQuadratureExactForSeparableMonomials) {
  for (int p = 1; p <= 4; ++p) {
    const TensorBasis basis(2, p);
    const int degree = basis.quadrature1d().degree();
    EXPECT_EQ(degree, 2 * (p + 2) - 1);
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; b <= degree; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < basis.num_volume_points(); ++q) {
          const Point& x = basis.volume_points()[q];
          s += basis.volume_weights()[q] * std::pow(x[0], a) * std::pow(x[1], b);
        }
        const double ia = (a % 2) ? 0.0 : 2.0 / (a + 1.0);
        const double ib = (b % 2) ? 0.0 : 2.0 / (b + 1.0);
        EXPECT_NEAR(s, ia * ib, 1e-13) << "p=" << p << " a=" << a << " b=" << b;
      }
    }
  }
}

TEST(TensorBasis, OrderingIsLexicographicAxisZeroFastest) {
  const TensorBasis basis(3, 2);
  const auto& nodes = basis.basis1d().nodes();
  for (std::size_t i = 0; i < basis.num_nodes(); ++i) {
    const Point& x = basis.node_points()[i];
    EXPECT_DOUBLE_EQ(x[0], nodes[i % 3]);
    EXPECT_DOUBLE_EQ(x[1], nodes[(i / 3) % 3]);
    EXPECT_DOUBLE_EQ(x[2], nodes[i / 9]);
  }
}

TEST(TensorBasis, ValuesMatchIndependentTensorProduct) {
  for (int dim = 2; dim <= 3; ++dim) {
    const TensorBasis basis(dim, 3);
    for (std::size_t q = 0; q < basis.num_volume_points(); q += 7) {
      const Vector v = testing::tensor_values(basis.basis1d(), dim, basis.volume_points()[q]);
      EXPECT_LT((basis.volume_values().row(static_cast<Eigen::Index>(q)).transpose() - v).cwiseAbs().maxCoeff(), 1e-14);
      for (int a = 0; a < dim; ++a) {
        const Vector d = testing::tensor_derivative(basis.basis1d(), dim, basis.volume_points()[q], a);
        EXPECT_LT((basis.volume_derivative(a).row(static_cast<Eigen::Index>(q)).transpose() - d).cwiseAbs().maxCoeff(),
                  1e-12);
      }
    }
  }
}

TEST(TensorBasis, FaceRestrictionCommutesWithInterpolation) {
  for (int dim = 2; dim <= 3; ++dim) {
    const int p = 3;
    const TensorBasis basis(dim, p);
    // A polynomial of degree p in each variable.
    auto poly = [](const Point& x) { return 1.0 + x[0] - 2.0 * x[1] * x[1] * x[0] + 0.5 * x[2] * x[1] + x[0] * x[0] * x[0]; };
    Vector nodal(static_cast<Eigen::Index>(basis.num_nodes()));
    for (std::size_t i = 0; i < basis.num_nodes(); ++i) nodal[i] = poly(basis.node_points()[i]);
    for (int lf = 0; lf < 2 * dim; ++lf) {
      const Vector at_points = basis.restrict_to_face(nodal, lf);
      for (std::size_t q = 0; q < basis.num_face_points(); ++q) {
        EXPECT_NEAR(at_points[q], poly(basis.face_point_in_element(q, lf)), 1e-13);
      }
      const Vector face_nodal = basis.face_trace(nodal, lf);
      const Vector via_face = basis.face_values() * face_nodal;
      EXPECT_LT((via_face - at_points).cwiseAbs().maxCoeff(), 1e-13);
      // Projection of a face polynomial is the identity.
      EXPECT_LT((basis.face_projection() * at_points - face_nodal).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(TensorBasis, RejectsBadArguments) {
  EXPECT_THROW(TensorBasis(1, 2), ConfigError);
  EXPECT_THROW(TensorBasis(2, -1), ConfigError);
}

}  // namespace
}  // namespace ehdg
