#include "ehdg/basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ehdg/errors.hpp"

namespace ehdg {
namespace {

// Legendre P_n(x) and P_{n-1}(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  if (n == 0) return {p0, 0.0};
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

void symmetrize(std::vector<double>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double a = 0.5 * (x[n - 1 - i] - x[i]);
    x[i] = -a;
    x[n - 1 - i] = a;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

std::vector<std::array<std::size_t, 3>> multi_indices(int dim, std::size_t n) {
  std::vector<std::array<std::size_t, 3>> out;
  const std::size_t n1 = dim > 1 ? n : 1;
  const std::size_t n2 = dim > 2 ? n : 1;
  for (std::size_t k = 0; k < n2; ++k)
    for (std::size_t j = 0; j < n1; ++j)
      for (std::size_t i = 0; i < n; ++i) out.push_back({i, j, k});
  return out;
}

std::array<int, 2> tangential_axes(int dim, int axis) {
  std::array<int, 2> t{-1, -1};
  int c = 0;
  for (int b = 0; b < dim; ++b) {
    if (b != axis) t[c++] = b;
  }
  return t;
}

}  // namespace

QuadratureRule gauss_quadrature(int n) {
  if (n < 1) throw ConfigError("Gauss quadrature needs n >= 1, got " + std::to_string(n));
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Roots ordered increasingly: start from -cos(...) guesses.
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, pm] = legendre(n, x);
      const double dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pn, pm] = legendre(n, x);
    const double dp = n * (x * pn - pm) / (x * x - 1.0);
    rule.points[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  symmetrize(rule.points);
  for (int i = 0; i < n / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  return rule;
}

QuadratureRule gll_nodes(int p) {
  if (p < 0) throw ConfigError("GLL order must be >= 0, got " + std::to_string(p));
  QuadratureRule rule;
  if (p == 0) {
    rule.points = {0.0};
    rule.weights = {2.0};
    return rule;
  }
  rule.points.resize(p + 1);
  rule.weights.resize(p + 1);
  rule.points.front() = -1.0;
  rule.points.back() = 1.0;
  // Interior nodes: roots of q(x) = (1-x^2) P_p'(x), with q'(x) = -p(p+1) P_p(x).
  for (int i = 1; i < p; ++i) {
    double x = -std::cos(std::numbers::pi * i / p);
    for (int it = 0; it < 100; ++it) {
      const auto [pn, pm] = legendre(p, x);
      const double q = p * (pm - x * pn);  // (1-x^2) P_p'
      const double dq = -p * (p + 1.0) * pn;
      const double dx = q / dq;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[i] = x;
  }
  symmetrize(rule.points);
  for (int i = 0; i <= p; ++i) {
    const double pn = legendre(p, rule.points[i]).first;
    rule.weights[i] = 2.0 / (p * (p + 1.0) * pn * pn);
  }
  return rule;
}

NodalBasis1D::NodalBasis1D(int order) : order_(order) {
  nodes_ = gll_nodes(order).points;
  const std::size_t n = nodes_.size();
  bary_.assign(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k != j) bary_[j] *= nodes_[j] - nodes_[k];
    }
    bary_[j] = 1.0 / bary_[j];
  }
  diff_ = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = (bary_[j] / bary_[i]) / (nodes_[i] - nodes_[j]);
      diff_(i, j) = d;
      diag -= d;
    }
    diff_(i, i) = diag;
  }
}

Vector NodalBasis1D::evaluate(double x) const {
  const std::size_t n = nodes_.size();
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (x == nodes_[j]) {
      v[j] = 1.0;
      return v;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    v[j] = bary_[j] / (x - nodes_[j]);
    denom += v[j];
  }
  return v / denom;
}

Matrix NodalBasis1D::interpolation(std::span<const double> points) const {
  Matrix m(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(size()));
  for (std::size_t q = 0; q < points.size(); ++q) m.row(q) = evaluate(points[q]).transpose();
  return m;
}

Matrix NodalBasis1D::derivative(std::span<const double> points) const {
  // l_j' has degree p-1, so interpolating it on the nodes is exact.
  return interpolation(points) * diff_;
}

Matrix reference_mass_matrix(const NodalBasis1D& basis, const QuadratureRule& quadrature) {
  if (quadrature.degree() < 2 * basis.order()) {
    throw ConfigError("quadrature of degree " + std::to_string(quadrature.degree()) +
                      " under-integrates the order-" + std::to_string(basis.order()) + " mass matrix");
  }
  const Matrix v = basis.interpolation(quadrature.points);
  const Eigen::Map<const Vector> w(quadrature.weights.data(),
                                   static_cast<Eigen::Index>(quadrature.weights.size()));
  return v.transpose() * w.asDiagonal() * v;
}

TensorBasis::TensorBasis(int dim, int order)
    : dim_(dim), basis1d_(order), quad1d_(gauss_quadrature(order + 2)) {
  if (dim != 2 && dim != 3) throw ConfigError("basis dimension must be 2 or 3");
  if (order < 0) throw ConfigError("polynomial order must be >= 0");

  const std::size_t n1 = basis1d_.size();
  const std::size_t q1 = quad1d_.size();
  const Matrix l1 = basis1d_.interpolation(quad1d_.points);
  const Matrix d1 = basis1d_.derivative(quad1d_.points);

  const auto nodes = multi_indices(dim, n1);
  const auto qpts = multi_indices(dim, q1);
  num_nodes_ = nodes.size();

  for (const auto& i : nodes) {
    Point x{};
    for (int a = 0; a < dim; ++a) x[a] = basis1d_.nodes()[i[a]];
    node_points_.push_back(x);
  }

  const auto nq = static_cast<Eigen::Index>(qpts.size());
  const auto np = static_cast<Eigen::Index>(num_nodes_);
  volume_weights_.resize(nq);
  volume_values_.resize(nq, np);
  for (int a = 0; a < dim; ++a) volume_derivative_[a].resize(nq, np);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const auto& qi = qpts[q];
    Point x{};
    double w = 1.0;
    for (int a = 0; a < dim; ++a) {
      x[a] = quad1d_.points[qi[a]];
      w *= quad1d_.weights[qi[a]];
    }
    volume_points_.push_back(x);
    volume_weights_[q] = w;
    for (Eigen::Index j = 0; j < np; ++j) {
      const auto& ni = nodes[j];
      double v = 1.0;
      for (int a = 0; a < dim; ++a) v *= l1(qi[a], ni[a]);
      volume_values_(q, j) = v;
      for (int b = 0; b < dim; ++b) {
        double g = 1.0;
        for (int a = 0; a < dim; ++a) g *= (a == b) ? d1(qi[a], ni[a]) : l1(qi[a], ni[a]);
        volume_derivative_[b](q, j) = g;
      }
    }
  }
  mass_ = std::make_shared<const Matrix>(volume_values_.transpose() * volume_weights_.asDiagonal() *
                                         volume_values_);

  // Face data in (d-1) face coordinates.
  const auto fn = multi_indices(dim - 1, n1);
  const auto fq = multi_indices(dim - 1, q1);
  num_face_nodes_ = fn.size();
  const auto nfq = static_cast<Eigen::Index>(fq.size());
  const auto nf = static_cast<Eigen::Index>(fn.size());
  face_weights_.resize(nfq);
  face_values_.resize(nfq, nf);
  for (Eigen::Index q = 0; q < nfq; ++q) {
    Point s{};
    double w = 1.0;
    for (int a = 0; a < dim - 1; ++a) {
      s[a] = quad1d_.points[fq[q][a]];
      w *= quad1d_.weights[fq[q][a]];
    }
    face_points_.push_back(s);
    face_weights_[q] = w;
    for (Eigen::Index j = 0; j < nf; ++j) {
      double v = 1.0;
      for (int a = 0; a < dim - 1; ++a) v *= l1(fq[q][a], fn[j][a]);
      face_values_(q, j) = v;
    }
  }
  face_mass_ = face_values_.transpose() * face_weights_.asDiagonal() * face_values_;
  face_projection_ = face_mass_.ldlt().solve(face_values_.transpose() * face_weights_.asDiagonal());

  for (int lf = 0; lf < 2 * dim; ++lf) {
    const int axis = lf / 2;
    const std::size_t fixed = (lf % 2 == 0) ? 0 : n1 - 1;
    const auto t = tangential_axes(dim, axis);
    auto& list = face_nodes_[lf];
    for (const auto& f : fn) {
      std::array<std::size_t, 3> idx{0, 0, 0};
      idx[axis] = fixed;
      for (int a = 0; a < dim - 1; ++a) idx[t[a]] = f[a];
      list.push_back(idx[0] + n1 * (idx[1] + n1 * idx[2]));
    }
  }
}

Vector TensorBasis::face_trace(const Eigen::Ref<const Vector>& element_values, int local_face) const {
  const auto& idx = face_nodes_[local_face];
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out[j] = element_values[idx[j]];
  return out;
}

Vector TensorBasis::restrict_to_face(const Eigen::Ref<const Vector>& element_values, int local_face) const {
  return face_values_ * face_trace(element_values, local_face);
}

Point TensorBasis::face_point_in_element(std::size_t q, int local_face) const {
  const int axis = local_face / 2;
  const auto t = tangential_axes(dim_, axis);
  Point x{};
  x[axis] = (local_face % 2 == 0) ? -1.0 : 1.0;
  for (int a = 0; a < dim_ - 1; ++a) x[t[a]] = face_points_[q][a];
  return x;
}

}  // namespace ehdg
