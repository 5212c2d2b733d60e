#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ehdg/types.hpp"

namespace ehdg {

struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  /// Highest polynomial degree integrated exactly.
  int degree() const { return 2 * static_cast<int>(points.size()) - 1; }
};

/// n-point Gauss-Legendre rule on [-1,1].
QuadratureRule gauss_quadrature(int n);

/// Gauss-Lobatto-Legendre nodes and their integration weights for order p.
/// p = 0 degenerates to the single midpoint node with weight 2.
QuadratureRule gll_nodes(int p);

/// 1D Lagrange basis on the GLL nodes of order p.
class NodalBasis1D {
 public:
  explicit NodalBasis1D(int order);

  int order() const { return order_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& barycentric_weights() const { return bary_; }
  /// D(i, j) = l_j'(x_i).
  const Matrix& differentiation() const { return diff_; }

  /// Row vector of all basis functions evaluated at x.
  Vector evaluate(double x) const;
  /// interpolation(q, j) = l_j(points[q]).
  Matrix interpolation(std::span<const double> points) const;
  /// derivative(q, j) = l_j'(points[q]).
  Matrix derivative(std::span<const double> points) const;

 private:
  int order_;
  std::vector<double> nodes_;
  std::vector<double> bary_;
  Matrix diff_;
};

/// M(i, j) = integral of l_i l_j over [-1,1] with the given rule.
/// Throws ConfigError when the rule cannot integrate degree 2p exactly.
Matrix reference_mass_matrix(const NodalBasis1D& basis, const QuadratureRule& quadrature);

/// Tensor-product nodal basis on the reference cube [-1,1]^d with Gauss
/// quadrature (p+2 points per direction) for volume and face integrals.
///
/// Node and quadrature orderings are lexicographic with axis 0 fastest.
/// Face data is expressed in the face's own (d-1)-dimensional coordinates,
/// which are the element's remaining axes in increasing order.
class TensorBasis {
 public:
  TensorBasis(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return basis1d_.order(); }
  const NodalBasis1D& basis1d() const { return basis1d_; }
  const QuadratureRule& quadrature1d() const { return quad1d_; }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_face_nodes() const { return num_face_nodes_; }
  std::size_t num_volume_points() const { return volume_weights_.size(); }
  std::size_t num_face_points() const { return face_weights_.size(); }

  /// Reference coordinates of volume nodes.
  const std::vector<Point>& node_points() const { return node_points_; }
  /// Reference coordinates of volume quadrature points.
  const std::vector<Point>& volume_points() const { return volume_points_; }
  const Vector& volume_weights() const { return volume_weights_; }
  /// (q, i) = phi_i at volume quadrature point q.
  const Matrix& volume_values() const { return volume_values_; }
  /// (q, i) = d phi_i / d xi_axis at volume quadrature point q.
  const Matrix& volume_derivative(int axis) const { return volume_derivative_[axis]; }

  /// Face quadrature points in face coordinates (first d-1 components used).
  const std::vector<Point>& face_points() const { return face_points_; }
  const Vector& face_weights() const { return face_weights_; }
  /// (q, j) = face nodal basis j at face quadrature point q.
  const Matrix& face_values() const { return face_values_; }
  /// Maps face quadrature values to face nodal coefficients (L2 projection).
  const Matrix& face_projection() const { return face_projection_; }
  /// Volume node indices lying on a local face, in face-node order.
  const std::vector<std::size_t>& face_nodes(int local_face) const { return face_nodes_[local_face]; }

  /// Reference volume mass matrix (full quadrature, no lumping).
  const Matrix& mass() const { return *mass_; }
  std::shared_ptr<const Matrix> shared_mass() const { return mass_; }
  /// Reference face mass matrix in face nodal coordinates.
  const Matrix& face_mass() const { return face_mass_; }

  /// Volume node values restricted to a local face (face-node order).
  Vector face_trace(const Eigen::Ref<const Vector>& element_values, int local_face) const;
  /// Volume node values evaluated at the quadrature points of a local face.
  Vector restrict_to_face(const Eigen::Ref<const Vector>& element_values, int local_face) const;

  /// Element-reference point of a face quadrature point on a local face.
  Point face_point_in_element(std::size_t q, int local_face) const;

 private:
  int dim_;
  NodalBasis1D basis1d_;
  QuadratureRule quad1d_;
  std::size_t num_nodes_ = 0;
  std::size_t num_face_nodes_ = 0;
  std::vector<Point> node_points_;
  std::vector<Point> volume_points_;
  Vector volume_weights_;
  Matrix volume_values_;
  std::array<Matrix, 3> volume_derivative_;
  std::vector<Point> face_points_;
  Vector face_weights_;
  Matrix face_values_;
  Matrix face_projection_;
  std::array<std::vector<std::size_t>, 6> face_nodes_;
  std::shared_ptr<const Matrix> mass_;
  Matrix face_mass_;
};

}  // namespace ehdg
