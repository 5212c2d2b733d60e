#include "ehdg/geometry.hpp"

namespace ehdg {

std::vector<Point> volume_quadrature_points(const ElementGeom& el, const TensorBasis& basis) {
  std::vector<Point> pts;
  pts.reserve(basis.num_volume_points());
  for (const Point& r : basis.volume_points()) pts.push_back(el.map(r, basis.dim()));
  return pts;
}

std::vector<Point> local_face_quadrature_points(const ElementGeom& el, const TensorBasis& basis,
                                                int local_face) {
  std::vector<Point> pts;
  pts.reserve(basis.num_face_points());
  for (std::size_t q = 0; q < basis.num_face_points(); ++q) {
    pts.push_back(el.map(basis.face_point_in_element(q, local_face), basis.dim()));
  }
  return pts;
}

std::vector<Point> face_quadrature_points(const StructuredMesh& mesh, const TensorBasis& basis,
                                          const FaceInfo& face) {
  return local_face_quadrature_points(mesh.element(face.minus_element), basis, face.minus_local);
}

std::vector<Point> element_node_points(const ElementGeom& el, const TensorBasis& basis) {
  std::vector<Point> pts;
  pts.reserve(basis.num_nodes());
  for (const Point& r : basis.node_points()) pts.push_back(el.map(r, basis.dim()));
  return pts;
}

}  // namespace ehdg
