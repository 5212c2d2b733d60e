#pragma once

#include <vector>

#include "ehdg/basis.hpp"
#include "ehdg/mesh.hpp"

namespace ehdg {

/// det of the affine element map.
inline double volume_jacobian(const ElementGeom& el, int dim) {
  double j = 1.0;
  for (int a = 0; a < dim; ++a) j *= el.jacobian[a];
  return j;
}

/// Ratio of a face's physical measure to its reference measure 2^(d-1).
inline double face_jacobian(const FaceInfo& face, int dim) {
  return face.measure / (dim == 2 ? 2.0 : 4.0);
}

/// Physical coordinates of the volume quadrature points of an element.
std::vector<Point> volume_quadrature_points(const ElementGeom& el, const TensorBasis& basis);

/// Physical coordinates of the quadrature points of a local face of an element.
std::vector<Point> local_face_quadrature_points(const ElementGeom& el, const TensorBasis& basis,
                                                int local_face);

/// Physical coordinates of a face's quadrature points, seen from its minus element.
std::vector<Point> face_quadrature_points(const StructuredMesh& mesh, const TensorBasis& basis,
                                          const FaceInfo& face);

/// Physical coordinates of an element's nodes.
std::vector<Point> element_node_points(const ElementGeom& el, const TensorBasis& basis);

}  // namespace ehdg
