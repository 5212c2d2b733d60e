#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ehdg/types.hpp"

namespace ehdg {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
};

/// Axis-aligned box element with an affine map from the reference cube [-1,1]^d.
///
/// Local faces are numbered 2*axis + side, with side 0 at the low end of the
/// axis and side 1 at the high end.
struct ElementGeom {
  std::size_t index = 0;
  std::array<Interval, 3> extent{};
  /// d x_a / d xi_a for each axis.
  std::array<double, 3> jacobian{};
  std::array<std::size_t, 3> grid{};
  std::array<std::size_t, 6> faces{};

  double measure(int dim) const;
  double diameter(int dim) const;
  Point map(const Point& reference, int dim) const;
};

enum class FaceKind { interior, boundary };

struct FaceInfo {
  std::size_t index = 0;
  FaceKind kind = FaceKind::boundary;
  std::size_t minus_element = 0;
  int minus_local = 0;
  std::size_t plus_element = 0;  // interior faces only
  int plus_local = 0;            // interior faces only
  /// Unit outward normal of the minus element.
  Point normal{};
  double measure = 0.0;
  int axis = 0;

  bool interior() const { return kind == FaceKind::interior; }
};

/// Tensor-product quadrilateral/hexahedral grid over a box.
///
/// Immutable after construction. Face ownership: the element with the smaller
/// index is the minus side of an interior face.
class StructuredMesh {
 public:
  StructuredMesh(int dim, std::span<const std::size_t> nel_per_axis,
                 std::span<const Interval> bounds);

  int dim() const { return dim_; }
  std::size_t nel(int axis) const { return nel_[axis]; }
  const Interval& bounds(int axis) const { return bounds_[axis]; }
  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_faces() const { return faces_.size(); }
  std::size_t num_interior_faces() const { return num_interior_; }
  std::size_t num_boundary_faces() const { return faces_.size() - num_interior_; }

  const std::vector<ElementGeom>& elements() const { return elements_; }
  const ElementGeom& element(std::size_t e) const { return elements_[e]; }
  const std::vector<FaceInfo>& faces() const { return faces_; }
  const FaceInfo& face(std::size_t f) const { return faces_[f]; }

  /// Maximum element diameter.
  double h() const { return h_; }
  double volume() const;

  std::size_t element_index(const std::array<std::size_t, 3>& grid) const;

 private:
  int dim_;
  std::array<std::size_t, 3> nel_{1, 1, 1};
  std::array<Interval, 3> bounds_{};
  std::vector<ElementGeom> elements_;
  std::vector<FaceInfo> faces_;
  std::size_t num_interior_ = 0;
  double h_ = 0.0;
};

StructuredMesh build_mesh(int dim, std::span<const std::size_t> nel_per_axis,
                          std::span<const Interval> bounds);

/// Uniform mesh with `nel` elements per axis over the box `bounds`.
StructuredMesh build_uniform_mesh(int dim, std::size_t nel, std::span<const Interval> bounds);

/// Outward unit normal of an element's local face.
Point local_face_normal(int local_face);

}  // namespace ehdg
