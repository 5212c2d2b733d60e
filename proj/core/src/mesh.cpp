#include "ehdg/mesh.hpp"

#include <cmath>
#include <string>

#include "ehdg/errors.hpp"

namespace ehdg {

double ElementGeom::measure(int dim) const {
  double m = 1.0;
  for (int a = 0; a < dim; ++a) m *= extent[a].length();
  return m;
}

double ElementGeom::diameter(int dim) const {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += extent[a].length() * extent[a].length();
  return std::sqrt(s);
}

Point ElementGeom::map(const Point& reference, int dim) const {
  Point x{};
  for (int a = 0; a < dim; ++a) {
    x[a] = 0.5 * (extent[a].lo + extent[a].hi) + jacobian[a] * reference[a];
  }
  return x;
}

Point local_face_normal(int local_face) {
  Point n{};
  n[local_face / 2] = (local_face % 2 == 0) ? -1.0 : 1.0;
  return n;
}

StructuredMesh::StructuredMesh(int dim, std::span<const std::size_t> nel_per_axis,
                               std::span<const Interval> bounds)
    : dim_(dim) {
  if (dim != 2 && dim != 3) {
    throw ConfigError("mesh dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (nel_per_axis.size() != static_cast<std::size_t>(dim) ||
      bounds.size() != static_cast<std::size_t>(dim)) {
    throw ConfigError("mesh needs one element count and one interval per axis");
  }
  for (int a = 0; a < dim; ++a) {
    if (nel_per_axis[a] < 1) {
      throw ConfigError("element count along axis " + std::to_string(a) + " must be >= 1");
    }
    if (!(bounds[a].lo < bounds[a].hi)) {
      throw ConfigError("interval along axis " + std::to_string(a) + " must have lo < hi");
    }
    nel_[a] = nel_per_axis[a];
    bounds_[a] = bounds[a];
  }
  for (int a = dim; a < 3; ++a) {
    nel_[a] = 1;
    bounds_[a] = Interval{0.0, 0.0};
  }

  const std::size_t n = nel_[0] * nel_[1] * nel_[2];
  elements_.resize(n);
  for (std::size_t g2 = 0; g2 < nel_[2]; ++g2) {
    for (std::size_t g1 = 0; g1 < nel_[1]; ++g1) {
      for (std::size_t g0 = 0; g0 < nel_[0]; ++g0) {
        const std::array<std::size_t, 3> g{g0, g1, g2};
        ElementGeom& el = elements_[element_index(g)];
        el.index = element_index(g);
        el.grid = g;
        for (int a = 0; a < dim; ++a) {
          const double dx = bounds_[a].length() / static_cast<double>(nel_[a]);
          el.extent[a].lo = bounds_[a].lo + dx * static_cast<double>(g[a]);
          // Use the box end exactly on the last element so the union is the box.
          el.extent[a].hi = (g[a] + 1 == nel_[a]) ? bounds_[a].hi
                                                   : bounds_[a].lo + dx * static_cast<double>(g[a] + 1);
          el.jacobian[a] = 0.5 * el.extent[a].length();
        }
        h_ = std::max(h_, el.diameter(dim));
      }
    }
  }

  // Faces: a low-side face with a neighbor was already created by that (lower-index) neighbor.
  for (ElementGeom& el : elements_) {
    for (int lf = 0; lf < 2 * dim; ++lf) {
      const int axis = lf / 2;
      const bool high = (lf % 2) == 1;
      const bool on_boundary = high ? (el.grid[axis] + 1 == nel_[axis]) : (el.grid[axis] == 0);
      double measure = 1.0;
      for (int b = 0; b < dim; ++b) {
        if (b != axis) measure *= el.extent[b].length();
      }
      if (on_boundary) {
        FaceInfo f;
        f.index = faces_.size();
        f.kind = FaceKind::boundary;
        f.minus_element = el.index;
        f.minus_local = lf;
        f.normal = local_face_normal(lf);
        f.measure = measure;
        f.axis = axis;
        el.faces[lf] = f.index;
        faces_.push_back(f);
      } else if (high) {
        auto ng = el.grid;
        ng[axis] += 1;
        const std::size_t nb = element_index(ng);
        FaceInfo f;
        f.index = faces_.size();
        f.kind = FaceKind::interior;
        f.minus_element = el.index;
        f.minus_local = lf;
        f.plus_element = nb;
        f.plus_local = lf - 1;
        f.normal = local_face_normal(lf);
        f.measure = measure;
        f.axis = axis;
        el.faces[lf] = f.index;
        elements_[nb].faces[lf - 1] = f.index;
        faces_.push_back(f);
        ++num_interior_;
      }
    }
  }
}

std::size_t StructuredMesh::element_index(const std::array<std::size_t, 3>& g) const {
  return g[0] + nel_[0] * (g[1] + nel_[1] * g[2]);
}

double StructuredMesh::volume() const {
  double v = 0.0;
  for (const auto& el : elements_) v += el.measure(dim_);
  return v;
}

StructuredMesh build_mesh(int dim, std::span<const std::size_t> nel_per_axis,
                          std::span<const Interval> bounds) {
  return StructuredMesh(dim, nel_per_axis, bounds);
}

StructuredMesh build_uniform_mesh(int dim, std::size_t nel, std::span<const Interval> bounds) {
  if (dim != 2 && dim != 3) {
    throw ConfigError("mesh dimension must be 2 or 3, got " + std::to_string(dim));
  }
  const std::array<std::size_t, 3> counts{nel, nel, nel};
  return StructuredMesh(dim, std::span<const std::size_t>(counts.data(), static_cast<std::size_t>(dim)),
                        bounds);
}

}  // namespace ehdg
