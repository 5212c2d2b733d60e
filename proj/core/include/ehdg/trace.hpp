#pragma once

#include <cstddef>

#include "ehdg/types.hpp"

namespace ehdg {

/// Single-valued polynomial data on the mesh skeleton: one block of
/// face-nodal coefficients per face.
class TraceField {
 public:
  TraceField() = default;
  TraceField(std::size_t num_faces, std::size_t face_size)
      : face_size_(face_size), data_(Matrix::Zero(static_cast<Eigen::Index>(face_size),
                                                 static_cast<Eigen::Index>(num_faces))) {}

  std::size_t num_faces() const { return static_cast<std::size_t>(data_.cols()); }
  std::size_t face_size() const { return face_size_; }

  auto face(std::size_t f) { return data_.col(static_cast<Eigen::Index>(f)); }
  auto face(std::size_t f) const { return data_.col(static_cast<Eigen::Index>(f)); }

  const Matrix& data() const { return data_; }
  Matrix& data() { return data_; }

 private:
  std::size_t face_size_ = 0;
  Matrix data_;
};

}  // namespace ehdg
