#pragma once

#include <array>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace ehdg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Physical point or vector. Components beyond the mesh dimension are zero.
using Point = std::array<double, 3>;

using ScalarField = std::function<double(const Point&)>;
using SpaceTimeField = std::function<double(const Point&, double)>;
using VectorField = std::function<Point(const Point&)>;

/// Nodal coefficients of a scalar discontinuous field: one column per element.
using ElementField = Eigen::MatrixXd;

inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace ehdg
