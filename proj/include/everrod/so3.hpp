#pragma once

#include <Eigen/Core>

namespace everrod {

// Skew-symmetric matrix with hat(v) * w == v.cross(w).
Eigen::Matrix3d hat(const Eigen::Vector3d& v);

// Nearest rotation (polar factor) of a matrix that is already close to SO(3).
Eigen::Matrix3d project_to_so3(const Eigen::Matrix3d& r);

// ||R^T R - I||_inf (max absolute row sum).
double orthonormality_error(const Eigen::Matrix3d& r);

// Rodrigues rotation about a unit axis.
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle);

}  // namespace everrod
