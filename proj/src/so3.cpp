#include "everrod/so3.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace everrod {

Eigen::Matrix3d hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d w;
  w << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return w;
}

Eigen::Matrix3d project_to_so3(const Eigen::Matrix3d& r) {
  // Newton-Schulz polar iteration; quadratic convergence from the O(h^5)
  // drift left by one integration step.
  Eigen::Matrix3d q = r;
  for (int it = 0; it < 4; ++it) {
    const Eigen::Matrix3d gram = q.transpose() * q;
    const double err = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().rowwise().sum().maxCoeff();
    if (err < 1e-15) break;
    if (err > 0.1) {
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::Matrix3d u = svd.matrixU();
      if ((u * svd.matrixV().transpose()).determinant() < 0.0) u.col(2) *= -1.0;
      return u * svd.matrixV().transpose();
    }
    q = q * (1.5 * Eigen::Matrix3d::Identity() - 0.5 * gram);
  }
  return q;
}

double orthonormality_error(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().rowwise().sum().maxCoeff();
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  const Eigen::Matrix3d k = hat(axis.normalized());
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

}  // namespace everrod
