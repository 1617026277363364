#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hmrgeom {

/// N x 3 point set, one point per row (meters unless noted).
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Rodrigues' formula. Smooth through zero (Taylor expansion for tiny angles),
/// which the finite-difference Jacobians in fitting rely on.
Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& axis_angle);

/// Inverse of rotation_from_axis_angle; returns an angle in [0, pi].
Eigen::Vector3d axis_angle_from_rotation(const Eigen::Matrix3d& rotation);

/// Rotation about the gravity (y) axis by `angle` radians.
Eigen::Matrix3d rotation_about_y(double angle);

/// Uniform random rotation from three uniform variates in [0, 1).
Eigen::Matrix3d rotation_from_uniform(double u1, double u2, double u3);

bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-10);

}  // namespace hmrgeom
