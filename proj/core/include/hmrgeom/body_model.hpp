#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include <Eigen/Core>

#include "hmrgeom/geometry.hpp"

namespace hmrgeom {

inline constexpr int kNumJoints = 24;
inline constexpr int kNumPoseParams = 69;   // 23 non-root joints x axis-angle
inline constexpr int kNumShapeParams = 10;
inline constexpr int kNumBodyParams = kNumPoseParams + kNumShapeParams + 3 + 3;
inline constexpr int kRootJoint = 0;
inline constexpr int kMinTemplateVertices = 3 * kNumJoints;

/// SMPL joint topology. Root has parent -1.
inline constexpr std::array<int, kNumJoints> kJointParents = {
    -1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};

std::string_view joint_name(int joint);

/// Pose, shape, global orientation and metric camera-frame translation.
///
/// Layout of the packed vector (85 entries): pose(69), shape(10),
/// global_orient(3), translation(3).
struct BodyParams {
  using PoseVector = Eigen::Matrix<double, kNumPoseParams, 1>;
  using ShapeVector = Eigen::Matrix<double, kNumShapeParams, 1>;
  using Packed = Eigen::Matrix<double, kNumBodyParams, 1>;

  PoseVector pose = PoseVector::Zero();
  ShapeVector shape = ShapeVector::Zero();
  Eigen::Vector3d global_orient = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  BodyParams() = default;
  /// Validating constructor; throws InvalidArgument on non-finite values or an
  /// axis-angle of norm >= 2 pi.
  BodyParams(const PoseVector& pose, const ShapeVector& shape,
             const Eigen::Vector3d& global_orient, const Eigen::Vector3d& translation);

  Eigen::Vector3d joint_axis_angle(int joint) const {
    return pose.segment<3>(3 * (joint - 1));
  }

  Packed pack() const;
  static BodyParams unpack(const Packed& packed);

  void validate() const;
};

/// Posed geometry in the camera frame.
struct BodyState {
  Points3 joints;
  Points3 vertices;
};

/// Procedural body template with SMPL parameter shapes.
///
/// Up is -y in the camera frame at rest; the body faces the camera (-z).
/// Vertices [3j, 3j+3) are a small ring centered on joint j and the joint
/// regressor averages exactly those three, so regressed joints coincide with
/// the kinematic joints for any pose. Shape direction 0 is a uniform scaling
/// about the pelvis; directions 1..9 are horizontal radial fields that leave
/// the height untouched.
class SkeletonTemplate {
 public:
  using Matrix = Eigen::MatrixXd;

  SkeletonTemplate(Points3 vertices, Matrix skin_weights, Matrix joint_regressor,
                   std::array<Points3, kNumShapeParams> shape_dirs);

  int num_vertices() const { return static_cast<int>(vertices_.rows()); }

  const Points3& vertices() const { return vertices_; }
  const Matrix& skin_weights() const { return skin_weights_; }        // V x 24
  const Matrix& joint_regressor() const { return joint_regressor_; }  // 24 x V
  const Points3& shape_dir(int k) const { return shape_dirs_[static_cast<std::size_t>(k)]; }
  const std::array<Points3, kNumShapeParams>& shape_dirs() const { return shape_dirs_; }

  /// Regressed rest joints of the unshaped template.
  const Points3& rest_joints() const { return rest_joints_; }
  /// Rest offsets from each joint's parent (root offset is its position).
  Points3 rest_offsets() const;

  /// Regressor applied to shape direction k (24 x 3).
  const Points3& joint_shape_dir(int k) const {
    return joint_shape_dirs_[static_cast<std::size_t>(k)];
  }

  /// Checks every structural invariant; throws InvalidArgument.
  void validate() const;

 private:
  Points3 vertices_;
  Matrix skin_weights_;
  Matrix joint_regressor_;
  std::array<Points3, kNumShapeParams> shape_dirs_;
  Points3 rest_joints_;
  std::array<Points3, kNumShapeParams> joint_shape_dirs_;
};

inline constexpr int kDefaultTemplateVertices = 445;
inline constexpr double kTemplateHeight = 1.70;
inline constexpr double kHeightGainPerUnit = 0.07;

/// Deterministic procedural template. Throws TooFewVertices below 72.
SkeletonTemplate default_template(int num_vertices = kDefaultTemplateVertices);

struct RestShape {
  Points3 vertices;
  Points3 joints;
};

RestShape shape_blend(const SkeletonTemplate& tpl, const BodyParams::ShapeVector& shape);

/// Rest joints only; cheaper than shape_blend when vertices are not needed.
Points3 shaped_joints(const SkeletonTemplate& tpl, const BodyParams::ShapeVector& shape);

/// Posed joints only (kinematic chain, no skinning).
Points3 forward_joints(const SkeletonTemplate& tpl, const BodyParams& params);

BodyState forward(const SkeletonTemplate& tpl, const BodyParams& params);

/// Vertical extent of the shape-blended rest vertices, in meters.
double height(const SkeletonTemplate& tpl, const BodyParams::ShapeVector& shape);

/// Returns `shape` with component 0 moved so that height(...) == target.
BodyParams::ShapeVector shape_for_height(const SkeletonTemplate& tpl,
                                         const BodyParams::ShapeVector& shape, double target);

}  // namespace hmrgeom
