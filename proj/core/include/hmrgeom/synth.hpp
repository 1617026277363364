#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hmrgeom/body_model.hpp"
#include "hmrgeom/camera.hpp"
#include "hmrgeom/fitting.hpp"
#include "hmrgeom/metrics.hpp"

namespace hmrgeom {

/// World-to-camera rigid transform: x_cam = rotation * x_world + translation.
struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  void validate() const;
};

/// Camera at `eye` looking at `target`; world gravity points along +y.
Extrinsics look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target);

Points3 camera_to_world(const Points3& joints_cam, const Extrinsics& extr);
Points3 world_to_camera(const Points3& joints_world, const Extrinsics& extr);

struct SceneSample {
  BodyParams params;  // camera frame
  Keypoints2d kp2d = Keypoints2d::Zero();
  std::array<double, kNumJoints> confidence{};
  BBox bbox;
  PinholeCamera camera;
  Extrinsics extrinsics;
  Points3 camera_joints;
  Points3 world_joints;
};

inline constexpr double kBBoxMargin = 0.10;
inline constexpr double kCropResolution = 256.0;

/// Projects the posed body, adds isotropic Gaussian keypoint noise, and builds a
/// square 10%-margin bbox around the keypoints. Joints projecting outside the
/// image get confidence 0. Throws BehindCamera.
SceneSample render_sample(const SkeletonTemplate& tpl, const BodyParams& params,
                          const PinholeCamera& camera, const Extrinsics& extr, double sigma_kp,
                          std::uint64_t seed);

/// Fitting problem whose targets are the sample's keypoints and whose mimic
/// reference and target height are the sample's ground truth.
FitProblem problem_from_sample(const SceneSample& sample,
                               std::shared_ptr<const SkeletonTemplate> tpl);

enum class PathShape { kLine, kCircle, kFigureEight };
enum class CameraMotion { kStatic, kOrbiting };

struct TrajectorySpec {
  PathShape path = PathShape::kLine;
  double length = 10.0;  // meters
  int frames = 300;
  double fps = 30.0;
  CameraMotion camera = CameraMotion::kStatic;
  double sigma_kp = 0.0;  // pixels
  BodyParams::ShapeVector shape = BodyParams::ShapeVector::Zero();
  std::uint64_t seed = 0;
  PinholeCamera intrinsics{{1000.0, 1000.0, 960.0, 540.0}, {1920, 1080}};
  int num_vertices = kDefaultTemplateVertices;

  void validate() const;
};

struct Trajectory {
  JointSeq gt_world;
  std::vector<SceneSample> samples;
};

/// Root position (world) and unit heading at arc length s along the path.
std::pair<Eigen::Vector3d, Eigen::Vector3d> path_point(const TrajectorySpec& spec, double s);

Trajectory make_trajectory(const TrajectorySpec& spec, const SkeletonTemplate& tpl);

/// Polyline length of the root trajectory.
double path_length(const Points3& roots);

/// Sample A at `base`; sample B with the body scaled in height by alpha through
/// shape component 0 and the translation scaled by alpha. B is an exact
/// magnified copy of A when only shape component 0 is non-zero.
std::pair<SceneSample, SceneSample> ambiguity_pair(const SkeletonTemplate& tpl,
                                                   const BodyParams& base,
                                                   const PinholeCamera& camera, double alpha);

/// Per-frame seed derived from a sequence seed.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace hmrgeom
