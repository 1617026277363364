#include "hmrgeom/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "hmrgeom/errors.hpp"

namespace hmrgeom {

namespace {

constexpr double kRootHeight = 0.95;    // pelvis above the ground plane
constexpr double kCameraHeight = 1.5;
constexpr double kCameraStandoff = 5.0;  // beyond the path's extent
constexpr double kStride = 1.4;          // meters per gait cycle
constexpr double kOrbitSweep = 0.5 * std::numbers::pi;

double path_extent(const TrajectorySpec& spec) {
  switch (spec.path) {
    case PathShape::kLine:
      return 0.5 * spec.length;
    case PathShape::kCircle:
      return spec.length / (2.0 * std::numbers::pi);
    case PathShape::kFigureEight:
      return 2.0 * spec.length / (4.0 * std::numbers::pi);
  }
  return spec.length;
}

// Simple gait: legs swing about the body's lateral axis, arms hang and swing
// in counter-phase.
BodyParams::PoseVector walking_pose(double phase) {
  BodyParams::PoseVector pose = BodyParams::PoseVector::Zero();
  auto set = [&pose](int joint, double ax, double ay, double az) {
    pose.segment<3>(3 * (joint - 1)) = Eigen::Vector3d(ax, ay, az);
  };
  const double swing = std::sin(phase);
  set(1, 0.35 * swing, 0.0, 0.0);
  set(2, -0.35 * swing, 0.0, 0.0);
  set(4, -0.5 * std::max(0.0, -std::sin(phase - 0.6)), 0.0, 0.0);
  set(5, -0.5 * std::max(0.0, std::sin(phase - 0.6)), 0.0, 0.0);
  set(16, -0.25 * swing, 0.0, 1.2);
  set(17, 0.25 * swing, 0.0, -1.2);
  set(18, 0.0, -0.3, 0.0);
  set(19, 0.0, 0.3, 0.0);
  return pose;
}

}  // namespace

void Extrinsics::validate() const {
  if (!rotation.allFinite() || !translation.allFinite() || !is_rotation(rotation, 1e-10)) {
    throw InvalidArgument("extrinsic rotation must be orthonormal with det +1");
  }
}

Extrinsics look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d right = Eigen::Vector3d::UnitY().cross(forward);
  if (right.norm() < 1e-9) {
    right = Eigen::Vector3d::UnitX();
  }
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);
  Extrinsics extr;
  extr.rotation.row(0) = right.transpose();
  extr.rotation.row(1) = down.transpose();
  extr.rotation.row(2) = forward.transpose();
  extr.translation = -extr.rotation * eye;
  return extr;
}

Points3 camera_to_world(const Points3& joints_cam, const Extrinsics& extr) {
  // x_world = R^T (x_cam - t)
  return (joints_cam.rowwise() - extr.translation.transpose()) * extr.rotation;
}

Points3 world_to_camera(const Points3& joints_world, const Extrinsics& extr) {
  Points3 out = joints_world * extr.rotation.transpose();
  out.rowwise() += extr.translation.transpose();
  return out;
}

SceneSample render_sample(const SkeletonTemplate& tpl, const BodyParams& params,
                          const PinholeCamera& camera, const Extrinsics& extr, double sigma_kp,
                          std::uint64_t seed) {
  validate(camera.K);
  validate(camera.size);
  extr.validate();
  if (!(sigma_kp >= 0.0)) {
    throw InvalidArgument("keypoint noise must be non-negative");
  }

  SceneSample sample;
  sample.params = params;
  sample.camera = camera;
  sample.extrinsics = extr;
  sample.camera_joints = forward_joints(tpl, params);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma_kp > 0.0 ? sigma_kp : 1.0);
  for (int j = 0; j < kNumJoints; ++j) {
    const Eigen::Vector3d x = sample.camera_joints.row(j).transpose();
    if (!(x.z() > 0.0)) {
      throw BehindCamera("joint " + std::string(joint_name(j)) + " is behind the camera");
    }
    const Pixel px = project(x, camera.K);
    sample.kp2d(j, 0) = px.u;
    sample.kp2d(j, 1) = px.v;
    if (sigma_kp > 0.0) {
      sample.kp2d(j, 0) += noise(rng);
      sample.kp2d(j, 1) += noise(rng);
    }
    const bool inside = sample.kp2d(j, 0) >= 0.0 && sample.kp2d(j, 0) < camera.size.width &&
                        sample.kp2d(j, 1) >= 0.0 && sample.kp2d(j, 1) < camera.size.height;
    sample.confidence[static_cast<std::size_t>(j)] = inside ? 1.0 : 0.0;
  }

  const auto u = sample.kp2d.col(0);
  const auto v = sample.kp2d.col(1);
  sample.bbox = squarify(u.minCoeff(), v.minCoeff(), u.maxCoeff(), v.maxCoeff(), kBBoxMargin,
                         kCropResolution);
  sample.world_joints = camera_to_world(sample.camera_joints, extr);
  return sample;
}

FitProblem problem_from_sample(const SceneSample& sample,
                               std::shared_ptr<const SkeletonTemplate> tpl) {
  FitProblem prob;
  prob.target_kp2d = sample.kp2d;
  prob.confidence = sample.confidence;
  prob.K = sample.camera.K;
  prob.reference = sample.params;
  prob.mimic_global_orient = true;
  prob.target_height = height(*tpl, sample.params.shape);
  prob.tpl = std::move(tpl);
  return prob;
}

void TrajectorySpec::validate() const {
  if (frames < 2) {
    throw InvalidArgument("trajectory needs at least two frames");
  }
  if (!(sigma_kp >= 0.0)) {
    throw InvalidArgument("keypoint noise must be non-negative");
  }
  if (!(length > 0.0) || !(fps > 0.0)) {
    throw InvalidArgument("trajectory length and frame rate must be positive");
  }
  if (!shape.allFinite()) {
    throw InvalidArgument("trajectory body shape must be finite");
  }
  hmrgeom::validate(intrinsics.K);
  hmrgeom::validate(intrinsics.size);
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> path_point(const TrajectorySpec& spec, double s) {
  const double y = -kRootHeight;
  switch (spec.path) {
    case PathShape::kLine:
      return {{s - 0.5 * spec.length, y, 0.0}, Eigen::Vector3d::UnitX()};
    case PathShape::kCircle: {
      const double r = spec.length / (2.0 * std::numbers::pi);
      const double a = s / r;
      return {{r * std::cos(a), y, r * std::sin(a)}, {-std::sin(a), 0.0, std::cos(a)}};
    }
    case PathShape::kFigureEight: {
      // Two tangent loops through the origin, traversed in opposite senses.
      const double r = spec.length / (4.0 * std::numbers::pi);
      const double half = 0.5 * spec.length;
      if (s <= half) {
        const double a = s / r;
        return {{-r + r * std::cos(a), y, r * std::sin(a)}, {-std::sin(a), 0.0, std::cos(a)}};
      }
      const double a = (s - half) / r;
      return {{r - r * std::cos(a), y, r * std::sin(a)}, {std::sin(a), 0.0, std::cos(a)}};
    }
  }
  return {Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX()};
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trajectory make_trajectory(const TrajectorySpec& spec, const SkeletonTemplate& tpl) {
  spec.validate();
  const double standoff = path_extent(spec) + kCameraStandoff;
  const Eigen::Vector3d centroid(0.0, -kRootHeight, 0.0);

  Trajectory out;
  out.gt_world.fps = spec.fps;
  out.gt_world.frames.reserve(static_cast<std::size_t>(spec.frames));
  out.samples.reserve(static_cast<std::size_t>(spec.frames));
  for (int i = 0; i < spec.frames; ++i) {
    const double progress = static_cast<double>(i) / (spec.frames - 1);
    const double s = spec.length * progress;
    const auto [position, heading] = path_point(spec, s);

    double orbit = -0.5 * std::numbers::pi;
    if (spec.camera == CameraMotion::kOrbiting) {
      orbit += kOrbitSweep * progress;
    }
    const Eigen::Vector3d eye(standoff * std::cos(orbit), -kCameraHeight, standoff * std::sin(orbit));
    const Extrinsics extr = look_at(eye, centroid);

    // Body faces -z at rest; yaw it onto the heading.
    const Eigen::Matrix3d body_world = rotation_about_y(std::atan2(-heading.x(), -heading.z()));
    BodyParams params;
    params.pose = walking_pose(2.0 * std::numbers::pi * s / kStride);
    params.shape = spec.shape;
    params.global_orient = axis_angle_from_rotation(extr.rotation * body_world);
    params.translation = extr.rotation * position + extr.translation;

    SceneSample sample = render_sample(tpl, params, spec.intrinsics, extr, spec.sigma_kp,
                                       split_seed(spec.seed, static_cast<std::uint64_t>(i)));
    out.gt_world.frames.push_back(sample.world_joints);
    out.samples.push_back(std::move(sample));
  }
  return out;
}

double path_length(const Points3& roots) {
  double len = 0.0;
  for (Eigen::Index t = 1; t < roots.rows(); ++t) {
    len += (roots.row(t) - roots.row(t - 1)).norm();
  }
  return len;
}

std::pair<SceneSample, SceneSample> ambiguity_pair(const SkeletonTemplate& tpl,
                                                   const BodyParams& base,
                                                   const PinholeCamera& camera, double alpha) {
  if (!(alpha > 0.0)) {
    throw InvalidArgument("ambiguity scale must be positive");
  }
  const Extrinsics identity;
  SceneSample a = render_sample(tpl, base, camera, identity, 0.0, 0);
  BodyParams scaled = base;
  scaled.shape = shape_for_height(tpl, base.shape, alpha * height(tpl, base.shape));
  scaled.translation = alpha * base.translation;
  SceneSample b = render_sample(tpl, scaled, camera, identity, 0.0, 0);
  return {std::move(a), std::move(b)};
}

}  // namespace hmrgeom
