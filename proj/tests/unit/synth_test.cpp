#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Geometry>

#include "hmrgeom/errors.hpp"
#include "hmrgeom/synth.hpp"
#include "test_support.hpp"

namespace hmrgeom {
namespace {

using test::Rng;
using test::uniform;

Eigen::Matrix4d homogeneous(const Extrinsics& e) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = e.rotation;
  m.topRightCorner<3, 1>() = e.translation;
  return m;
}

TEST(LookAt, PointsOpticalAxisAtTarget) {
  Rng rng(40);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d eye = test::random_vector<3>(rng, -10, 10);
    const Eigen::Vector3d target(uniform(rng, -1, 1), -0.95, uniform(rng, -1, 1));
    const Extrinsics e = look_at(eye, target);
    EXPECT_TRUE(is_rotation(e.rotation));
    EXPECT_LT((e.rotation * eye + e.translation).norm(), 1e-12);  // eye maps to origin
    const Eigen::Vector3d t = e.rotation * target + e.translation;
    EXPECT_NEAR(t.x(), 0.0, 1e-12);
    EXPECT_NEAR(t.y(), 0.0, 1e-12);
    EXPECT_NEAR(t.z(), (target - eye).norm(), 1e-12);
    // Image x stays horizontal: the camera's right axis has no gravity part.
    EXPECT_NEAR(e.rotation(0, 1), 0.0, 1e-12);
  }
}

TEST(LookAt, LevelCameraKeepsGravityDown) {
  const Extrinsics e = look_at({0, -1.5, -5}, {0, -1.5, 0});
  EXPECT_LT((e.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-15);
  const Extrinsics down = look_at({0, -5, 0}, {0, 0, 0});  // straight along gravity
  EXPECT_TRUE(is_rotation(down.rotation));
}

TEST(Extrinsics, WorldCameraRoundTripMatchesHomogeneousOracle) {
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    Extrinsics e;
    e.rotation = test::random_rotation(rng);
    e.translation = test::random_vector<3>(rng, -5, 5);
    const Points3 world = test::random_points(rng, 24, 3.0);
    const Points3 cam = world_to_camera(world, e);
    const Eigen::Matrix4d m = homogeneous(e);
    for (int j = 0; j < 24; ++j) {
      const Eigen::Vector4d h = m * world.row(j).transpose().homogeneous();
      EXPECT_LT((cam.row(j).transpose() - h.head<3>()).norm(), 1e-12);
      const Eigen::Vector4d back = m.inverse() * cam.row(j).transpose().homogeneous();
      EXPECT_LT((camera_to_world(cam, e).row(j).transpose() - back.head<3>()).norm(), 1e-11);
    }
    EXPECT_LT((camera_to_world(cam, e) - world).cwiseAbs().maxCoeff(), 1e-12);
  }
  const Points3 p = test::random_points(rng, 5);
  EXPECT_EQ(camera_to_world(p, Extrinsics{}), p);
  Extrinsics bad;
  bad.rotation(0, 0) = 2.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Render, NoiselessKeypointsAreExactProjections) {
  Rng rng(42);
  const PinholeCamera cam = test::hd_camera();
  const BodyParams body = test::body_in_front(rng, 5.0);
  const SceneSample s = render_sample(*test::template_ptr(), body, cam, Extrinsics{}, 0.0, 9);
  const Points3 joints = forward_joints(test::shared_template(), body);
  for (int j = 0; j < kNumJoints; ++j) {
    const Eigen::Vector3d h = cam.K.matrix() * joints.row(j).transpose();
    EXPECT_NEAR(s.kp2d(j, 0), h.x() / h.z(), 1e-9);
    EXPECT_NEAR(s.kp2d(j, 1), h.y() / h.z(), 1e-9);
    EXPECT_EQ(s.confidence[j], 1.0);
  }
  EXPECT_EQ(s.camera_joints, joints);
  EXPECT_EQ(s.world_joints, joints);
}

TEST(Render, BoxContainsKeypointsWithMargin) {
  Rng rng(43);
  for (int i = 0; i < 20; ++i) {
    const BodyParams body = test::body_in_front(rng, uniform(rng, 3, 10));
    const SceneSample s =
        render_sample(*test::template_ptr(), body, test::hd_camera(), Extrinsics{}, 2.0, i);
    const double extent = std::max(s.kp2d.col(0).maxCoeff() - s.kp2d.col(0).minCoeff(),
                                   s.kp2d.col(1).maxCoeff() - s.kp2d.col(1).minCoeff());
    EXPECT_NEAR(s.bbox.side, 1.1 * extent, 1e-9);
    EXPECT_NEAR(s.bbox.output_resolution(), 256.0, 1e-9);
    for (int j = 0; j < kNumJoints; ++j) {
      EXPECT_GE(s.kp2d(j, 0), s.bbox.u0);
      EXPECT_LE(s.kp2d(j, 0), s.bbox.u0 + s.bbox.side);
      EXPECT_GE(s.kp2d(j, 1), s.bbox.v0);
      EXPECT_LE(s.kp2d(j, 1), s.bbox.v0 + s.bbox.side);
    }
  }
}

TEST(Render, NoiseIsSeededAndHasRequestedSpread) {
  Rng rng(44);
  const BodyParams body = test::body_in_front(rng, 5.0);
  const auto& tpl = *test::template_ptr();
  const SceneSample clean = render_sample(tpl, body, test::hd_camera(), Extrinsics{}, 0.0, 0);
  const SceneSample a = render_sample(tpl, body, test::hd_camera(), Extrinsics{}, 3.0, 77);
  const SceneSample b = render_sample(tpl, body, test::hd_camera(), Extrinsics{}, 3.0, 77);
  const SceneSample c = render_sample(tpl, body, test::hd_camera(), Extrinsics{}, 3.0, 78);
  EXPECT_EQ(a.kp2d, b.kp2d);
  EXPECT_NE(a.kp2d, c.kp2d);
  double sum_sq = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const SceneSample n = render_sample(tpl, body, test::hd_camera(), Extrinsics{}, 3.0, seed);
    sum_sq += (n.kp2d - clean.kp2d).squaredNorm();
    count += 2 * kNumJoints;
  }
  EXPECT_NEAR(std::sqrt(sum_sq / count), 3.0, 0.1);
}

TEST(Render, OffImageJointsHaveZeroConfidence) {
  BodyParams body;
  body.translation = {1.2, 0.0, 2.0};  // right half of the body leaves the frame
  const SceneSample s =
      render_sample(*test::template_ptr(), body, test::hd_camera(), Extrinsics{}, 0.0, 0);
  int hidden = 0;
  for (int j = 0; j < kNumJoints; ++j) {
    const bool inside = s.kp2d(j, 0) >= 0 && s.kp2d(j, 0) < 1920 && s.kp2d(j, 1) >= 0 &&
                        s.kp2d(j, 1) < 1080;
    EXPECT_EQ(s.confidence[j], inside ? 1.0 : 0.0);
    hidden += inside ? 0 : 1;
  }
  EXPECT_GT(hidden, 0);
}

TEST(Render, RejectsBodiesBehindTheCamera) {
  BodyParams body;
  body.translation = {0, 0, 0.3};  // feet and head straddle z = 0 once tilted
  body.global_orient = {std::numbers::pi / 2, 0, 0};
  EXPECT_THROW(render_sample(*test::template_ptr(), body, test::hd_camera(), Extrinsics{}, 0, 0),
               BehindCamera);
  EXPECT_THROW(render_sample(*test::template_ptr(), BodyParams{}, test::hd_camera(), Extrinsics{},
                             -1.0, 0),
               InvalidArgument);
}

TEST(Render, DoublingFocalAndDepthNearlyPreservesKeypoints) {
  // Exact only for a planar body; a body 6 m away is nearly planar.
  Rng rng(45);
  BodyParams body = test::body_in_front(rng, 6.0);
  BodyParams far = body;
  far.translation.z() *= 2.0;
  const auto& tpl = *test::template_ptr();
  const SceneSample a = render_sample(tpl, body, test::hd_camera(1000), Extrinsics{}, 0, 0);
  const SceneSample b = render_sample(tpl, far, test::hd_camera(2000), Extrinsics{}, 0, 0);
  const double rms = std::sqrt((a.kp2d - b.kp2d).squaredNorm() / kNumJoints);
  EXPECT_LT(rms, 6.0);
  EXPECT_GT(rms, 0.0);
}

TEST(Render, LateralShiftMovesKeypointsByFocalOverDepth) {
  BodyParams body;
  body.translation = {0, 0, 5.0};
  BodyParams shifted = body;
  shifted.translation.x() += 0.25;
  const auto& tpl = *test::template_ptr();
  const SceneSample a = render_sample(tpl, body, test::hd_camera(), Extrinsics{}, 0, 0);
  const SceneSample b = render_sample(tpl, shifted, test::hd_camera(), Extrinsics{}, 0, 0);
  const Points3& joints = a.camera_joints;
  for (int j = 0; j < kNumJoints; ++j) {
    EXPECT_NEAR(b.kp2d(j, 0) - a.kp2d(j, 0), 1000.0 * 0.25 / joints(j, 2), 1e-9);
    EXPECT_NEAR(b.kp2d(j, 1), a.kp2d(j, 1), 1e-9);
  }
}

TEST(Trajectory, LineRootsFollowThePath) {
  TrajectorySpec spec;
  spec.length = 6.0;
  spec.frames = 61;
  const Trajectory traj = make_trajectory(spec, *test::template_ptr());
  ASSERT_EQ(traj.gt_world.num_frames(), 61);
  ASSERT_EQ(traj.samples.size(), 61u);
  const Points3 roots = traj.gt_world.roots();
  for (int i = 0; i < 61; ++i) {
    EXPECT_NEAR(roots(i, 0), -3.0 + 0.1 * i, 1e-9);
    EXPECT_NEAR(roots(i, 1), -0.95, 1e-9);
    EXPECT_NEAR(roots(i, 2), 0.0, 1e-9);
  }
  EXPECT_NEAR(path_length(roots), 6.0, 1e-9);
}

TEST(Trajectory, BodyStaysUprightAndFacesItsHeading) {
  TrajectorySpec spec;
  spec.path = PathShape::kCircle;
  spec.length = 8.0;
  spec.frames = 40;
  const Trajectory traj = make_trajectory(spec, *test::template_ptr());
  for (int i = 0; i < spec.frames; ++i) {
    const Points3& w = traj.gt_world.frames[i];
    EXPECT_LT(w(15, 1), w(0, 1) - 0.3);  // head above pelvis in world (up is -y)
    const double s = spec.length * i / (spec.frames - 1);
    const Eigen::Vector3d heading = path_point(spec, s).second;
    // Feet point roughly along the heading; the gait tilts them slightly.
    const Eigen::Vector3d toes = (w.row(10) + w.row(11) - w.row(7) - w.row(8)).transpose();
    EXPECT_GT(toes.normalized().dot(heading), 0.85);
  }
}

TEST(Trajectory, ClosedPathsHaveRequestedLength) {
  for (PathShape shape : {PathShape::kCircle, PathShape::kFigureEight}) {
    TrajectorySpec spec;
    spec.path = shape;
    spec.length = 12.0;
    spec.frames = 1000;
    const Trajectory traj = make_trajectory(spec, *test::template_ptr());
    const Points3 roots = traj.gt_world.roots();
    EXPECT_NEAR(path_length(roots), 12.0, 0.001 * 12.0);
    EXPECT_LT((roots.row(0) - roots.row(999)).norm(), 1e-9);  // closes on itself
  }
}

TEST(Trajectory, PathHeadingIsTheUnitTangent) {
  for (PathShape shape : {PathShape::kLine, PathShape::kCircle, PathShape::kFigureEight}) {
    TrajectorySpec spec;
    spec.path = shape;
    spec.length = 9.0;
    for (double s = 0.05; s < 9.0; s += 0.37) {
      const auto [p0, h] = path_point(spec, s);
      const auto [p1, unused] = path_point(spec, s + 1e-6);
      EXPECT_NEAR(h.norm(), 1.0, 1e-12);
      EXPECT_LT(((p1 - p0) / 1e-6 - h).norm(), 1e-5);
    }
  }
}

TEST(Trajectory, IsDeterministicPerSeed) {
  TrajectorySpec spec;
  spec.frames = 20;
  spec.sigma_kp = 1.5;
  spec.seed = 5;
  const auto& tpl = *test::template_ptr();
  const Trajectory a = make_trajectory(spec, tpl);
  const Trajectory b = make_trajectory(spec, tpl);
  spec.seed = 6;
  const Trajectory c = make_trajectory(spec, tpl);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(a.samples[i].kp2d, b.samples[i].kp2d);
    EXPECT_NE(a.samples[i].kp2d, c.samples[i].kp2d);
    EXPECT_EQ(a.gt_world.frames[i], c.gt_world.frames[i]);  // noise only touches 2D
  }
}

TEST(Trajectory, OrbitingCameraSweepsAQuarterTurn) {
  TrajectorySpec spec;
  spec.camera = CameraMotion::kOrbiting;
  spec.frames = 11;
  const Trajectory traj = make_trajectory(spec, *test::template_ptr());
  const auto eye = [](const Extrinsics& e) -> Eigen::Vector3d {
    return -e.rotation.transpose() * e.translation;
  };
  const Eigen::Vector3d first = eye(traj.samples.front().extrinsics);
  const Eigen::Vector3d last = eye(traj.samples.back().extrinsics);
  EXPECT_NEAR(first.y(), -1.5, 1e-9);
  EXPECT_NEAR(last.y(), -1.5, 1e-9);
  const double angle = std::acos(Eigen::Vector2d(first.x(), first.z()).normalized().dot(
      Eigen::Vector2d(last.x(), last.z()).normalized()));
  EXPECT_NEAR(angle, std::numbers::pi / 2, 1e-9);
  // World joints do not depend on the camera.
  spec.camera = CameraMotion::kStatic;
  const Trajectory fixed = make_trajectory(spec, *test::template_ptr());
  for (int i = 0; i < 11; ++i) {
    EXPECT_LT((fixed.gt_world.frames[i] - traj.gt_world.frames[i]).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Trajectory, ValidatesSpec) {
  TrajectorySpec spec;
  spec.frames = 1;
  EXPECT_THROW(make_trajectory(spec, *test::template_ptr()), InvalidArgument);
  spec.frames = 10;
  spec.length = 0.0;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec.length = 1.0;
  spec.sigma_kp = -1.0;
  EXPECT_THROW(spec.validate(), InvalidArgument);
}

TEST(SplitSeed, DistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    seen.insert(split_seed(42, i));
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(split_seed(42, 7), split_seed(42, 7));
  EXPECT_NE(split_seed(42, 7), split_seed(43, 7));
}

TEST(AmbiguityPair, UnitScaleIsIdentical) {
  Rng rng(46);
  const BodyParams base = test::body_in_front(rng, 5.0);
  const auto [a, b] = ambiguity_pair(*test::template_ptr(), base, test::hd_camera(), 1.0);
  EXPECT_LT((a.kp2d - b.kp2d).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AmbiguityPair, PureScaleBodyIsAnExactMagnification) {
  Rng rng(47);
  BodyParams base = test::body_in_front(rng, 5.0);
  base.shape.tail<9>().setZero();
  const auto& tpl = *test::template_ptr();
  const auto [a, b] = ambiguity_pair(tpl, base, test::hd_camera(), 2.0);
  EXPECT_LT((a.kp2d - b.kp2d).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(height(tpl, b.params.shape), 2.0 * height(tpl, base.shape), 1e-12);
  EXPECT_LT((b.camera_joints - 2.0 * a.camera_joints).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AmbiguityPair, RealisticShapeIsNearlyIndistinguishable) {
  Rng rng(48);
  for (int i = 0; i < 10; ++i) {
    const BodyParams base = test::body_in_front(rng, uniform(rng, 4.0, 8.0));
    const auto [a, b] = ambiguity_pair(*test::template_ptr(), base, test::hd_camera(), 1.1);
    const double rms = std::sqrt((a.kp2d - b.kp2d).squaredNorm() / kNumJoints);
    EXPECT_LT(rms, 0.5);
  }
}

}  // namespace
}  // namespace hmrgeom
