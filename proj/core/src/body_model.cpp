#include "hmrgeom/body_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "hmrgeom/errors.hpp"

namespace hmrgeom {

namespace {

constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "pelvis",     "left_hip",       "right_hip",      "spine1",     "left_knee",
    "right_knee", "spine2",         "left_ankle",     "right_ankle", "spine3",
    "left_foot",  "right_foot",     "neck",           "left_collar", "right_collar",
    "head",       "left_shoulder",  "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",    "left_hand",      "right_hand"};

// Rest joints of a neutral T-pose in a y-up body frame, pelvis at the origin.
// Rescaled to exactly kTemplateHeight after sampling.
constexpr double kRestJointsUp[kNumJoints][3] = {
    {0.0, 0.0, 0.0},        {0.085, -0.08, 0.0},    {-0.085, -0.08, 0.0},
    {0.0, 0.11, -0.01},     {0.10, -0.47, 0.005},   {-0.10, -0.47, 0.005},
    {0.0, 0.24, -0.005},    {0.11, -0.87, -0.03},   {-0.11, -0.87, -0.03},
    {0.0, 0.30, 0.0},       {0.12, -0.93, 0.09},    {-0.12, -0.93, 0.09},
    {0.0, 0.50, -0.01},     {0.075, 0.42, -0.005},  {-0.075, 0.42, -0.005},
    {0.0, 0.60, 0.03},      {0.17, 0.45, -0.01},    {-0.17, 0.45, -0.01},
    {0.42, 0.45, -0.02},    {-0.42, 0.45, -0.02},   {0.67, 0.45, -0.01},
    {-0.67, 0.45, -0.01},   {0.76, 0.45, -0.01},    {-0.76, 0.45, -0.01}};

struct Capsule {
  Eigen::Vector3d a;
  Eigen::Vector3d b;
  double radius;
};

Eigen::Vector3d rest_joint_up(int j) {
  return {kRestJointsUp[j][0], kRestJointsUp[j][1], kRestJointsUp[j][2]};
}

// One capsule per joint, owned (and mostly skinned) by that joint.
std::array<Capsule, kNumJoints> body_capsules() {
  auto seg = [](int from, int to, double r) {
    return Capsule{rest_joint_up(from), rest_joint_up(to), r};
  };
  auto tip = [](int from, Eigen::Vector3d offset, double r) {
    return Capsule{rest_joint_up(from), rest_joint_up(from) + offset, r};
  };
  return {{
      Capsule{{-0.09, -0.04, 0.0}, {0.09, -0.04, 0.0}, 0.10},
      seg(1, 4, 0.075),
      seg(2, 5, 0.075),
      seg(3, 6, 0.11),
      seg(4, 7, 0.05),
      seg(5, 8, 0.05),
      seg(6, 9, 0.12),
      seg(7, 10, 0.04),
      seg(8, 11, 0.04),
      seg(9, 12, 0.12),
      tip(10, {0.0, 0.0, 0.08}, 0.03),
      tip(11, {0.0, 0.0, 0.08}, 0.03),
      seg(12, 15, 0.05),
      seg(13, 16, 0.05),
      seg(14, 17, 0.05),
      tip(15, {0.0, 0.12, 0.01}, 0.09),
      seg(16, 18, 0.05),
      seg(17, 19, 0.05),
      seg(18, 20, 0.04),
      seg(19, 21, 0.04),
      seg(20, 22, 0.035),
      seg(21, 23, 0.035),
      tip(22, {0.08, 0.0, 0.0}, 0.03),
      tip(23, {-0.08, 0.0, 0.0}, 0.03),
  }};
}

// splitmix64; the template must not depend on the standard library's
// distribution implementations.
class TemplateRng {
 public:
  explicit TemplateRng(std::uint64_t seed) : state_(seed) {}
  double uniform() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t kTemplateSeed = 0x5eed'b0d7'1700ULL;
constexpr double kRingRadius = 0.02;
constexpr double kRadialAmplitude = 0.025;
constexpr double kSkinBlendSpan = 0.6;

void orthonormal_basis(const Eigen::Vector3d& d, Eigen::Vector3d& e1, Eigen::Vector3d& e2) {
  Eigen::Index axis;
  d.cwiseAbs().minCoeff(&axis);
  e1 = d.cross(Eigen::Vector3d::Unit(axis)).normalized();
  e2 = d.normalized().cross(e1);
}

void check_finite(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidArgument(std::string("non-finite ") + what);
  }
}

}  // namespace

std::string_view joint_name(int joint) {
  if (joint < 0 || joint >= kNumJoints) {
    throw InvalidArgument("joint index out of range: " + std::to_string(joint));
  }
  return kJointNames[static_cast<std::size_t>(joint)];
}

BodyParams::BodyParams(const PoseVector& pose_, const ShapeVector& shape_,
                       const Eigen::Vector3d& global_orient_, const Eigen::Vector3d& translation_)
    : pose(pose_), shape(shape_), global_orient(global_orient_), translation(translation_) {
  validate();
}

void BodyParams::validate() const {
  check_finite(pose, "pose");
  check_finite(shape, "shape");
  check_finite(global_orient, "global orientation");
  check_finite(translation, "translation");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (int j = 1; j < kNumJoints; ++j) {
    if (joint_axis_angle(j).norm() >= kTwoPi) {
      throw InvalidArgument("axis-angle of joint " + std::string(joint_name(j)) +
                            " must have norm < 2 pi");
    }
  }
  if (global_orient.norm() >= kTwoPi) {
    throw InvalidArgument("global orientation must have norm < 2 pi");
  }
}

BodyParams::Packed BodyParams::pack() const {
  Packed p;
  p << pose, shape, global_orient, translation;
  return p;
}

BodyParams BodyParams::unpack(const Packed& packed) {
  BodyParams out;
  out.pose = packed.segment<kNumPoseParams>(0);
  out.shape = packed.segment<kNumShapeParams>(kNumPoseParams);
  out.global_orient = packed.segment<3>(kNumPoseParams + kNumShapeParams);
  out.translation = packed.segment<3>(kNumPoseParams + kNumShapeParams + 3);
  return out;
}

SkeletonTemplate::SkeletonTemplate(Points3 vertices, Matrix skin_weights, Matrix joint_regressor,
                                   std::array<Points3, kNumShapeParams> shape_dirs)
    : vertices_(std::move(vertices)),
      skin_weights_(std::move(skin_weights)),
      joint_regressor_(std::move(joint_regressor)),
      shape_dirs_(std::move(shape_dirs)) {
  validate();
  rest_joints_ = joint_regressor_ * vertices_;
  for (std::size_t k = 0; k < shape_dirs_.size(); ++k) {
    joint_shape_dirs_[k] = joint_regressor_ * shape_dirs_[k];
  }
}

Points3 SkeletonTemplate::rest_offsets() const {
  Points3 offsets = rest_joints_;
  for (int j = 1; j < kNumJoints; ++j) {
    offsets.row(j) = rest_joints_.row(j) - rest_joints_.row(kJointParents[j]);
  }
  return offsets;
}

void SkeletonTemplate::validate() const {
  const auto v = vertices_.rows();
  if (v < kMinTemplateVertices) {
    throw TooFewVertices("template needs at least " + std::to_string(kMinTemplateVertices) +
                         " vertices, got " + std::to_string(v));
  }
  if (skin_weights_.rows() != v || skin_weights_.cols() != kNumJoints) {
    throw InvalidArgument("skin weights must be V x 24");
  }
  if (joint_regressor_.rows() != kNumJoints || joint_regressor_.cols() != v) {
    throw InvalidArgument("joint regressor must be 24 x V");
  }
  for (const auto& dir : shape_dirs_) {
    if (dir.rows() != v) {
      throw InvalidArgument("shape directions must be V x 3");
    }
  }
  constexpr double kTol = 1e-9;
  if (skin_weights_.minCoeff() < 0.0 || joint_regressor_.minCoeff() < 0.0) {
    throw InvalidArgument("skin weights and regressor must be non-negative");
  }
  if ((skin_weights_.rowwise().sum().array() - 1.0).abs().maxCoeff() > kTol) {
    throw InvalidArgument("skin weight rows must sum to 1");
  }
  if ((joint_regressor_.rowwise().sum().array() - 1.0).abs().maxCoeff() > kTol) {
    throw InvalidArgument("joint regressor rows must sum to 1");
  }
  const auto y = vertices_.col(1);
  const auto y_up = (vertices_.col(1) + shape_dirs_[0].col(1));
  if (!((y_up.maxCoeff() - y_up.minCoeff()) > (y.maxCoeff() - y.minCoeff()))) {
    throw InvalidArgument("shape direction 0 must increase body height");
  }
}

SkeletonTemplate default_template(int num_vertices) {
  if (num_vertices < kMinTemplateVertices) {
    throw TooFewVertices("template needs at least " + std::to_string(kMinTemplateVertices) +
                         " vertices, got " + std::to_string(num_vertices));
  }
  const auto nv = static_cast<Eigen::Index>(num_vertices);
  Points3 verts(nv, 3);
  SkeletonTemplate::Matrix weights = SkeletonTemplate::Matrix::Zero(nv, kNumJoints);
  SkeletonTemplate::Matrix regressor = SkeletonTemplate::Matrix::Zero(kNumJoints, nv);

  // Joint rings: horizontal equilateral triangles centered on each joint.
  for (int j = 0; j < kNumJoints; ++j) {
    const Eigen::Vector3d c = rest_joint_up(j);
    for (int k = 0; k < 3; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / 3.0;
      const Eigen::Index row = 3 * j + k;
      verts.row(row) = c + kRingRadius * Eigen::Vector3d(std::cos(phi), 0.0, std::sin(phi));
      weights(row, j) = 1.0;
      regressor(j, row) = 1.0 / 3.0;
    }
  }

  // Capsule surface samples, assigned to segments round-robin.
  const auto capsules = body_capsules();
  const int extra = num_vertices - kMinTemplateVertices;
  TemplateRng rng(kTemplateSeed);
  for (int k = 0; k < extra; ++k) {
    const int j = k % kNumJoints;
    const int index = k / kNumJoints;
    const int count = extra / kNumJoints + (j < extra % kNumJoints ? 1 : 0);
    const Capsule& cap = capsules[static_cast<std::size_t>(j)];
    const double t = (index + rng.uniform()) / count;
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    Eigen::Vector3d e1;
    Eigen::Vector3d e2;
    orthonormal_basis(cap.b - cap.a, e1, e2);
    const Eigen::Index row = kMinTemplateVertices + k;
    verts.row(row) =
        cap.a + t * (cap.b - cap.a) + cap.radius * (std::cos(phi) * e1 + std::sin(phi) * e2);
    if (j == kRootJoint) {
      weights(row, j) = 1.0;
    } else {
      const double own = std::min(1.0, 0.5 + t / kSkinBlendSpan);
      weights(row, j) = own;
      weights(row, kJointParents[j]) = 1.0 - own;
    }
  }

  // Exact 1.70 m height, then rotate into the camera convention (up = -y,
  // facing -z): a half turn about x.
  const double extent = verts.col(1).maxCoeff() - verts.col(1).minCoeff();
  verts *= kTemplateHeight / extent;
  verts.col(1) *= -1.0;
  verts.col(2) *= -1.0;

  std::array<Points3, kNumShapeParams> dirs;
  dirs[0] = verts * (kHeightGainPerUnit / kTemplateHeight);
  const double y_top = verts.col(1).minCoeff();
  for (int k = 1; k < kNumShapeParams; ++k) {
    Points3 dir = Points3::Zero(nv, 3);
    for (Eigen::Index i = 0; i < nv; ++i) {
      const double along = (verts(i, 1) - y_top) / kTemplateHeight;  // 0 at head, 1 at feet
      const double profile = std::cos((k - 1) * std::numbers::pi * along);
      dir(i, 0) = kRadialAmplitude * profile * verts(i, 0);
      dir(i, 2) = kRadialAmplitude * profile * verts(i, 2);
    }
    dirs[static_cast<std::size_t>(k)] = std::move(dir);
  }
  return SkeletonTemplate(std::move(verts), std::move(weights), std::move(regressor),
                          std::move(dirs));
}

RestShape shape_blend(const SkeletonTemplate& tpl, const BodyParams::ShapeVector& shape) {
  RestShape rest;
  rest.vertices = tpl.vertices();
  for (int k = 0; k < kNumShapeParams; ++k) {
    if (shape[k] != 0.0) {
      rest.vertices += shape[k] * tpl.shape_dir(k);
    }
  }
  rest.joints = tpl.joint_regressor() * rest.vertices;
  return rest;
}

Points3 shaped_joints(const SkeletonTemplate& tpl, const BodyParams::ShapeVector& shape) {
  Points3 joints = tpl.rest_joints();
  for (int k = 0; k < kNumShapeParams; ++k) {
    joints += shape[k] * tpl.joint_shape_dir(k);
  }
  return joints;
}

namespace {

struct ChainTransforms {
  std::array<Eigen::Matrix3d, kNumJoints> rotation;
  std::array<Eigen::Vector3d, kNumJoints> position;
};

// Kinematic chain with identity root rotation and the root at its rest spot.
ChainTransforms local_chain(const Points3& rest_joints, const BodyParams& params) {
  ChainTransforms chain;
  chain.rotation[0].setIdentity();
  chain.position[0] = rest_joints.row(0).transpose();
  for (int j = 1; j < kNumJoints; ++j) {
    const int p = kJointParents[static_cast<std::size_t>(j)];
    const Eigen::Vector3d offset = (rest_joints.row(j) - rest_joints.row(p)).transpose();
    chain.rotation[j] = chain.rotation[p] * rotation_from_axis_angle(params.joint_axis_angle(j));
    chain.position[j] = chain.rotation[p] * offset + chain.position[p];
  }
  return chain;
}

}  // namespace

Points3 forward_joints(const SkeletonTemplate& tpl, const BodyParams& params) {
  const Points3 rest = shaped_joints(tpl, params.shape);
  const ChainTransforms chain = local_chain(rest, params);
  const Eigen::Matrix3d root = rotation_from_axis_angle(params.global_orient);
  Points3 out(kNumJoints, 3);
  for (int j = 0; j < kNumJoints; ++j) {
    out.row(j) = (root * chain.position[j] + params.translation).transpose();
  }
  return out;
}

BodyState forward(const SkeletonTemplate& tpl, const BodyParams& params) {
  const RestShape rest = shape_blend(tpl, params.shape);
  const ChainTransforms chain = local_chain(rest.joints, params);
  const Eigen::Matrix3d root = rotation_from_axis_angle(params.global_orient);

  BodyState state;
  state.joints.resize(kNumJoints, 3);
  for (int j = 0; j < kNumJoints; ++j) {
    state.joints.row(j) = (root * chain.position[j] + params.translation).transpose();
  }

  // x' = sum_j w_j (R_j (x - J_j) + p_j)
  std::array<Eigen::Vector3d, kNumJoints> bias;
  for (int j = 0; j < kNumJoints; ++j) {
    bias[j] = chain.position[j] - chain.rotation[j] * rest.joints.row(j).transpose();
  }
  const auto& w = tpl.skin_weights();
  const Eigen::Index nv = rest.vertices.rows();
  state.vertices.resize(nv, 3);
  for (Eigen::Index i = 0; i < nv; ++i) {
    const Eigen::Vector3d x = rest.vertices.row(i).transpose();
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int j = 0; j < kNumJoints; ++j) {
      const double wij = w(i, j);
      if (wij != 0.0) {
        acc += wij * (chain.rotation[j] * x + bias[j]);
      }
    }
    state.vertices.row(i) = (root * acc + params.translation).transpose();
  }
  return state;
}

double height(const SkeletonTemplate& tpl, const BodyParams::ShapeVector& shape) {
  Eigen::VectorXd y = tpl.vertices().col(1);
  for (int k = 0; k < kNumShapeParams; ++k) {
    if (shape[k] != 0.0) {
      y += shape[k] * tpl.shape_dir(k).col(1);
    }
  }
  return y.maxCoeff() - y.minCoeff();
}

BodyParams::ShapeVector shape_for_height(const SkeletonTemplate& tpl,
                                         const BodyParams::ShapeVector& shape, double target) {
  if (!(target > 0.0)) {
    throw InvalidArgument("target height must be positive");
  }
  BodyParams::ShapeVector out = shape;
  // Height is linear in component 0 while the extremal vertices stay the same;
  // two secant steps absorb any switch of extremal vertex.
  for (int iter = 0; iter < 2; ++iter) {
    BodyParams::ShapeVector probe = out;
    probe[0] += 1.0;
    const double h0 = height(tpl, out);
    const double gain = height(tpl, probe) - h0;
    if (!(gain > 0.0)) {
      throw InvalidArgument("shape direction 0 does not increase height");
    }
    out[0] += (target - h0) / gain;
  }
  return out;
}

}  // namespace hmrgeom
