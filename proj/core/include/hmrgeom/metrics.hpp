#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hmrgeom/geometry.hpp"

namespace hmrgeom {

/// T frames of J joints, meters.
struct JointSeq {
  std::vector<Points3> frames;
  double fps = 30.0;
  /// Empty means every frame is valid.
  std::vector<bool> valid;

  int num_frames() const { return static_cast<int>(frames.size()); }
  int num_joints() const { return frames.empty() ? 0 : static_cast<int>(frames.front().rows()); }
  bool is_valid(int t) const { return valid.empty() || valid[static_cast<std::size_t>(t)]; }
  /// Root (joint 0) trajectory, T x 3.
  Points3 roots() const;
  void validate() const;
};

/// x -> scale * rotation * x + translation.
struct SimilarityTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double scale = 1.0;

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return scale * (rotation * x) + translation;
  }
  Points3 apply(const Points3& pts) const;
};

/// Least-squares similarity (or rigid when with_scale is false) mapping src
/// onto dst, reflections excluded. Throws DegenerateConfiguration for fewer
/// than three points or collinear src. Call it qualified when passing Eigen
/// expressions; argument-dependent lookup would otherwise find Eigen::umeyama.
SimilarityTransform umeyama(const Points3& src, const Points3& dst, bool with_scale);

/// Mean joint error in mm after translating both sets so joint 0 coincides.
double mpjpe(const Points3& pred, const Points3& gt);

/// mpjpe of pred after similarity (with scale) alignment to gt. The aligned
/// sets are compared directly; the alignment already fixes translation.
double pa_mpjpe(const Points3& pred, const Points3& gt);

/// Mean vertex error in mm after aligning the given root positions.
double pve(const Points3& pred_verts, const Points3& gt_verts, const Eigen::Vector3d& pred_root,
           const Eigen::Vector3d& gt_root);
/// Uses vertex 0 as the root.
double pve(const Points3& pred_verts, const Points3& gt_verts);

inline constexpr int kWorldSegmentLength = 100;

struct Segment {
  int begin = 0;
  int end = 0;  // exclusive
  int size() const { return end - begin; }
};

/// Consecutive segments of `length` frames. A trailing segment shorter than
/// two frames is dropped unless it is the only one.
std::vector<Segment> split_segments(int num_frames, int length = kWorldSegmentLength);

/// Rigid alignment of each whole segment, mean joint error, frame-weighted
/// average over segments. mm.
double wa_mpjpe_100(const JointSeq& pred, const JointSeq& gt);

/// Rigid alignment estimated from each segment's first frame only. mm.
double w_mpjpe_100(const JointSeq& pred, const JointSeq& gt);

enum class RteAlignment {
  kAnchoredYaw,  ///< first frames pinned together, then rotation about gravity (y)
  kRigid,        ///< full rotation + translation over the whole trajectory
  kAnchorOnly    ///< first frames pinned together, no rotation
};

/// Mean root error after alignment over the total gt path length, percent.
/// Throws ZeroPathLength when the gt path is shorter than 1 mm.
double rte(const Points3& pred_root, const Points3& gt_root,
           RteAlignment alignment = RteAlignment::kAnchoredYaw);

/// Mean norm of the forward-difference velocity error, mm per frame. Inputs
/// are camera-frame roots. Throws TooShort for T < 2.
double erve(const Points3& pred_root_cam, const Points3& gt_root_cam);

struct MetricReport {
  std::optional<double> mpjpe;
  std::optional<double> pa_mpjpe;
  std::optional<double> pve;
  std::optional<double> wa_mpjpe_100;
  std::optional<double> w_mpjpe_100;
  std::optional<double> rte;
  std::optional<double> erve;
};

/// Per-frame mpjpe / pa_mpjpe averaged over valid frames.
MetricReport local_metrics(const JointSeq& pred, const JointSeq& gt);

}  // namespace hmrgeom
