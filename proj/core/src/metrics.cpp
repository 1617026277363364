#include "hmrgeom/metrics.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "hmrgeom/errors.hpp"

namespace hmrgeom {

namespace {

constexpr double kMillimeters = 1000.0;

void require_same_shape(const Points3& a, const Points3& b, const char* what) {
  if (a.rows() != b.rows()) {
    throw LengthMismatch(std::string(what) + ": " + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()) + " points");
  }
}

SimilarityTransform fit_similarity(const Points3& src, const Points3& dst, bool with_scale,
                                   bool reject_collinear) {
  const auto n = static_cast<double>(src.rows());
  const Eigen::RowVector3d mu_src = src.colwise().mean();
  const Eigen::RowVector3d mu_dst = dst.colwise().mean();
  const Points3 xs = src.rowwise() - mu_src;
  const Points3 xd = dst.rowwise() - mu_dst;
  const double var_src = xs.squaredNorm() / n;

  if (reject_collinear) {
    Eigen::JacobiSVD<Points3> spread(xs);
    const auto sv = spread.singularValues();
    if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
      throw DegenerateConfiguration("alignment source points are coincident or collinear");
    }
  } else if (!(var_src > 0.0)) {
    throw DegenerateConfiguration("alignment source points are coincident");
  }

  const Eigen::Matrix3d sigma = xd.transpose() * xs / n;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    s[2] = -1.0;
  }

  SimilarityTransform out;
  out.rotation = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  out.scale = with_scale ? svd.singularValues().dot(s) / var_src : 1.0;
  out.translation = mu_dst.transpose() - out.scale * out.rotation * mu_src.transpose();
  return out;
}

double mean_distance(const Points3& a, const Points3& b) {
  return (a - b).rowwise().norm().mean();
}

void require_matching(const JointSeq& pred, const JointSeq& gt) {
  pred.validate();
  gt.validate();
  if (pred.num_frames() != gt.num_frames()) {
    throw LengthMismatch("sequences have " + std::to_string(pred.num_frames()) + " and " +
                         std::to_string(gt.num_frames()) + " frames");
  }
  if (pred.num_joints() != gt.num_joints()) {
    throw LengthMismatch("sequences have " + std::to_string(pred.num_joints()) + " and " +
                         std::to_string(gt.num_joints()) + " joints");
  }
}

Points3 stack_frames(const JointSeq& seq, const std::vector<int>& frames) {
  const Eigen::Index j = seq.num_joints();
  Points3 out(static_cast<Eigen::Index>(frames.size()) * j, 3);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    out.middleRows(static_cast<Eigen::Index>(k) * j, j) = seq.frames[frames[k]];
  }
  return out;
}

enum class WorldAlignment { kWholeSegment, kFirstFrame };

double world_mpjpe(const JointSeq& pred, const JointSeq& gt, WorldAlignment mode) {
  require_matching(pred, gt);
  double weighted = 0.0;
  long total = 0;
  for (const Segment& seg : split_segments(pred.num_frames())) {
    std::vector<int> frames;
    for (int t = seg.begin; t < seg.end; ++t) {
      if (pred.is_valid(t) && gt.is_valid(t)) {
        frames.push_back(t);
      }
    }
    if (frames.empty()) {
      continue;
    }
    const Points3 p = stack_frames(pred, frames);
    const Points3 g = stack_frames(gt, frames);
    const SimilarityTransform tf =
        mode == WorldAlignment::kWholeSegment
            ? umeyama(p, g, false)
            : umeyama(pred.frames[frames.front()], gt.frames[frames.front()], false);
    const double err = mean_distance(tf.apply(p), g) * kMillimeters;
    weighted += err * static_cast<double>(frames.size());
    total += static_cast<long>(frames.size());
  }
  if (total == 0) {
    throw DegenerateConfiguration("no valid frames to evaluate");
  }
  return weighted / static_cast<double>(total);
}

}  // namespace

Points3 JointSeq::roots() const {
  Points3 out(num_frames(), 3);
  for (int t = 0; t < num_frames(); ++t) {
    out.row(t) = frames[static_cast<std::size_t>(t)].row(0);
  }
  return out;
}

void JointSeq::validate() const {
  if (frames.empty()) {
    throw InvalidArgument("joint sequence needs at least one frame");
  }
  const auto j = frames.front().rows();
  if (j < 1) {
    throw InvalidArgument("joint sequence needs at least one joint");
  }
  for (const auto& f : frames) {
    if (f.rows() != j) {
      throw LengthMismatch("joint count changes within a sequence");
    }
  }
  if (!valid.empty() && valid.size() != frames.size()) {
    throw LengthMismatch("validity mask length differs from frame count");
  }
}

Points3 SimilarityTransform::apply(const Points3& pts) const {
  Points3 out = (scale * (pts * rotation.transpose()));
  out.rowwise() += translation.transpose();
  return out;
}

SimilarityTransform umeyama(const Points3& src, const Points3& dst, bool with_scale) {
  require_same_shape(src, dst, "umeyama");
  if (src.rows() < 3) {
    throw DegenerateConfiguration("alignment needs at least 3 points");
  }
  return fit_similarity(src, dst, with_scale, true);
}

double mpjpe(const Points3& pred, const Points3& gt) {
  require_same_shape(pred, gt, "mpjpe");
  const Points3 p = pred.rowwise() - pred.row(0);
  const Points3 g = gt.rowwise() - gt.row(0);
  return mean_distance(p, g) * kMillimeters;
}

double pa_mpjpe(const Points3& pred, const Points3& gt) {
  require_same_shape(pred, gt, "pa_mpjpe");
  const SimilarityTransform tf = umeyama(pred, gt, true);
  return mean_distance(tf.apply(pred), gt) * kMillimeters;
}

double pve(const Points3& pred_verts, const Points3& gt_verts, const Eigen::Vector3d& pred_root,
           const Eigen::Vector3d& gt_root) {
  require_same_shape(pred_verts, gt_verts, "pve");
  const Points3 p = pred_verts.rowwise() - pred_root.transpose();
  const Points3 g = gt_verts.rowwise() - gt_root.transpose();
  return mean_distance(p, g) * kMillimeters;
}

double pve(const Points3& pred_verts, const Points3& gt_verts) {
  require_same_shape(pred_verts, gt_verts, "pve");
  if (pred_verts.rows() == 0) {
    throw InvalidArgument("pve needs at least one vertex");
  }
  return pve(pred_verts, gt_verts, pred_verts.row(0).transpose(), gt_verts.row(0).transpose());
}

std::vector<Segment> split_segments(int num_frames, int length) {
  std::vector<Segment> out;
  for (int begin = 0; begin < num_frames; begin += length) {
    const int end = std::min(begin + length, num_frames);
    if (end - begin >= 2 || begin == 0) {
      out.push_back({begin, end});
    }
  }
  return out;
}

double wa_mpjpe_100(const JointSeq& pred, const JointSeq& gt) {
  return world_mpjpe(pred, gt, WorldAlignment::kWholeSegment);
}

double w_mpjpe_100(const JointSeq& pred, const JointSeq& gt) {
  return world_mpjpe(pred, gt, WorldAlignment::kFirstFrame);
}

static double path_length_of(const Points3& roots) {
  double len = 0.0;
  for (Eigen::Index t = 1; t < roots.rows(); ++t) {
    len += (roots.row(t) - roots.row(t - 1)).norm();
  }
  return len;
}

double rte(const Points3& pred_root, const Points3& gt_root, RteAlignment alignment) {
  require_same_shape(pred_root, gt_root, "rte");
  if (gt_root.rows() < 1) {
    throw TooShort("rte needs at least one frame");
  }
  const double length = path_length_of(gt_root);
  if (length < 1e-3) {
    throw ZeroPathLength("ground-truth path is shorter than 1 mm");
  }

  Points3 aligned;
  switch (alignment) {
    case RteAlignment::kRigid:
      aligned = fit_similarity(pred_root, gt_root, false, false).apply(pred_root);
      break;
    case RteAlignment::kAnchorOnly:
    case RteAlignment::kAnchoredYaw: {
      const Points3 dp = pred_root.rowwise() - pred_root.row(0);
      const Points3 dg = gt_root.rowwise() - gt_root.row(0);
      Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
      if (alignment == RteAlignment::kAnchoredYaw) {
        // Planar Procrustes in the ground (x, z) plane.
        const double a = (dg.col(0).cwiseProduct(dp.col(0)) + dg.col(2).cwiseProduct(dp.col(2))).sum();
        const double b = (dg.col(0).cwiseProduct(dp.col(2)) - dg.col(2).cwiseProduct(dp.col(0))).sum();
        if (a != 0.0 || b != 0.0) {
          rot = rotation_about_y(std::atan2(b, a));
        }
      }
      aligned = dp * rot.transpose();
      aligned.rowwise() += gt_root.row(0);
      break;
    }
  }
  return mean_distance(aligned, gt_root) / length * 100.0;
}

double erve(const Points3& pred_root_cam, const Points3& gt_root_cam) {
  require_same_shape(pred_root_cam, gt_root_cam, "erve");
  const Eigen::Index n = gt_root_cam.rows();
  if (n < 2) {
    throw TooShort("erve needs at least two frames");
  }
  const Points3 vp = pred_root_cam.bottomRows(n - 1) - pred_root_cam.topRows(n - 1);
  const Points3 vg = gt_root_cam.bottomRows(n - 1) - gt_root_cam.topRows(n - 1);
  return mean_distance(vp, vg) * kMillimeters;
}

MetricReport local_metrics(const JointSeq& pred, const JointSeq& gt) {
  require_matching(pred, gt);
  double sum_mpjpe = 0.0;
  double sum_pa = 0.0;
  int count = 0;
  for (int t = 0; t < pred.num_frames(); ++t) {
    if (!pred.is_valid(t) || !gt.is_valid(t)) {
      continue;
    }
    sum_mpjpe += mpjpe(pred.frames[t], gt.frames[t]);
    sum_pa += pa_mpjpe(pred.frames[t], gt.frames[t]);
    ++count;
  }
  if (count == 0) {
    throw DegenerateConfiguration("no valid frames to evaluate");
  }
  MetricReport report;
  report.mpjpe = sum_mpjpe / count;
  report.pa_mpjpe = sum_pa / count;
  return report;
}

}  // namespace hmrgeom
