#include "hmrgeom/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <Eigen/Cholesky>

#include "hmrgeom/errors.hpp"
#include "hmrgeom/metrics.hpp"

namespace hmrgeom {

namespace {

bool weight_on(double w) { return w > 0.0; }

bool has_measurement(const FitProblem& prob, const LossWeights& w) {
  return weight_on(w.w_measure) && prob.target_height.has_value();
}

}  // namespace

void FitProblem::validate() const {
  if (!tpl) {
    throw InvalidArgument("fit problem has no body template");
  }
  hmrgeom::validate(K);
  if (!target_kp2d.allFinite()) {
    throw InvalidArgument("keypoints must be finite");
  }
  for (double c : confidence) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw InvalidArgument("keypoint confidences must lie in [0, 1]");
    }
  }
  if (target_height && !(*target_height > 0.0 && std::isfinite(*target_height))) {
    throw InvalidArgument("target height must be positive");
  }
  reference.validate();
}

void LossWeights::validate() const {
  for (double w : {w_2d, w_mimic_pose, w_mimic_shape, w_measure}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("loss weights must be finite and non-negative");
    }
  }
  if (!(w_2d > 0.0 || w_mimic_pose > 0.0 || w_mimic_shape > 0.0 || w_measure > 0.0)) {
    throw InvalidArgument("at least one loss weight must be positive");
  }
}

void SolverConfig::validate() const {
  if (max_iters < 1 || max_rejections < 1) {
    throw InvalidArgument("solver iteration limits must be positive");
  }
  if (!(initial_damping > 0.0) || !(convergence_tol > 0.0) || !(jacobian_step > 0.0) ||
      !(step_tol >= 0.0)) {
    throw InvalidArgument("solver damping, tolerance and step must be positive");
  }
  if (!(damping_up > 1.0) || !(damping_down > 0.0 && damping_down < 1.0)) {
    throw InvalidArgument("damping factors must satisfy up > 1 > down > 0");
  }
}

std::size_t residual_count(const FitProblem& prob, const LossWeights& w) {
  std::size_t n = 0;
  if (weight_on(w.w_2d)) n += 2 * kNumJoints;
  if (weight_on(w.w_mimic_pose)) n += kNumPoseParams + (prob.mimic_global_orient ? 3 : 0);
  if (weight_on(w.w_mimic_shape)) n += kNumShapeParams;
  if (has_measurement(prob, w)) n += 1;
  return n;
}

ResidualEvaluation evaluate_residuals(const BodyParams& params, const FitProblem& prob,
                                      const LossWeights& w) {
  ResidualEvaluation out;
  out.residuals.resize(static_cast<Eigen::Index>(residual_count(prob, w)));
  Eigen::Index row = 0;

  if (weight_on(w.w_2d)) {
    const double s = std::sqrt(w.w_2d);
    const Points3 joints = forward_joints(*prob.tpl, params);
    for (int j = 0; j < kNumJoints; ++j) {
      const Pixel px = project(joints.row(j).transpose(), prob.K);
      const double c = s * prob.confidence[static_cast<std::size_t>(j)];
      out.residuals[row++] = c * (px.u - prob.target_kp2d(j, 0));
      out.residuals[row++] = c * (px.v - prob.target_kp2d(j, 1));
    }
    out.breakdown.kp2d = out.residuals.head(row).squaredNorm();
  }
  if (weight_on(w.w_mimic_pose)) {
    const double s = std::sqrt(w.w_mimic_pose);
    const Eigen::Index start = row;
    out.residuals.segment<kNumPoseParams>(row) = s * (params.pose - prob.reference.pose);
    row += kNumPoseParams;
    if (prob.mimic_global_orient) {
      out.residuals.segment<3>(row) = s * (params.global_orient - prob.reference.global_orient);
      row += 3;
    }
    out.breakdown.mimic_pose = out.residuals.segment(start, row - start).squaredNorm();
  }
  if (weight_on(w.w_mimic_shape)) {
    out.residuals.segment<kNumShapeParams>(row) =
        std::sqrt(w.w_mimic_shape) * (params.shape - prob.reference.shape);
    out.breakdown.mimic_shape = out.residuals.segment<kNumShapeParams>(row).squaredNorm();
    row += kNumShapeParams;
  }
  if (has_measurement(prob, w)) {
    const double r = std::sqrt(w.w_measure) * (height(*prob.tpl, params.shape) - *prob.target_height);
    out.residuals[row++] = r;
    out.breakdown.measurement = r * r;
  }
  return out;
}

Eigen::VectorXd residuals(const BodyParams& params, const FitProblem& prob, const LossWeights& w) {
  return evaluate_residuals(params, prob, w).residuals;
}

Eigen::MatrixXd numeric_jacobian(const BodyParams& params, const FitProblem& prob,
                                 const LossWeights& w, double step) {
  const BodyParams::Packed x = params.pack();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(residual_count(prob, w)), kNumBodyParams);
  for (int k = 0; k < kNumBodyParams; ++k) {
    BodyParams::Packed plus = x;
    BodyParams::Packed minus = x;
    plus[k] += step;
    minus[k] -= step;
    jac.col(k) = (residuals(BodyParams::unpack(plus), prob, w) -
                  residuals(BodyParams::unpack(minus), prob, w)) /
                 (2.0 * step);
  }
  return jac;
}

double mean_kp2d_error(const BodyParams& params, const FitProblem& prob) {
  const Points3 joints = forward_joints(*prob.tpl, params);
  double sum = 0.0;
  int count = 0;
  for (int j = 0; j < kNumJoints; ++j) {
    if (prob.confidence[static_cast<std::size_t>(j)] <= 0.0) {
      continue;
    }
    const Pixel px = project(joints.row(j).transpose(), prob.K);
    sum += std::hypot(px.u - prob.target_kp2d(j, 0), px.v - prob.target_kp2d(j, 1));
    ++count;
  }
  return count > 0 ? sum / count : 0.0;
}

FitResult fit(const FitProblem& prob, const LossWeights& w, const BodyParams& init,
              const SolverConfig& cfg) {
  prob.validate();
  w.validate();
  cfg.validate();
  init.validate();

  BodyParams current = init;
  ResidualEvaluation eval;
  try {
    eval = evaluate_residuals(current, prob, w);
  } catch (const NonPositiveDepth& e) {
    throw InitializationError(std::string("initial body is outside the camera's visual cone: ") +
                              e.what());
  }
  double cost = eval.residuals.squaredNorm();
  if (!std::isfinite(cost)) {
    throw DivergedError("initial cost is not finite");
  }

  FitResult result;
  result.cost_history.push_back(cost);
  double damping = cfg.initial_damping;
  Termination termination = Termination::kMaxIterations;
  int iterations = 0;

  if (cost == 0.0) {
    termination = Termination::kAtOptimum;
  }
  while (termination == Termination::kMaxIterations && iterations < cfg.max_iters) {
    Eigen::MatrixXd jac;
    try {
      jac = numeric_jacobian(current, prob, w, cfg.jacobian_step);
    } catch (const NonPositiveDepth& e) {
      throw DivergedError(std::string("Jacobian probe left the visual cone: ") + e.what());
    }
    if (!jac.allFinite()) {
      throw DivergedError("Jacobian is not finite");
    }
    ++iterations;

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * eval.residuals;
    bool accepted = false;
    for (int attempt = 0; attempt < cfg.max_rejections; ++attempt) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal().array() += damping;
      const Eigen::VectorXd step = lhs.ldlt().solve(-gradient);
      const BodyParams trial = BodyParams::unpack(current.pack() + step);
      ResidualEvaluation trial_eval;
      double trial_cost = std::numeric_limits<double>::infinity();
      try {
        trial_eval = evaluate_residuals(trial, prob, w);
        trial_cost = trial_eval.residuals.squaredNorm();
      } catch (const NonPositiveDepth&) {
        // outside the cone: treat as a rejected step
      }
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double relative = (cost - trial_cost) / cost;
        current = trial;
        eval = std::move(trial_eval);
        cost = trial_cost;
        result.cost_history.push_back(cost);
        damping *= cfg.damping_down;
        accepted = true;
        if (cost == 0.0) {
          termination = Termination::kAtOptimum;
        } else if (relative < cfg.convergence_tol) {
          termination = Termination::kRelativeCostChange;
        } else if (step.norm() <= cfg.step_tol * (1.0 + current.pack().norm())) {
          termination = Termination::kSmallStep;
        }
        break;
      }
      if (std::isnan(trial_cost)) {
        throw DivergedError("cost became NaN");
      }
      damping *= cfg.damping_up;
    }
    if (!accepted) {
      termination = Termination::kStalled;
    }
  }

  result.params = current;
  result.final_cost = cost;
  result.breakdown = eval.breakdown;
  result.iterations = iterations;
  result.termination = termination;
  result.converged = termination != Termination::kMaxIterations;
  result.mean_kp2d_error = mean_kp2d_error(current, prob);
  return result;
}

BodyParams::Packed scale_depth_direction(const BodyParams& params) {
  BodyParams dir;
  dir.pose.setZero();
  dir.shape = params.shape;
  dir.shape[0] += kTemplateHeight / kHeightGainPerUnit;
  dir.global_orient.setZero();
  dir.translation = params.translation;
  return dir.pack();
}

BodyParams initial_guess(const FitProblem& prob) {
  prob.validate();
  BodyParams guess = prob.reference;
  guess.translation.setZero();
  if (!prob.mimic_global_orient) {
    guess.global_orient.setZero();
  }
  const Points3 joints = forward_joints(*prob.tpl, guess);

  std::vector<int> visible;
  for (int j = 0; j < kNumJoints; ++j) {
    if (prob.confidence[static_cast<std::size_t>(j)] > 0.0) {
      visible.push_back(j);
    }
  }
  if (visible.size() < 2) {
    throw InitializationError("need at least two visible keypoints to initialize");
  }
  Eigen::Vector2d mean2 = Eigen::Vector2d::Zero();
  Eigen::Vector3d mean3 = Eigen::Vector3d::Zero();
  for (int j : visible) {
    mean2 += prob.target_kp2d.row(j).transpose();
    mean3 += joints.row(j).transpose();
  }
  mean2 /= static_cast<double>(visible.size());
  mean3 /= static_cast<double>(visible.size());
  double spread2 = 0.0;
  double spread3 = 0.0;
  for (int j : visible) {
    const Eigen::Vector2d d2 = prob.target_kp2d.row(j).transpose() - mean2;
    spread2 += Eigen::Vector2d(d2.x() / prob.K.fx, d2.y() / prob.K.fy).squaredNorm();
    spread3 += (joints.row(j).head<2>().transpose() - mean3.head<2>()).squaredNorm();
  }
  if (!(spread2 > 0.0)) {
    throw InitializationError("visible keypoints are coincident");
  }
  const double depth = std::sqrt(spread3 / spread2);
  guess.translation = {(mean2.x() - prob.K.cx) / prob.K.fx * depth - mean3.x(),
                       (mean2.y() - prob.K.cy) / prob.K.fy * depth - mean3.y(), depth - mean3.z()};
  return guess;
}

HeightSweepResult height_sweep(const FitProblem& prob, const std::vector<double>& heights,
                               const LossWeights& w, const BodyParams& init,
                               const SolverConfig& cfg) {
  prob.validate();
  if (heights.empty()) {
    throw InvalidArgument("height sweep needs at least one height");
  }
  if (std::set<double>(heights.begin(), heights.end()).size() != heights.size()) {
    throw InvalidArgument("height sweep heights must be distinct");
  }

  HeightSweepResult out;
  out.heights = heights;
  const Points3 reference_joints = forward_joints(*prob.tpl, prob.reference);
  BodyParams warm = init;
  for (double h : heights) {
    SweepEntry entry;
    entry.target_height = h;
    try {
      FitProblem sub = prob;
      sub.target_height = h;
      sub.reference.shape = shape_for_height(*prob.tpl, prob.reference.shape, h);
      FitResult r = fit(sub, w, warm, cfg);
      warm = r.params;
      entry.joints = forward_joints(*prob.tpl, r.params);
      entry.pa_mpjpe_to_reference = pa_mpjpe(entry.joints, reference_joints);
      entry.fit = std::move(r);
    } catch (const Error& e) {
      entry.error = e.what();
    }
    out.entries.push_back(std::move(entry));
  }

  const auto n = static_cast<Eigen::Index>(out.entries.size());
  out.pa_mpjpe_matrix = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& a = out.entries[static_cast<std::size_t>(i)];
      const auto& b = out.entries[static_cast<std::size_t>(j)];
      double d = std::numeric_limits<double>::quiet_NaN();
      if (a.ok() && b.ok()) {
        d = pa_mpjpe(a.joints, b.joints);
        if (d > out.max_pairwise_pa_mpjpe || !out.max_pair) {
          out.max_pairwise_pa_mpjpe = std::max(out.max_pairwise_pa_mpjpe, d);
          out.max_pair = std::make_pair(static_cast<int>(i), static_cast<int>(j));
        }
      }
      out.pa_mpjpe_matrix(i, j) = d;
      out.pa_mpjpe_matrix(j, i) = d;
    }
  }
  return out;
}

}  // namespace hmrgeom
