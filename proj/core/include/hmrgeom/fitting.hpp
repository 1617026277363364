#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hmrgeom/body_model.hpp"
#include "hmrgeom/camera.hpp"

namespace hmrgeom {

using Keypoints2d = Eigen::Matrix<double, kNumJoints, 2>;

struct FitProblem {
  Keypoints2d target_kp2d = Keypoints2d::Zero();
  std::array<double, kNumJoints> confidence{};
  Intrinsics K;
  /// Mimic target for pose, shape and (optionally) global orientation. Its
  /// translation is unused.
  BodyParams reference;
  bool mimic_global_orient = true;
  std::optional<double> target_height;
  std::shared_ptr<const SkeletonTemplate> tpl;

  void validate() const;
};

/// Defaults: a 1 cm height violation costs about as much as a 0.1 px shift of
/// one keypoint coordinate. 2D residuals are raw pixels.
struct LossWeights {
  double w_2d = 1.0;
  double w_mimic_pose = 0.1;
  double w_mimic_shape = 0.5;
  double w_measure = 100.0;

  void validate() const;
};

struct SolverConfig {
  int max_iters = 100;
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.5;
  double convergence_tol = 1e-10;
  double step_tol = 1e-12;  // relative to the parameter norm
  double jacobian_step = 1e-6;
  int max_rejections = 12;

  void validate() const;
};

struct CostBreakdown {
  double kp2d = 0.0;
  double mimic_pose = 0.0;
  double mimic_shape = 0.0;
  double measurement = 0.0;

  double total() const { return kp2d + mimic_pose + mimic_shape + measurement; }
};

enum class Termination { kAtOptimum, kRelativeCostChange, kSmallStep, kStalled, kMaxIterations };

struct FitResult {
  BodyParams params;
  double final_cost = 0.0;
  double mean_kp2d_error = 0.0;
  int iterations = 0;
  bool converged = false;
  Termination termination = Termination::kMaxIterations;
  CostBreakdown breakdown;
  /// Cost after every accepted step, starting with the initial cost.
  std::vector<double> cost_history;
};

struct ResidualEvaluation {
  Eigen::VectorXd residuals;
  CostBreakdown breakdown;
};

/// Stacked, sqrt(weight)-scaled residual vector:
/// [2D reprojection (2 per joint, confidence weighted)] [pose mimic] [shape
/// mimic] [measurement]. Blocks whose weight is zero are omitted. Throws
/// NonPositiveDepth when a joint is not in front of the camera.
ResidualEvaluation evaluate_residuals(const BodyParams& params, const FitProblem& prob,
                                      const LossWeights& w);

Eigen::VectorXd residuals(const BodyParams& params, const FitProblem& prob, const LossWeights& w);

std::size_t residual_count(const FitProblem& prob, const LossWeights& w);

/// Central-difference Jacobian of `residuals` w.r.t. the packed parameters.
Eigen::MatrixXd numeric_jacobian(const BodyParams& params, const FitProblem& prob,
                                 const LossWeights& w, double step);

/// Mean pixel distance over joints with non-zero confidence.
double mean_kp2d_error(const BodyParams& params, const FitProblem& prob);

/// Damped least squares (Levenberg-Marquardt) over all 85 parameters.
FitResult fit(const FitProblem& prob, const LossWeights& w, const BodyParams& init,
              const SolverConfig& cfg = {});

/// Packed direction that scales the body about its root together with the
/// translation; projections are invariant along it.
BodyParams::Packed scale_depth_direction(const BodyParams& params);

/// Coarse initialization: reference pose and shape, translation from
/// the 2D keypoint spread and the template's 3D joint spread.
BodyParams initial_guess(const FitProblem& prob);

struct SweepEntry {
  double target_height = 0.0;
  std::optional<FitResult> fit;
  std::string error;
  Points3 joints;
  std::optional<double> pa_mpjpe_to_reference;  // mm

  bool ok() const { return fit.has_value(); }
  double depth() const { return fit ? fit->params.translation.z() : 0.0; }
};

struct HeightSweepResult {
  std::vector<double> heights;
  std::vector<SweepEntry> entries;
  /// Symmetric with zero diagonal; NaN off-diagonal where either fit failed. mm.
  Eigen::MatrixXd pa_mpjpe_matrix;
  double max_pairwise_pa_mpjpe = 0.0;
  std::optional<std::pair<int, int>> max_pair;
};

/// One fit per target height, in the given order, each warm-started from the
/// previous solution. The shape reference is moved along the height direction
/// to each target so the mimic and measurement terms agree.
HeightSweepResult height_sweep(const FitProblem& prob, const std::vector<double>& heights,
                               const LossWeights& w, const BodyParams& init,
                               const SolverConfig& cfg = {});

}  // namespace hmrgeom
