#pragma once

#include <cmath>
#include <memory>

#include "hmrgeom/body_model.hpp"
#include "hmrgeom/fitting.hpp"
#include "hmrgeom/synth.hpp"

namespace hmrgeom::bench {

inline std::shared_ptr<const SkeletonTemplate> shared_template() {
  static const auto tpl = std::make_shared<const SkeletonTemplate>(default_template());
  return tpl;
}

/// Mildly posed body 5 m in front of the camera. Deterministic so that runs
/// are comparable.
inline BodyParams sample_body() {
  BodyParams p;
  for (int i = 0; i < kNumPoseParams; ++i) p.pose[i] = 0.15 * std::sin(1.3 * i + 0.4);
  for (int k = 0; k < kNumShapeParams; ++k) p.shape[k] = 0.5 * std::cos(0.7 * k);
  p.global_orient = {0.05, 0.1, -0.02};
  p.translation = {0.1, -0.05, 5.0};
  return p;
}

inline PinholeCamera hd_camera() { return {{1000.0, 1000.0, 960.0, 540.0}, {1920, 1080}}; }

inline FitProblem sample_problem(double sigma_kp) {
  const SceneSample s =
      render_sample(*shared_template(), sample_body(), hd_camera(), Extrinsics{}, sigma_kp, 7);
  return problem_from_sample(s, shared_template());
}

}  // namespace hmrgeom::bench
