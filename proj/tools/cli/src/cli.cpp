#include "hmrgeom_cli/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmrgeom/body_model.hpp"
#include "hmrgeom/camera.hpp"
#include "hmrgeom/errors.hpp"
#include "hmrgeom/fitting.hpp"
#include "hmrgeom/io.hpp"
#include "hmrgeom/metrics.hpp"
#include "hmrgeom/synth.hpp"
#include "svg.hpp"

#ifndef HMRGEOM_VERSION
#define HMRGEOM_VERSION "unknown"
#endif

namespace hmrgeom::cli {

namespace {

constexpr double kCropInvarianceTol = 1e-9;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical check performed by the tool itself failed.
class CheckFailed : public Error {
 public:
  using Error::Error;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool quiet = false;
  std::optional<std::uint64_t> seed;
  CommandOutcome outcome;

  void emit(const std::string& path, std::string_view contents) {
    write_text_file(path, contents);
    outcome.artifacts.push_back(path);
  }
};

std::string printf_str(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), pattern, a);
  return buf;
}

struct WeightFlags {
  std::string file;
  std::optional<double> w_2d;
  std::optional<double> w_mimic_pose;
  std::optional<double> w_mimic_shape;
  std::optional<double> w_measure;
  std::optional<int> max_iters;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--weights", file, "JSON file with loss weights");
    cmd->add_option("--w-2d", w_2d, "2D reprojection weight");
    cmd->add_option("--w-mimic-pose", w_mimic_pose, "pose mimic weight");
    cmd->add_option("--w-mimic-shape", w_mimic_shape, "shape mimic weight");
    cmd->add_option("--w-measure", w_measure, "height measurement weight (per meter)");
    cmd->add_option("--max-iters", max_iters, "solver iteration limit");
  }

  LossWeights weights() const {
    LossWeights w;
    if (!file.empty()) {
      w = weights_from_json(read_json_file(file));
    }
    if (w_2d) w.w_2d = *w_2d;
    if (w_mimic_pose) w.w_mimic_pose = *w_mimic_pose;
    if (w_mimic_shape) w.w_mimic_shape = *w_mimic_shape;
    if (w_measure) w.w_measure = *w_measure;
    w.validate();
    return w;
  }

  SolverConfig solver() const {
    SolverConfig cfg;
    if (max_iters) cfg.max_iters = *max_iters;
    return cfg;
  }
};

struct LoadedProblem {
  FitProblem problem;
  BodyParams init;
};

LoadedProblem load_problem(const std::string& path) {
  const Json doc = read_json_file(path);
  LoadedProblem lp;
  lp.problem = problem_from_json(doc);
  const auto init = init_from_problem_json(doc);
  lp.init = init ? *init : initial_guess(lp.problem);
  return lp;
}

// raymap --------------------------------------------------------------------

struct RaymapArgs {
  std::string camera;
  std::string bbox;
  std::string out;
  std::string json;
  bool normalize = false;
};

void cmd_raymap(const RaymapArgs& a, Context& ctx) {
  const PinholeCamera cam = camera_from_json(read_json_file(a.camera));
  RayMap map;
  std::string detail;
  if (!a.bbox.empty()) {
    const BBox box = bbox_from_json(read_json_file(a.bbox));
    const auto res = static_cast<int>(std::lround(box.output_resolution()));
    if (res < 1) {
      throw InvalidArgument("bbox output resolution rounds to zero pixels");
    }
    map = ray_map(crop_intrinsics(cam.K, box), res, res, a.normalize);
    double worst = 0.0;
    for (int r = 0; r < res; ++r) {
      for (int c = 0; c < res; ++c) {
        const Pixel full = crop_to_full({c + 0.5, r + 0.5}, box);
        const Eigen::Vector3d ref = unproject_ray(full, cam.K, a.normalize).direction;
        const Eigen::Vector3d got = map.at(r, c);
        worst = std::max(worst, (got - ref).norm() / ref.norm());
      }
    }
    if (!(worst <= kCropInvarianceTol)) {
      throw CheckFailed("crop ray map deviates from the full-image rays by " +
                        printf_str("%.3e", worst) + " (relative)");
    }
    detail = ", crop invariance max deviation " + printf_str("%.3e", worst);
  } else {
    map = ray_map(cam.K, cam.size.width, cam.size.height, a.normalize);
  }

  std::ostringstream bin(std::ios::binary);
  write_raymap_binary(bin, map);
  ctx.emit(a.out, bin.str());
  if (!a.json.empty()) {
    ctx.emit(a.json, dump_json(to_json(map)));
  }
  ctx.outcome.summary = "ray map " + std::to_string(map.width) + "x" + std::to_string(map.height) +
                        (a.normalize ? " (unit rays)" : " (homogeneous rays)") + " -> " + a.out +
                        detail;
}

// fit -------------------------------------------------------------------------

struct FitArgs {
  std::string problem;
  std::string out;
  WeightFlags flags;
};

void cmd_fit(const FitArgs& a, Context& ctx) {
  const LoadedProblem lp = load_problem(a.problem);
  const FitResult r = fit(lp.problem, a.flags.weights(), lp.init, a.flags.solver());
  ctx.emit(a.out, dump_json(to_json(r, lp.problem)));
  ctx.outcome.summary = "mean 2D error " + printf_str("%.6f", r.mean_kp2d_error) + " px, depth " +
                        printf_str("%.6f", r.params.translation.z()) + " m, " +
                        std::to_string(r.iterations) + " iterations" +
                        (r.converged ? "" : " (iteration limit reached)");
}

// ambiguity -------------------------------------------------------------------

struct AmbiguityArgs {
  std::string problem;
  std::string heights;
  std::string out_dir;
  WeightFlags flags;
};

std::vector<double> parse_heights(const std::string& spec) {
  std::array<std::string, 3> parts;
  std::size_t start = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t colon = spec.find(':', start);
    if ((k < 2) == (colon == std::string::npos)) {
      throw UsageError("--heights expects a:b:n");
    }
    parts[k] = spec.substr(start, k < 2 ? colon - start : std::string::npos);
    start = colon + 1;
  }
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
  try {
    std::size_t used = 0;
    lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("a");
    hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("b");
    n = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("n");
  } catch (const std::logic_error&) {
    throw UsageError("--heights expects a:b:n with numeric a, b and integer n");
  }
  if (n < 2) {
    throw UsageError("--heights needs n >= 2");
  }
  if (!(lo > 0.0) || !(hi > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || lo == hi) {
    throw UsageError("--heights needs distinct positive bounds");
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  }
  out.back() = hi;
  return out;
}

void cmd_ambiguity(const AmbiguityArgs& a, Context& ctx) {
  const std::vector<double> heights = parse_heights(a.heights);
  const LoadedProblem lp = load_problem(a.problem);
  const HeightSweepResult sweep =
      height_sweep(lp.problem, heights, a.flags.weights(), lp.init, a.flags.solver());

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);

  std::string csv = "height_m,mean_kp2d_px,depth_m,converged,pa_mpjpe_to_reference_mm\n";
  Json entries = Json::array();
  std::string first_error;
  double worst_2d = 0.0;
  for (const auto& e : sweep.entries) {
    Json je = {{"target_height_m", e.target_height}};
    if (e.ok()) {
      csv += format_double(e.target_height) + "," + format_double(e.fit->mean_kp2d_error) + "," +
             format_double(e.depth()) + "," + (e.fit->converged ? "true" : "false") + "," +
             format_double(e.pa_mpjpe_to_reference.value_or(0.0)) + "\n";
      worst_2d = std::max(worst_2d, e.fit->mean_kp2d_error);
      je["mean_kp2d_px"] = e.fit->mean_kp2d_error;
      je["depth_m"] = e.depth();
      je["converged"] = e.fit->converged;
      je["pa_mpjpe_to_reference_mm"] = e.pa_mpjpe_to_reference.value_or(0.0);
      je["params"] = to_json(e.fit->params);
    } else {
      csv += format_double(e.target_height) + ",,,false,\n";
      je["error"] = e.error;
      if (first_error.empty()) {
        first_error = e.error;
      }
    }
    entries.push_back(std::move(je));
  }

  std::string pairwise = "height_m";
  for (double h : sweep.heights) {
    pairwise += "," + format_double(h);
  }
  pairwise += "\n";
  for (std::size_t i = 0; i < sweep.heights.size(); ++i) {
    pairwise += format_double(sweep.heights[i]);
    for (std::size_t j = 0; j < sweep.heights.size(); ++j) {
      pairwise += "," + format_double(sweep.pa_mpjpe_matrix(static_cast<Eigen::Index>(i),
                                                            static_cast<Eigen::Index>(j)));
    }
    pairwise += "\n";
  }

  Json summary = {{"schema", "ambiguity-1"},
                  {"heights_m", sweep.heights},
                  {"max_pairwise_pa_mpjpe_mm", sweep.max_pairwise_pa_mpjpe},
                  {"entries", std::move(entries)}};
  summary["max_pair"] = sweep.max_pair
                            ? Json::array({sweep.max_pair->first, sweep.max_pair->second})
                            : Json(nullptr);

  ctx.emit((dir / "sweep.csv").string(), csv);
  ctx.emit((dir / "pairwise.csv").string(), pairwise);
  ctx.emit((dir / "sweep_summary.json").string(), dump_json(summary));
  ctx.emit((dir / "ambiguity.svg").string(), ambiguity_svg(sweep, lp.problem.target_height));

  if (!first_error.empty()) {
    throw DivergedError("a sweep fit failed: " + first_error);
  }
  ctx.outcome.summary = std::to_string(sweep.entries.size()) + " fits, max mean 2D error " +
                        printf_str("%.6f", worst_2d) + " px, max pairwise PA-MPJPE " +
                        printf_str("%.4f", sweep.max_pairwise_pa_mpjpe) + " mm -> " + a.out_dir;
}

// eval ------------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string report;
  bool local = false;
  bool world = false;
};

struct LoadedSequence {
  JointSeq seq;
  std::optional<Points3> cam_roots;
};

LoadedSequence load_sequence(const std::string& path) {
  LoadedSequence out;
  if (std::filesystem::path(path).extension() == ".csv") {
    std::ifstream in(path);
    if (!in) {
      throw ParseError("cannot open " + path);
    }
    out.seq = sequence_from_root_csv(in);
    return out;
  }
  const Json doc = read_json_file(path);
  out.seq = sequence_from_json(doc);
  if (doc.contains("cam_roots")) {
    try {
      const auto rows = doc["cam_roots"].get<std::vector<std::array<double, 3>>>();
      Points3 roots(static_cast<Eigen::Index>(rows.size()), 3);
      for (std::size_t t = 0; t < rows.size(); ++t) {
        roots.row(static_cast<Eigen::Index>(t)) << rows[t][0], rows[t][1], rows[t][2];
      }
      out.cam_roots = std::move(roots);
    } catch (const Json::exception& e) {
      throw ParseError(path + ": cam_roots: " + e.what());
    }
  }
  return out;
}

void cmd_eval(const EvalArgs& a, Context& ctx) {
  const LoadedSequence pred = load_sequence(a.pred);
  const LoadedSequence gt = load_sequence(a.gt);
  if (pred.seq.num_frames() != gt.seq.num_frames()) {
    throw LengthMismatch("prediction has " + std::to_string(pred.seq.num_frames()) +
                         " frames, ground truth " + std::to_string(gt.seq.num_frames()));
  }
  const bool do_local = a.local || !a.world;
  const bool do_world = a.world || !a.local;
  // Root-only sequences support trajectory metrics only.
  const bool full_body = pred.seq.num_joints() >= 3 && gt.seq.num_joints() >= 3;

  MetricReport report;
  if (do_local && full_body) {
    const MetricReport local = local_metrics(pred.seq, gt.seq);
    report.mpjpe = local.mpjpe;
    report.pa_mpjpe = local.pa_mpjpe;
  }
  if (do_world) {
    if (full_body) {
      report.wa_mpjpe_100 = wa_mpjpe_100(pred.seq, gt.seq);
      report.w_mpjpe_100 = w_mpjpe_100(pred.seq, gt.seq);
    }
    report.rte = rte(pred.seq.roots(), gt.seq.roots());
    if (pred.cam_roots && gt.cam_roots) {
      report.erve = erve(*pred.cam_roots, *gt.cam_roots);
    } else {
      report.erve = erve(pred.seq.roots(), gt.seq.roots());
    }
  }

  ctx.out << report_table(report);
  if (!a.report.empty()) {
    ctx.emit(a.report, dump_json(to_json(report)));
  }
  ctx.outcome.summary = "evaluated " + std::to_string(gt.seq.num_frames()) + " frames";
}

// synth -----------------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::string out_dir;
};

void cmd_synth(const SynthArgs& a, Context& ctx) {
  TrajectorySpec spec = trajectory_spec_from_json(read_json_file(a.spec));
  if (ctx.seed) {
    spec.seed = *ctx.seed;
  }
  auto tpl = std::make_shared<const SkeletonTemplate>(default_template(spec.num_vertices));
  const Trajectory traj = make_trajectory(spec, *tpl);

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);

  std::string lines;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    lines += to_json(traj.samples[i], static_cast<int>(i)).dump() + "\n";
  }
  Json gt = to_json(traj.gt_world);
  Json cam_roots = Json::array();
  for (const auto& s : traj.samples) {
    cam_roots.push_back({s.camera_joints(0, 0), s.camera_joints(0, 1), s.camera_joints(0, 2)});
  }
  gt["cam_roots"] = std::move(cam_roots);

  ctx.emit((dir / "samples.jsonl").string(), lines);
  ctx.emit((dir / "gt_world.json").string(), dump_json(gt));
  ctx.emit((dir / "problem.json").string(),
           dump_json(to_json(problem_from_sample(traj.samples.front(), tpl))));
  ctx.outcome.summary = std::to_string(traj.samples.size()) + " frames, root path length " +
                        printf_str("%.4f", path_length(traj.gt_world.roots())) + " m -> " +
                        a.out_dir;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const LengthMismatch*>(&e) ||
      dynamic_cast<const InvalidArgument*>(&e)) {
    return kExitInput;
  }
  if (dynamic_cast<const DivergedError*>(&e) || dynamic_cast<const InitializationError*>(&e) ||
      dynamic_cast<const DegenerateConfiguration*>(&e) ||
      dynamic_cast<const NonPositiveDepth*>(&e) || dynamic_cast<const BehindCamera*>(&e) ||
      dynamic_cast<const ZeroPathLength*>(&e) || dynamic_cast<const TooShort*>(&e) ||
      dynamic_cast<const CheckFailed*>(&e)) {
    return kExitNumerical;
  }
  // File-system and other input problems.
  return kExitInput;
}

}  // namespace

CommandOutcome run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metric human-mesh geometry toolkit", "hmrgeom"};
  app.set_version_flag("--version", std::string("hmrgeom ") + HMRGEOM_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx{out, err, false, std::nullopt, {}};
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "override the random seed of a synth spec");
  app.add_flag("--quiet,-q", ctx.quiet, "suppress the summary line");

  RaymapArgs raymap;
  auto* raymap_cmd = app.add_subcommand("raymap", "export the per-pixel camera ray map");
  raymap_cmd->add_option("camera", raymap.camera, "camera JSON")->required();
  raymap_cmd->add_option("--bbox", raymap.bbox, "bbox JSON; exports the crop's ray map");
  raymap_cmd->add_option("--out", raymap.out, "binary output path")->required();
  raymap_cmd->add_option("--json", raymap.json, "also write a JSON copy here");
  raymap_cmd->add_flag("--normalize", raymap.normalize, "unit-length rays");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit body parameters to 2D keypoints");
  fit_cmd->add_option("problem", fit_args.problem, "problem JSON")->required();
  fit_cmd->add_option("--out", fit_args.out, "result JSON")->required();
  fit_args.flags.add_to(fit_cmd);

  AmbiguityArgs amb;
  auto* amb_cmd = app.add_subcommand("ambiguity", "sweep target heights on one problem");
  amb_cmd->add_option("problem", amb.problem, "problem JSON")->required();
  amb_cmd->add_option("--heights", amb.heights, "a:b:n, n evenly spaced heights in meters")
      ->required();
  amb_cmd->add_option("--out-dir", amb.out_dir, "output directory")->required();
  amb.flags.add_to(amb_cmd);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a predicted sequence");
  eval_cmd->add_option("pred", ev.pred, "predicted sequence (JSON, or root-only CSV)")->required();
  eval_cmd->add_option("gt", ev.gt, "ground-truth sequence (JSON, or root-only CSV)")->required();
  eval_cmd->add_option("--report", ev.report, "write the report JSON here");
  eval_cmd->add_flag("--local", ev.local, "camera-frame metrics only");
  eval_cmd->add_flag("--world", ev.world, "world-frame metrics only");

  SynthArgs syn;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic trajectory dataset");
  synth_cmd->add_option("spec", syn.spec, "trajectory spec JSON")->required();
  synth_cmd->add_option("--out", syn.out_dir, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    ctx.outcome.exit_code = code == 0 ? kExitOk : kExitUsage;
    return ctx.outcome;
  }
  if (seed_opt->count() > 0) {
    ctx.seed = seed;
  }

  try {
    if (*raymap_cmd) {
      cmd_raymap(raymap, ctx);
    } else if (*fit_cmd) {
      cmd_fit(fit_args, ctx);
    } else if (*amb_cmd) {
      cmd_ambiguity(amb, ctx);
    } else if (*eval_cmd) {
      cmd_eval(ev, ctx);
    } else if (*synth_cmd) {
      cmd_synth(syn, ctx);
    }
  } catch (const std::exception& e) {
    ctx.outcome.exit_code = exit_code_for(e);
    ctx.outcome.summary = e.what();
    const char* kind = dynamic_cast<const InitializationError*>(&e) ? "initialization error"
                       : dynamic_cast<const UsageError*>(&e)        ? "usage error"
                                                                    : "error";
    err << kind << ": " << e.what() << "\n";
    return ctx.outcome;
  }
  if (!ctx.quiet) {
    out << ctx.outcome.summary << "\n";
  }
  return ctx.outcome;
}

}  // namespace hmrgeom::cli
