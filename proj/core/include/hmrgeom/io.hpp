#pragma once

// JSON and binary file formats for every module. All parse failures raise
// ParseError.

#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hmrgeom/body_model.hpp"
#include "hmrgeom/camera.hpp"
#include "hmrgeom/fitting.hpp"
#include "hmrgeom/metrics.hpp"
#include "hmrgeom/synth.hpp"

namespace hmrgeom {

using Json = nlohmann::json;

inline constexpr std::string_view kTemplateSchema = "bmtpl-1";
inline constexpr std::string_view kProblemSchema = "fitproblem-1";
inline constexpr std::string_view kResultSchema = "fitresult-1";
inline constexpr std::string_view kSynthSchema = "synth-1";
inline constexpr std::string_view kTrajSpecSchema = "trajspec-1";
inline constexpr std::string_view kSequenceSchema = "jointseq-1";
inline constexpr std::string_view kReportSchema = "metrics-1";
inline constexpr std::string_view kRayMapMagic = "RAYMAP01";

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);
/// Two-space indented, trailing newline.
std::string dump_json(const Json& j);

// Camera ------------------------------------------------------------------
Json to_json(const PinholeCamera& camera);
PinholeCamera camera_from_json(const Json& j);
Json to_json(const BBox& box);
BBox bbox_from_json(const Json& j);

/// 16-byte header ("RAYMAP01", u32 width, u32 height) then row-major
/// little-endian float64 triples.
void write_raymap_binary(std::ostream& out, const RayMap& map);
RayMap read_raymap_binary(std::istream& in);
Json to_json(const RayMap& map);
RayMap raymap_from_json(const Json& j);

// Body model ---------------------------------------------------------------
Json to_json(const BodyParams& params);
BodyParams params_from_json(const Json& j);
Json to_json(const SkeletonTemplate& tpl);
SkeletonTemplate template_from_json(const Json& j);

// Fitting -----------------------------------------------------------------
/// `tpl` is used unless the document names its own vertex count.
FitProblem problem_from_json(const Json& j, std::shared_ptr<const SkeletonTemplate> tpl = nullptr);
Json to_json(const FitProblem& prob);
/// The optional "init" entry of a problem document.
std::optional<BodyParams> init_from_problem_json(const Json& j);
Json to_json(const FitResult& result, const FitProblem& prob);
LossWeights weights_from_json(const Json& j, LossWeights defaults = {});

// Metrics -----------------------------------------------------------------
Json to_json(const JointSeq& seq);
JointSeq sequence_from_json(const Json& j);
/// CSV with header frame,x,y,z; one root joint per frame.
JointSeq sequence_from_root_csv(std::istream& in, double fps = 30.0);
std::string root_csv(const JointSeq& seq);
Json to_json(const MetricReport& report);
/// Aligned two-column text table; metrics that were not computed are omitted.
std::string report_table(const MetricReport& report);

// Synth -------------------------------------------------------------------
Json to_json(const Extrinsics& extr);
Extrinsics extrinsics_from_json(const Json& j);
Json to_json(const SceneSample& sample, int frame);
Json to_json(const TrajectorySpec& spec);
TrajectorySpec trajectory_spec_from_json(const Json& j);

}  // namespace hmrgeom
