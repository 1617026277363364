#include "hmrgeom/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "hmrgeom/errors.hpp"

namespace hmrgeom {

namespace {

// Runs a parser body, turning library-level type errors into ParseError.
template <typename F>
auto guarded(const char* what, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  } catch (const LengthMismatch& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) {
    throw ParseError(std::string("expected an object holding \"") + key + "\"");
  }
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(std::string("missing field \"") + key + "\"");
  }
  return *it;
}

double number(const Json& j) {
  if (!j.is_number()) {
    throw ParseError("expected a number, got " + std::string(j.type_name()));
  }
  return j.get<double>();
}

int integer(const Json& j) {
  if (!j.is_number_integer()) {
    throw ParseError("expected an integer, got " + std::string(j.type_name()));
  }
  return j.get<int>();
}

std::vector<double> numbers(const Json& j, std::size_t expected) {
  if (!j.is_array() || j.size() != expected) {
    throw ParseError("expected an array of " + std::to_string(expected) + " numbers");
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : j) {
    out.push_back(number(v));
  }
  return out;
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const Json& j) {
  const auto v = numbers(j, N);
  return Eigen::Map<const Eigen::Matrix<double, N, 1>>(v.data());
}

Json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v[i]);
  }
  return out;
}

Json rows_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out.push_back(vec_json(m.row(r).transpose()));
  }
  return out;
}

Eigen::MatrixXd rows_matrix(const Json& j, Eigen::Index cols) {
  if (!j.is_array()) {
    throw ParseError("expected an array of rows");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = numbers(j[r], static_cast<std::size_t>(cols));
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

Points3 points(const Json& j) { return rows_matrix(j, 3); }

void check_schema(const Json& j, std::string_view schema) {
  if (!j.is_object()) {
    throw ParseError("expected a JSON object");
  }
  const auto it = j.find("schema");
  if (it != j.end() && (!it->is_string() || it->get<std::string>() != schema)) {
    throw ParseError("unsupported schema, expected \"" + std::string(schema) + "\"");
  }
}

Intrinsics intrinsics_from_json(const Json& j) {
  Intrinsics K{number(require(j, "fx")), number(require(j, "fy")), number(require(j, "cx")),
               number(require(j, "cy"))};
  validate(K);
  return K;
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kAtOptimum:
      return "at_optimum";
    case Termination::kRelativeCostChange:
      return "relative_cost_change";
    case Termination::kSmallStep:
      return "small_step";
    case Termination::kStalled:
      return "stalled";
    case Termination::kMaxIterations:
      return "max_iterations";
  }
  return "unknown";
}

template <typename Enum, std::size_t N>
Enum enum_from_name(const Json& j, const std::array<std::pair<const char*, Enum>, N>& names) {
  if (!j.is_string()) {
    throw ParseError("expected a string");
  }
  const std::string s = j.get<std::string>();
  for (const auto& [name, value] : names) {
    if (s == name) {
      return value;
    }
  }
  throw ParseError("unknown value \"" + s + "\"");
}

constexpr std::array<std::pair<const char*, PathShape>, 4> kPathNames = {{
    {"line", PathShape::kLine},
    {"circle", PathShape::kCircle},
    {"figure_eight", PathShape::kFigureEight},
    {"figure-eight", PathShape::kFigureEight},
}};

constexpr std::array<std::pair<const char*, CameraMotion>, 2> kCameraNames = {{
    {"static", CameraMotion::kStatic},
    {"orbiting", CameraMotion::kOrbiting},
}};

template <typename T>
void put_le(std::ostream& out, T value) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw ParseError("ray map file is truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  return std::bit_cast<T>(bytes);
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw Error("cannot write " + path);
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// Camera ------------------------------------------------------------------

Json to_json(const PinholeCamera& camera) {
  return {{"fx", camera.K.fx},          {"fy", camera.K.fy},
          {"cx", camera.K.cx},          {"cy", camera.K.cy},
          {"width", camera.size.width}, {"height", camera.size.height}};
}

PinholeCamera camera_from_json(const Json& j) {
  return guarded("camera", [&] {
    PinholeCamera cam;
    cam.K = intrinsics_from_json(j);
    cam.size = {integer(require(j, "width")), integer(require(j, "height"))};
    validate(cam.size);
    return cam;
  });
}

Json to_json(const BBox& box) {
  return {{"u0", box.u0}, {"v0", box.v0}, {"side", box.side}, {"scale", box.scale}};
}

BBox bbox_from_json(const Json& j) {
  return guarded("bbox", [&] {
    BBox box{number(require(j, "u0")), number(require(j, "v0")), number(require(j, "side")),
             number(require(j, "scale"))};
    validate(box);
    return box;
  });
}

void write_raymap_binary(std::ostream& out, const RayMap& map) {
  out.write(kRayMapMagic.data(), static_cast<std::streamsize>(kRayMapMagic.size()));
  put_le(out, static_cast<std::uint32_t>(map.width));
  put_le(out, static_cast<std::uint32_t>(map.height));
  for (double v : map.data) {
    put_le(out, v);
  }
}

RayMap read_raymap_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) ||
      std::string_view(magic.data(), magic.size()) != kRayMapMagic) {
    throw ParseError("not a ray map file");
  }
  RayMap map;
  map.width = static_cast<int>(get_le<std::uint32_t>(in));
  map.height = static_cast<int>(get_le<std::uint32_t>(in));
  const std::size_t n = 3 * static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height);
  map.data.resize(n);
  for (double& v : map.data) {
    v = get_le<double>(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("ray map file has trailing bytes");
  }
  return map;
}

Json to_json(const RayMap& map) {
  Json rays = Json::array();
  for (std::size_t k = 0; k < map.data.size(); k += 3) {
    rays.push_back({map.data[k], map.data[k + 1], map.data[k + 2]});
  }
  return {{"width", map.width}, {"height", map.height}, {"normalized", map.normalized},
          {"rays", std::move(rays)}};
}

RayMap raymap_from_json(const Json& j) {
  return guarded("ray map", [&] {
    RayMap map;
    map.width = integer(require(j, "width"));
    map.height = integer(require(j, "height"));
    map.normalized = require(j, "normalized").get<bool>();
    const Eigen::MatrixXd rays = rows_matrix(require(j, "rays"), 3);
    if (rays.rows() != static_cast<Eigen::Index>(map.width) * map.height) {
      throw ParseError("ray count does not match width x height");
    }
    map.data.reserve(static_cast<std::size_t>(rays.size()));
    for (Eigen::Index r = 0; r < rays.rows(); ++r) {
      for (Eigen::Index c = 0; c < 3; ++c) {
        map.data.push_back(rays(r, c));
      }
    }
    return map;
  });
}

// Body model ---------------------------------------------------------------

Json to_json(const BodyParams& params) {
  return {{"pose", vec_json(params.pose)},
          {"shape", vec_json(params.shape)},
          {"global_orient", vec_json(params.global_orient)},
          {"translation", vec_json(params.translation)}};
}

BodyParams params_from_json(const Json& j) {
  return guarded("body params", [&] {
    if (!j.is_object()) {
      throw ParseError("body params must be an object");
    }
    BodyParams p;
    if (j.contains("pose")) p.pose = vec<kNumPoseParams>(j["pose"]);
    if (j.contains("shape")) p.shape = vec<kNumShapeParams>(j["shape"]);
    if (j.contains("global_orient")) p.global_orient = vec<3>(j["global_orient"]);
    if (j.contains("translation")) p.translation = vec<3>(j["translation"]);
    p.validate();
    return p;
  });
}

Json to_json(const SkeletonTemplate& tpl) {
  Json dirs = Json::array();
  for (const auto& d : tpl.shape_dirs()) {
    dirs.push_back(rows_json(d));
  }
  return {{"schema", std::string(kTemplateSchema)},
          {"vertices", rows_json(tpl.vertices())},
          {"skin_weights", rows_json(tpl.skin_weights())},
          {"joint_regressor", rows_json(tpl.joint_regressor())},
          {"shape_dirs", std::move(dirs)}};
}

SkeletonTemplate template_from_json(const Json& j) {
  return guarded("template", [&] {
    check_schema(j, kTemplateSchema);
    Points3 verts = points(require(j, "vertices"));
    Eigen::MatrixXd weights = rows_matrix(require(j, "skin_weights"), kNumJoints);
    const Json& reg = require(j, "joint_regressor");
    Eigen::MatrixXd regressor = rows_matrix(reg, verts.rows());
    const Json& dirs = require(j, "shape_dirs");
    if (!dirs.is_array() || dirs.size() != kNumShapeParams) {
      throw ParseError("expected 10 shape directions");
    }
    std::array<Points3, kNumShapeParams> shape_dirs;
    for (int k = 0; k < kNumShapeParams; ++k) {
      shape_dirs[static_cast<std::size_t>(k)] = points(dirs[static_cast<std::size_t>(k)]);
    }
    return SkeletonTemplate(std::move(verts), std::move(weights), std::move(regressor),
                            std::move(shape_dirs));
  });
}

// Fitting -----------------------------------------------------------------

FitProblem problem_from_json(const Json& j, std::shared_ptr<const SkeletonTemplate> tpl) {
  return guarded("fit problem", [&] {
    check_schema(j, kProblemSchema);
    FitProblem prob;

    const Json& kps = require(j, "keypoints");
    if (!kps.is_array() || kps.size() != kNumJoints) {
      throw ParseError("keypoints must hold 24 entries");
    }
    for (int k = 0; k < kNumJoints; ++k) {
      const Json& kp = kps[static_cast<std::size_t>(k)];
      const auto v = numbers(kp, kp.is_array() && kp.size() == 2 ? 2 : 3);
      prob.target_kp2d(k, 0) = v[0];
      prob.target_kp2d(k, 1) = v[1];
      prob.confidence[static_cast<std::size_t>(k)] = v.size() == 3 ? v[2] : 1.0;
    }
    prob.K = intrinsics_from_json(require(j, "camera"));

    // Without a reference the mimic terms pull toward the rest pose, so the
    // global orientation is left free.
    if (j.contains("reference")) {
      prob.reference = params_from_json(j["reference"]);
      prob.mimic_global_orient = true;
    } else {
      prob.mimic_global_orient = false;
    }
    if (j.contains("mimic_global_orient")) {
      prob.mimic_global_orient = j["mimic_global_orient"].get<bool>();
    }
    if (j.contains("target_height") && !j["target_height"].is_null()) {
      prob.target_height = number(j["target_height"]);
    }

    int num_vertices = tpl ? tpl->num_vertices() : kDefaultTemplateVertices;
    if (j.contains("num_vertices")) {
      num_vertices = integer(j["num_vertices"]);
    }
    if (!tpl || tpl->num_vertices() != num_vertices) {
      tpl = std::make_shared<const SkeletonTemplate>(default_template(num_vertices));
    }
    prob.tpl = std::move(tpl);
    prob.validate();
    return prob;
  });
}

Json to_json(const FitProblem& prob) {
  Json kps = Json::array();
  for (int k = 0; k < kNumJoints; ++k) {
    kps.push_back({prob.target_kp2d(k, 0), prob.target_kp2d(k, 1),
                   prob.confidence[static_cast<std::size_t>(k)]});
  }
  Json j = {{"schema", std::string(kProblemSchema)},
            {"keypoints", std::move(kps)},
            {"camera",
             {{"fx", prob.K.fx}, {"fy", prob.K.fy}, {"cx", prob.K.cx}, {"cy", prob.K.cy}}},
            {"reference", to_json(prob.reference)},
            {"mimic_global_orient", prob.mimic_global_orient},
            {"num_vertices", prob.tpl ? prob.tpl->num_vertices() : kDefaultTemplateVertices}};
  if (prob.target_height) {
    j["target_height"] = *prob.target_height;
  }
  return j;
}

std::optional<BodyParams> init_from_problem_json(const Json& j) {
  if (!j.is_object() || !j.contains("init")) {
    return std::nullopt;
  }
  return params_from_json(j["init"]);
}

Json to_json(const FitResult& result, const FitProblem& prob) {
  Json j = {{"schema", std::string(kResultSchema)},
            {"params", to_json(result.params)},
            {"final_cost", result.final_cost},
            {"mean_kp2d_error_px", result.mean_kp2d_error},
            {"iterations", result.iterations},
            {"converged", result.converged},
            {"termination", termination_name(result.termination)},
            {"cost_breakdown",
             {{"kp2d", result.breakdown.kp2d},
              {"mimic_pose", result.breakdown.mimic_pose},
              {"mimic_shape", result.breakdown.mimic_shape},
              {"measurement", result.breakdown.measurement}}},
            {"cost_history", result.cost_history},
            {"depth_m", result.params.translation.z()}};
  if (prob.tpl) {
    j["height_m"] = height(*prob.tpl, result.params.shape);
    j["joints"] = rows_json(forward_joints(*prob.tpl, result.params));
  }
  return j;
}

LossWeights weights_from_json(const Json& j, LossWeights defaults) {
  return guarded("loss weights", [&] {
    if (!j.is_object()) {
      throw ParseError("loss weights must be an object");
    }
    LossWeights w = defaults;
    if (j.contains("w_2d")) w.w_2d = number(j["w_2d"]);
    if (j.contains("w_mimic_pose")) w.w_mimic_pose = number(j["w_mimic_pose"]);
    if (j.contains("w_mimic_shape")) w.w_mimic_shape = number(j["w_mimic_shape"]);
    if (j.contains("w_measure")) w.w_measure = number(j["w_measure"]);
    w.validate();
    return w;
  });
}

// Metrics -----------------------------------------------------------------

Json to_json(const JointSeq& seq) {
  Json frames = Json::array();
  for (const auto& f : seq.frames) {
    frames.push_back(rows_json(f));
  }
  Json j = {{"schema", std::string(kSequenceSchema)}, {"fps", seq.fps}, {"joints", std::move(frames)}};
  if (!seq.valid.empty()) {
    j["valid"] = seq.valid;
  }
  return j;
}

JointSeq sequence_from_json(const Json& j) {
  return guarded("joint sequence", [&] {
    check_schema(j, kSequenceSchema);
    JointSeq seq;
    if (j.contains("fps")) {
      seq.fps = number(j["fps"]);
    }
    const Json& frames = require(j, "joints");
    if (!frames.is_array()) {
      throw ParseError("joints must be an array of frames");
    }
    for (const auto& f : frames) {
      seq.frames.push_back(points(f));
    }
    if (j.contains("valid")) {
      for (const auto& v : j["valid"]) {
        seq.valid.push_back(v.get<bool>());
      }
    }
    seq.validate();
    return seq;
  });
}

JointSeq sequence_from_root_csv(std::istream& in, double fps) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame,x,y,z", 0) != 0) {
    throw ParseError("root CSV must start with the header frame,x,y,z");
  }
  JointSeq seq;
  seq.fps = fps;
  int expected = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      continue;
    }
    std::array<double, 4> v{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t k = 0; k < v.size(); ++k) {
      const auto res = std::from_chars(p, end, v[k]);
      if (res.ec != std::errc()) {
        throw ParseError("malformed root CSV row: " + line);
      }
      p = res.ptr;
      if (k + 1 < v.size()) {
        if (p == end || *p != ',') {
          throw ParseError("malformed root CSV row: " + line);
        }
        ++p;
      }
    }
    if (v[0] != expected) {
      throw ParseError("root CSV frames must be consecutive from 0");
    }
    ++expected;
    Points3 f(1, 3);
    f << v[1], v[2], v[3];
    seq.frames.push_back(std::move(f));
  }
  if (seq.frames.empty()) {
    throw ParseError("root CSV has no rows");
  }
  return seq;
}

std::string root_csv(const JointSeq& seq) {
  std::string out = "frame,x,y,z\n";
  for (int t = 0; t < seq.num_frames(); ++t) {
    const auto& r = seq.frames[static_cast<std::size_t>(t)];
    out += std::to_string(t) + "," + format_double(r(0, 0)) + "," + format_double(r(0, 1)) + "," +
           format_double(r(0, 2)) + "\n";
  }
  return out;
}

namespace {

struct ReportField {
  const char* key;
  const char* label;
  std::optional<double> MetricReport::*member;
};

constexpr std::array<ReportField, 7> kReportFields = {{
    {"mpjpe_mm", "MPJPE (mm)", &MetricReport::mpjpe},
    {"pa_mpjpe_mm", "PA-MPJPE (mm)", &MetricReport::pa_mpjpe},
    {"pve_mm", "PVE (mm)", &MetricReport::pve},
    {"wa_mpjpe_100_mm", "WA-MPJPE100 (mm)", &MetricReport::wa_mpjpe_100},
    {"w_mpjpe_100_mm", "W-MPJPE100 (mm)", &MetricReport::w_mpjpe_100},
    {"rte_percent", "RTE (%)", &MetricReport::rte},
    {"erve_mm_per_frame", "ERVE (mm/frame)", &MetricReport::erve},
}};

}  // namespace

Json to_json(const MetricReport& report) {
  Json j = {{"schema", std::string(kReportSchema)}};
  for (const auto& f : kReportFields) {
    if (const auto& v = report.*f.member) {
      j[f.key] = *v;
    }
  }
  return j;
}

std::string report_table(const MetricReport& report) {
  std::ostringstream out;
  for (const auto& f : kReportFields) {
    if (const auto& v = report.*f.member) {
      out << std::left << std::setw(20) << f.label << std::right << std::fixed
          << std::setprecision(4) << std::setw(14) << *v << "\n";
    }
  }
  return out.str();
}

// Synth -------------------------------------------------------------------

Json to_json(const Extrinsics& extr) {
  return {{"rotation", rows_json(extr.rotation)}, {"translation", vec_json(extr.translation)}};
}

Extrinsics extrinsics_from_json(const Json& j) {
  return guarded("extrinsics", [&] {
    Extrinsics e;
    const Eigen::MatrixXd r = rows_matrix(require(j, "rotation"), 3);
    if (r.rows() != 3) {
      throw ParseError("rotation must be 3x3");
    }
    e.rotation = r;
    e.translation = vec<3>(require(j, "translation"));
    e.validate();
    return e;
  });
}

Json to_json(const SceneSample& sample, int frame) {
  Json kps = Json::array();
  for (int k = 0; k < kNumJoints; ++k) {
    kps.push_back({sample.kp2d(k, 0), sample.kp2d(k, 1),
                   sample.confidence[static_cast<std::size_t>(k)]});
  }
  return {{"schema", std::string(kSynthSchema)},
          {"frame", frame},
          {"params", to_json(sample.params)},
          {"keypoints", std::move(kps)},
          {"bbox", to_json(sample.bbox)},
          {"camera", to_json(sample.camera)},
          {"extrinsics", to_json(sample.extrinsics)},
          {"camera_joints", rows_json(sample.camera_joints)},
          {"world_joints", rows_json(sample.world_joints)}};
}

Json to_json(const TrajectorySpec& spec) {
  const char* path = spec.path == PathShape::kLine     ? "line"
                     : spec.path == PathShape::kCircle ? "circle"
                                                       : "figure_eight";
  return {{"schema", std::string(kTrajSpecSchema)},
          {"path", path},
          {"length", spec.length},
          {"frames", spec.frames},
          {"fps", spec.fps},
          {"camera", spec.camera == CameraMotion::kStatic ? "static" : "orbiting"},
          {"noise_px", spec.sigma_kp},
          {"shape", vec_json(spec.shape)},
          {"seed", spec.seed},
          {"intrinsics", to_json(spec.intrinsics)},
          {"num_vertices", spec.num_vertices}};
}

TrajectorySpec trajectory_spec_from_json(const Json& j) {
  return guarded("trajectory spec", [&] {
    check_schema(j, kTrajSpecSchema);
    // A misspelled key would otherwise silently fall back to its default.
    static constexpr std::array<std::string_view, 11> kKeys = {
        "schema", "path",  "length", "frames",    "fps",         "camera",
        "noise_px", "shape", "seed",   "intrinsics", "num_vertices"};
    for (const auto& [key, value] : j.items()) {
      if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
        throw ParseError("unknown trajectory spec key \"" + key + "\"");
      }
    }
    TrajectorySpec spec;
    spec.path = enum_from_name(require(j, "path"), kPathNames);
    if (j.contains("length")) spec.length = number(j["length"]);
    if (j.contains("frames")) spec.frames = integer(j["frames"]);
    if (j.contains("fps")) spec.fps = number(j["fps"]);
    if (j.contains("camera")) spec.camera = enum_from_name(j["camera"], kCameraNames);
    if (j.contains("noise_px")) spec.sigma_kp = number(j["noise_px"]);
    if (j.contains("shape")) spec.shape = vec<kNumShapeParams>(j["shape"]);
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) {
        throw ParseError("seed must be a non-negative integer");
      }
      spec.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("intrinsics")) spec.intrinsics = camera_from_json(j["intrinsics"]);
    if (j.contains("num_vertices")) spec.num_vertices = integer(j["num_vertices"]);
    spec.validate();
    return spec;
  });
}

}  // namespace hmrgeom
