#include <gtest/gtest.h>

#include <cstring>
#include <limits>
#include <sstream>

#include "hmrgeom/errors.hpp"
#include "hmrgeom/io.hpp"
#include "test_support.hpp"

namespace hmrgeom {
namespace {

using test::Rng;
using test::uniform;

TEST(Io, FormatDoubleRoundTrips) {
  Rng rng(50);
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform(rng, -1e6, 1e6) * std::pow(10.0, uniform(rng, -12, 12));
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
}

TEST(Io, CameraAndBoxRoundTrip) {
  const PinholeCamera cam{{1111.5, 1002.25, 960.125, 540.5}, {1920, 1080}};
  const PinholeCamera back = camera_from_json(to_json(cam));
  EXPECT_EQ(back.K.fx, cam.K.fx);
  EXPECT_EQ(back.K.cy, cam.K.cy);
  EXPECT_EQ(back.size.width, 1920);
  EXPECT_EQ(back.size.height, 1080);
  const BBox box{12.5, -4.0, 300.0, 300.0 / 256.0};
  const BBox b = bbox_from_json(to_json(box));
  EXPECT_EQ(b.u0, box.u0);
  EXPECT_EQ(b.scale, box.scale);
  EXPECT_THROW(camera_from_json(Json{{"fx", 1}}), ParseError);
  EXPECT_THROW(camera_from_json(Json::parse(R"({"fx":-1,"fy":1,"cx":0,"cy":0,"width":2,"height":2})")),
               ParseError);
}

TEST(Io, RayMapBinaryLayout) {
  const RayMap map = ray_map(Intrinsics{2, 4, 1, 2}, 3, 2, false);
  std::ostringstream out;
  write_raymap_binary(out, map);
  const std::string bytes = out.str();
  ASSERT_EQ(bytes.size(), 16u + 24u * 3u * 2u);
  EXPECT_EQ(bytes.substr(0, 8), "RAYMAP01");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 16, sizeof first);
  EXPECT_EQ(first, map.data[0]);

  std::istringstream in(bytes);
  const RayMap back = read_raymap_binary(in);
  EXPECT_EQ(back.width, 3);
  EXPECT_EQ(back.height, 2);
  EXPECT_EQ(back.data, map.data);
}

TEST(Io, RayMapBinaryRejectsDamage) {
  const RayMap map = ray_map(Intrinsics{2, 4, 1, 2}, 3, 2, true);
  std::ostringstream out;
  write_raymap_binary(out, map);
  const std::string bytes = out.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_raymap_binary(truncated), ParseError);
  std::istringstream trailing(bytes + "x");
  EXPECT_THROW(read_raymap_binary(trailing), ParseError);
  std::istringstream wrong("RAYMAP02" + bytes.substr(8));
  EXPECT_THROW(read_raymap_binary(wrong), ParseError);
  std::istringstream empty("");
  EXPECT_THROW(read_raymap_binary(empty), ParseError);
}

TEST(Io, RayMapJsonRoundTrip) {
  const RayMap map = ray_map(Intrinsics{500, 500, 128, 128}, 4, 3, true);
  const RayMap back = raymap_from_json(to_json(map));
  EXPECT_EQ(back.width, 4);
  EXPECT_EQ(back.height, 3);
  EXPECT_TRUE(back.normalized);
  EXPECT_EQ(back.data, map.data);
  Json bad = to_json(map);
  bad["width"] = 5;
  EXPECT_THROW(raymap_from_json(bad), ParseError);
}

TEST(Io, ParamsRoundTripIsExact) {
  Rng rng(51);
  const BodyParams p = test::random_params(rng, 1.0, 2.0);
  const BodyParams back = params_from_json(Json::parse(to_json(p).dump()));
  EXPECT_EQ(back.pack(), p.pack());
  const BodyParams zero = params_from_json(Json::object());
  EXPECT_EQ(zero.pack(), BodyParams{}.pack());
  EXPECT_THROW(params_from_json(Json{{"shape", {1, 2, 3}}}), ParseError);
  EXPECT_THROW(params_from_json(Json{{"translation", {1, "a", 3}}}), ParseError);
}

TEST(Io, TemplateRoundTrip) {
  const SkeletonTemplate tpl = default_template(kMinTemplateVertices);
  const Json j = to_json(tpl);
  EXPECT_EQ(j["schema"], "bmtpl-1");
  const SkeletonTemplate back = template_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.num_vertices(), 72);
  EXPECT_EQ(back.vertices(), tpl.vertices());
  EXPECT_EQ(back.skin_weights(), tpl.skin_weights());
  EXPECT_EQ(back.joint_regressor(), tpl.joint_regressor());
  Json wrong = j;
  wrong["schema"] = "bmtpl-0";
  EXPECT_THROW(template_from_json(wrong), ParseError);
}

TEST(Io, ProblemRoundTrip) {
  Rng rng(52);
  const FitProblem prob = test::problem_for(test::body_in_front(rng, 5.0), test::hd_camera(), 1.0, 3);
  const FitProblem back = problem_from_json(Json::parse(to_json(prob).dump()), test::template_ptr());
  EXPECT_EQ(back.target_kp2d, prob.target_kp2d);
  EXPECT_EQ(back.confidence, prob.confidence);
  EXPECT_EQ(back.K.fx, prob.K.fx);
  EXPECT_EQ(back.reference.pack(), prob.reference.pack());
  EXPECT_EQ(back.target_height, prob.target_height);
  EXPECT_TRUE(back.mimic_global_orient);
  EXPECT_EQ(back.tpl, test::template_ptr());  // matching vertex count reuses the template
}

TEST(Io, ProblemDefaults) {
  Json j;
  j["camera"] = {{"fx", 1000}, {"fy", 1000}, {"cx", 960}, {"cy", 540}};
  j["keypoints"] = Json::array();
  for (int k = 0; k < kNumJoints; ++k) {
    j["keypoints"].push_back({100.0 + k, 200.0});
  }
  j["num_vertices"] = 100;
  const FitProblem prob = problem_from_json(j);
  EXPECT_EQ(prob.confidence[5], 1.0);
  EXPECT_FALSE(prob.mimic_global_orient);
  EXPECT_FALSE(prob.target_height.has_value());
  EXPECT_EQ(prob.tpl->num_vertices(), 100);
  EXPECT_FALSE(init_from_problem_json(j).has_value());

  j["init"] = {{"translation", {0, 0, 4}}};
  ASSERT_TRUE(init_from_problem_json(j).has_value());
  EXPECT_EQ(init_from_problem_json(j)->translation.z(), 4.0);

  Json missing = j;
  missing.erase("keypoints");
  EXPECT_THROW(problem_from_json(missing), ParseError);
  Json short_kps = j;
  short_kps["keypoints"].erase(3);
  EXPECT_THROW(problem_from_json(short_kps), ParseError);
  Json schema = j;
  schema["schema"] = "fitproblem-2";
  EXPECT_THROW(problem_from_json(schema), ParseError);
}

TEST(Io, ResultDocument) {
  Rng rng(53);
  const FitProblem prob = test::problem_for(test::body_in_front(rng, 5.0), test::hd_camera());
  FitResult r;
  r.params = prob.reference;
  r.final_cost = 1.5;
  r.iterations = 7;
  r.converged = true;
  r.termination = Termination::kSmallStep;
  r.cost_history = {3.0, 1.5};
  const Json j = to_json(r, prob);
  EXPECT_EQ(j["schema"], "fitresult-1");
  EXPECT_EQ(j["termination"], "small_step");
  EXPECT_EQ(j["iterations"], 7);
  EXPECT_EQ(j["joints"].size(), static_cast<std::size_t>(kNumJoints));
  EXPECT_EQ(j["depth_m"].get<double>(), r.params.translation.z());
  EXPECT_EQ(params_from_json(j["params"]).pack(), r.params.pack());
}

TEST(Io, WeightsOverrideDefaults) {
  const LossWeights w = weights_from_json(Json{{"w_measure", 5.0}});
  EXPECT_EQ(w.w_measure, 5.0);
  EXPECT_EQ(w.w_2d, LossWeights{}.w_2d);
  EXPECT_THROW(weights_from_json(Json::array()), ParseError);
  EXPECT_THROW(weights_from_json(Json{{"w_2d", "heavy"}}), ParseError);
}

TEST(Io, SequenceRoundTrip) {
  Rng rng(54);
  JointSeq seq;
  seq.fps = 25.0;
  for (int t = 0; t < 5; ++t) {
    seq.frames.push_back(test::random_points(rng, 24));
  }
  seq.valid = {true, false, true, true, true};
  const JointSeq back = sequence_from_json(Json::parse(to_json(seq).dump()));
  EXPECT_EQ(back.fps, 25.0);
  EXPECT_EQ(back.valid, seq.valid);
  for (int t = 0; t < 5; ++t) {
    EXPECT_EQ(back.frames[t], seq.frames[t]);
  }
  Json ragged = to_json(seq);
  ragged["joints"][2].erase(0);
  EXPECT_THROW(sequence_from_json(ragged), ParseError);
}

TEST(Io, RootCsvRoundTrip) {
  std::istringstream in("frame,x,y,z\n0,1.5,-0.95,0\n1,1.6,-0.95,0.25\n2,1.7,-0.9,0.5\n");
  const JointSeq seq = sequence_from_root_csv(in);
  EXPECT_EQ(seq.num_frames(), 3);
  EXPECT_EQ(seq.num_joints(), 1);
  EXPECT_EQ(seq.frames[1](0, 2), 0.25);
  EXPECT_EQ(root_csv(seq), "frame,x,y,z\n0,1.5,-0.95,0\n1,1.6,-0.95,0.25\n2,1.7,-0.9,0.5\n");

  std::istringstream gap("frame,x,y,z\n0,1,2,3\n2,1,2,3\n");
  EXPECT_THROW(sequence_from_root_csv(gap), ParseError);
  std::istringstream junk("frame,x,y,z\n0,1,two,3\n");
  EXPECT_THROW(sequence_from_root_csv(junk), ParseError);
  std::istringstream header("t,x,y,z\n0,1,2,3\n");
  EXPECT_THROW(sequence_from_root_csv(header), ParseError);
}

TEST(Io, ReportOmitsMissingMetrics) {
  MetricReport r;
  r.mpjpe = 12.345678;
  r.rte = 0.5;
  const Json j = to_json(r);
  EXPECT_EQ(j["mpjpe_mm"], 12.345678);
  EXPECT_FALSE(j.contains("pve_mm"));
  EXPECT_EQ(report_table(r),
            "MPJPE (mm)                 12.3457\n"
            "RTE (%)                     0.5000\n");
}

TEST(Io, SceneSampleDocument) {
  Rng rng(55);
  const SceneSample s = render_sample(*test::template_ptr(), test::body_in_front(rng, 5.0),
                                      test::hd_camera(), Extrinsics{}, 0.0, 0);
  const Json j = Json::parse(to_json(s, 4).dump());
  EXPECT_EQ(j["schema"], "synth-1");
  EXPECT_EQ(j["frame"], 4);
  EXPECT_EQ(params_from_json(j["params"]).pack(), s.params.pack());
  EXPECT_EQ(j["keypoints"][3][0].get<double>(), s.kp2d(3, 0));
  EXPECT_EQ(extrinsics_from_json(j["extrinsics"]).rotation, s.extrinsics.rotation);
  EXPECT_EQ(bbox_from_json(j["bbox"]).side, s.bbox.side);
}

TEST(Io, TrajectorySpecRoundTrip) {
  TrajectorySpec spec;
  spec.path = PathShape::kFigureEight;
  spec.camera = CameraMotion::kOrbiting;
  spec.frames = 120;
  spec.sigma_kp = 1.25;
  spec.seed = std::numeric_limits<std::uint64_t>::max();
  spec.shape[3] = 0.5;
  const TrajectorySpec back = trajectory_spec_from_json(Json::parse(to_json(spec).dump()));
  EXPECT_EQ(back.path, spec.path);
  EXPECT_EQ(back.camera, spec.camera);
  EXPECT_EQ(back.frames, 120);
  EXPECT_EQ(back.sigma_kp, 1.25);
  EXPECT_EQ(back.seed, spec.seed);
  EXPECT_EQ(back.shape, spec.shape);

  EXPECT_EQ(trajectory_spec_from_json(Json{{"path", "figure-eight"}}).path,
            PathShape::kFigureEight);
  EXPECT_THROW(trajectory_spec_from_json(Json{{"path", "spiral"}}), ParseError);
  EXPECT_THROW(trajectory_spec_from_json(Json{{"path", "line"}, {"seed", -1}}), ParseError);
  EXPECT_THROW(trajectory_spec_from_json(Json{{"path", "line"}, {"frames", 1}}), ParseError);
  EXPECT_THROW(trajectory_spec_from_json(Json{{"path", "line"}, {"sigma_kp", 1.0}}), ParseError);
}

TEST(Io, MissingFileIsAParseError) {
  EXPECT_THROW(read_json_file("/nonexistent/hmrgeom.json"), ParseError);
  const auto dir = test::scratch_dir("io_bad_json");
  write_text_file((dir / "bad.json").string(), "{not json");
  EXPECT_THROW(read_json_file((dir / "bad.json").string()), ParseError);
}

}  // namespace
}  // namespace hmrgeom
