#include "hydro/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace hydro {
namespace {

std::filesystem::path write_temp_file(const std::string& name,
                                      const std::string& text) {
  const std::filesystem::path path =
      std::filesystem::path(::testing::TempDir()) / name;
  std::ofstream out(path);
  out << text;
  return path;
}

TEST(LoadScenario, ParsesEveryField) {
  const auto path = write_temp_file("full.json", R"({
    "name": "jsontest",
    "gravity": [0, 0, -1.5],
    "duration": 0.25,
    "recording_stride": 4,
    "epsilon_body": "puck",
    "contact": {"friction": 0.3, "dissipation": 0.02},
    "solver": {
      "delta_time": 5e-4,
      "max_newton_iterations": 80,
      "residual_tolerance": 1e-9,
      "absolute_tolerance": 1e-13,
      "stiction_velocity": 2e-4,
      "backtracking_factor": 0.25,
      "max_line_search_steps": 12,
      "smoothing_width": 1e-9,
      "tessellation": "triangulated"
    },
    "bodies": [
      {"name": "ground", "anchored": true,
       "geometry": {"kind": "rigid_plane", "extent": 2.0}},
      {"name": "puck", "mass": 0.25, "inertia": [1e-5, 1e-5, 2e-5],
       "geometry": {"kind": "cylinder", "radius": 0.05, "height": 0.02,
                    "modulus": 1e6, "resolution": 0.01},
       "pose": {"position": [0, 0, 0.011], "quaternion": [1, 0, 0, 0]},
       "velocity": {"angular": [0, 0, 10], "linear": [0.1, 0, 0]}}
    ]
  })");
  const Scenario s = load_scenario(path);
  EXPECT_EQ(s.name, "jsontest");
  EXPECT_EQ(s.gravity.z(), -1.5);
  EXPECT_EQ(s.duration, 0.25);
  EXPECT_EQ(s.recording_stride, 4);
  EXPECT_EQ(s.epsilon_body, "puck");
  EXPECT_EQ(s.contact.friction, 0.3);
  EXPECT_EQ(s.contact.dissipation, 0.02);
  EXPECT_EQ(s.solver.delta_time, 5e-4);
  EXPECT_EQ(s.solver.max_newton_iterations, 80);
  EXPECT_EQ(s.solver.residual_tolerance, 1e-9);
  EXPECT_EQ(s.solver.absolute_tolerance, 1e-13);
  EXPECT_EQ(s.solver.stiction_velocity, 2e-4);
  EXPECT_EQ(s.solver.backtracking_factor, 0.25);
  EXPECT_EQ(s.solver.max_line_search_steps, 12);
  EXPECT_EQ(s.solver.smoothing_width, 1e-9);
  EXPECT_EQ(s.solver.tessellation, TessellationMode::kTriangulated);
  ASSERT_EQ(s.bodies.size(), 2u);
  EXPECT_TRUE(s.bodies[0].anchored);
  EXPECT_EQ(s.bodies[0].geometry.kind, "rigid_plane");
  EXPECT_EQ(s.bodies[0].geometry.extent, 2.0);
  const BodySpec& puck = s.bodies[1];
  EXPECT_EQ(puck.mass, 0.25);
  ASSERT_TRUE(puck.inertia_diagonal.has_value());
  EXPECT_EQ(puck.inertia_diagonal->z(), 2e-5);
  EXPECT_EQ(puck.geometry.radius, 0.05);
  EXPECT_EQ(puck.pose.translation.z(), 0.011);
  EXPECT_EQ(puck.velocity[2], 10.0);
  EXPECT_EQ(puck.velocity[3], 0.1);
}

TEST(LoadScenario, DefaultsAndErrors) {
  const auto minimal = write_temp_file("minimal.json", R"({
    "bodies": [{"name": "lone",
                "geometry": {"kind": "box", "half_sizes": [0.01, 0.01, 0.01],
                             "modulus": 1e5, "resolution": 0.01}}]
  })");
  const Scenario s = load_scenario(minimal);
  EXPECT_EQ(s.name, "minimal");  // falls back to the file stem
  EXPECT_EQ(s.gravity.z(), -9.81);
  EXPECT_EQ(s.duration, 1.0);
  EXPECT_EQ(s.recording_stride, 1);
  EXPECT_EQ(s.solver.tessellation, TessellationMode::kPolygonal);
  EXPECT_EQ(s.solver.delta_time, 1e-3);

  const auto no_bodies = write_temp_file("no_bodies.json", R"({"name": "x"})");
  EXPECT_THROW(load_scenario(no_bodies), std::runtime_error);

  const auto bad_mode = write_temp_file("bad_mode.json", R"({
    "solver": {"tessellation": "voronoi"},
    "bodies": [{"name": "a", "geometry": {"kind": "rigid_plane", "extent": 1}}]
  })");
  EXPECT_THROW(load_scenario(bad_mode), std::runtime_error);

  EXPECT_THROW(load_scenario("/nonexistent/path.json"), std::runtime_error);
}

TEST(BuildWorld, ShapeInertiaFormulas) {
  const Scenario box_scene = make_box_on_slab_scenario();
  const World box_world = build_world(box_scene);
  const double m = 0.5, hx = 0.02, hy = 0.02, hz = 0.01;
  const Eigen::Matrix3d I_box = box_world.bodies[1].inertia;
  EXPECT_DOUBLE_EQ(I_box(0, 0), m / 3.0 * (hy * hy + hz * hz));
  EXPECT_DOUBLE_EQ(I_box(2, 2), m / 3.0 * (hx * hx + hy * hy));
  EXPECT_TRUE(box_world.bodies[1].geometry.is_rigid());
  EXPECT_FALSE(box_world.bodies[0].geometry.is_rigid());
  EXPECT_TRUE(box_world.bodies[0].anchored);

  const Scenario coin_scene = make_coin_scenario(1.0);
  const World coin_world = build_world(coin_scene);
  const double mc = 5.67e-3, r = 1.213e-2, h = 1.75e-3;
  const Eigen::Matrix3d I_coin = coin_world.bodies[1].inertia;
  EXPECT_DOUBLE_EQ(I_coin(0, 0), mc * (3 * r * r + h * h) / 12.0);
  EXPECT_DOUBLE_EQ(I_coin(2, 2), mc * r * r / 2.0);

  // The scenario-wide pair material reassembles exactly.
  const ContactParameters pair = pair_parameters(coin_world, 0, 1, 1e-4);
  EXPECT_DOUBLE_EQ(pair.friction, 0.2);
  EXPECT_DOUBLE_EQ(pair.dissipation_time_scale, 0.005);
}

TEST(BuildWorld, DynamicBodyWithoutInertiaFormulaThrows) {
  Scenario s;
  BodySpec body;
  body.name = "mesh_thing";
  body.geometry.kind = "rigid_obj";
  body.geometry.path = "does_not_matter.obj";
  s.bodies.push_back(body);
  EXPECT_THROW(build_world(s), std::runtime_error);
}

TEST(BuildWorld, LoadsRigidObjRelativeToConfig) {
  write_temp_file("wedge.obj",
                  "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
                  "f 1 3 2\nf 1 2 4\nf 2 3 4\nf 1 4 3\n");
  const auto config = write_temp_file("wedge.json", R"({
    "bodies": [{"name": "wedge", "anchored": true,
                "geometry": {"kind": "rigid_obj", "path": "wedge.obj"}}]
  })");
  const Scenario s = load_scenario(config);
  const World world = build_world(s);
  EXPECT_TRUE(world.bodies[0].geometry.is_rigid());
  EXPECT_EQ(world.bodies[0].geometry.rigid().surface.triangles.size(), 4u);
}

Scenario free_fall_scenario() {
  Scenario s;
  s.name = "free_fall";
  s.duration = 1.0;
  s.recording_stride = 10;
  s.solver.delta_time = 1e-3;
  BodySpec body;
  body.name = "box";
  body.mass = 1.0;
  body.geometry.kind = "box";
  body.geometry.half_sizes = {0.01, 0.01, 0.01};
  body.geometry.modulus = 1e5;
  body.geometry.resolution = 0.01;
  body.pose.translation = {0.0, 0.0, 10.0};
  s.bodies.push_back(body);
  return s;
}

TEST(RunScenario, FreeFallMatchesClosedForm) {
  const Scenario s = free_fall_scenario();
  const RunResult result = run_scenario(s);
  EXPECT_EQ(result.steps, 1000);
  EXPECT_EQ(result.retries, 0);
  // floor(duration / (dt * stride)) + 1 samples, strictly increasing time.
  ASSERT_EQ(result.trajectory.samples.size(), 101u);
  for (size_t i = 1; i < result.trajectory.samples.size(); ++i) {
    EXPECT_GT(result.trajectory.samples[i].time,
              result.trajectory.samples[i - 1].time);
  }
  EXPECT_NEAR(result.trajectory.samples.back().time, 1.0, 1e-9);

  const Vector6d& v = result.trajectory.samples.back().velocities[0];
  EXPECT_NEAR(v[5], -9.81, 1e-9);
  // Semi-implicit Euler: z = z0 - g dt^2 N(N+1)/2.
  const double expected_z = 10.0 - 9.81e-6 * (1000.0 * 1001.0 / 2.0);
  EXPECT_NEAR(result.trajectory.samples.back().poses[0].translation.z(),
              expected_z, 1e-9);
  EXPECT_EQ(result.trajectory.samples.back().contact_count, 0);
  EXPECT_EQ(result.trajectory.samples.back().normal_force_sum, 0.0);
}

TEST(RunScenario, ZeroGravityIsStationary) {
  Scenario s = free_fall_scenario();
  s.gravity.setZero();
  s.duration = 0.05;
  const RunResult result = run_scenario(s);
  const auto& last = result.trajectory.samples.back();
  EXPECT_EQ(last.poses[0].translation.z(), 10.0);
  EXPECT_EQ(last.velocities[0].norm(), 0.0);
}

TEST(RunScenario, RejectsNonCylinderEpsilonBody) {
  Scenario s = free_fall_scenario();
  s.epsilon_body = "box";
  EXPECT_THROW(run_scenario(s), std::runtime_error);
}

TrajectoryRecord synthetic_spin_record(const std::vector<double>& spins) {
  TrajectoryRecord record;
  record.body_names = {"coin"};
  record.has_epsilon = true;
  for (size_t i = 0; i < spins.size(); ++i) {
    TrajectorySample sample;
    sample.time = 0.01 * static_cast<double>(i);
    sample.poses.push_back({});
    Vector6d v = Vector6d::Zero();
    v[2] = spins[i];
    v[3] = 0.003;
    v[4] = 0.004;
    sample.velocities.push_back(v);
    record.samples.push_back(sample);
  }
  return record;
}

TEST(SpinningDiskEpsilon, ExtractsLastSpinningSample) {
  const TrajectoryRecord record =
      synthetic_spin_record({50.0, 10.0, 0.6, 0.3, 0.2});
  const double epsilon = spinning_disk_epsilon(record, 0, 0.01, 0.5);
  EXPECT_NEAR(epsilon, 0.005 / (0.6 * 0.01), 1e-12);
}

TEST(SpinningDiskEpsilon, GuardsAreExplicit) {
  try {
    spinning_disk_epsilon(synthetic_spin_record({0.3, 0.2}), 0, 0.01, 0.5);
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("no spin"), std::string::npos);
  }
  try {
    spinning_disk_epsilon(synthetic_spin_record({50.0, 40.0, 30.0}), 0, 0.01,
                          0.5);
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("did not stop"), std::string::npos);
  }
}

TEST(FittedSlope, RequiresThreePoints) {
  try {
    fitted_slope({{1e-3, 1e-6}, {2e-3, 4e-6}});
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("need >= 3 points"),
              std::string::npos);
  }
}

TEST(FittedSlope, RecoversPowerLaw) {
  std::vector<StudyPoint> points;
  for (double h : {1e-3, 2e-3, 4e-3, 8e-3}) {
    points.push_back({h, 3.7 * h * h});
  }
  EXPECT_NEAR(fitted_slope(points), 2.0, 1e-12);
}

TEST(TimeStepStudy, MatchesSemiImplicitClosedForm) {
  Scenario base = free_fall_scenario();
  base.duration = 0.5;
  base.solver.delta_time = 1e-3;
  base.recording_stride = 100;  // 0.1 s grid

  const double ref_dt = 1e-5;
  const std::vector<double> sweep = {8e-4, 4e-4, 2e-4, 1e-4};
  const StudyResult study = time_step_study(base, sweep, ref_dt);
  ASSERT_EQ(study.points.size(), sweep.size());

  // z(t; dt) = z0 - g t (t + dt) / 2 on the common grid.
  double ref2 = 0.0, times2 = 0.0;
  for (int j = 0; j <= 5; ++j) {
    const double t = 0.1 * j;
    const double z = 10.0 - 9.81 * t * (t + ref_dt) / 2.0;
    ref2 += z * z;
    times2 += t * t;
  }
  for (size_t i = 0; i < sweep.size(); ++i) {
    EXPECT_EQ(study.points[i].h, sweep[i]);
    const double analytic =
        9.81 * 0.5 * (sweep[i] - ref_dt) * std::sqrt(times2 / ref2);
    EXPECT_NEAR(study.points[i].error, analytic, 1e-5 * analytic);
  }
  EXPECT_GT(study.slope, 0.95);
  EXPECT_LT(study.slope, 1.15);
}

TEST(TimeStepStudy, RejectsNonDividingTimeStep) {
  Scenario base = free_fall_scenario();
  base.duration = 0.01;
  try {
    time_step_study(base, {1e-3, 5e-4, 2.5e-4}, 3e-4);
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("divide the recording interval"),
              std::string::npos);
  }
}

TEST(ResolutionStudy, NeedsThreePoints) {
  Scenario base = free_fall_scenario();
  base.duration = 0.01;
  base.recording_stride = 1;
  EXPECT_THROW(resolution_study(base, {0.02, 0.01}, 0.005),
               std::runtime_error);
}

TEST(TrajectoryCsv, SchemaAndDeterminism) {
  Scenario s = make_coin_scenario(1.0);
  s.duration = 0.03;
  s.recording_stride = 3;
  const RunResult a = run_scenario(s);
  const RunResult b = run_scenario(s);

  std::ostringstream csv_a, csv_b;
  write_trajectory_csv(csv_a, a.trajectory);
  write_trajectory_csv(csv_b, b.trajectory);
  EXPECT_EQ(csv_a.str(), csv_b.str());

  std::istringstream in(csv_a.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# hydrosim-trajectory-v1");
  std::getline(in, line);
  EXPECT_EQ(line,
            "time,ground_pos_x,ground_pos_y,ground_pos_z,ground_quat_w,"
            "ground_quat_x,ground_quat_y,ground_quat_z,ground_omega_x,"
            "ground_omega_y,ground_omega_z,ground_vel_x,ground_vel_y,"
            "ground_vel_z,coin_pos_x,coin_pos_y,coin_pos_z,coin_quat_w,"
            "coin_quat_x,coin_quat_y,coin_quat_z,coin_omega_x,coin_omega_y,"
            "coin_omega_z,coin_vel_x,coin_vel_y,coin_vel_z,contacts,"
            "normal_force_sum,epsilon");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 11);  // floor(0.03 / 0.003) + 1
}

TEST(TessellationReportTest, CoinContactIsExactAndFiner) {
  Scenario s = make_coin_scenario(1.0);
  s.duration = 0.01;
  const TessellationReport report = tessellation_report(s);
  ASSERT_EQ(report.rows.size(), 10u);
  bool saw_contact = false;
  for (const auto& row : report.rows) {
    if (row.faces_polygonal > 0) {
      saw_contact = true;
      EXPECT_GE(row.faces_triangulated, 3 * row.faces_polygonal);
    }
  }
  EXPECT_TRUE(saw_contact);
  EXPECT_GE(report.mean_face_ratio, 3.0);
  EXPECT_GE(report.max_force_relative_difference, 0.0);
  EXPECT_LE(report.max_force_relative_difference, 1e-10);

  std::ostringstream out;
  write_tessellation_csv(out, report);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("# hydrosim-tessellation-v1\n", 0), 0u);
  EXPECT_NE(text.find("time,faces_polygonal,faces_triangulated,"
                      "solve_ms_polygonal,solve_ms_triangulated"),
            std::string::npos);
  EXPECT_NE(text.find("# mean_face_ratio "), std::string::npos);
  EXPECT_NE(text.find("# max_force_relative_difference "), std::string::npos);
}

TEST(StudyCsv, SchemaRoundTrip) {
  StudyResult result;
  result.points = {{1e-3, 1e-5}, {2e-3, 4e-5}, {4e-3, 1.6e-4}};
  result.slope = 2.0;
  std::ostringstream out;
  write_study_csv(out, result);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("# hydrosim-study-v1\n", 0), 0u);
  EXPECT_NE(text.find("h,error\n"), std::string::npos);
  EXPECT_NE(text.find("# slope 2\n"), std::string::npos);
  EXPECT_NE(text.find("0.001,"), std::string::npos);
}

}  // namespace
}  // namespace hydro
