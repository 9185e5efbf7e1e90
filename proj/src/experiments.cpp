#include "hydro/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "hydro/mesh_io.hpp"
#include "json.hpp"

namespace hydro {
namespace {

using nlohmann::json;

std::string fmt(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

Eigen::Vector3d parse_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::runtime_error("expected a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

SurfaceMesh box_surface(const Eigen::Vector3d& half) {
  SurfaceMesh surface;
  for (int corner = 0; corner < 8; ++corner) {
    surface.vertices.emplace_back((corner & 1) ? half.x() : -half.x(),
                                  (corner & 2) ? half.y() : -half.y(),
                                  (corner & 4) ? half.z() : -half.z());
  }
  // Two triangles per face, wound counter-clockwise seen from outside.
  const int quads[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                           {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
  for (const auto& q : quads) {
    surface.triangles.push_back({q[0], q[1], q[2]});
    surface.triangles.push_back({q[0], q[2], q[3]});
  }
  return surface;
}

SurfaceMesh plane_surface(double extent) {
  SurfaceMesh surface;
  const double h = 0.5 * extent;
  surface.vertices = {{-h, -h, 0.0}, {h, -h, 0.0}, {h, h, 0.0}, {-h, h, 0.0}};
  surface.triangles = {{0, 1, 2}, {0, 2, 3}};  // outward normal +z
  return surface;
}

Eigen::Matrix3d shape_inertia(const BodySpec& spec) {
  if (spec.inertia_diagonal) {
    return spec.inertia_diagonal->asDiagonal();
  }
  const GeometrySpec& g = spec.geometry;
  const double m = spec.mass;
  if (g.kind == "box" || g.kind == "rigid_box") {
    const Eigen::Vector3d& h = g.half_sizes;
    return Eigen::Vector3d(m / 3.0 * (h.y() * h.y() + h.z() * h.z()),
                           m / 3.0 * (h.x() * h.x() + h.z() * h.z()),
                           m / 3.0 * (h.x() * h.x() + h.y() * h.y()))
        .asDiagonal();
  }
  if (g.kind == "cylinder") {
    const double r2 = g.radius * g.radius;
    const double h2 = g.height * g.height;
    return Eigen::Vector3d(m * (3.0 * r2 + h2) / 12.0,
                           m * (3.0 * r2 + h2) / 12.0, m * r2 / 2.0)
        .asDiagonal();
  }
  if (spec.anchored) return Eigen::Matrix3d::Identity();
  throw std::runtime_error("body '" + spec.name +
                           "' needs an explicit inertia");
}

BodyGeometry build_geometry(const GeometrySpec& g) {
  if (g.kind == "box") {
    return BodyGeometry::make_compliant(
        make_box(g.half_sizes, g.modulus, g.resolution));
  }
  if (g.kind == "cylinder") {
    return BodyGeometry::make_compliant(
        make_cylinder(g.radius, g.height, g.modulus, g.resolution));
  }
  if (g.kind == "slab") {
    return BodyGeometry::make_compliant(
        make_half_space_slab(g.thickness, g.extent, g.modulus, g.resolution));
  }
  if (g.kind == "rigid_plane") {
    return BodyGeometry::make_rigid({plane_surface(g.extent)});
  }
  if (g.kind == "rigid_box") {
    return BodyGeometry::make_rigid({box_surface(g.half_sizes)});
  }
  if (g.kind == "rigid_obj") {
    return BodyGeometry::make_rigid({read_obj(g.path)});
  }
  throw std::runtime_error("unknown geometry kind '" + g.kind + "'");
}

bool is_compliant_kind(const std::string& kind) {
  return kind == "box" || kind == "cylinder" || kind == "slab";
}

int body_index(const Scenario& scenario, const std::string& name) {
  for (size_t i = 0; i < scenario.bodies.size(); ++i) {
    if (scenario.bodies[i].name == name) return static_cast<int>(i);
  }
  throw std::runtime_error("no body named '" + name + "'");
}

TrajectorySample make_sample(const World& world, const SystemState& state,
                             int contact_count, double normal_force_sum,
                             int epsilon_index, double epsilon_radius) {
  TrajectorySample sample;
  sample.time = state.time;
  sample.poses = state.poses;
  for (int i = 0; i < world.num_bodies(); ++i) {
    const int start = world.velocity_start(i);
    sample.velocities.push_back(start < 0
                                    ? Vector6d::Zero().eval()
                                    : state.velocities.segment<6>(start).eval());
  }
  sample.contact_count = contact_count;
  sample.normal_force_sum = normal_force_sum;
  if (epsilon_index >= 0) {
    const Vector6d& v = sample.velocities[epsilon_index];
    sample.epsilon = std::hypot(v[3], v[4]) / (std::abs(v[2]) * epsilon_radius);
  }
  return sample;
}

int stride_for(double interval, double delta_time) {
  const double ratio = interval / delta_time;
  const long long stride = std::llround(ratio);
  if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-6 * ratio) {
    throw std::runtime_error(
        "time step must divide the recording interval (" + fmt(delta_time) +
        " vs " + fmt(interval) + ")");
  }
  return static_cast<int>(stride);
}

// Largest distance from the body origin to any geometry vertex. Spin rate
// times this reach bounds the speed of every material point of the body.
std::vector<double> body_reaches(const World& world) {
  std::vector<double> reaches;
  reaches.reserve(world.bodies.size());
  for (const auto& body : world.bodies) {
    double reach = 0.0;
    const auto scan = [&](const std::vector<Eigen::Vector3d>& vertices) {
      for (const auto& v : vertices) reach = std::max(reach, v.norm());
    };
    if (body.geometry.is_rigid()) {
      scan(body.geometry.rigid().surface.vertices);
    } else {
      scan(body.geometry.compliant().mesh.vertices);
    }
    reaches.push_back(reach);
  }
  return reaches;
}

// Fastest material point over all free bodies.
double max_point_speed(const World& world, const SystemState& state,
                       const std::vector<double>& reaches) {
  double speed = 0.0;
  for (size_t i = 0; i < reaches.size(); ++i) {
    const int start = world.velocity_start(static_cast<int>(i));
    if (start < 0) continue;
    const auto v = state.velocities.segment<6>(start);
    speed = std::max(speed,
                     v.tail<3>().norm() + v.head<3>().norm() * reaches[i]);
  }
  return speed;
}

StepResult step_with_retry(const World& world, const SystemState& state,
                           const SolverConfig& config,
                           const std::string& scenario_name,
                           RunResult& stats) {
  const auto account = [&stats](const StepDiagnostics& d) {
    stats.max_newton_iterations =
        std::max(stats.max_newton_iterations, d.iterations);
    stats.mean_broadphase_seconds += d.broadphase_seconds;
    stats.mean_narrowphase_seconds += d.narrowphase_seconds;
    stats.mean_solve_seconds += d.solve_seconds;
  };
  try {
    StepResult sr = step(world, state, config);
    account(sr.diagnostics);
    return sr;
  } catch (const NonConvergenceError&) {
    // One retry as two half steps, then give up.
    ++stats.retries;
    SolverConfig half = config;
    half.delta_time = 0.5 * config.delta_time;
    try {
      const StepResult first = step(world, state, half);
      account(first.diagnostics);
      StepResult second = step(world, first.state, half);
      account(second.diagnostics);
      return second;
    } catch (const NonConvergenceError& e) {
      throw std::runtime_error(scenario_name + ": step failed at t = " +
                               fmt(state.time + config.delta_time) +
                               " s after dt/2 retry: " + e.what());
    }
  }
}

// Every level halves the step and the trigger requires speeds above the
// stiction scale, so real cascades stay well under this bound.
constexpr int kMaxTransitionDepth = 32;

// Advances one interval of config.delta_time, subdividing on stick/slip
// transitions. A step that costs the fastest body more than a tenth of its
// point speed is re-run as two half steps, recursively: the implicit solve
// evaluates forces only at the end-of-step velocities, so a single step
// across a stopping transition cannot track how the force/torque balance
// rotates the velocity direction while the speed falls through several
// orders of magnitude (a spinning disk's terminal slip ratio, for example,
// settles during exactly that window), and even resolved steps drag the
// ratio below its limit in proportion to the per-step speed loss.
// Subdivision stops at the stiction velocity, below which the regularized
// friction is linear and preserves velocity ratios. The halving levels
// telescope, so a full stop costs about log(speed range)/0.1 extra solves
// in total no matter how many intervals the deceleration spans.
//
// `on_substep` (optional) is invoked for every kept substep except the one
// ending the whole interval, in time order; `tail` tracks whether this call
// produces the interval's final state.
StepResult advance_resolving_transitions(
    const World& world, const SystemState& state, const SolverConfig& config,
    const std::vector<double>& reaches, const std::string& scenario_name,
    RunResult& stats, int depth, bool tail,
    const std::function<void(const StepResult&)>* on_substep) {
  StepResult sr = step_with_retry(world, state, config, scenario_name, stats);
  if (depth < kMaxTransitionDepth) {
    const double before = max_point_speed(world, state, reaches);
    const double after = max_point_speed(world, sr.state, reaches);
    if (before > 2.0 * config.stiction_velocity && after < 0.9 * before) {
      SolverConfig half = config;
      half.delta_time = 0.5 * config.delta_time;
      const StepResult first = advance_resolving_transitions(
          world, state, half, reaches, scenario_name, stats, depth + 1,
          /*tail=*/false, on_substep);
      return advance_resolving_transitions(world, first.state, half, reaches,
                                           scenario_name, stats, depth + 1,
                                           tail, on_substep);
    }
  }
  if (!tail && on_substep != nullptr) (*on_substep)(sr);
  return sr;
}

double relative_trajectory_error(const Scenario& scenario,
                                 const TrajectoryRecord& run,
                                 const TrajectoryRecord& reference) {
  if (run.samples.size() != reference.samples.size()) {
    throw std::runtime_error("trajectories do not share a recording grid");
  }
  double diff2 = 0.0;
  double ref2 = 0.0;
  for (size_t s = 0; s < run.samples.size(); ++s) {
    if (std::abs(run.samples[s].time - reference.samples[s].time) > 1e-9) {
      throw std::runtime_error("trajectories do not share a recording grid");
    }
    for (size_t b = 0; b < scenario.bodies.size(); ++b) {
      if (scenario.bodies[b].anchored) continue;
      const Eigen::Vector3d d = run.samples[s].poses[b].translation -
                                reference.samples[s].poses[b].translation;
      diff2 += d.squaredNorm();
      ref2 += reference.samples[s].poses[b].translation.squaredNorm();
    }
  }
  if (ref2 == 0.0) throw std::runtime_error("reference trajectory is all zero");
  return std::sqrt(diff2 / ref2);
}

Eigen::Vector3d net_elastic_force(const std::vector<ContactSurface>& surfaces) {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  for (const auto& surface : surfaces) {
    for (const auto& poly : surface.polygons) {
      force += poly.area * poly.pressure * poly.normal;
    }
  }
  return force;
}

int count_faces(const std::vector<ContactSurface>& surfaces) {
  int faces = 0;
  for (const auto& surface : surfaces) {
    faces += static_cast<int>(surface.polygons.size());
  }
  return faces;
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open scenario file: " + path.string());
  }
  json j = json::parse(in);

  Scenario scenario;
  scenario.name = j.value("name", path.stem().string());
  if (j.contains("gravity")) scenario.gravity = parse_vec3(j["gravity"]);
  scenario.duration = j.value("duration", 1.0);
  scenario.recording_stride = j.value("recording_stride", 1);
  scenario.record_transitions = j.value("record_transitions", false);
  scenario.epsilon_body = j.value("epsilon_body", std::string());
  if (j.contains("contact")) {
    const json& c = j["contact"];
    scenario.contact.friction = c.value("friction", 0.0);
    scenario.contact.dissipation = c.value("dissipation", 0.0);
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    SolverConfig& cfg = scenario.solver;
    cfg.delta_time = s.value("delta_time", cfg.delta_time);
    cfg.max_newton_iterations =
        s.value("max_newton_iterations", cfg.max_newton_iterations);
    cfg.residual_tolerance = s.value("residual_tolerance", cfg.residual_tolerance);
    cfg.absolute_tolerance = s.value("absolute_tolerance", cfg.absolute_tolerance);
    cfg.stiction_velocity = s.value("stiction_velocity", cfg.stiction_velocity);
    cfg.backtracking_factor =
        s.value("backtracking_factor", cfg.backtracking_factor);
    cfg.max_line_search_steps =
        s.value("max_line_search_steps", cfg.max_line_search_steps);
    cfg.smoothing_width = s.value("smoothing_width", cfg.smoothing_width);
    const std::string mode = s.value("tessellation", "polygonal");
    if (mode == "polygonal") {
      cfg.tessellation = TessellationMode::kPolygonal;
    } else if (mode == "triangulated") {
      cfg.tessellation = TessellationMode::kTriangulated;
    } else {
      throw std::runtime_error("unknown tessellation mode '" + mode + "'");
    }
  }
  if (!j.contains("bodies") || !j["bodies"].is_array()) {
    throw std::runtime_error("scenario needs a bodies array");
  }
  for (const json& jb : j["bodies"]) {
    BodySpec body;
    body.name = jb.at("name").get<std::string>();
    body.mass = jb.value("mass", 1.0);
    body.anchored = jb.value("anchored", false);
    if (jb.contains("inertia")) body.inertia_diagonal = parse_vec3(jb["inertia"]);
    const json& jg = jb.at("geometry");
    GeometrySpec& g = body.geometry;
    g.kind = jg.at("kind").get<std::string>();
    if (jg.contains("half_sizes")) g.half_sizes = parse_vec3(jg["half_sizes"]);
    g.radius = jg.value("radius", 0.0);
    g.height = jg.value("height", 0.0);
    g.thickness = jg.value("thickness", 0.0);
    g.extent = jg.value("extent", 0.0);
    g.modulus = jg.value("modulus", 0.0);
    g.resolution = jg.value("resolution", 0.0);
    if (jg.contains("path")) {
      g.path = std::filesystem::path(jg["path"].get<std::string>());
      if (g.path.is_relative()) g.path = path.parent_path() / g.path;
    }
    if (jb.contains("pose")) {
      const json& jp = jb["pose"];
      if (jp.contains("position")) {
        body.pose.translation = parse_vec3(jp["position"]);
      }
      if (jp.contains("quaternion")) {
        const json& q = jp["quaternion"];
        if (!q.is_array() || q.size() != 4) {
          throw std::runtime_error("quaternion must be [w, x, y, z]");
        }
        body.pose.rotation = Eigen::Quaterniond(
            q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
            q[3].get<double>());
        body.pose.rotation.normalize();
      }
    }
    if (jb.contains("velocity")) {
      const json& jv = jb["velocity"];
      if (jv.contains("angular")) {
        body.velocity.head<3>() = parse_vec3(jv["angular"]);
      }
      if (jv.contains("linear")) {
        body.velocity.tail<3>() = parse_vec3(jv["linear"]);
      }
    }
    scenario.bodies.push_back(std::move(body));
  }
  return scenario;
}

World build_world(const Scenario& scenario) {
  World world;
  world.gravity = scenario.gravity;
  for (const BodySpec& spec : scenario.bodies) {
    RigidBody body;
    body.name = spec.name;
    body.mass = spec.mass;
    body.inertia = shape_inertia(spec);
    body.anchored = spec.anchored;
    // Pair properties are scenario-wide: equal per-body values combine back
    // to exactly the configured pair values.
    body.material.friction = scenario.contact.friction;
    body.material.dissipation = 0.5 * scenario.contact.dissipation;
    body.geometry = build_geometry(spec.geometry);
    body.initial_pose = spec.pose;
    body.initial_velocity = spec.velocity;
    world.bodies.push_back(std::move(body));
  }
  return world;
}

Scenario make_coin_scenario(double epsilon0) {
  constexpr double kRadius = 1.213e-2;   // m
  constexpr double kHeight = 1.75e-3;    // m
  constexpr double kMass = 5.67e-3;      // kg
  constexpr double kModulus = 1e9;       // Pa
  constexpr double kSpinRate = 50.0;     // rad/s

  Scenario s;
  s.name = "coin_spin";
  s.contact = {0.2, 0.005};
  s.solver.delta_time = 1e-3;
  // The terminal slip ratio is read off in the last moments before rest,
  // where slide and spin speeds span many decades. A small stiction
  // velocity keeps friction on the Coulomb branch (where the ratio
  // evolves toward its fixed point) all the way down — the patch area
  // rolling off the Coulomb branch scales like (stiction / spin speed)^2
  // — and transition recording captures the substeps inside the final
  // stopping interval, which is where the ratio settles.
  s.solver.stiction_velocity = 1e-8;
  s.duration = epsilon0 > 2.0 ? 5.0 : 2.0;
  s.recording_stride = 1;
  s.record_transitions = true;
  s.epsilon_body = "coin";

  BodySpec ground;
  ground.name = "ground";
  ground.anchored = true;
  ground.geometry.kind = "rigid_plane";
  ground.geometry.extent = 40.0;
  s.bodies.push_back(ground);

  BodySpec coin;
  coin.name = "coin";
  coin.mass = kMass;
  coin.geometry.kind = "cylinder";
  coin.geometry.radius = kRadius;
  coin.geometry.height = kHeight;
  coin.geometry.modulus = kModulus;
  coin.geometry.resolution = 2.4e-3;
  coin.pose.translation = {0.0, 0.0, 0.5 * kHeight};
  coin.velocity << 0.0, 0.0, kSpinRate, epsilon0 * kSpinRate * kRadius, 0.0, 0.0;
  s.bodies.push_back(coin);
  return s;
}

Scenario make_box_on_slab_scenario() {
  Scenario s;
  s.name = "box_on_slab";
  s.contact = {0.5, 0.01};
  s.solver.delta_time = 1e-3;
  s.duration = 1.0;
  s.recording_stride = 10;

  BodySpec slab;
  slab.name = "slab";
  slab.anchored = true;
  slab.geometry.kind = "slab";
  slab.geometry.thickness = 0.05;
  slab.geometry.extent = 0.2;
  slab.geometry.modulus = 1e7;
  slab.geometry.resolution = 0.025;
  s.bodies.push_back(slab);

  BodySpec box;
  box.name = "box";
  box.mass = 0.5;
  box.geometry.kind = "rigid_box";
  box.geometry.half_sizes = {0.02, 0.02, 0.01};
  box.pose.translation = {0.0, 0.0, 0.0102};  // 0.2 mm above touch
  s.bodies.push_back(box);
  return s;
}

Scenario make_block_slide_scenario(double initial_speed) {
  Scenario s;
  s.name = "block_slide";
  s.contact = {0.2, 0.01};
  s.solver.delta_time = 1e-3;
  s.duration = 0.7;
  s.recording_stride = 5;

  BodySpec slab;
  slab.name = "slab";
  slab.anchored = true;
  slab.geometry.kind = "slab";
  slab.geometry.thickness = 0.05;
  slab.geometry.extent = 0.8;
  slab.geometry.modulus = 1e7;
  slab.geometry.resolution = 0.05;
  s.bodies.push_back(slab);

  // A rigid block keeps every emitted contact normal vertical, so the slide
  // decelerates at exactly mu g; a compliant block would add a rate-dependent
  // plowing term through its tilted edge polygons.
  BodySpec block;
  block.name = "block";
  block.mass = 0.5;
  block.geometry.kind = "rigid_box";
  block.geometry.half_sizes = {0.02, 0.02, 0.01};
  block.pose.translation = {-0.15, 0.0, 0.01};
  block.velocity << 0.0, 0.0, 0.0, initial_speed, 0.0, 0.0;
  s.bodies.push_back(block);
  return s;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record) {
  out << "# hydrosim-trajectory-v1\n";
  out << "time";
  for (const auto& name : record.body_names) {
    for (const char* column :
         {"pos_x", "pos_y", "pos_z", "quat_w", "quat_x", "quat_y", "quat_z",
          "omega_x", "omega_y", "omega_z", "vel_x", "vel_y", "vel_z"}) {
      out << "," << name << "_" << column;
    }
  }
  out << ",contacts,normal_force_sum";
  if (record.has_epsilon) out << ",epsilon";
  out << "\n";
  for (const auto& s : record.samples) {
    out << fmt(s.time);
    for (size_t b = 0; b < record.body_names.size(); ++b) {
      const RigidPose& pose = s.poses[b];
      const Vector6d& v = s.velocities[b];
      out << "," << fmt(pose.translation.x()) << ","
          << fmt(pose.translation.y()) << "," << fmt(pose.translation.z())
          << "," << fmt(pose.rotation.w()) << "," << fmt(pose.rotation.x())
          << "," << fmt(pose.rotation.y()) << "," << fmt(pose.rotation.z());
      for (int k = 0; k < 6; ++k) out << "," << fmt(v[k]);
    }
    out << "," << s.contact_count << "," << fmt(s.normal_force_sum);
    if (record.has_epsilon) out << "," << fmt(s.epsilon);
    out << "\n";
  }
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  World world = build_world(scenario);
  SystemState state = make_initial_state(world);
  const SolverConfig& config = scenario.solver;
  const double dt = config.delta_time;
  if (dt <= 0.0 || scenario.duration <= 0.0) {
    throw std::runtime_error("duration and time step must be positive");
  }
  const int steps = static_cast<int>(scenario.duration / dt + 1e-9);
  const int stride = std::max(1, scenario.recording_stride);

  int epsilon_index = -1;
  double epsilon_radius = 0.0;
  if (!scenario.epsilon_body.empty()) {
    epsilon_index = body_index(scenario, scenario.epsilon_body);
    const GeometrySpec& g = scenario.bodies[epsilon_index].geometry;
    if (g.kind != "cylinder") {
      throw std::runtime_error("epsilon body must be a cylinder");
    }
    epsilon_radius = g.radius;
  }

  RunResult result;
  for (const auto& body : scenario.bodies) {
    result.trajectory.body_names.push_back(body.name);
  }
  result.trajectory.has_epsilon = epsilon_index >= 0;
  result.trajectory.samples.push_back(
      make_sample(world, state, 0, 0.0, epsilon_index, epsilon_radius));

  const std::vector<double> reaches = body_reaches(world);
  const auto record_step = [&](const StepResult& sr) {
    double normal_sum = 0.0;
    for (const auto& f : sr.forces) normal_sum += f.z();
    result.trajectory.samples.push_back(
        make_sample(world, sr.state, static_cast<int>(sr.constraints.size()),
                    normal_sum, epsilon_index, epsilon_radius));
  };
  const std::function<void(const StepResult&)> record_substep = record_step;
  for (int n = 1; n <= steps; ++n) {
    // mean_*_seconds accumulate totals here; they are normalized below.
    const StepResult sr = advance_resolving_transitions(
        world, state, config, reaches, scenario.name, result, 0, /*tail=*/true,
        scenario.record_transitions ? &record_substep : nullptr);
    state = sr.state;

    if (n % stride == 0) record_step(sr);
    if (options.snapshot_every > 0 && n % options.snapshot_every == 0) {
      char suffix[32];
      std::snprintf(suffix, sizeof(suffix), "%06d", n);
      std::ofstream soup(options.output_directory /
                         (scenario.name + "_surface_" + suffix + ".txt"));
      write_polygon_soup(soup, sr.surfaces);
      if (options.dump_constraints) {
        std::ofstream dump(options.output_directory /
                           (scenario.name + "_constraints_" + suffix + ".csv"));
        write_constraints_csv(dump, sr.constraints, sr.forces);
      }
    }
  }
  result.final_state = state;
  result.steps = steps;
  if (steps > 0) {
    result.mean_broadphase_seconds /= steps;
    result.mean_narrowphase_seconds /= steps;
    result.mean_solve_seconds /= steps;
  }
  return result;
}

double spinning_disk_epsilon(const TrajectoryRecord& record, int body,
                             double radius, double spin_cutoff) {
  if (record.samples.empty()) throw std::runtime_error("no spin");
  const auto spin = [&](const TrajectorySample& s) {
    return std::abs(s.velocities[body][2]);
  };
  if (spin(record.samples.front()) < spin_cutoff) {
    throw std::runtime_error("no spin");
  }
  size_t last = 0;
  for (size_t i = 0; i < record.samples.size(); ++i) {
    if (spin(record.samples[i]) >= spin_cutoff) last = i;
  }
  if (last + 1 == record.samples.size()) {
    throw std::runtime_error("did not stop");
  }
  const Vector6d& v = record.samples[last].velocities[body];
  return std::hypot(v[3], v[4]) / (std::abs(v[2]) * radius);
}

double fitted_slope(const std::vector<StudyPoint>& points) {
  if (points.size() < 3) {
    throw std::runtime_error("need >= 3 points for a slope");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    if (p.h <= 0.0 || p.error <= 0.0) {
      throw std::runtime_error("slope fit needs positive h and error");
    }
    const double x = std::log(p.h);
    const double y = std::log(p.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StudyResult time_step_study(const Scenario& base,
                            const std::vector<double>& time_steps,
                            double reference_time_step) {
  if (time_steps.size() < 3) {
    throw std::runtime_error("time step study: need >= 3 points");
  }
  const double interval = base.solver.delta_time * base.recording_stride;
  const auto run_at = [&](double dt) {
    Scenario s = base;
    s.solver.delta_time = dt;
    s.recording_stride = stride_for(interval, dt);
    s.record_transitions = false;  // errors are compared on the shared grid
    return run_scenario(s).trajectory;
  };
  const TrajectoryRecord reference = run_at(reference_time_step);
  StudyResult result;
  for (double dt : time_steps) {
    result.points.push_back(
        {dt, relative_trajectory_error(base, run_at(dt), reference)});
  }
  result.slope = fitted_slope(result.points);
  return result;
}

StudyResult resolution_study(const Scenario& base,
                             const std::vector<double>& resolutions,
                             double reference_resolution) {
  if (resolutions.size() < 3) {
    throw std::runtime_error("resolution study: need >= 3 points");
  }
  const auto run_at = [&](double resolution) {
    Scenario s = base;
    s.record_transitions = false;  // errors are compared on the shared grid
    for (auto& body : s.bodies) {
      if (is_compliant_kind(body.geometry.kind)) {
        body.geometry.resolution = resolution;
      }
    }
    return run_scenario(s).trajectory;
  };
  const TrajectoryRecord reference = run_at(reference_resolution);
  StudyResult result;
  for (double resolution : resolutions) {
    result.points.push_back(
        {resolution,
         relative_trajectory_error(base, run_at(resolution), reference)});
  }
  result.slope = fitted_slope(result.points);
  return result;
}

void write_study_csv(std::ostream& out, const StudyResult& result) {
  out << "# hydrosim-study-v1\n";
  out << "h,error\n";
  for (const auto& p : result.points) {
    out << fmt(p.h) << "," << fmt(p.error) << "\n";
  }
  out << "# slope " << fmt(result.slope) << "\n";
}

TessellationReport tessellation_report(const Scenario& scenario) {
  World world = build_world(scenario);
  SystemState state = make_initial_state(world);
  SolverConfig poly_config = scenario.solver;
  poly_config.tessellation = TessellationMode::kPolygonal;
  SolverConfig tri_config = scenario.solver;
  tri_config.tessellation = TessellationMode::kTriangulated;
  const int steps =
      static_cast<int>(scenario.duration / scenario.solver.delta_time + 1e-9);

  TessellationReport report;
  double ratio_sum = 0.0;
  int ratio_count = 0;
  for (int n = 1; n <= steps; ++n) {
    const StepResult poly = step(world, state, poly_config);
    const StepResult tri = step(world, state, tri_config);
    TessellationRow row;
    row.time = poly.state.time;
    row.faces_polygonal = count_faces(poly.surfaces);
    row.faces_triangulated = count_faces(tri.surfaces);
    row.solve_seconds_polygonal = poly.diagnostics.solve_seconds;
    row.solve_seconds_triangulated = tri.diagnostics.solve_seconds;
    report.rows.push_back(row);
    if (row.faces_polygonal > 0) {
      ratio_sum += static_cast<double>(row.faces_triangulated) /
                   row.faces_polygonal;
      ++ratio_count;
      const Eigen::Vector3d f_poly = net_elastic_force(poly.surfaces);
      const Eigen::Vector3d f_tri = net_elastic_force(tri.surfaces);
      if (f_poly.norm() > 0.0) {
        report.max_force_relative_difference =
            std::max(report.max_force_relative_difference,
                     (f_tri - f_poly).norm() / f_poly.norm());
      }
    }
    state = poly.state;  // the polygonal run drives the trajectory
  }
  if (ratio_count > 0) report.mean_face_ratio = ratio_sum / ratio_count;
  return report;
}

void write_tessellation_csv(std::ostream& out,
                            const TessellationReport& report) {
  out << "# hydrosim-tessellation-v1\n";
  out << "time,faces_polygonal,faces_triangulated,solve_ms_polygonal,"
         "solve_ms_triangulated\n";
  for (const auto& row : report.rows) {
    out << fmt(row.time) << "," << row.faces_polygonal << ","
        << row.faces_triangulated << ","
        << fmt(1e3 * row.solve_seconds_polygonal) << ","
        << fmt(1e3 * row.solve_seconds_triangulated) << "\n";
  }
  out << "# mean_face_ratio " << fmt(report.mean_face_ratio) << "\n";
  out << "# max_force_relative_difference "
      << fmt(report.max_force_relative_difference) << "\n";
}

}  // namespace hydro
