#include "hydro/stepper.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "hydro/pressure_field.hpp"
#include "oracles.hpp"

namespace hydro {
namespace {

World falling_point_world(double mass, double gravity) {
  World world;
  RigidBody body;
  body.name = "ball";
  body.mass = mass;
  body.inertia = Eigen::Matrix3d::Identity();
  world.bodies.push_back(body);
  world.gravity = {0.0, 0.0, gravity};
  return world;
}

TEST(SolveVelocities, FreeFallIsExplicitUpdate) {
  World world = falling_point_world(1.0, -9.81);
  SystemState state = make_initial_state(world);
  const Eigen::MatrixXd M = mass_matrix(world, state);
  const Eigen::VectorXd bias = bias_forces(world, state);
  const ContactJacobian J(0, 6);
  SolverConfig config;
  config.delta_time = 1e-3;
  StepDiagnostics diag;
  const Eigen::VectorXd v = solve_velocities(M, bias, J, {}, state.velocities,
                                             config, &diag);
  EXPECT_DOUBLE_EQ(v[5], -9.81e-3);
  EXPECT_NEAR(v.head<5>().norm(), 0.0, 1e-16);
  EXPECT_LE(diag.iterations, 1);
  EXPECT_EQ(diag.num_constraints, 0);
}

// One vertical degree of freedom pressed into a spring-damper contact; the
// implicit update has a scalar residual we can bracket and bisect to high
// accuracy independently of the Newton solver.
TEST(SolveVelocities, MatchesScalarBisectionOracle) {
  const double mass = 0.4;
  const double gravity = -9.81;
  const double k = 5e4;
  const double tau = 0.01;
  const double phi0 = -2e-4;
  const double dt = 1e-3;

  World world = falling_point_world(mass, gravity);
  RigidBody anchor;
  anchor.name = "anchor";
  anchor.anchored = true;
  world.bodies.push_back(anchor);
  SystemState state = make_initial_state(world);
  state.velocities[5] = -0.3;

  ContactConstraint c;
  c.body_a = 1;  // anchored
  c.body_b = 0;
  c.position = Eigen::Vector3d::Zero();
  c.frame = Eigen::Matrix3d::Identity();  // normal = +z
  c.stiffness = k;
  c.damping = tau * k;
  c.phi0 = phi0;
  c.friction = 0.0;

  const Eigen::MatrixXd M = mass_matrix(world, state);
  const Eigen::VectorXd bias = bias_forces(world, state);
  const auto J = contact_jacobian(world, state, {c});
  SolverConfig config;
  config.delta_time = dt;
  std::vector<Eigen::Vector3d> forces;
  const Eigen::VectorXd v = solve_velocities(M, bias, J, {c},
                                             state.velocities, config,
                                             nullptr, &forces);

  const double expected = oracles::implicit_drop_velocity(
      mass, gravity, -0.3, dt, k, tau * k, phi0);
  EXPECT_NEAR(v[5], expected, 1e-10);
  ASSERT_EQ(forces.size(), 1u);
  const double fn = elastic_force(k, tau * k, phi0 + dt * v[5], v[5]);
  EXPECT_NEAR(forces[0].z(), fn, 1e-8 * (fn + 1.0));
  EXPECT_GE(forces[0].z(), 0.0);
}

TEST(SolveVelocities, ThrowsWhenIterationBudgetIsZero) {
  World world = falling_point_world(1.0, -9.81);
  SystemState state = make_initial_state(world);
  const Eigen::MatrixXd M = mass_matrix(world, state);
  const Eigen::VectorXd bias = bias_forces(world, state);

  ContactConstraint c;
  c.body_a = -1;
  c.body_b = 0;
  c.position = Eigen::Vector3d::Zero();
  c.frame = Eigen::Matrix3d::Identity();
  c.stiffness = 1e8;
  c.phi0 = -1e-3;
  ContactJacobian J(1, 6);
  ContactJacobian::Block block;
  block.constraint = 0;
  block.velocity_start = 0;
  block.matrix.setZero();
  block.matrix.rightCols<3>() = Eigen::Matrix3d::Identity();
  J.add_block(block);

  SolverConfig config;
  config.max_newton_iterations = 0;
  EXPECT_THROW(solve_velocities(M, bias, J, {c}, state.velocities, config),
               NonConvergenceError);
}

World coin_on_plane_world(double extent = 0.2) {
  World world;
  RigidBody ground;
  ground.name = "ground";
  ground.anchored = true;
  ground.material = {0.2, 0.0};
  SurfaceMesh plane;
  plane.vertices = {{-extent, -extent, 0.0},
                    {extent, -extent, 0.0},
                    {extent, extent, 0.0},
                    {-extent, extent, 0.0}};
  plane.triangles = {{0, 1, 2}, {0, 2, 3}};
  ground.geometry = BodyGeometry::make_rigid(RigidGeometry{std::move(plane)});
  world.bodies.push_back(std::move(ground));

  RigidBody coin;
  coin.name = "coin";
  coin.mass = 5.67e-3;
  const double r = 1.213e-2, h = 1.75e-3;
  coin.inertia = Eigen::Vector3d(coin.mass * (3 * r * r + h * h) / 12.0,
                                 coin.mass * (3 * r * r + h * h) / 12.0,
                                 coin.mass * r * r / 2.0)
                     .asDiagonal();
  coin.material = {0.2, 0.005};
  coin.geometry = BodyGeometry::make_compliant(make_cylinder(r, h, 1e7, 3e-3));
  coin.initial_pose.translation = {0.0, 0.0, h / 2.0 - 1e-5};
  world.bodies.push_back(std::move(coin));
  return world;
}

TEST(Step, ResolvesPenetrationWithoutBlowup) {
  World world = coin_on_plane_world();
  SystemState state = make_initial_state(world);
  SolverConfig config;
  config.delta_time = 1e-3;
  const StepResult result = step(world, state, config);
  EXPECT_GT(result.diagnostics.num_constraints, 0);
  EXPECT_EQ(result.constraints.size(), result.forces.size());
  // Pressed in by 10 um, the coin must be pushed upward.
  EXPECT_GT(result.state.velocities[5], 0.0);
  for (const auto& f : result.forces) {
    EXPECT_GE(f.z(), 0.0);
    EXPECT_LE(Eigen::Vector2d(f.x(), f.y()).norm(), 0.2 * f.z() + 1e-12);
  }
  EXPECT_EQ(result.diagnostics.stick_count + result.diagnostics.slip_count,
            result.diagnostics.num_constraints);
}

TEST(Step, DeterministicAcrossCalls) {
  World world = coin_on_plane_world();
  SystemState state = make_initial_state(world);
  state.velocities << 0.0, 0.0, 20.0, 0.3, 0.0, 0.0;
  SolverConfig config;
  config.delta_time = 1e-3;
  const StepResult a = step(world, state, config);
  const StepResult b = step(world, state, config);
  ASSERT_EQ(a.state.velocities.size(), b.state.velocities.size());
  EXPECT_EQ(a.state.velocities, b.state.velocities);
  ASSERT_EQ(a.forces.size(), b.forces.size());
  for (size_t i = 0; i < a.forces.size(); ++i) {
    EXPECT_EQ(a.forces[i], b.forces[i]);
  }
  EXPECT_EQ(a.state.poses[1].translation, b.state.poses[1].translation);
}

TEST(Step, SticksBelowStictionVelocity) {
  World world = coin_on_plane_world();
  SystemState state = make_initial_state(world);
  SolverConfig config;
  config.delta_time = 1e-3;
  // Let the normal transient settle, then check the contact is sticking.
  for (int i = 0; i < 50; ++i) state = step(world, state, config).state;
  const StepResult result = step(world, state, config);
  EXPECT_GT(result.diagnostics.stick_count, 0);
  EXPECT_EQ(result.diagnostics.slip_count, 0);

  // A fast lateral kick makes every contact slip.
  state.velocities[3] = 0.5;
  const StepResult kicked = step(world, state, config);
  EXPECT_GT(kicked.diagnostics.slip_count, 0);
  EXPECT_EQ(kicked.diagnostics.stick_count, 0);
}

TEST(Step, TessellationModesAgreeOnNetForce) {
  World world = coin_on_plane_world();
  SystemState state = make_initial_state(world);
  state.velocities << 1.0, 0.0, 10.0, 0.2, 0.0, 0.0;
  SolverConfig config;
  config.delta_time = 1e-3;
  config.tessellation = TessellationMode::kPolygonal;
  const StepResult poly = step(world, state, config);
  config.tessellation = TessellationMode::kTriangulated;
  const StepResult tri = step(world, state, config);

  // Same elastic content, more faces.
  size_t poly_faces = 0, tri_faces = 0, poly_verts = 0;
  for (const auto& s : poly.surfaces) {
    poly_faces += s.polygons.size();
    for (const auto& p : s.polygons) poly_verts += p.vertices.size();
  }
  for (const auto& s : tri.surfaces) tri_faces += s.polygons.size();
  EXPECT_EQ(tri_faces, poly_verts);
  EXPECT_GT(tri_faces, poly_faces);

  const auto net_elastic = [](const StepResult& r) {
    Eigen::Vector3d f = Eigen::Vector3d::Zero();
    for (const auto& s : r.surfaces) {
      for (const auto& p : s.polygons) f += p.area * p.pressure * p.normal;
    }
    return f;
  };
  const Eigen::Vector3d fp = net_elastic(poly);
  const Eigen::Vector3d ft = net_elastic(tri);
  EXPECT_NEAR((fp - ft).norm(), 0.0, 1e-10 * fp.norm());
}

TEST(Step, RejectsNonFiniteState) {
  World world = falling_point_world(1.0, -9.81);
  SystemState state = make_initial_state(world);
  state.velocities[3] = std::numeric_limits<double>::quiet_NaN();
  SolverConfig config;
  EXPECT_THROW(step(world, state, config), std::runtime_error);
}

TEST(Step, AdvancesTimeByDeltaTime) {
  World world = falling_point_world(1.0, -9.81);
  SystemState state = make_initial_state(world);
  state.time = 0.25;
  SolverConfig config;
  config.delta_time = 2e-3;
  const StepResult result = step(world, state, config);
  EXPECT_DOUBLE_EQ(result.state.time, 0.252);
}

}  // namespace
}  // namespace hydro
