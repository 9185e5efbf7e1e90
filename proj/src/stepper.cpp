#include "hydro/stepper.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace hydro {
namespace {

// C1 positive clamp: smooth_max(x) -> max(0, x) as width -> 0.
double smooth_clamp(double x, double width) {
  return 0.5 * (x + std::hypot(x, width));
}

double smooth_clamp_derivative(double x, double width) {
  return 0.5 * (1.0 + x / std::hypot(x, width));
}

struct ForceModel {
  const std::vector<ContactConstraint>& constraints;
  double delta_time;
  double smoothing_width;

  // Contact-frame force of constraint c at contact velocity vc, and (when
  // `gradient` is nonnull) minus its derivative with respect to vc.
  Eigen::Vector3d eval(size_t c, const Eigen::Vector3d& vc,
                       Eigen::Matrix3d* gradient) const {
    const ContactConstraint& k = constraints[c];
    const Eigen::Vector2d v_t = vc.head<2>();
    const double v_n = vc.z();
    // phi = phi0 + dt v_n, so the raw normal force is affine in v_n.
    const double slope = k.stiffness * delta_time + k.damping;
    const double raw = -k.stiffness * k.phi0 - slope * v_n;
    const double f_n = smooth_clamp(raw, smoothing_width);

    const double speed = v_t.norm();
    const double s = std::max(speed, k.stiction_velocity);
    const Eigen::Vector2d f_t = -k.friction * f_n / s * v_t;

    if (gradient) {
      const double dfn_dvn =
          -smooth_clamp_derivative(raw, smoothing_width) * slope;
      Eigen::Matrix2d dft_dvt;
      if (speed > k.stiction_velocity) {
        const Eigen::Vector2d dir = v_t / speed;
        dft_dvt = -k.friction * f_n / speed *
                  (Eigen::Matrix2d::Identity() - dir * dir.transpose());
      } else {
        dft_dvt = -k.friction * f_n / k.stiction_velocity *
                  Eigen::Matrix2d::Identity();
      }
      gradient->setZero();
      gradient->topLeftCorner<2, 2>() = -dft_dvt;
      gradient->topRightCorner<2, 1>() = k.friction / s * v_t * dfn_dvn;
      (*gradient)(2, 2) = -dfn_dvn;
    }
    return {f_t.x(), f_t.y(), f_n};
  }
};

}  // namespace

Eigen::VectorXd solve_velocities(
    const Eigen::MatrixXd& mass, const Eigen::VectorXd& bias,
    const ContactJacobian& jacobian,
    const std::vector<ContactConstraint>& constraints,
    const Eigen::VectorXd& v0, const SolverConfig& config,
    StepDiagnostics* diagnostics, std::vector<Eigen::Vector3d>* forces) {
  const double dt = config.delta_time;
  const Eigen::VectorXd momentum = mass * v0 + dt * bias;
  const double tolerance =
      config.residual_tolerance * ((dt * bias).norm() + (mass * v0).norm()) +
      config.absolute_tolerance;
  StepDiagnostics diag;
  diag.num_constraints = static_cast<int>(constraints.size());

  const auto finish = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& f) {
    const Eigen::VectorXd contact_velocities = jacobian.apply(v);
    for (int c = 0; c < static_cast<int>(constraints.size()); ++c) {
      const Eigen::Vector3d fc = f.segment<3>(3 * c);
      const Eigen::Vector3d vc = contact_velocities.segment<3>(3 * c);
      if (fc.z() > 0.0) {
        if (vc.head<2>().norm() <= constraints[c].stiction_velocity) {
          ++diag.stick_count;
        } else {
          ++diag.slip_count;
        }
      }
      if (forces) (*forces)[c] = fc;
    }
    if (diagnostics) *diagnostics = diag;
  };

  if (constraints.empty() || v0.size() == 0) {
    Eigen::VectorXd v = v0.size() == 0
                            ? Eigen::VectorXd()
                            : mass.ldlt().solve(momentum).eval();
    if (forces) forces->clear();
    if (diagnostics) *diagnostics = diag;
    return v;
  }

  const Eigen::MatrixXd j = jacobian.dense();
  const ForceModel model{constraints, dt, config.smoothing_width};
  const int nc = static_cast<int>(constraints.size());

  const auto stacked_forces = [&](const Eigen::VectorXd& vc,
                                  std::vector<Eigen::Matrix3d>* gradients) {
    Eigen::VectorXd f(3 * nc);
    for (int c = 0; c < nc; ++c) {
      Eigen::Matrix3d g;
      f.segment<3>(3 * c) =
          model.eval(c, vc.segment<3>(3 * c), gradients ? &g : nullptr);
      if (gradients) (*gradients)[c] = g;
    }
    return f;
  };
  const auto residual = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& f) {
    return (mass * v - momentum - dt * j.transpose() * f).eval();
  };

  // Start from the free motion; contact forces then only correct it.
  Eigen::VectorXd v = mass.ldlt().solve(momentum);
  std::vector<Eigen::Matrix3d> gradients(nc);
  Eigen::VectorXd f = stacked_forces(j * v, &gradients);
  Eigen::VectorXd r = residual(v, f);

  for (int iteration = 0; iteration <= config.max_newton_iterations;
       ++iteration) {
    diag.iterations = iteration;
    diag.residual_norm = r.norm();
    if (diag.residual_norm <= tolerance) {
      if (forces) forces->resize(nc);
      finish(v, f);
      return v;
    }
    if (iteration == config.max_newton_iterations) break;

    Eigen::MatrixXd h = mass;
    for (int c = 0; c < nc; ++c) {
      h.noalias() += dt * j.middleRows<3>(3 * c).transpose() * gradients[c] *
                     j.middleRows<3>(3 * c);
    }
    const Eigen::VectorXd delta = h.partialPivLu().solve(-r);

    // Backtracking line search on the squared residual norm.
    const double merit = r.squaredNorm();
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < config.max_line_search_steps; ++ls) {
      const Eigen::VectorXd v_try = v + alpha * delta;
      const Eigen::VectorXd f_try = stacked_forces(j * v_try, nullptr);
      const Eigen::VectorXd r_try = residual(v_try, f_try);
      if (r_try.squaredNorm() <= (1.0 - 1e-4 * alpha) * merit) {
        v = v_try;
        f = stacked_forces(j * v, &gradients);
        r = r_try;
        accepted = true;
        break;
      }
      alpha *= config.backtracking_factor;
    }
    if (!accepted) {
      throw NonConvergenceError("line search stalled at residual " +
                                std::to_string(diag.residual_norm));
    }
  }
  throw NonConvergenceError(
      "no convergence after " + std::to_string(config.max_newton_iterations) +
      " iterations, residual " + std::to_string(diag.residual_norm));
}

StepResult step(const World& world, const SystemState& state,
                const SolverConfig& config) {
  for (const auto& pose : state.poses) {
    if (!pose.translation.allFinite() || !pose.rotation.coeffs().allFinite()) {
      throw std::runtime_error("non-finite pose in state");
    }
  }
  if (!state.velocities.allFinite()) {
    throw std::runtime_error("non-finite velocity in state");
  }

  StepResult result;
  ContactTimings timings;
  const auto narrow_start = std::chrono::steady_clock::now();
  for (int a = 0; a < world.num_bodies(); ++a) {
    for (int b = a + 1; b < world.num_bodies(); ++b) {
      if (world.bodies[a].anchored && world.bodies[b].anchored) continue;
      if (world.bodies[a].geometry.is_rigid() &&
          world.bodies[b].geometry.is_rigid()) {
        continue;  // no pressure field between two rigid bodies
      }
      ContactSurface surface = compute_contact_surface(
          world.bodies[a].geometry, state.poses[a], a,
          world.bodies[b].geometry, state.poses[b], b, &timings);
      if (surface.polygons.empty()) continue;
      if (config.tessellation == TessellationMode::kTriangulated) {
        surface = triangulate(surface);
      }
      ContactParameters params =
          pair_parameters(world, surface.body_a, surface.body_b,
                          config.stiction_velocity);
      auto constraints = surface_to_constraints(surface, params);
      result.constraints.insert(result.constraints.end(), constraints.begin(),
                                constraints.end());
      result.surfaces.push_back(std::move(surface));
    }
  }
  const auto solve_start = std::chrono::steady_clock::now();

  const Eigen::MatrixXd mass = mass_matrix(world, state);
  const Eigen::VectorXd bias = bias_forces(world, state);
  const ContactJacobian jacobian =
      contact_jacobian(world, state, result.constraints);
  result.state.velocities =
      solve_velocities(mass, bias, jacobian, result.constraints,
                       state.velocities, config, &result.diagnostics,
                       &result.forces);
  const auto solve_end = std::chrono::steady_clock::now();

  result.state.poses = advance_positions(world, state, result.state.velocities,
                                         config.delta_time);
  result.state.time = state.time + config.delta_time;
  result.diagnostics.broadphase_seconds = timings.broadphase_seconds;
  result.diagnostics.narrowphase_seconds =
      std::chrono::duration<double>(solve_start - narrow_start).count() -
      timings.broadphase_seconds;
  result.diagnostics.solve_seconds =
      std::chrono::duration<double>(solve_end - solve_start).count();
  return result;
}

}  // namespace hydro
