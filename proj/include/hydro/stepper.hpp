#pragma once

#include <stdexcept>

#include "hydro/multibody.hpp"

namespace hydro {

enum class TessellationMode { kPolygonal, kTriangulated };

struct SolverConfig {
  double delta_time = 1e-3;          // s
  int max_newton_iterations = 50;
  double residual_tolerance = 1e-10;  // relative to |dt k0| + |M0 v0| + floor
  double absolute_tolerance = 1e-14;  // N s, the floor
  double stiction_velocity = 1e-4;    // m/s
  double backtracking_factor = 0.5;
  int max_line_search_steps = 30;
  double smoothing_width = 1e-10;  // N, C1 rounding of the force clamp
  TessellationMode tessellation = TessellationMode::kPolygonal;
};

struct StepDiagnostics {
  int iterations = 0;
  double residual_norm = 0.0;
  int num_constraints = 0;
  int stick_count = 0;  // active contacts with |v_t| <= v_s
  int slip_count = 0;
  double broadphase_seconds = 0.0;
  double narrowphase_seconds = 0.0;
  double solve_seconds = 0.0;
};

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves the implicit momentum balance
///   M0 (v - v0) = dt k0 + dt J0^T f(J0 v)
/// for the end-of-step velocities with a damped Newton iteration; the
/// constraint forces are evaluated at the next-step velocities while mass
/// matrix, bias, Jacobian, and constraint set stay frozen at the step start.
/// Converged when |r| <= residual_tolerance * (|dt k0| + |M0 v0|) +
/// absolute_tolerance. Throws NonConvergenceError when the line search
/// stalls or the iteration budget runs out. Optionally reports diagnostics
/// and the solved contact-frame forces (f_t1, f_t2, f_n per constraint).
Eigen::VectorXd solve_velocities(
    const Eigen::MatrixXd& mass, const Eigen::VectorXd& bias,
    const ContactJacobian& jacobian,
    const std::vector<ContactConstraint>& constraints,
    const Eigen::VectorXd& v0, const SolverConfig& config,
    StepDiagnostics* diagnostics = nullptr,
    std::vector<Eigen::Vector3d>* forces = nullptr);

struct StepResult {
  SystemState state;
  std::vector<ContactSurface> surfaces;  // evaluated at the pre-step poses
  std::vector<ContactConstraint> constraints;
  std::vector<Eigen::Vector3d> forces;  // contact frame, per constraint
  StepDiagnostics diagnostics;
};

/// One fixed-size step: collide all body pairs at the current poses
/// (fan-triangulating the surfaces first in triangulated mode), build the
/// surrogate constraints, solve for velocities, advance positions.
StepResult step(const World& world, const SystemState& state,
                const SolverConfig& config);

}  // namespace hydro
