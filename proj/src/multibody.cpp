#include "hydro/multibody.hpp"

#include <stdexcept>

namespace hydro {
namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace

int World::num_velocities() const {
  int n = 0;
  for (const auto& body : bodies) {
    if (!body.anchored) n += 6;
  }
  return n;
}

int World::velocity_start(int body) const {
  if (bodies[body].anchored) return -1;
  int start = 0;
  for (int i = 0; i < body; ++i) {
    if (!bodies[i].anchored) start += 6;
  }
  return start;
}

SystemState make_initial_state(const World& world) {
  SystemState state;
  state.velocities = Eigen::VectorXd::Zero(world.num_velocities());
  for (int i = 0; i < world.num_bodies(); ++i) {
    const RigidBody& body = world.bodies[i];
    state.poses.push_back(body.initial_pose);
    const int start = world.velocity_start(i);
    if (start >= 0) state.velocities.segment<6>(start) = body.initial_velocity;
  }
  return state;
}

ContactParameters pair_parameters(const World& world, int body_a, int body_b,
                                  double stiction_velocity) {
  const Material& a = world.bodies[body_a].material;
  const Material& b = world.bodies[body_b].material;
  ContactParameters params;
  params.friction = combine_friction(a.friction, b.friction);
  // Compliances in series: the pair relaxation time is the sum.
  params.dissipation_time_scale = a.dissipation + b.dissipation;
  params.stiction_velocity = stiction_velocity;
  return params;
}

Eigen::MatrixXd mass_matrix(const World& world, const SystemState& state) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(world.num_velocities(),
                                            world.num_velocities());
  for (int i = 0; i < world.num_bodies(); ++i) {
    const int start = world.velocity_start(i);
    if (start < 0) continue;
    const RigidBody& body = world.bodies[i];
    const Eigen::Matrix3d rot = state.poses[i].matrix();
    m.block<3, 3>(start, start) = rot * body.inertia * rot.transpose();
    m.block<3, 3>(start + 3, start + 3) =
        body.mass * Eigen::Matrix3d::Identity();
  }
  return m;
}

Eigen::VectorXd bias_forces(const World& world, const SystemState& state) {
  Eigen::VectorXd k = Eigen::VectorXd::Zero(world.num_velocities());
  for (int i = 0; i < world.num_bodies(); ++i) {
    const int start = world.velocity_start(i);
    if (start < 0) continue;
    const RigidBody& body = world.bodies[i];
    const Eigen::Matrix3d rot = state.poses[i].matrix();
    const Eigen::Matrix3d inertia_w = rot * body.inertia * rot.transpose();
    const Eigen::Vector3d omega = state.velocities.segment<3>(start);
    k.segment<3>(start) = -omega.cross(inertia_w * omega);
    k.segment<3>(start + 3) = body.mass * world.gravity;
  }
  return k;
}

Eigen::VectorXd ContactJacobian::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd result = Eigen::VectorXd::Zero(rows_);
  for (const auto& block : blocks_) {
    result.segment<3>(3 * block.constraint) +=
        block.matrix * v.segment<6>(block.velocity_start);
  }
  return result;
}

Eigen::VectorXd ContactJacobian::apply_transpose(
    const Eigen::VectorXd& f) const {
  Eigen::VectorXd result = Eigen::VectorXd::Zero(cols_);
  for (const auto& block : blocks_) {
    result.segment<6>(block.velocity_start) +=
        block.matrix.transpose() * f.segment<3>(3 * block.constraint);
  }
  return result;
}

Eigen::MatrixXd ContactJacobian::dense() const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(rows_, cols_);
  for (const auto& block : blocks_) {
    j.block<3, 6>(3 * block.constraint, block.velocity_start) += block.matrix;
  }
  return j;
}

ContactJacobian contact_jacobian(
    const World& world, const SystemState& state,
    const std::vector<ContactConstraint>& constraints) {
  ContactJacobian jacobian(static_cast<int>(constraints.size()),
                           world.num_velocities());
  for (size_t c = 0; c < constraints.size(); ++c) {
    const ContactConstraint& constraint = constraints[c];
    // v_rel = v_B(p) - v_A(p); each side contributes frame * [-[r]x, I].
    const auto side = [&](int body, double sign) {
      const int start = world.velocity_start(body);
      if (start < 0) return;
      const Eigen::Vector3d r =
          constraint.position - state.poses[body].translation;
      ContactJacobian::Block block;
      block.constraint = static_cast<int>(c);
      block.velocity_start = start;
      block.matrix.leftCols<3>() = sign * constraint.frame * (-skew(r));
      block.matrix.rightCols<3>() = sign * constraint.frame;
      jacobian.add_block(std::move(block));
    };
    side(constraint.body_a, -1.0);
    side(constraint.body_b, 1.0);
  }
  return jacobian;
}

std::vector<RigidPose> advance_positions(const World& world,
                                         const SystemState& state,
                                         const Eigen::VectorXd& velocities,
                                         double delta_time) {
  std::vector<RigidPose> poses = state.poses;
  for (int i = 0; i < world.num_bodies(); ++i) {
    const int start = world.velocity_start(i);
    if (start < 0) continue;
    const Eigen::Vector3d omega = velocities.segment<3>(start);
    const Eigen::Vector3d v = velocities.segment<3>(start + 3);
    RigidPose& pose = poses[i];
    pose.translation += delta_time * v;
    const Eigen::Quaterniond rate =
        Eigen::Quaterniond(0.0, omega.x(), omega.y(), omega.z()) *
        pose.rotation;
    pose.rotation.coeffs() += 0.5 * delta_time * rate.coeffs();
    pose.rotation.normalize();
  }
  return poses;
}

}  // namespace hydro
