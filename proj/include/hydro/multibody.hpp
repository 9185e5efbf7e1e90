#pragma once

#include <string>
#include <vector>

#include "hydro/discrete_contact.hpp"

namespace hydro {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Per-body contact material. Pair parameters combine the harmonic mean of
/// the friction coefficients with the sum of the dissipation time scales.
struct Material {
  double friction = 0.0;     // mu
  double dissipation = 0.0;  // tau, seconds
};

/// A free rigid body. The body frame sits at the center of mass; velocities
/// are world-frame [angular; linear]. Anchored bodies never move and carry
/// no degrees of freedom.
struct RigidBody {
  std::string name;
  double mass = 1.0;
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Identity();  // about COM
  bool anchored = false;
  Material material;
  BodyGeometry geometry;
  RigidPose initial_pose;
  Vector6d initial_velocity = Vector6d::Zero();
};

struct World {
  std::vector<RigidBody> bodies;
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};

  int num_bodies() const { return static_cast<int>(bodies.size()); }
  int num_velocities() const;
  /// First generalized-velocity index of a body, or -1 when anchored.
  int velocity_start(int body) const;
};

/// Poses of all bodies plus the stacked generalized velocities of the
/// dynamic ones.
struct SystemState {
  std::vector<RigidPose> poses;
  Eigen::VectorXd velocities;
  double time = 0.0;
};

SystemState make_initial_state(const World& world);

ContactParameters pair_parameters(const World& world, int body_a, int body_b,
                                  double stiction_velocity);

/// Block-diagonal mass matrix with world-frame rotational inertia.
Eigen::MatrixXd mass_matrix(const World& world, const SystemState& state);

/// Gravity plus gyroscopic generalized forces, so M dv/dt = bias + J^T f.
Eigen::VectorXd bias_forces(const World& world, const SystemState& state);

/// Sparse map from generalized velocities to stacked contact-frame relative
/// velocities (t1, t2, n per constraint) of body B relative to body A, taken
/// at the constraint position. Positive normal components separate.
class ContactJacobian {
 public:
  struct Block {
    int constraint = 0;
    int velocity_start = 0;
    Eigen::Matrix<double, 3, 6> matrix;
  };

  ContactJacobian(int num_constraints, int num_velocities)
      : rows_(3 * num_constraints), cols_(num_velocities) {}

  void add_block(Block block) { blocks_.push_back(std::move(block)); }
  const std::vector<Block>& blocks() const { return blocks_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& f) const;
  Eigen::MatrixXd dense() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Block> blocks_;
};

ContactJacobian contact_jacobian(const World& world, const SystemState& state,
                                 const std::vector<ContactConstraint>& constraints);

/// First-order position update q = q0 + dt N(q0) v: translations integrate
/// the linear velocity, orientations integrate the quaternion rate and are
/// renormalized.
std::vector<RigidPose> advance_positions(const World& world,
                                         const SystemState& state,
                                         const Eigen::VectorXd& velocities,
                                         double delta_time);

}  // namespace hydro
