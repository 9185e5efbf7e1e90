#pragma once

#include <utility>
#include <vector>

#include "hydro/mesh.hpp"

namespace hydro {

struct Aabb {
  Eigen::Vector3d lower{0, 0, 0};
  Eigen::Vector3d upper{0, 0, 0};

  void grow(const Eigen::Vector3d& p) {
    lower = lower.cwiseMin(p);
    upper = upper.cwiseMax(p);
  }
  void merge(const Aabb& other) {
    lower = lower.cwiseMin(other.lower);
    upper = upper.cwiseMax(other.upper);
  }
  Eigen::Vector3d center() const { return 0.5 * (lower + upper); }
  bool contains(const Eigen::Vector3d& p, double slack = 0.0) const {
    return (p.array() >= lower.array() - slack).all() &&
           (p.array() <= upper.array() + slack).all();
  }
  bool contains(const Aabb& other, double slack = 0.0) const {
    return (other.lower.array() >= lower.array() - slack).all() &&
           (other.upper.array() <= upper.array() + slack).all();
  }
  bool overlaps(const Aabb& other) const {
    return (lower.array() <= other.upper.array()).all() &&
           (upper.array() >= other.lower.array()).all();
  }
};

/// Binary tree of axis-aligned boxes over mesh elements. Boxes live in the
/// mesh's body frame; queries take the body poses and transform boxes
/// conservatively, so the tree never needs a refit.
class Bvh {
 public:
  struct Node {
    Aabb box;
    int left = -1;   // child index, internal nodes only
    int right = -1;
    int element = -1;  // >= 0 marks a leaf
  };

  bool empty() const { return nodes_.empty(); }
  int num_leaves() const { return num_leaves_; }
  int root_index() const { return root_; }
  const Node& root() const { return nodes_[root_]; }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  friend Bvh build_bvh_from_boxes(std::vector<Aabb> boxes);
  std::vector<Node> nodes_;
  int root_ = -1;
  int num_leaves_ = 0;
};

Bvh build_bvh(const TetMesh& mesh);
Bvh build_bvh(const SurfaceMesh& mesh);

/// All element index pairs (a, b) whose world-space boxes overlap. Superset
/// of the truly intersecting pairs; no duplicates; deterministic order.
std::vector<std::pair<int, int>> candidate_pairs(const Bvh& bvh_a,
                                                 const RigidPose& pose_a,
                                                 const Bvh& bvh_b,
                                                 const RigidPose& pose_b);

}  // namespace hydro
