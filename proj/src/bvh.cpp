#include "hydro/bvh.hpp"

#include <algorithm>
#include <numeric>

namespace hydro {

namespace {

// Leaf boxes are inflated so that exact-touch configurations (shared faces,
// resting contact at zero penetration) stay inside the boxes.
constexpr double kBoxInflation = 1e-12;

// Conservative AABB of a body-frame box under a rigid transform: rotate the
// center, scale the half widths by |R|.
Aabb transform_aabb(const Aabb& box, const Eigen::Matrix3d& rotation,
                    const Eigen::Vector3d& translation) {
  const Eigen::Vector3d center = rotation * box.center() + translation;
  const Eigen::Vector3d half =
      rotation.cwiseAbs() * (0.5 * (box.upper - box.lower));
  return Aabb{center - half, center + half};
}

struct Builder {
  std::vector<Aabb> boxes;
  std::vector<int> order;
  std::vector<Bvh::Node> nodes;

  int build(int begin, int end) {
    Aabb box = boxes[order[begin]];
    for (int i = begin + 1; i < end; ++i) box.merge(boxes[order[i]]);
    if (end - begin == 1) {
      nodes.push_back({box, -1, -1, order[begin]});
      return static_cast<int>(nodes.size()) - 1;
    }
    // Median split along the widest axis of the centroid bounds.
    Aabb centroid_box{boxes[order[begin]].center(), boxes[order[begin]].center()};
    for (int i = begin + 1; i < end; ++i) {
      centroid_box.grow(boxes[order[i]].center());
    }
    int axis = 0;
    (centroid_box.upper - centroid_box.lower).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid,
                     order.begin() + end, [&](int a, int b) {
                       const double ca = boxes[a].center()[axis];
                       const double cb = boxes[b].center()[axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes.push_back({box, left, right, -1});
    return static_cast<int>(nodes.size()) - 1;
  }
};

}  // namespace

Bvh build_bvh_from_boxes(std::vector<Aabb> boxes) {
  if (boxes.empty()) throw std::runtime_error("empty geometry");
  Builder builder;
  builder.boxes = std::move(boxes);
  builder.order.resize(builder.boxes.size());
  std::iota(builder.order.begin(), builder.order.end(), 0);
  Bvh bvh;
  bvh.root_ = builder.build(0, static_cast<int>(builder.order.size()));
  bvh.nodes_ = std::move(builder.nodes);
  bvh.num_leaves_ = static_cast<int>(builder.boxes.size());
  return bvh;
}

Bvh build_bvh(const TetMesh& mesh) {
  std::vector<Aabb> boxes;
  boxes.reserve(mesh.tets.size());
  const Eigen::Vector3d pad = Eigen::Vector3d::Constant(kBoxInflation);
  for (const auto& t : mesh.tets) {
    Aabb box{mesh.vertices[t[0]], mesh.vertices[t[0]]};
    for (int k = 1; k < 4; ++k) box.grow(mesh.vertices[t[k]]);
    boxes.push_back({box.lower - pad, box.upper + pad});
  }
  return build_bvh_from_boxes(std::move(boxes));
}

Bvh build_bvh(const SurfaceMesh& mesh) {
  std::vector<Aabb> boxes;
  boxes.reserve(mesh.triangles.size());
  const Eigen::Vector3d pad = Eigen::Vector3d::Constant(kBoxInflation);
  for (const auto& t : mesh.triangles) {
    Aabb box{mesh.vertices[t[0]], mesh.vertices[t[0]]};
    for (int k = 1; k < 3; ++k) box.grow(mesh.vertices[t[k]]);
    boxes.push_back({box.lower - pad, box.upper + pad});
  }
  return build_bvh_from_boxes(std::move(boxes));
}

std::vector<std::pair<int, int>> candidate_pairs(const Bvh& bvh_a,
                                                 const RigidPose& pose_a,
                                                 const Bvh& bvh_b,
                                                 const RigidPose& pose_b) {
  std::vector<std::pair<int, int>> pairs;
  if (bvh_a.empty() || bvh_b.empty()) return pairs;

  // Work in A's frame; B's boxes are transformed on the fly.
  const RigidPose x_ab = pose_a.inverse() * pose_b;
  const Eigen::Matrix3d r_ab = x_ab.matrix();

  struct Item {
    int a, b;
  };
  std::vector<Item> stack;
  stack.push_back({bvh_a.root_index(), bvh_b.root_index()});
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    const Bvh::Node& na = bvh_a.nodes()[item.a];
    const Bvh::Node& nb = bvh_b.nodes()[item.b];
    if (!na.box.overlaps(transform_aabb(nb.box, r_ab, x_ab.translation))) {
      continue;
    }
    const bool leaf_a = na.element >= 0;
    const bool leaf_b = nb.element >= 0;
    if (leaf_a && leaf_b) {
      pairs.emplace_back(na.element, nb.element);
    } else if (leaf_a) {
      stack.push_back({item.a, nb.left});
      stack.push_back({item.a, nb.right});
    } else if (leaf_b) {
      stack.push_back({na.left, item.b});
      stack.push_back({na.right, item.b});
    } else {
      stack.push_back({na.left, nb.left});
      stack.push_back({na.left, nb.right});
      stack.push_back({na.right, nb.left});
      stack.push_back({na.right, nb.right});
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace hydro
