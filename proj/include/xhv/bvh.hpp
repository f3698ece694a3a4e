#pragma once

#include <limits>
#include <vector>

#include "xhv/geom.hpp"

namespace xhv {

struct Hit {
  int facet = -1;
  double t = std::numeric_limits<double>::infinity();
  bool backside = false;  // ray direction along the facet normal
  Vec3 point;
};

// Axis-aligned BVH over scene facets; median split on centroids.
// Nearest hit, ties broken by smallest facet index.
class Bvh {
 public:
  explicit Bvh(const std::vector<Facet>& facets);

  // Nearest intersection with t > t_min, skipping facet `skip`.
  Hit raycast(const Vec3& origin, const Vec3& dir, int skip = -1) const;

  double scene_scale() const { return scale_; }

 private:
  struct Node {
    Vec3 lo, hi;
    int left = -1;    // internal: child index; leaf: first triangle
    int count = 0;    // 0 for internal nodes
    int right = -1;
  };

  struct Tri {
    Vec3 v0, e1, e2;
    int index;
  };

  int build(int begin, int end);

  std::vector<Node> nodes_;
  std::vector<Tri> tris_;
  double scale_ = 1.0;
  double t_min_ = 0.0;
};

}  // namespace xhv
