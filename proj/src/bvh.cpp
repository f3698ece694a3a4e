#include "xhv/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xhv/errors.hpp"

namespace xhv {

namespace {

inline Vec3 vmin(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 vmax(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

constexpr int kLeafSize = 4;

}  // namespace

Bvh::Bvh(const std::vector<Facet>& facets) {
  if (facets.empty()) throw ValidationError("cannot build BVH over empty scene");
  tris_.reserve(facets.size());
  Vec3 lo = facets[0].v0, hi = facets[0].v0;
  for (int i = 0; i < static_cast<int>(facets.size()); ++i) {
    const Facet& f = facets[i];
    tris_.push_back({f.v0, f.v1 - f.v0, f.v2 - f.v0, i});
    lo = vmin(lo, vmin(f.v0, vmin(f.v1, f.v2)));
    hi = vmax(hi, vmax(f.v0, vmax(f.v1, f.v2)));
  }
  Vec3 d = hi - lo;
  scale_ = std::max({d.x, d.y, d.z});
  t_min_ = 1e-9 * scale_;
  nodes_.reserve(2 * tris_.size());
  build(0, static_cast<int>(tris_.size()));
}

int Bvh::build(int begin, int end) {
  int index = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  Vec3 lo = tris_[begin].v0, hi = tris_[begin].v0;
  Vec3 clo = lo, chi = hi;
  for (int i = begin; i < end; ++i) {
    const Tri& t = tris_[i];
    Vec3 a = t.v0, b = t.v0 + t.e1, c = t.v0 + t.e2;
    lo = vmin(lo, vmin(a, vmin(b, c)));
    hi = vmax(hi, vmax(a, vmax(b, c)));
    Vec3 cen = (a + b + c) * (1.0 / 3.0);
    clo = vmin(clo, cen);
    chi = vmax(chi, cen);
  }
  nodes_[index].lo = lo;
  nodes_[index].hi = hi;
  if (end - begin <= kLeafSize) {
    nodes_[index].left = begin;
    nodes_[index].count = end - begin;
    return index;
  }
  Vec3 span = chi - clo;
  int axis = 0;
  if (span.y > span.x) axis = 1;
  if (span.z > (axis == 0 ? span.x : span.y)) axis = 2;
  auto key = [axis](const Tri& t) {
    Vec3 cen = (t.v0 + (t.v0 + t.e1) + (t.v0 + t.e2)) * (1.0 / 3.0);
    return axis == 0 ? cen.x : axis == 1 ? cen.y : cen.z;
  };
  int mid = (begin + end) / 2;
  std::nth_element(tris_.begin() + begin, tris_.begin() + mid, tris_.begin() + end,
                   [&](const Tri& a, const Tri& b) { return key(a) < key(b); });
  int l = build(begin, mid);
  int r = build(mid, end);
  nodes_[index].left = l;
  nodes_[index].right = r;
  nodes_[index].count = 0;
  return index;
}

Hit Bvh::raycast(const Vec3& origin, const Vec3& dir, int skip) const {
  // Finite inverse avoids 0*inf = NaN in the slab test for axis-aligned rays.
  auto safe_inv = [](double d) { return d != 0.0 ? 1.0 / d : 1e300; };
  Vec3 inv{safe_inv(dir.x), safe_inv(dir.y), safe_inv(dir.z)};
  Hit best;
  // Branchless slab test: min/max pairs compile to vectorized compares.
  auto slab_entry = [&](const Node& n) {
    double ax = (n.lo.x - origin.x) * inv.x, bx = (n.hi.x - origin.x) * inv.x;
    double ay = (n.lo.y - origin.y) * inv.y, by = (n.hi.y - origin.y) * inv.y;
    double az = (n.lo.z - origin.z) * inv.z, bz = (n.hi.z - origin.z) * inv.z;
    double tnear = std::max(std::max(std::min(ax, bx), std::min(ay, by)),
                            std::max(std::min(az, bz), 0.0));
    double tfar = std::min(std::min(std::max(ax, bx), std::max(ay, by)),
                           std::max(az, bz));
    // +inf marks a miss so the caller can prune without a second flag
    return tnear <= tfar ? tnear : std::numeric_limits<double>::infinity();
  };
  struct Entry {
    int node;
    double tnear;
  };
  Entry stack[64];
  int sp = 0;
  if (slab_entry(nodes_[0]) < best.t) stack[sp++] = {0, 0.0};
  while (sp > 0) {
    Entry e = stack[--sp];
    if (e.tnear >= best.t) continue;  // a closer hit landed since the push
    const Node& n = nodes_[e.node];
    if (n.count > 0) {
      for (int i = n.left; i < n.left + n.count; ++i) {
        const Tri& tr = tris_[i];
        if (tr.index == skip) continue;
        // Moller-Trumbore, division-free: compare det-scaled barycentrics so
        // the expensive divide happens only for an accepted hit.
        Vec3 p = cross(dir, tr.e2);
        double det = dot(tr.e1, p);
        double ad = std::abs(det);
        if (ad < 1e-300) continue;
        double sgn = det >= 0.0 ? 1.0 : -1.0;
        Vec3 tv = origin - tr.v0;
        double u = dot(tv, p) * sgn;
        if (u < 0.0 || u > ad) continue;
        Vec3 q = cross(tv, tr.e1);
        double v = dot(dir, q) * sgn;
        if (v < 0.0 || u + v > ad) continue;
        double t = dot(tr.e2, q) * (sgn / ad);
        if (t <= t_min_ || t > best.t) continue;
        if (t == best.t && best.facet >= 0 && tr.index > best.facet) continue;
        best.t = t;
        best.facet = tr.index;
        // det = -dot(dir, e1 x e2): a back-side strike travels along the normal
        best.backside = det < 0.0;
      }
    } else {
      // Visit the nearer child first so an early hit prunes the farther one.
      double tl = slab_entry(nodes_[n.left]);
      double tr = slab_entry(nodes_[n.right]);
      int near = n.left, far = n.right;
      double tn = tl, tf = tr;
      if (tr < tl) {
        near = n.right;
        far = n.left;
        tn = tr;
        tf = tl;
      }
      if (tf < best.t) stack[sp++] = {far, tf};
      if (tn < best.t) stack[sp++] = {near, tn};
    }
  }
  if (best.facet >= 0) best.point = origin + dir * best.t;
  return best;
}

}  // namespace xhv
