#include "xhv/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "xhv/bvh.hpp"
#include "xhv/errors.hpp"
#include "xhv/rng.hpp"

namespace xhv {

double mean_speed(double mass_kg, double temperature_k) {
  return std::sqrt(8.0 * k_boltzmann * temperature_k / (std::numbers::pi * mass_kg));
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  return {a.x / n, a.y / n, a.z / n};
}

Vec3 Facet::normal() const { return normalized(cross(v1 - v0, v2 - v0)); }

double Facet::area() const { return 0.5 * norm(cross(v1 - v0, v2 - v0)); }

std::map<std::string, std::vector<int>> Scene::groups() const {
  std::map<std::string, std::vector<int>> out;
  for (int i = 0; i < static_cast<int>(facets.size()); ++i) {
    if (!facets[i].tag.empty()) out[facets[i].tag].push_back(i);
  }
  return out;
}

std::vector<int> Scene::group(const std::string& tag) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(facets.size()); ++i) {
    if (facets[i].tag == tag) out.push_back(i);
  }
  if (out.empty()) throw ValidationError("no facets tagged '" + tag + "'");
  return out;
}

double Scene::group_area(const std::string& tag) const {
  double a = 0;
  for (int i : group(tag)) a += facets[i].area();
  return a;
}

double Scene::total_area() const {
  double a = 0;
  for (const auto& f : facets) a += f.area();
  return a;
}

double Scene::total_outgassing() const {
  double q = 0;
  for (const auto& f : facets) q += f.outgassing * f.area();
  return q;
}

void Scene::validate() const {
  for (int i = 0; i < static_cast<int>(facets.size()); ++i) {
    const Facet& f = facets[i];
    std::ostringstream where;
    where << "facet " << i;
    if (!(f.area() > 0)) throw ValidationError(where.str() + ": degenerate triangle (zero area)");
    if (f.sticking < 0 || f.sticking > 1)
      throw ValidationError(where.str() + ": sticking out of [0,1]");
    if (f.outgassing < 0) throw ValidationError(where.str() + ": negative outgassing");
    if (f.virtual_plane && (f.sticking != 0 || f.outgassing != 0))
      throw ValidationError(where.str() + ": virtual plane must have zero sticking and outgassing");
  }
  if (gas.mass_kg <= 0 || gas.temperature_k <= 0)
    throw ValidationError("gas mass and temperature must be positive");
}

// --- composition ---------------------------------------------------------

void translate(Scene& s, const Vec3& offset) {
  for (auto& f : s.facets) {
    f.v0 += offset;
    f.v1 += offset;
    f.v2 += offset;
  }
}

void orient_z_to(Scene& s, const Vec3& axis) {
  Vec3 w = normalized(axis);
  // Rotation taking +z to w (Rodrigues about z x w).
  Vec3 z{0, 0, 1};
  Vec3 k = cross(z, w);
  double c = dot(z, w);
  double s2 = dot(k, k);
  auto rot = [&](const Vec3& v) -> Vec3 {
    if (s2 < 1e-30) {
      if (c > 0) return v;
      return {v.x, -v.y, -v.z};  // 180 degrees about x
    }
    Vec3 kxv = cross(k, v);
    double kdv = dot(k, v);
    double f = (1.0 - c) / s2;
    return v * c + kxv + k * (kdv * f);
  };
  for (auto& f : s.facets) {
    f.v0 = rot(f.v0);
    f.v1 = rot(f.v1);
    f.v2 = rot(f.v2);
  }
}

void append(Scene& target, const Scene& part) {
  target.facets.insert(target.facets.end(), part.facets.begin(), part.facets.end());
}

// --- builders ------------------------------------------------------------

namespace {

void push_tri(Scene& s, const Vec3& a, const Vec3& b, const Vec3& c, double sticking,
              double outgassing, const std::string& tag, bool virt = false) {
  Facet f;
  f.v0 = a;
  f.v1 = b;
  f.v2 = c;
  f.sticking = sticking;
  f.outgassing = outgassing;
  f.tag = tag;
  f.virtual_plane = virt;
  s.facets.push_back(f);
}

// Fan-triangulated disk at z = z0, rim radius r, normal along sign*z.
void push_disk(Scene& s, double r, double z0, int res, int sign, double sticking,
               double outgassing, const std::string& tag, bool virt = false) {
  Vec3 c{0, 0, z0};
  for (int i = 0; i < res; ++i) {
    double a0 = 2.0 * std::numbers::pi * i / res;
    double a1 = 2.0 * std::numbers::pi * (i + 1) / res;
    Vec3 p0{r * std::cos(a0), r * std::sin(a0), z0};
    Vec3 p1{r * std::cos(a1), r * std::sin(a1), z0};
    if (sign > 0)
      push_tri(s, c, p0, p1, sticking, outgassing, tag, virt);
    else
      push_tri(s, c, p1, p0, sticking, outgassing, tag, virt);
  }
}

// Cylinder barrel from z0 to z1, radius r; normals inward if inward.
void push_barrel(Scene& s, double r, double z0, double z1, int res, bool inward,
                 double sticking, double outgassing, const std::string& tag) {
  for (int i = 0; i < res; ++i) {
    double a0 = 2.0 * std::numbers::pi * i / res;
    double a1 = 2.0 * std::numbers::pi * (i + 1) / res;
    Vec3 p00{r * std::cos(a0), r * std::sin(a0), z0};
    Vec3 p10{r * std::cos(a1), r * std::sin(a1), z0};
    Vec3 p01{r * std::cos(a0), r * std::sin(a0), z1};
    Vec3 p11{r * std::cos(a1), r * std::sin(a1), z1};
    if (inward) {
      push_tri(s, p00, p01, p10, sticking, outgassing, tag);
      push_tri(s, p10, p01, p11, sticking, outgassing, tag);
    } else {
      push_tri(s, p00, p10, p01, sticking, outgassing, tag);
      push_tri(s, p10, p11, p01, sticking, outgassing, tag);
    }
  }
}

}  // namespace

Scene build_tube(double diameter, double length, const TubeOptions& opt) {
  if (diameter <= 0 || length < 0) throw ValidationError("tube dimensions must be positive");
  if (opt.resolution < 3) throw ValidationError("tube resolution must be >= 3");
  Scene s;
  double r = diameter / 2.0;
  if (length > 0) {
    push_barrel(s, r, 0.0, length, opt.resolution, /*inward=*/true, opt.wall_sticking,
                opt.wall_outgassing, opt.wall_tag);
  }
  const TubeCap* caps[2] = {&opt.cap_near, &opt.cap_far};
  for (int e = 0; e < 2; ++e) {
    const TubeCap& c = *caps[e];
    std::string tag = c.tag.empty() ? (e == 0 ? "cap0" : "cap1") : c.tag;
    double z0 = e == 0 ? 0.0 : length;
    int sign = e == 0 ? +1 : -1;
    push_disk(s, r, z0, opt.resolution, sign, c.sticking, c.outgassing, tag, c.virtual_plane);
  }
  s.validate();
  return s;
}

namespace {

// Face frames for build_box: outward axis and two in-plane axes forming a
// right-handed set with the INWARD normal = u x v.
struct FaceFrame {
  Vec3 out, u, v;
};

FaceFrame face_frame(int face) {
  switch (face) {
    case 0: return {{+1, 0, 0}, {0, 0, 1}, {0, 1, 0}};  // +x, inward -x
    case 1: return {{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    case 2: return {{0, +1, 0}, {1, 0, 0}, {0, 0, 1}};
    case 3: return {{0, -1, 0}, {0, 0, 1}, {1, 0, 0}};
    case 4: return {{0, 0, +1}, {0, 1, 0}, {1, 0, 0}};
    case 5: return {{0, 0, -1}, {1, 0, 0}, {0, 1, 0}};
    default: throw ValidationError("port face index must be 0..5");
  }
}

// Half extents of the face rectangle along (u, v) and the center offset.
void face_dims(const Vec3& ext, int face, double& hu, double& hv, double& hout) {
  Vec3 h{ext.x / 2, ext.y / 2, ext.z / 2};
  switch (face) {
    case 0: hu = h.z; hv = h.y; hout = h.x; break;
    case 1: hu = h.y; hv = h.z; hout = h.x; break;
    case 2: hu = h.x; hv = h.z; hout = h.y; break;
    case 3: hu = h.z; hv = h.x; hout = h.y; break;
    case 4: hu = h.y; hv = h.x; hout = h.z; break;
    case 5: hu = h.x; hv = h.y; hout = h.z; break;
  }
}

// Point on the rectangle boundary (half extents hu, hv) in direction a.
void rect_boundary(double a, double hu, double hv, double& bu, double& bv) {
  double ca = std::cos(a), sa = std::sin(a);
  double t = std::numeric_limits<double>::infinity();
  if (std::abs(ca) > 1e-15) t = std::min(t, hu / std::abs(ca));
  if (std::abs(sa) > 1e-15) t = std::min(t, hv / std::abs(sa));
  bu = t * ca;
  bv = t * sa;
}

}  // namespace

Scene build_box(const Vec3& extents, const std::vector<PortSpec>& ports, const BoxOptions& opt) {
  if (extents.x <= 0 || extents.y <= 0 || extents.z <= 0)
    throw ValidationError("box extents must be positive");
  if (opt.resolution < 8) throw ValidationError("box resolution must be >= 8");
  std::vector<const PortSpec*> by_face(6, nullptr);
  for (const auto& p : ports) {
    if (p.face < 0 || p.face > 5) throw ValidationError("port face index must be 0..5");
    if (by_face[p.face])
      throw ValidationError("overlapping ports: more than one port on face " +
                            std::to_string(p.face));
    double hu, hv, hout;
    face_dims(extents, p.face, hu, hv, hout);
    if (p.diameter <= 0 || p.diameter / 2 >= std::min(hu, hv))
      throw ValidationError("port does not fit within face " + std::to_string(p.face));
    by_face[p.face] = &p;
  }

  Scene s;
  int res = opt.resolution;
  for (int face = 0; face < 6; ++face) {
    FaceFrame fr = face_frame(face);
    double hu, hv, hout;
    face_dims(extents, face, hu, hv, hout);
    Vec3 center = fr.out * hout;
    auto at = [&](double u, double v, double w) {
      return center + fr.u * u + fr.v * v + fr.out * w;
    };
    const PortSpec* port = by_face[face];
    if (!port) {
      // plain rectangle, two triangles; inward normal = u x v
      Vec3 a = at(-hu, -hv, 0), b = at(hu, -hv, 0), c = at(hu, hv, 0), d = at(-hu, hv, 0);
      push_tri(s, a, b, c, opt.wall_sticking, opt.wall_outgassing, opt.wall_tag);
      push_tri(s, a, c, d, opt.wall_sticking, opt.wall_outgassing, opt.wall_tag);
      continue;
    }
    double r = port->diameter / 2.0;
    // annular strip between the circular hole and the rectangle boundary;
    // the rectangle corners must be sampled exactly or the strip cuts
    // them off and leaves gaps at the face edges
    std::vector<double> stations;
    for (int i = 0; i < res; ++i)
      stations.push_back(2.0 * std::numbers::pi * i / res);
    for (double su : {1.0, -1.0})
      for (double sv : {1.0, -1.0}) {
        double a = std::atan2(sv * hv, su * hu);
        if (a < 0) a += 2.0 * std::numbers::pi;
        stations.push_back(a);
      }
    std::sort(stations.begin(), stations.end());
    stations.erase(std::unique(stations.begin(), stations.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                   stations.end());
    for (size_t i = 0; i < stations.size(); ++i) {
      double a0 = stations[i];
      double a1 = i + 1 < stations.size() ? stations[i + 1]
                                          : stations[0] + 2.0 * std::numbers::pi;
      double b0u, b0v, b1u, b1v;
      rect_boundary(a0, hu, hv, b0u, b0v);
      rect_boundary(a1, hu, hv, b1u, b1v);
      Vec3 c0 = at(r * std::cos(a0), r * std::sin(a0), 0);
      Vec3 c1 = at(r * std::cos(a1), r * std::sin(a1), 0);
      Vec3 r0 = at(b0u, b0v, 0);
      Vec3 r1 = at(b1u, b1v, 0);
      push_tri(s, c0, r0, r1, opt.wall_sticking, opt.wall_outgassing, opt.wall_tag);
      push_tri(s, c0, r1, c1, opt.wall_sticking, opt.wall_outgassing, opt.wall_tag);
    }
    // port disk, either flush or at the end of a stub tube
    double zport = port->stub_length;
    if (zport > 0) {
      // stub barrel outside the box, gas inside: normals toward the stub axis
      for (int i = 0; i < res; ++i) {
        double a0 = 2.0 * std::numbers::pi * i / res;
        double a1 = 2.0 * std::numbers::pi * (i + 1) / res;
        // the face frame (u, v, out) is left-handed, so the bore-facing
        // winding is the mirror of the tube builder's
        Vec3 p00 = at(r * std::cos(a0), r * std::sin(a0), 0);
        Vec3 p10 = at(r * std::cos(a1), r * std::sin(a1), 0);
        Vec3 p01 = at(r * std::cos(a0), r * std::sin(a0), zport);
        Vec3 p11 = at(r * std::cos(a1), r * std::sin(a1), zport);
        push_tri(s, p00, p10, p01, opt.wall_sticking, opt.wall_outgassing, opt.wall_tag);
        push_tri(s, p10, p11, p01, opt.wall_sticking, opt.wall_outgassing, opt.wall_tag);
      }
    }
    double dsticking = port->blanked ? opt.wall_sticking : port->sticking;
    double dout = port->blanked ? opt.wall_outgassing : 0.0;
    std::string dtag = port->blanked ? opt.wall_tag : port->tag;
    Vec3 dc = at(0, 0, zport);
    for (int i = 0; i < res; ++i) {
      double a0 = 2.0 * std::numbers::pi * i / res;
      double a1 = 2.0 * std::numbers::pi * (i + 1) / res;
      // same winding as the plain faces: u x v points back into the box
      Vec3 p0 = at(r * std::cos(a0), r * std::sin(a0), zport);
      Vec3 p1 = at(r * std::cos(a1), r * std::sin(a1), zport);
      push_tri(s, dc, p0, p1, dsticking, dout, dtag);
    }
  }
  s.validate();
  return s;
}

Scene make_capsule(double diameter, double length, int resolution, double sticking,
                   const std::string& tag) {
  if (diameter <= 0 || length <= 0) throw ValidationError("capsule dimensions must be positive");
  Scene s;
  double r = diameter / 2.0;
  double z0 = -length / 2.0, z1 = length / 2.0;
  push_barrel(s, r, z0, z1, resolution, /*inward=*/false, sticking, 0.0, tag);
  push_disk(s, r, z0, resolution, -1, sticking, 0.0, tag);  // normal -z (outward)
  push_disk(s, r, z1, resolution, +1, sticking, 0.0, tag);
  s.validate();
  return s;
}

Scene make_sampling_plane(const Vec3& center, const Vec3& normal, double side,
                          const std::string& tag) {
  Scene s;
  Vec3 n = normalized(normal);
  Vec3 ref = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 u = normalized(cross(n, ref));
  Vec3 v = cross(n, u);
  double h = side / 2.0;
  Vec3 a = center - u * h - v * h;
  Vec3 b = center + u * h - v * h;
  Vec3 c = center + u * h + v * h;
  Vec3 d = center - u * h + v * h;
  push_tri(s, a, b, c, 0.0, 0.0, tag, /*virt=*/true);
  push_tri(s, a, c, d, 0.0, 0.0, tag, /*virt=*/true);
  return s;
}

bool is_watertight(const Scene& s, const Vec3& interior_hint, int rays, std::uint64_t seed) {
  Bvh bvh(s.facets);
  double jitter = 0.01 * bvh.scene_scale();
  for (int i = 0; i < rays; ++i) {
    Prng rng(seed, static_cast<std::uint64_t>(i));
    Vec3 origin = interior_hint + Vec3{rng.next_double() - 0.5, rng.next_double() - 0.5,
                                       rng.next_double() - 0.5} * (2.0 * jitter);
    // isotropic direction
    double u = 2.0 * rng.next_double() - 1.0;
    double phi = 2.0 * std::numbers::pi * rng.next_double();
    double rxy = std::sqrt(std::max(0.0, 1.0 - u * u));
    Vec3 dir{rxy * std::cos(phi), rxy * std::sin(phi), u};
    Hit h = bvh.raycast(origin, dir);
    while (h.facet >= 0 && s.facets[h.facet].virtual_plane)
      h = bvh.raycast(h.point, dir, h.facet);
    if (h.facet < 0 || h.backside) return false;
  }
  return true;
}

}  // namespace xhv
