#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xhv/units.hpp"

namespace xhv {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(const Vec3& a);
Vec3 normalized(const Vec3& a);

// Single-sided triangular facet. The normal (right-hand rule over
// v0,v1,v2) must point into the gas volume; a ray striking the back
// side is a geometry defect and is tallied as such by the tracer.
struct Facet {
  Vec3 v0, v1, v2;
  double sticking = 0.0;     // capture probability in [0,1]
  double outgassing = 0.0;   // specific rate, Pa m^3 s^-1 m^-2
  bool virtual_plane = false;  // transparent sampling facet
  std::string tag;

  Vec3 normal() const;       // unit
  double area() const;
};

struct GasModel {
  double mass_kg = 2.016 * amu;  // H2
  double temperature_k = 293.0;
};

struct Scene {
  std::vector<Facet> facets;
  GasModel gas;

  // Facet indices per tag. Untagged facets are not listed.
  std::map<std::string, std::vector<int>> groups() const;
  std::vector<int> group(const std::string& tag) const;  // empty tag -> throws
  double group_area(const std::string& tag) const;

  double total_area() const;
  // Total outgassing throughput Q in Pa m^3/s.
  double total_outgassing() const;

  // Per-facet invariant checks; throws ValidationError naming the facet.
  void validate() const;
};

// --- composition ---------------------------------------------------------

void translate(Scene& s, const Vec3& offset);
// Rotate the scene so that its local +z axis maps onto `axis` (unit not
// required), about the origin.
void orient_z_to(Scene& s, const Vec3& axis);
// Append facets of `part` to `target` (gas model of `target` wins).
void append(Scene& target, const Scene& part);

// --- parametric builders -------------------------------------------------

struct TubeCap {
  double sticking = 0.0;
  double outgassing = 0.0;  // SI
  bool virtual_plane = false;
  std::string tag;
};

struct TubeOptions {
  int resolution = 32;
  double wall_sticking = 0.0;
  double wall_outgassing = 0.0;  // SI
  std::string wall_tag = "wall";
  TubeCap cap_near;  // z = 0
  TubeCap cap_far;   // z = length
};

// Closed cylinder along +z from z=0 to z=length, centered on the z axis,
// facet normals pointing into the bore. Caps are disk facet groups; a
// "port" is simply a cap with sticking 1 (absorber) or virtual_plane set.
Scene build_tube(double diameter, double length, const TubeOptions& opt = {});

struct PortSpec {
  int face = 0;            // 0..5 = +x,-x,+y,-y,+z,-z
  double diameter = 0.0;
  double stub_length = 0.0;  // 0 = port flush with the wall
  double sticking = 1.0;     // of the port disk (stub far end)
  bool blanked = false;      // far end is wall material, not a port
  std::string tag = "port";
};

struct BoxOptions {
  int resolution = 32;
  double wall_sticking = 0.0;
  double wall_outgassing = 0.0;  // SI
  std::string wall_tag = "wall";
};

// Axis-aligned box centered at the origin with circular ports, one per
// face at most, each optionally extended by a blanked or open stub tube.
Scene build_box(const Vec3& extents, const std::vector<PortSpec>& ports,
                const BoxOptions& opt = {});

// Closed cylindrical capsule (pump body) along z, centered at the origin,
// normals outward (the gas surrounds it).
Scene make_capsule(double diameter, double length, int resolution,
                   double sticking, const std::string& tag);

// Transparent square sampling plane (two facets) centered at `center`
// with normal along `normal`, side length `side`.
Scene make_sampling_plane(const Vec3& center, const Vec3& normal, double side,
                          const std::string& tag);

// --- diagnostics ---------------------------------------------------------

// Monte Carlo watertightness: casts `rays` rays from random interior
// points (near `interior_hint`) in random directions; returns true if
// every ray hits a front side of some non-virtual facet.
bool is_watertight(const Scene& s, const Vec3& interior_hint, int rays = 1000,
                   std::uint64_t seed = 1);

// --- file IO -------------------------------------------------------------

Scene load_scene(const std::string& path);
void save_scene(const Scene& s, const std::string& path);

}  // namespace xhv
