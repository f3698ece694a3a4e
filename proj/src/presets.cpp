#include "xhv/presets.hpp"

#include <algorithm>

#include "xhv/errors.hpp"
#include "xhv/units.hpp"

namespace xhv::presets {

void drop_group(Scene& s, const std::string& tag) {
  s.facets.erase(std::remove_if(s.facets.begin(), s.facets.end(),
                                [&](const Facet& f) { return f.tag == tag; }),
                 s.facets.end());
}

Scene pump_capsule(const PumpModel& pump) {
  return make_capsule(pump.diameter, pump.length, pump.resolution, pump.sticking, "pump");
}

Scene pump_in_tube(const PumpHousing& housing) {
  if (housing.pump.diameter >= housing.tube_diameter)
    throw ValidationError("pump cartridge does not fit in the housing tube");
  if (housing.pump.length >= housing.tube_length)
    throw ValidationError("pump cartridge longer than the housing tube");
  TubeOptions opt;
  opt.resolution = housing.resolution;
  opt.cap_near.sticking = 1.0;
  opt.cap_near.tag = "port";
  opt.cap_far.sticking = 0.0;
  opt.cap_far.tag = "wall";
  Scene s = build_tube(housing.tube_diameter, housing.tube_length, opt);
  Scene cart = pump_capsule(housing.pump);
  translate(cart, {0, 0, housing.tube_length / 2.0});
  append(s, cart);
  s.validate();
  return s;
}

ChamberOptions large_port_chamber() {
  ChamberOptions opt;
  opt.port_diameter = 0.10;
  opt.port_stub = 0.06;
  return opt;
}

ChamberOptions small_port_chamber() {
  ChamberOptions opt;
  opt.extents = {0.12, 0.12, 0.12};
  opt.port_diameter = 0.04;
  opt.port_stub = 0.03;
  return opt;
}

Scene pumped_chamber(const ChamberOptions& opt) {
  PortSpec port;
  port.face = 0;  // +x
  port.diameter = opt.port_diameter;
  port.stub_length = opt.port_stub;
  port.sticking = 1.0;
  port.tag = "pump";
  BoxOptions box;
  box.resolution = opt.resolution;
  box.wall_sticking = 0.0;
  box.wall_outgassing = opt.q_mbar_l_cm2 * q_mbar_l_cm2_to_si;
  Scene s = build_box(opt.extents, {port}, box);
  append(s, make_sampling_plane({0, 0, 0}, {0, 0, 1}, opt.roi_side, "roi"));
  s.validate();
  return s;
}

Scene full_system(const FullSystemOptions& opt) {
  double q_si = opt.q_mbar_l_cm2 * q_mbar_l_cm2_to_si;
  BoxOptions walls;
  walls.resolution = opt.resolution;
  walls.wall_sticking = 0.0;
  walls.wall_outgassing = q_si;

  // science chamber, centered at the origin, connection bore on +x
  PortSpec conn_a;
  conn_a.face = 0;
  conn_a.diameter = opt.neck_diameter;
  conn_a.stub_length = 0.0;
  conn_a.tag = "conn";
  Scene sys = build_box(opt.chamber_extents, {conn_a}, walls);

  // pump cube: connection bore on -x, absorbing flange on +x, gauge stub on +y
  PortSpec conn_b = conn_a;
  conn_b.face = 1;
  PortSpec pump;
  pump.face = 0;
  pump.diameter = opt.pump_diameter;
  pump.stub_length = opt.pump_stub;
  pump.sticking = 1.0;
  pump.tag = "pump";
  PortSpec gauge_stub;
  gauge_stub.face = 2;
  gauge_stub.diameter = opt.gauge_diameter;
  gauge_stub.stub_length = opt.gauge_length;
  gauge_stub.blanked = true;
  Vec3 cube_ext{opt.cube_side, opt.cube_side, opt.cube_side};
  Scene cube = build_box(cube_ext, {conn_b, pump, gauge_stub}, walls);
  double cube_cx = opt.chamber_extents.x / 2.0 + opt.neck_length + opt.cube_side / 2.0;
  translate(cube, {cube_cx, 0, 0});
  append(sys, cube);

  // open the connection bores and bridge them with the neck barrel
  drop_group(sys, "conn");
  TubeOptions neck_opt;
  neck_opt.resolution = opt.resolution;
  neck_opt.wall_outgassing = q_si;
  neck_opt.cap_near.tag = "drop";
  neck_opt.cap_far.tag = "drop";
  Scene neck = build_tube(opt.neck_diameter, opt.neck_length, neck_opt);
  drop_group(neck, "drop");
  orient_z_to(neck, {1, 0, 0});
  translate(neck, {opt.chamber_extents.x / 2.0, 0, 0});
  append(sys, neck);

  // measurement planes: ion location and inside the gauge stub
  append(sys, make_sampling_plane({0, 0, 0}, {0, 0, 1}, opt.roi_side, "roi"));
  double gauge_y = opt.cube_side / 2.0 + opt.gauge_length / 2.0;
  append(sys, make_sampling_plane({cube_cx, gauge_y, 0}, {0, 1, 0},
                                  0.6 * opt.gauge_diameter, "gauge"));
  sys.validate();
  return sys;
}

}  // namespace xhv::presets
