#pragma once

#include <string>

#include "xhv/geom.hpp"

namespace xhv::presets {

// NEG cartridge model: a closed cylindrical capsule, axis along z, centered
// at the origin. Calibrate its sticking against the nominal speed before use.
struct PumpModel {
  double diameter = 0.065;  // m
  double length = 0.13;     // m
  double sticking = 0.086;
  int resolution = 32;
};

Scene pump_capsule(const PumpModel& pump);

// The cartridge mounted coaxially in a pump housing tube. The near end is
// the measurement port (tag "port"); the far end is blanked.
struct PumpHousing {
  double tube_diameter = 6 * inch;
  double tube_length = 6 * inch;
  PumpModel pump;
  int resolution = 32;
};

Scene pump_in_tube(const PumpHousing& housing);

// Boxlike science chamber with one pumped port: a circular bore in a face,
// a short stub neck, and a perfectly absorbing flange at its end (tag
// "pump"). A virtual sampling plane at the chamber center is tagged "roi".
struct ChamberOptions {
  Vec3 extents{0.17, 0.17, 0.17};     // m
  double port_diameter = 0.1143;      // m
  double port_stub = 0.05;            // m
  double q_mbar_l_cm2 = 1e-12;        // wall outgassing
  double roi_side = 0.04;             // sampling plane, m
  int resolution = 32;
};

// The two port variants compared in the design study.
ChamberOptions large_port_chamber();
ChamberOptions small_port_chamber();

Scene pumped_chamber(const ChamberOptions& opt);

// Science chamber joined to a pump cube through a conductance-limited
// neck. The cube carries the pumping flange and a recessed gauge stub.
// Tags: "pump" (absorbing flange), "roi" (plane at the ion location),
// "gauge" (plane inside the gauge stub).
struct FullSystemOptions {
  Vec3 chamber_extents{0.17, 0.17, 0.17};
  double cube_side = 0.2032;          // 8 in
  double neck_diameter = 0.072;       // chamber-to-cube connection, m
  double neck_length = 0.135;         // m
  double pump_diameter = 0.15;        // absorbing flange bore, m
  double pump_stub = 0.05;            // m
  double gauge_diameter = 0.035;      // gauge stub bore, m
  double gauge_length = 0.10;         // m
  double q_mbar_l_cm2 = 1e-14;
  double roi_side = 0.04;
  int resolution = 32;
};

Scene full_system(const FullSystemOptions& opt);

// Removes every facet carrying `tag` (used to open connection ports).
void drop_group(Scene& s, const std::string& tag);

}  // namespace xhv::presets
