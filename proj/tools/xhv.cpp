// Vacuum-engineering toolkit front end: molecular-flow simulation, bake
// planning, ion-chain pressure estimation, reorder detection, gauge fits.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "xhv/chain.hpp"
#include "xhv/errors.hpp"
#include "xhv/gauge.hpp"
#include "xhv/geom.hpp"
#include "xhv/mcflow.hpp"
#include "xhv/outgas.hpp"
#include "xhv/presets.hpp"
#include "xhv/reorder.hpp"
#include "xhv/units.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct CommonOpts {
  long particles = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir = ".";
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--particles", c.particles, "Test particles to trace");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--workers", c.workers, "Worker threads (0 = hardware)")
      ->envname("XHV_WORKERS");
  cmd->add_option("--out", c.out_dir, "Output directory");
  cmd->add_option("--format", c.format, "Primary output format")
      ->check(CLI::IsMember({"json", "csv"}));
}

xhv::SimConfig sim_config(const CommonOpts& c) {
  xhv::SimConfig cfg;
  cfg.n_particles = c.particles;
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  return cfg;
}

json make_manifest(const std::string& command, const json& inputs, std::uint64_t seed) {
  return json{{"command", command}, {"version", kVersion}, {"inputs", inputs}, {"seed", seed}};
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream f(path);
  if (!f) throw xhv::ValidationError("cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json group_report(const xhv::SimResult& res) {
  json groups = json::object();
  for (const auto& [tag, g] : res.groups) {
    groups[tag] = {{"area_m2", g.area},
                   {"hits", g.hits},
                   {"absorbed", g.absorbed},
                   {"pressure_pa", g.pressure},
                   {"pressure_mbar", g.pressure * xhv::pa_to_mbar},
                   {"pressure_se_mbar", g.pressure_se * xhv::pa_to_mbar},
                   {"absorbed_rate", g.absorbed_rate}};
  }
  return groups;
}

json sim_report(const xhv::SimResult& res) {
  return json{{"groups", group_report(res)},
              {"generation_rate", res.generation_rate},
              {"n_particles", res.n_particles},
              {"absorbed_total", res.absorbed_total},
              {"capped", res.capped},
              {"backside_hits", res.backside_terminated},
              {"cap_warning", res.cap_warning}};
}

std::string facet_csv(const xhv::Scene& scene, const xhv::SimResult& res) {
  std::ostringstream out;
  out << "facet,tag,area_m2,hits,absorbed,back_hits,impingement_m2s,pressure_pa,pressure_se_pa\n";
  for (size_t i = 0; i < res.facets.size(); ++i) {
    const auto& f = res.facets[i];
    out << i << ',' << scene.facets[i].tag << ',' << scene.facets[i].area() << ',' << f.hits
        << ',' << f.absorbed << ',' << f.back_hits << ',' << f.impingement << ',' << f.pressure
        << ',' << f.pressure_se << '\n';
  }
  return out.str();
}

// --- subcommand state ----------------------------------------------------

struct SimulateArgs {
  CommonOpts common;
  std::string scene_path;
};

struct SweepArgs {
  CommonOpts common;
  std::string tmpl = "pump-housing";
  std::string parameter;
  std::vector<double> values;
  double pump_sticking = 0.125;
};

struct TransmissionArgs {
  CommonOpts common;
  std::string scene_path, entry = "cap0", exit_tag = "cap1";
  double diameter = 0.0, length = 0.0;
  int resolution = 48;
};

struct CalibrateArgs {
  CommonOpts common;
  double diameter = 0.065, length = 0.13, speed = 1250.0;
  int resolution = 32;
};

struct OutgasArgs {
  CommonOpts common;
  double thickness_cm = 2.54, c0 = 1.0, area_cm2 = 1000.0, speed_ls = 100.0;
  std::vector<std::string> segments;  // "temperature_K:duration_s"
};

struct EstimateQArgs {
  CommonOpts common;
  double p_ht = 0.0, area_cm2 = 0.0, speed_ls = 0.0;
  double t_rt = 298.0, t_ht = 673.0, oxide_factor = 2.0;
};

struct ChainBarrierArgs {
  CommonOpts common;
  int n_ions = 20;
  double fx_mhz = 1.06, fy_mhz = 1.04, fz_mhz = 0.116;
};

struct ChainPressureArgs {
  CommonOpts common;
  double interval_hrs = 0.0, rate_per_s = 0.0, barrier_mev = 0.0;
  int n_ions = 20, n_dark = 3;
  double fx_mhz = 1.06, fy_mhz = 1.04, fz_mhz = 0.116;
};

struct DetectArgs {
  CommonOpts common;
  std::string frames_path, manifest_path;
  double bin_minutes = 10.0;
};

struct GaugeFitArgs {
  CommonOpts common;
  std::string trace_path, manifest_path;
  double volume_l = 0.0, p_min = 1.5e-12, pump_speed_ls = 10.0;
};

struct ReportArgs {
  CommonOpts common;
  std::string simulation_path, chain_path, gauge_path;
};

// --- subcommand bodies ---------------------------------------------------

void run_simulate(const SimulateArgs& a) {
  if (!fs::exists(a.scene_path))
    throw xhv::ValidationError("scene file not found: " + a.scene_path);
  xhv::Scene scene = xhv::load_scene(a.scene_path);
  xhv::SimResult res = xhv::trace(scene, sim_config(a.common));
  json out = sim_report(res);
  out["manifest"] = make_manifest(
      "simulate", {{"scene", a.scene_path}, {"particles", a.common.particles}}, a.common.seed);
  write_json(fs::path(a.common.out_dir) / "summary.json", out);
  write_text(fs::path(a.common.out_dir) / "facets.csv", facet_csv(scene, res));
  std::cout << out.dump(2) << '\n';
}

void run_sweep(const SweepArgs& a) {
  if (a.values.empty()) throw xhv::ValidationError("sweep needs at least one --values entry");
  std::ostringstream csv;
  csv << "parameter,value,metric,metric_value,std_error\n";
  json rows = json::array();
  for (double v : a.values) {
    double metric = 0, se = 0;
    std::string metric_name;
    if (a.tmpl == "pump-housing") {
      xhv::presets::PumpHousing housing;
      housing.pump.sticking = a.pump_sticking;
      if (a.parameter == "tube-diameter")
        housing.tube_diameter = v;
      else if (a.parameter == "tube-length")
        housing.tube_length = v;
      else
        throw xhv::ValidationError(
            "unknown parameter '" + a.parameter +
            "' for pump-housing; valid: tube-diameter, tube-length");
      xhv::Scene scene = xhv::presets::pump_in_tube(housing);
      auto s = xhv::effective_pumping_speed(scene, "port", sim_config(a.common));
      metric = s.speed_ls;
      se = s.std_error_ls;
      metric_name = "s_eff_ls";
    } else if (a.tmpl == "chamber") {
      xhv::presets::ChamberOptions opt = xhv::presets::large_port_chamber();
      if (a.parameter == "port-diameter")
        opt.port_diameter = v;
      else
        throw xhv::ValidationError("unknown parameter '" + a.parameter +
                                   "' for chamber; valid: port-diameter");
      xhv::Scene scene = xhv::presets::pumped_chamber(opt);
      xhv::SimResult res = xhv::trace(scene, sim_config(a.common));
      metric = res.groups.at("roi").pressure * xhv::pa_to_mbar;
      se = res.groups.at("roi").pressure_se * xhv::pa_to_mbar;
      metric_name = "roi_pressure_mbar";
    } else {
      throw xhv::ValidationError("unknown template '" + a.tmpl +
                                 "'; valid: pump-housing, chamber");
    }
    csv << a.parameter << ',' << v << ',' << metric_name << ',' << metric << ',' << se << '\n';
    rows.push_back({{"value", v}, {metric_name, metric}, {"std_error", se}});
  }
  json out = {{"rows", rows},
              {"manifest", make_manifest("sweep",
                                         {{"template", a.tmpl},
                                          {"parameter", a.parameter},
                                          {"values", a.values},
                                          {"particles", a.common.particles}},
                                         a.common.seed)}};
  write_json(fs::path(a.common.out_dir) / "sweep.json", out);
  write_text(fs::path(a.common.out_dir) / "sweep.csv", csv.str());
  std::cout << out.dump(2) << '\n';
}

void run_transmission(const TransmissionArgs& a) {
  xhv::Scene scene;
  json inputs;
  if (!a.scene_path.empty()) {
    if (!fs::exists(a.scene_path))
      throw xhv::ValidationError("scene file not found: " + a.scene_path);
    scene = xhv::load_scene(a.scene_path);
    inputs = {{"scene", a.scene_path}};
  } else {
    if (a.diameter <= 0) throw xhv::ValidationError("need --scene or --diameter/--length");
    xhv::TubeOptions opt;
    opt.resolution = a.resolution;
    opt.cap_near.sticking = 1.0;
    opt.cap_far.sticking = 1.0;
    scene = xhv::build_tube(a.diameter, a.length, opt);
    inputs = {{"diameter", a.diameter}, {"length", a.length}};
  }
  inputs["entry"] = a.entry;
  inputs["exit"] = a.exit_tag;
  inputs["particles"] = a.common.particles;
  auto t = xhv::transmission_probability(scene, a.entry, a.exit_tag, sim_config(a.common));
  json out = {{"probability", t.probability},
              {"std_error", t.std_error},
              {"transmitted", t.transmitted},
              {"returned", t.returned},
              {"absorbed_elsewhere", t.absorbed_elsewhere},
              {"capped", t.capped},
              {"manifest", make_manifest("transmission", inputs, a.common.seed)}};
  write_json(fs::path(a.common.out_dir) / "transmission.json", out);
  std::cout << out.dump(2) << '\n';
}

void run_calibrate(const CalibrateArgs& a) {
  xhv::presets::PumpModel pump;
  pump.diameter = a.diameter;
  pump.length = a.length;
  pump.resolution = a.resolution;
  xhv::Scene body = xhv::presets::pump_capsule(pump);
  auto cal = xhv::calibrate_sticking(body, a.speed, xhv::GasModel{}, sim_config(a.common));
  json out = {{"sticking", cal.sticking},
              {"achieved_speed_ls", cal.achieved_speed_ls},
              {"max_speed_ls", cal.max_speed_ls},
              {"iterations", cal.iterations},
              {"manifest", make_manifest("calibrate-pump",
                                         {{"diameter", a.diameter},
                                          {"length", a.length},
                                          {"nominal_speed_ls", a.speed},
                                          {"particles", a.common.particles}},
                                         a.common.seed)}};
  write_json(fs::path(a.common.out_dir) / "calibration.json", out);
  std::cout << out.dump(2) << '\n';
}

void run_outgas(const OutgasArgs& a) {
  xhv::outgas::MaterialSlab slab;
  slab.thickness_cm = a.thickness_cm;
  slab.c0 = a.c0;
  xhv::outgas::BakeSchedule schedule;
  schedule.area_cm2 = a.area_cm2;
  schedule.pumping_speed_ls = a.speed_ls;
  for (const std::string& seg : a.segments) {
    auto colon = seg.find(':');
    if (colon == std::string::npos)
      throw xhv::ValidationError("segment format is temperature_K:duration_s, got '" + seg + "'");
    xhv::outgas::BakeSegment s;
    try {
      s.temperature_k = std::stod(seg.substr(0, colon));
      s.duration_s = std::stod(seg.substr(colon + 1));
    } catch (const std::exception&) {
      throw xhv::ValidationError("cannot parse segment '" + seg + "'");
    }
    schedule.segments.push_back(s);
  }
  if (schedule.segments.empty())
    throw xhv::ValidationError("need at least one --segment temperature_K:duration_s");
  auto rows = xhv::outgas::bake_plan(slab, schedule);
  std::ostringstream csv;
  csv << "time_s,temperature_k,q_mbar_l_cm2,pressure_mbar\n";
  for (const auto& r : rows)
    csv << r.time_s << ',' << r.temperature_k << ',' << r.q << ',' << r.pressure << '\n';
  double t_final = schedule.segments.back().temperature_k;
  json out = {{"rows", rows.size()},
              {"final_q_mbar_l_cm2", rows.back().q},
              {"final_pressure_mbar", rows.back().pressure},
              {"decay_constant_days",
               xhv::outgas::decay_constant(slab, t_final) / 86400.0},
              {"manifest", make_manifest("outgas-plan",
                                         {{"thickness_cm", a.thickness_cm},
                                          {"c0", a.c0},
                                          {"area_cm2", a.area_cm2},
                                          {"speed_ls", a.speed_ls},
                                          {"segments", a.segments}},
                                         a.common.seed)}};
  write_json(fs::path(a.common.out_dir) / "bake_plan.json", out);
  write_text(fs::path(a.common.out_dir) / "bake_plan.csv", csv.str());
  std::cout << out.dump(2) << '\n';
}

void run_estimate_q(const EstimateQArgs& a) {
  double q = xhv::outgas::estimate_q_rt(a.p_ht, a.area_cm2, a.speed_ls, a.t_rt, a.t_ht,
                                        a.oxide_factor);
  json out = {{"q_rt_mbar_l_cm2", q},
              {"rt_ht_ratio", xhv::outgas::rt_ht_ratio(a.t_rt, a.t_ht)},
              {"manifest", make_manifest("estimate-q",
                                         {{"p_ht_mbar", a.p_ht},
                                          {"area_cm2", a.area_cm2},
                                          {"speed_ls", a.speed_ls},
                                          {"t_rt_k", a.t_rt},
                                          {"t_ht_k", a.t_ht},
                                          {"oxide_factor", a.oxide_factor}},
                                         a.common.seed)}};
  write_json(fs::path(a.common.out_dir) / "estimate_q.json", out);
  std::cout << out.dump(2) << '\n';
}

xhv::chain::TrapConfig trap_from(int n, double fx, double fy, double fz) {
  xhv::chain::TrapConfig cfg;
  cfg.n_ions = n;
  cfg.omega_x = 2.0 * std::numbers::pi * fx * 1e6;
  cfg.omega_y = 2.0 * std::numbers::pi * fy * 1e6;
  cfg.omega_z = 2.0 * std::numbers::pi * fz * 1e6;
  return cfg;
}

void run_chain_barrier(const ChainBarrierArgs& a) {
  auto cfg = trap_from(a.n_ions, a.fx_mhz, a.fy_mhz, a.fz_mhz);
  auto profile = xhv::chain::barrier_profile(cfg);
  std::ostringstream csv;
  csv << "pair,barrier_mev\n";
  for (size_t i = 0; i < profile.barrier_ev.size(); ++i)
    csv << i + 1 << ',' << profile.barrier_ev[i] * 1e3 << '\n';
  json out = {{"barrier_mev", json::array()},
              {"max_mev", profile.max_ev * 1e3},
              {"argmax_pair", profile.argmax + 1},
              {"manifest", make_manifest("chain-barrier",
                                         {{"n_ions", a.n_ions},
                                          {"fx_mhz", a.fx_mhz},
                                          {"fy_mhz", a.fy_mhz},
                                          {"fz_mhz", a.fz_mhz}},
                                         a.common.seed)}};
  for (double b : profile.barrier_ev) out["barrier_mev"].push_back(b * 1e3);
  write_json(fs::path(a.common.out_dir) / "barrier.json", out);
  write_text(fs::path(a.common.out_dir) / "barrier.csv", csv.str());
  std::cout << out.dump(2) << '\n';
}

void run_chain_pressure(const ChainPressureArgs& a) {
  double barrier_ev;
  if (a.barrier_mev > 0) {
    barrier_ev = a.barrier_mev * 1e-3;
  } else {
    auto cfg = trap_from(a.n_ions, a.fx_mhz, a.fy_mhz, a.fz_mhz);
    barrier_ev = xhv::chain::barrier_profile(cfg).max_ev;
  }
  xhv::chain::CollisionModel model;
  xhv::chain::ChainObservation obs;
  obs.total_ions = a.n_ions;
  obs.dark_ions = a.n_dark;
  json out;
  if (a.interval_hrs > 0) {
    double p = xhv::chain::pressure_from_interval(a.interval_hrs, model);
    out = {{"pressure_mbar", p},
           {"per_ion_interval_hr", a.interval_hrs},
           {"barrier_mev", barrier_ev * 1e3},
           {"p_obs", xhv::chain::p_obs(obs.total_ions, obs.dark_ions)},
           {"p_reorder", xhv::chain::p_reorder(barrier_ev, model.mean_transfer_ev)}};
  } else if (a.rate_per_s > 0) {
    auto est = xhv::chain::pressure_from_rate(a.rate_per_s, obs, model, barrier_ev);
    out = {{"pressure_mbar", est.pressure_mbar},
           {"collision_rate_per_s", est.collision_rate},
           {"per_ion_interval_hr", est.per_ion_interval_hr},
           {"barrier_mev", barrier_ev * 1e3},
           {"p_obs", est.p_obs},
           {"p_reorder", est.p_reorder}};
  } else {
    throw xhv::ValidationError("need --interval-hrs or --rate");
  }
  out["manifest"] = make_manifest("chain-pressure",
                                  {{"n_ions", a.n_ions},
                                   {"n_dark", a.n_dark},
                                   {"interval_hrs", a.interval_hrs},
                                   {"rate_per_s", a.rate_per_s},
                                   {"barrier_mev", a.barrier_mev}},
                                  a.common.seed);
  write_json(fs::path(a.common.out_dir) / "chain_pressure.json", out);
  std::cout << out.dump(2) << '\n';
}

void run_detect(const DetectArgs& a) {
  if (!fs::exists(a.frames_path))
    throw xhv::ValidationError("frames file not found: " + a.frames_path);
  if (!fs::exists(a.manifest_path))
    throw xhv::ValidationError("manifest file not found: " + a.manifest_path);
  json manifest;
  {
    std::ifstream f(a.manifest_path);
    try {
      f >> manifest;
    } catch (const json::exception& e) {
      throw xhv::ValidationError(std::string("manifest parse error: ") + e.what());
    }
  }
  if (!manifest.contains("expected_n"))
    throw xhv::ValidationError("manifest needs an expected_n field");
  int expected_n = manifest["expected_n"].get<int>();

  xhv::reorder::FrameSeries series;
  {
    std::ifstream f(a.frames_path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          row.push_back(std::stod(tok));
        } catch (const std::exception&) {
          throw xhv::ValidationError("frames line " + std::to_string(lineno) +
                                     ": bad number '" + tok + "'");
        }
      }
      series.frames.push_back(std::move(row));
    }
  }
  if (manifest.contains("timestamps")) {
    series.timestamps = manifest["timestamps"].get<std::vector<double>>();
  } else if (manifest.contains("cadence_s")) {
    double dt = manifest["cadence_s"].get<double>();
    for (size_t i = 0; i < series.frames.size(); ++i) series.timestamps.push_back(i * dt);
  } else {
    throw xhv::ValidationError("manifest needs timestamps or cadence_s");
  }

  auto analysis = xhv::reorder::analyze_series(series, expected_n);
  std::ostringstream events_csv;
  events_csv << "timestamp_s,kind,segment,pre_dark,post_dark\n";
  auto join = [](const std::vector<int>& v) {
    std::ostringstream s;
    for (size_t i = 0; i < v.size(); ++i) s << (i ? " " : "") << v[i];
    return s.str();
  };
  long countable = 0;
  for (const auto& ev : analysis.events) {
    if (ev.countable()) ++countable;
    events_csv << ev.timestamp << ',' << to_string(ev.kind) << ',' << ev.segment << ','
               << join(ev.pre_dark) << ',' << join(ev.post_dark) << '\n';
  }
  xhv::chain::ChainObservation obs;
  obs.total_ions = expected_n;
  obs.events = countable;
  json stats_json;
  std::string hist_csv = "bin_start_s,count\n";
  try {
    auto stats =
        xhv::reorder::interval_statistics(analysis.events, obs, a.bin_minutes * 60.0);
    stats_json = {{"mean_interval_s", stats.mean_interval_s},
                  {"per_ion_mean_hr", stats.per_ion_mean_hr},
                  {"sem_hr", stats.sem_hr},
                  {"sem_defined", stats.sem_defined},
                  {"intervals", stats.intervals}};
    std::ostringstream h;
    h << hist_csv;
    for (size_t b = 0; b < stats.histogram.size(); ++b)
      h << b * stats.bin_width_s << ',' << stats.histogram[b] << '\n';
    hist_csv = h.str();
  } catch (const xhv::SimulationError& e) {
    stats_json = {{"error", e.what()}};
  }
  json out = {{"countable_events", countable},
              {"events_total", analysis.events.size()},
              {"frames_total", analysis.frames_total},
              {"frames_skipped", analysis.frames_skipped},
              {"segments", analysis.segments},
              {"statistics", stats_json},
              {"manifest", make_manifest("detect-reorders",
                                         {{"frames", a.frames_path},
                                          {"manifest", a.manifest_path},
                                          {"expected_n", expected_n}},
                                         a.common.seed)}};
  write_json(fs::path(a.common.out_dir) / "reorder_stats.json", out);
  write_text(fs::path(a.common.out_dir) / "events.csv", events_csv.str());
  write_text(fs::path(a.common.out_dir) / "histogram.csv", hist_csv);
  std::cout << out.dump(2) << '\n';
}

void run_gauge_fit(const GaugeFitArgs& a) {
  if (!fs::exists(a.trace_path))
    throw xhv::ValidationError("trace file not found: " + a.trace_path);
  double volume = a.volume_l, p_min = a.p_min;
  xhv::gauge::GaugeTrace trace;
  if (!a.manifest_path.empty()) {
    std::ifstream f(a.manifest_path);
    json m;
    try {
      f >> m;
    } catch (const json::exception& e) {
      throw xhv::ValidationError(std::string("manifest parse error: ") + e.what());
    }
    if (m.contains("volume_l")) volume = m["volume_l"].get<double>();
    if (m.contains("p_min_mbar")) p_min = m["p_min_mbar"].get<double>();
    if (m.contains("emission_a")) trace.emission_a = m["emission_a"].get<double>();
    if (m.contains("sensitivity_per_mbar"))
      trace.sensitivity_per_mbar = m["sensitivity_per_mbar"].get<double>();
  }
  if (volume <= 0) throw xhv::ValidationError("need --volume (or volume_l in the manifest)");
  {
    std::ifstream f(a.trace_path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::stringstream ss(line);
      std::string t_tok, p_tok;
      if (!std::getline(ss, t_tok, ',') || !std::getline(ss, p_tok, ','))
        throw xhv::ValidationError("trace line " + std::to_string(lineno) +
                                   ": expected t_seconds,P_mbar");
      try {
        trace.t_s.push_back(std::stod(t_tok));
        trace.p_mbar.push_back(std::stod(p_tok));
      } catch (const std::exception&) {
        throw xhv::ValidationError("trace line " + std::to_string(lineno) + ": bad number");
      }
    }
  }
  auto fit = xhv::gauge::fit_nongetterable(trace, volume, p_min);
  json cov = json::array();
  for (const auto& row : fit.covariance) cov.push_back(std::vector<double>(row.begin(), row.end()));
  json out = {{"p_base_mbar", fit.p_base},
              {"q_ng_mbar_ls", fit.q_ng},
              {"s_g_ls", fit.s_g},
              {"saturation_mbar", fit.p_base + fit.q_ng / fit.s_g},
              {"ng_partial_pressure_mbar",
               xhv::gauge::ng_partial_pressure(fit.q_ng, a.pump_speed_ls)},
              {"covariance", cov},
              {"residual_norm", fit.residual_norm},
              {"iterations", fit.iterations},
              {"under_constrained", fit.under_constrained},
              {"samples_used", fit.samples_used},
              {"manifest", make_manifest("gauge-fit",
                                         {{"trace", a.trace_path},
                                          {"volume_l", volume},
                                          {"p_min_mbar", p_min},
                                          {"pump_speed_ls", a.pump_speed_ls}},
                                         a.common.seed)}};
  write_json(fs::path(a.common.out_dir) / "gauge_fit.json", out);
  std::cout << out.dump(2) << '\n';
}

json load_json_or_null(const std::string& path) {
  if (path.empty()) return nullptr;
  if (!fs::exists(path)) throw xhv::ValidationError("report input not found: " + path);
  std::ifstream f(path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw xhv::ValidationError(path + ": " + e.what());
  }
  return j;
}

void run_report(const ReportArgs& a) {
  json sim = load_json_or_null(a.simulation_path);
  json chain = load_json_or_null(a.chain_path);
  json gauge = load_json_or_null(a.gauge_path);
  json out = {{"gauge_pressure_mbar", nullptr},
              {"roi_pressure_mbar", nullptr},
              {"roi_to_gauge_ratio", nullptr},
              {"chain_pressure_mbar", nullptr},
              {"ng_partial_pressure_mbar", nullptr}};
  if (!sim.is_null() && sim.contains("groups")) {
    const json& groups = sim["groups"];
    if (groups.contains("gauge"))
      out["gauge_pressure_mbar"] = groups["gauge"]["pressure_mbar"];
    if (groups.contains("roi")) out["roi_pressure_mbar"] = groups["roi"]["pressure_mbar"];
    if (groups.contains("gauge") && groups.contains("roi")) {
      double pg = groups["gauge"]["pressure_mbar"].get<double>();
      double pr = groups["roi"]["pressure_mbar"].get<double>();
      if (pg > 0) out["roi_to_gauge_ratio"] = pr / pg;
    }
  }
  if (!chain.is_null() && chain.contains("pressure_mbar"))
    out["chain_pressure_mbar"] = chain["pressure_mbar"];
  if (!gauge.is_null() && gauge.contains("ng_partial_pressure_mbar"))
    out["ng_partial_pressure_mbar"] = gauge["ng_partial_pressure_mbar"];
  out["manifest"] = make_manifest("report",
                                  {{"simulation", a.simulation_path},
                                   {"chain", a.chain_path},
                                   {"gauge", a.gauge_path}},
                                  a.common.seed);
  write_json(fs::path(a.common.out_dir) / "report.json", out);
  std::cout << out.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vacuum system design toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Trace a scene and report pressures");
  sim->add_option("scene", sim_args.scene_path, "Scene file")->required();
  add_common(sim, sim_args.common);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep over a template scene");
  sweep->add_option("--template", sweep_args.tmpl, "pump-housing or chamber");
  sweep->add_option("--parameter", sweep_args.parameter, "Template knob")->required();
  sweep->add_option("--values", sweep_args.values, "Values to sweep (comma separated)")
      ->required()
      ->delimiter(',');
  sweep->add_option("--pump-sticking", sweep_args.pump_sticking,
                    "Calibrated cartridge sticking");
  add_common(sweep, sweep_args.common);

  TransmissionArgs trans_args;
  auto* trans = app.add_subcommand("transmission", "Port-to-port transmission probability");
  trans->add_option("--scene", trans_args.scene_path, "Scene file (else build a tube)");
  trans->add_option("--entry", trans_args.entry, "Entry group tag");
  trans->add_option("--exit", trans_args.exit_tag, "Exit group tag");
  trans->add_option("--diameter", trans_args.diameter, "Tube diameter, m");
  trans->add_option("--length", trans_args.length, "Tube length, m");
  trans->add_option("--resolution", trans_args.resolution, "Tube facet resolution");
  add_common(trans, trans_args.common);

  CalibrateArgs cal_args;
  auto* cal = app.add_subcommand("calibrate-pump", "Sticking for a nominal pumping speed");
  cal->add_option("--diameter", cal_args.diameter, "Cartridge diameter, m");
  cal->add_option("--length", cal_args.length, "Cartridge length, m");
  cal->add_option("--speed", cal_args.speed, "Nominal speed, l/s");
  cal->add_option("--resolution", cal_args.resolution, "Facet resolution");
  add_common(cal, cal_args.common);

  OutgasArgs outgas_args;
  auto* og = app.add_subcommand("outgas-plan", "Bake plan table from the diffusion model");
  og->add_option("--thickness-cm", outgas_args.thickness_cm, "Slab thickness, cm");
  og->add_option("--c0", outgas_args.c0, "Initial H2 concentration, mbar l/cm^3");
  og->add_option("--area", outgas_args.area_cm2, "Exposed area, cm^2");
  og->add_option("--speed", outgas_args.speed_ls, "Pumping speed during bake, l/s");
  og->add_option("--segment", outgas_args.segments, "temperature_K:duration_s (repeatable)");
  add_common(og, outgas_args.common);

  EstimateQArgs eq_args;
  auto* eq = app.add_subcommand("estimate-q", "Room-temperature outgassing bound");
  eq->add_option("--p-ht", eq_args.p_ht, "Measured hot pressure, mbar")->required();
  eq->add_option("--area", eq_args.area_cm2, "Surface area, cm^2")->required();
  eq->add_option("--speed", eq_args.speed_ls, "Turbo speed, l/s")->required();
  eq->add_option("--t-rt", eq_args.t_rt, "Room temperature, K");
  eq->add_option("--t-ht", eq_args.t_ht, "Treatment temperature, K");
  eq->add_option("--oxide-factor", eq_args.oxide_factor, "Oxide-layer reduction factor");
  add_common(eq, eq_args.common);

  ChainBarrierArgs cb_args;
  auto* cb = app.add_subcommand("chain-barrier", "Reordering barrier vs pair index");
  cb->add_option("--n", cb_args.n_ions, "Ion count");
  cb->add_option("--fx", cb_args.fx_mhz, "omega_x / 2pi, MHz");
  cb->add_option("--fy", cb_args.fy_mhz, "omega_y / 2pi, MHz");
  cb->add_option("--fz", cb_args.fz_mhz, "omega_z / 2pi, MHz");
  add_common(cb, cb_args.common);

  ChainPressureArgs cp_args;
  auto* cp = app.add_subcommand("chain-pressure", "Pressure from reorder statistics");
  cp->add_option("--interval-hrs", cp_args.interval_hrs, "Corrected per-ion interval, hrs");
  cp->add_option("--rate", cp_args.rate_per_s, "Observed chain event rate, 1/s");
  cp->add_option("--barrier-mev", cp_args.barrier_mev, "Barrier energy (else computed)");
  cp->add_option("--n", cp_args.n_ions, "Ion count");
  cp->add_option("--dark", cp_args.n_dark, "Dark ion count");
  cp->add_option("--fx", cp_args.fx_mhz, "omega_x / 2pi, MHz");
  cp->add_option("--fy", cp_args.fy_mhz, "omega_y / 2pi, MHz");
  cp->add_option("--fz", cp_args.fz_mhz, "omega_z / 2pi, MHz");
  add_common(cp, cp_args.common);

  DetectArgs det_args;
  auto* det = app.add_subcommand("detect-reorders", "Event detection on fluorescence slices");
  det->add_option("--frames", det_args.frames_path, "CSV, one frame per row")->required();
  det->add_option("--manifest", det_args.manifest_path, "JSON manifest")->required();
  det->add_option("--bin-minutes", det_args.bin_minutes, "Histogram bin width");
  add_common(det, det_args.common);

  GaugeFitArgs gf_args;
  auto* gf = app.add_subcommand("gauge-fit", "Non-getterable load fit of a pump-off trace");
  gf->add_option("--trace", gf_args.trace_path, "CSV: t_seconds,P_mbar")->required();
  gf->add_option("--manifest", gf_args.manifest_path, "JSON manifest");
  gf->add_option("--volume", gf_args.volume_l, "System volume, l");
  gf->add_option("--p-min", gf_args.p_min, "Gauge floor clamp, mbar");
  gf->add_option("--pump-speed", gf_args.pump_speed_ls, "Ion pump NG speed, l/s");
  add_common(gf, gf_args.common);

  ReportArgs rep_args;
  auto* rep = app.add_subcommand("report", "Combine prior outputs into one design report");
  rep->add_option("--simulation", rep_args.simulation_path, "simulate summary.json");
  rep->add_option("--chain", rep_args.chain_path, "chain_pressure.json");
  rep->add_option("--gauge", rep_args.gauge_path, "gauge_fit.json");
  add_common(rep, rep_args.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) run_simulate(sim_args);
    if (sweep->parsed()) run_sweep(sweep_args);
    if (trans->parsed()) run_transmission(trans_args);
    if (cal->parsed()) run_calibrate(cal_args);
    if (og->parsed()) run_outgas(outgas_args);
    if (eq->parsed()) run_estimate_q(eq_args);
    if (cb->parsed()) run_chain_barrier(cb_args);
    if (cp->parsed()) run_chain_pressure(cp_args);
    if (det->parsed()) run_detect(det_args);
    if (gf->parsed()) run_gauge_fit(gf_args);
    if (rep->parsed()) run_report(rep_args);
  } catch (const xhv::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const xhv::SimulationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
