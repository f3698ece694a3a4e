#include "xhv/mcflow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "xhv/bvh.hpp"
#include "xhv/errors.hpp"
#include "xhv/rng.hpp"

namespace xhv {

Vec3 sample_cosine_direction(Prng& rng) {
  double u1 = rng.next_double();
  double u2 = rng.next_double();
  double r = std::sqrt(u1);
  double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi), std::sqrt(1.0 - u1)};
}

namespace {

struct Frame {
  Vec3 t1, t2, n;
};

Frame facet_frame(const Facet& f) {
  Vec3 n = f.normal();
  Vec3 t1 = normalized(f.v1 - f.v0);
  Vec3 t2 = cross(n, t1);
  return {t1, t2, n};
}

Vec3 to_world(const Frame& fr, const Vec3& local) {
  return fr.t1 * local.x + fr.t2 * local.y + fr.n * local.z;
}

Vec3 sample_triangle(const Facet& f, Prng& rng) {
  double su = std::sqrt(rng.next_double());
  double v = rng.next_double();
  return f.v0 * (1.0 - su) + f.v1 * (su * (1.0 - v)) + f.v2 * (su * v);
}

enum class Role : unsigned char { normal, entry_terminal, exit_terminal };

// Integer tallies; sums are order independent, so results do not depend
// on the number of workers.
struct Tally {
  std::vector<std::int64_t> hits_batch;  // F * B; crossings for virtual facets
  std::vector<std::int64_t> absorbed, back_hits, cross_fwd, cross_back;
  std::int64_t absorbed_total = 0, capped = 0, backside = 0, leaked = 0;
  std::int64_t transmitted = 0, returned = 0;

  Tally(size_t f, int batches)
      : hits_batch(f * batches, 0), absorbed(f, 0), back_hits(f, 0),
        cross_fwd(f, 0), cross_back(f, 0) {}

  void merge(const Tally& o) {
    for (size_t i = 0; i < hits_batch.size(); ++i) hits_batch[i] += o.hits_batch[i];
    for (size_t i = 0; i < absorbed.size(); ++i) {
      absorbed[i] += o.absorbed[i];
      back_hits[i] += o.back_hits[i];
      cross_fwd[i] += o.cross_fwd[i];
      cross_back[i] += o.cross_back[i];
    }
    absorbed_total += o.absorbed_total;
    capped += o.capped;
    backside += o.backside;
    leaked += o.leaked;
    transmitted += o.transmitted;
    returned += o.returned;
  }
};

struct Emitter {
  std::vector<int> facets;      // candidate source facets
  std::vector<double> cumulative;  // cumulative weight, last = total

  int pick(double u) const {
    double target = u * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    size_t k = std::min<size_t>(it - cumulative.begin(), cumulative.size() - 1);
    return facets[k];
  }
};

struct Engine {
  const Scene& scene;
  const SimConfig& cfg;
  Bvh bvh;
  std::vector<Frame> frames;
  std::vector<Role> roles;
  Emitter emitter;

  Engine(const Scene& s, const SimConfig& c) : scene(s), cfg(c), bvh(s.facets) {
    if (c.n_particles < 1) throw ValidationError("n_particles must be >= 1");
    if (c.max_bounces < 1) throw ValidationError("max_bounces must be >= 1");
    if (c.batches < 2) throw ValidationError("batches must be >= 2");
    frames.reserve(s.facets.size());
    for (const auto& f : s.facets) frames.push_back(facet_frame(f));
    roles.assign(s.facets.size(), Role::normal);
  }

  void set_emitter_outgassing() {
    for (int i = 0; i < static_cast<int>(scene.facets.size()); ++i) {
      const Facet& f = scene.facets[i];
      double w = f.outgassing * f.area();
      if (w > 0) {
        emitter.facets.push_back(i);
        emitter.cumulative.push_back((emitter.cumulative.empty() ? 0 : emitter.cumulative.back()) + w);
      }
    }
    if (emitter.facets.empty())
      throw SimulationError("nothing to emit: no facet has outgassing > 0");
  }

  void set_emitter_group(const std::vector<int>& group) {
    for (int i : group) {
      double w = scene.facets[i].area();
      emitter.facets.push_back(i);
      emitter.cumulative.push_back((emitter.cumulative.empty() ? 0 : emitter.cumulative.back()) + w);
    }
  }

  void run_particle(long index, Tally& t) const {
    Prng rng(cfg.seed, static_cast<std::uint64_t>(index));
    int batch = static_cast<int>(index % cfg.batches);
    int cur = emitter.pick(rng.next_double());
    Vec3 pos = sample_triangle(scene.facets[cur], rng);
    Vec3 dir = to_world(frames[cur], sample_cosine_direction(rng));
    for (int bounce = 0; bounce < cfg.max_bounces; ++bounce) {
      Hit h = bvh.raycast(pos, dir, cur);
      if (h.facet < 0) {
        ++t.leaked;
        return;
      }
      int f = h.facet;
      const Facet& fc = scene.facets[f];
      if (roles[f] == Role::entry_terminal) {
        ++t.returned;
        return;
      }
      if (roles[f] == Role::exit_terminal) {
        ++t.transmitted;
        return;
      }
      if (fc.virtual_plane) {
        ++(h.backside ? t.cross_back[f] : t.cross_fwd[f]);
        ++t.hits_batch[static_cast<size_t>(f) * cfg.batches + batch];
        pos = h.point;
        cur = f;
        continue;  // transparent: keep flying
      }
      if (h.backside) {
        ++t.back_hits[f];
        ++t.backside;
        return;
      }
      ++t.hits_batch[static_cast<size_t>(f) * cfg.batches + batch];
      if (fc.sticking > 0 && rng.next_double() < fc.sticking) {
        ++t.absorbed[f];
        ++t.absorbed_total;
        return;
      }
      pos = h.point;
      dir = to_world(frames[f], sample_cosine_direction(rng));
      cur = f;
    }
    ++t.capped;
  }

  Tally run() const {
    int workers = cfg.workers > 0 ? cfg.workers
                                  : std::max(1u, std::thread::hardware_concurrency());
    long n = cfg.n_particles;
    workers = static_cast<int>(std::min<long>(workers, n));
    std::vector<Tally> parts;
    parts.reserve(workers);
    for (int w = 0; w < workers; ++w) parts.emplace_back(scene.facets.size(), cfg.batches);
    {
      std::vector<std::thread> threads;
      for (int w = 0; w < workers; ++w) {
        long begin = n * w / workers, end = n * (w + 1) / workers;
        threads.emplace_back([this, begin, end, &parts, w] {
          for (long i = begin; i < end; ++i) run_particle(i, parts[w]);
        });
      }
      for (auto& th : threads) th.join();
    }
    for (int w = 1; w < workers; ++w) parts[0].merge(parts[w]);
    return std::move(parts[0]);
  }
};

// particles with index % batches == b
long batch_size(long n, int batches, int b) {
  return n / batches + (b < n % batches ? 1 : 0);
}

}  // namespace

SimResult trace(const Scene& scene, const SimConfig& config) {
  scene.validate();
  bool any_absorber = false;
  for (const auto& f : scene.facets) any_absorber = any_absorber || f.sticking > 0;
  if (!any_absorber)
    throw SimulationError("no absorbing facet: every particle would exhaust the bounce cap");

  Engine eng(scene, config);
  eng.set_emitter_outgassing();
  Tally t = eng.run();

  SimResult res;
  res.n_particles = config.n_particles;
  res.seed = config.seed;
  res.absorbed_total = t.absorbed_total;
  res.capped = t.capped;
  res.backside_terminated = t.backside;
  res.leaked = t.leaked;
  res.cap_warning = t.capped > config.n_particles / 1000;

  double kT = k_boltzmann * scene.gas.temperature_k;
  double q_total = scene.total_outgassing();            // Pa m^3/s
  double gen = q_total / kT;                            // molecules/s
  res.generation_rate = gen;
  double n = static_cast<double>(config.n_particles);
  double w = gen / n;  // molecules/s per test particle
  double pressure_factor =
      std::sqrt(2.0 * std::numbers::pi * scene.gas.mass_kg * kT);

  int B = config.batches;
  size_t F = scene.facets.size();
  res.facets.resize(F);
  for (size_t f = 0; f < F; ++f) {
    const Facet& fc = scene.facets[f];
    FacetStats& st = res.facets[f];
    std::int64_t hits = 0;
    for (int b = 0; b < B; ++b) hits += t.hits_batch[f * B + b];
    st.hits = hits;
    st.absorbed = t.absorbed[f];
    st.back_hits = t.back_hits[f];
    st.crossings_fwd = t.cross_fwd[f];
    st.crossings_back = t.cross_back[f];
    double area = fc.area();
    // A transparent plane is crossed from both sides; one-sided flux is half.
    double side = fc.virtual_plane ? 0.5 : 1.0;
    st.impingement = w * side * hits / area;
    st.pressure = st.impingement * pressure_factor;
    // batch-means standard error
    double mean = 0, m2 = 0;
    std::vector<double> pb(B);
    for (int b = 0; b < B; ++b) {
      double nb = static_cast<double>(batch_size(config.n_particles, B, b));
      pb[b] = (gen / nb) * side * t.hits_batch[f * B + b] / area * pressure_factor;
    }
    for (int b = 0; b < B; ++b) mean += pb[b];
    mean /= B;
    for (int b = 0; b < B; ++b) m2 += (pb[b] - mean) * (pb[b] - mean);
    st.pressure_se = std::sqrt(m2 / (static_cast<double>(B) * (B - 1)));
  }

  for (const auto& [tag, idx] : scene.groups()) {
    GroupStats g;
    bool virt = scene.facets[idx.front()].virtual_plane;
    std::vector<std::int64_t> hb(B, 0);
    for (int i : idx) {
      g.area += scene.facets[i].area();
      g.hits += res.facets[i].hits;
      g.absorbed += res.facets[i].absorbed;
      for (int b = 0; b < B; ++b) hb[b] += t.hits_batch[static_cast<size_t>(i) * B + b];
    }
    double side = virt ? 0.5 : 1.0;
    g.pressure = w * side * g.hits / g.area * pressure_factor;
    g.absorbed_rate = w * g.absorbed;
    double mean = 0, m2 = 0;
    std::vector<double> pb(B);
    for (int b = 0; b < B; ++b) {
      double nb = static_cast<double>(batch_size(config.n_particles, B, b));
      pb[b] = (gen / nb) * side * hb[b] / g.area * pressure_factor;
      mean += pb[b];
    }
    mean /= B;
    for (int b = 0; b < B; ++b) m2 += (pb[b] - mean) * (pb[b] - mean);
    g.pressure_se = std::sqrt(m2 / (static_cast<double>(B) * (B - 1)));
    res.groups[tag] = g;
  }
  return res;
}

Transmission transmission_probability(const Scene& scene, const std::string& entry_tag,
                                      const std::string& exit_tag, const SimConfig& config) {
  scene.validate();
  auto entry = scene.group(entry_tag);
  auto exit = scene.group(exit_tag);
  for (int e : entry)
    if (std::find(exit.begin(), exit.end(), e) != exit.end())
      throw ValidationError("entry and exit port groups must be disjoint");

  Engine eng(scene, config);
  for (int i : entry) eng.roles[i] = Role::entry_terminal;
  for (int i : exit) eng.roles[i] = Role::exit_terminal;
  eng.set_emitter_group(entry);
  Tally t = eng.run();

  Transmission tr;
  tr.transmitted = t.transmitted;
  tr.returned = t.returned;
  tr.absorbed_elsewhere = t.absorbed_total;
  tr.capped = t.capped;
  double n = static_cast<double>(config.n_particles);
  tr.probability = t.transmitted / n;
  tr.std_error = std::sqrt(std::max(0.0, tr.probability * (1.0 - tr.probability) / n));
  return tr;
}

PumpingSpeed effective_pumping_speed(const Scene& scene, const std::string& port_tag,
                                     const SimConfig& config) {
  scene.validate();
  auto port = scene.group(port_tag);
  Engine eng(scene, config);
  for (int i : port) eng.roles[i] = Role::entry_terminal;
  eng.set_emitter_group(port);
  Tally t = eng.run();
  if (t.absorbed_total == 0)
    throw SimulationError("degenerate measurement: no particle was absorbed");

  double n = static_cast<double>(config.n_particles);
  double p = t.absorbed_total / n;
  double area = scene.group_area(port_tag);
  double orifice = mean_speed(scene.gas.mass_kg, scene.gas.temperature_k) / 4.0 * area;  // m^3/s
  PumpingSpeed out;
  out.capture_probability = p;
  out.speed_ls = p * orifice * m3s_to_ls;
  out.std_error_ls = std::sqrt(std::max(0.0, p * (1.0 - p) / n)) * orifice * m3s_to_ls;
  return out;
}

PumpCalibration calibrate_sticking(const Scene& pump, double nominal_ls, const GasModel& gas,
                                   const SimConfig& config) {
  if (nominal_ls <= 0) throw ValidationError("nominal pumping speed must be positive");
  // Enclose the pump in a cosine-emitting box: an ambient equilibrium gas.
  Vec3 lo = pump.facets.at(0).v0, hi = lo;
  for (const auto& f : pump.facets) {
    for (const Vec3* v : {&f.v0, &f.v1, &f.v2}) {
      lo = {std::min(lo.x, v->x), std::min(lo.y, v->y), std::min(lo.z, v->z)};
      hi = {std::max(hi.x, v->x), std::max(hi.y, v->y), std::max(hi.z, v->z)};
    }
  }
  Vec3 size = hi - lo;
  double span = std::max({size.x, size.y, size.z});
  Vec3 center = (lo + hi) * 0.5;

  BoxOptions box_opt;
  box_opt.resolution = 8;
  box_opt.wall_sticking = 1.0;  // molecules returning to the ambient leave
  box_opt.wall_outgassing = 1.0;  // arbitrary; only the cosine emission matters
  box_opt.wall_tag = "ambient";
  Scene env = build_box({2.5 * span, 2.5 * span, 2.5 * span}, {}, box_opt);
  translate(env, center);
  Scene pump_copy = pump;
  append(env, pump_copy);
  env.gas = gas;

  double pump_area = 0;
  std::vector<size_t> pump_idx;
  for (size_t i = env.facets.size() - pump.facets.size(); i < env.facets.size(); ++i) {
    pump_idx.push_back(i);
    pump_area += env.facets[i].area();
  }
  double wall_orifice =
      mean_speed(gas.mass_kg, gas.temperature_k) / 4.0 * env.group_area("ambient") * m3s_to_ls;
  double pump_orifice = mean_speed(gas.mass_kg, gas.temperature_k) / 4.0 * pump_area * m3s_to_ls;

  auto speed_at = [&](double s) {
    for (size_t i : pump_idx) env.facets[i].sticking = s;
    SimResult r = trace(env, config);
    std::int64_t abs_pump = 0;
    for (size_t i : pump_idx) abs_pump += r.facets[i].absorbed;
    return static_cast<double>(abs_pump) / config.n_particles * wall_orifice;
  };

  PumpCalibration cal;
  cal.max_speed_ls = speed_at(1.0);
  ++cal.iterations;
  if (nominal_ls > pump_orifice || nominal_ls > cal.max_speed_ls) {
    std::ostringstream msg;
    msg << "calibration infeasible: nominal speed " << nominal_ls
        << " l/s exceeds the maximum attainable " << std::min(pump_orifice, cal.max_speed_ls)
        << " l/s";
    throw SimulationError(msg.str());
  }
  double lo_s = 0.0, hi_s = 1.0;
  double s = 0.5, achieved = 0.0;
  for (int it = 0; it < 30; ++it) {
    s = 0.5 * (lo_s + hi_s);
    achieved = speed_at(s);
    ++cal.iterations;
    if (std::abs(achieved - nominal_ls) < 0.005 * nominal_ls) break;
    (achieved < nominal_ls ? lo_s : hi_s) = s;
    if (hi_s - lo_s < 1e-5) break;
  }
  cal.sticking = s;
  cal.achieved_speed_ls = achieved;
  return cal;
}

}  // namespace xhv
