#include "xhv/reorder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xhv::reorder {

void FrameSeries::validate() const {
  if (timestamps.size() != frames.size())
    throw ValidationError("one timestamp per frame required");
  for (size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] <= timestamps[i - 1])
      throw ValidationError("timestamps must be strictly increasing");
  for (size_t i = 1; i < frames.size(); ++i)
    if (frames[i].size() != frames[0].size())
      throw ValidationError("all frames must have equal length");
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + m - 1, v.end());
  return 0.5 * (hi + v[m - 1]);
}

}  // namespace

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::reorder: return "reorder";
    case EventKind::bright_to_dark: return "bright_to_dark";
    case EventKind::dark_to_bright: return "dark_to_bright";
    case EventKind::ion_loss: return "ion_loss";
  }
  return "?";
}

ChainConfiguration infer_configuration(const std::vector<double>& frame,
                                       const DetectOptions& opt) {
  ChainConfiguration cfg;
  if (frame.size() < 3) return cfg;
  double med = median_of(frame);
  std::vector<double> dev(frame.size());
  for (size_t i = 0; i < frame.size(); ++i) dev[i] = std::abs(frame[i] - med);
  double mad = median_of(dev);
  // When bright peaks cover most of the slice the median sits on their
  // flanks and median + k*MAD overshoots the peaks themselves; cap the
  // threshold at the midpoint of a two-means bright/dark split.
  double lo = frame[0], hi = frame[0];
  for (double v : frame) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 32; ++it) {
    double slo = 0, shi = 0;
    long nlo = 0, nhi = 0;
    for (double v : frame) {
      if (v < mid) {
        slo += v;
        ++nlo;
      } else {
        shi += v;
        ++nhi;
      }
    }
    if (nlo == 0 || nhi == 0) break;
    double next = 0.5 * (slo / nlo + shi / nhi);
    if (std::abs(next - mid) < 1e-9 * (std::abs(mid) + 1)) break;
    mid = next;
  }
  double threshold = std::min(med + opt.mad_k * mad, mid);

  // candidate local maxima above the robust threshold
  std::vector<int> candidates;
  for (size_t i = 1; i + 1 < frame.size(); ++i) {
    if (frame[i] > threshold && frame[i] >= frame[i - 1] && frame[i] > frame[i + 1])
      candidates.push_back(static_cast<int>(i));
  }
  if (candidates.size() < 2) return cfg;

  // enforce a minimum separation of half the typical ion spacing,
  // strongest peak first
  std::vector<double> gaps;
  for (size_t i = 1; i < candidates.size(); ++i)
    gaps.push_back(candidates[i] - candidates[i - 1]);
  double min_sep = 0.5 * median_of(gaps);
  std::vector<int> order(candidates.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return frame[candidates[a]] > frame[candidates[b]]; });
  std::vector<int> peaks;
  for (int oi : order) {
    int p = candidates[oi];
    bool clear = true;
    for (int q : peaks) clear = clear && std::abs(p - q) >= min_sep;
    if (clear) peaks.push_back(p);
  }
  std::sort(peaks.begin(), peaks.end());
  if (peaks.size() < 2) return cfg;

  // base spacing: smallest gap, refined by rounding gaps to multiples
  double s0 = 1e300;
  for (size_t i = 1; i < peaks.size(); ++i) s0 = std::min(s0, double(peaks[i] - peaks[i - 1]));
  double num = 0, den = 0;
  for (size_t i = 1; i < peaks.size(); ++i) {
    double g = peaks[i] - peaks[i - 1];
    double k = std::max(1.0, std::round(g / s0));
    num += g;
    den += k;
  }
  double spacing = num / den;

  // slot grid: dark slots fill the oversized gaps between bright peaks
  int slot = 0;
  for (size_t i = 0; i < peaks.size(); ++i) {
    if (i > 0) {
      double g = peaks[i] - peaks[i - 1];
      int k = static_cast<int>(std::max(1.0, std::round(g / spacing)));
      for (int d = 1; d < k; ++d) {
        cfg.dark_slots.push_back(slot);
        cfg.dark_px.push_back(peaks[i - 1] + g * d / k);
        ++slot;
      }
    }
    cfg.bright_px.push_back(peaks[i]);
    ++slot;
  }
  cfg.n_slots = slot;
  return cfg;
}

ChainConfiguration detect_configuration(const std::vector<double>& frame, int expected_n,
                                        const DetectOptions& opt) {
  if (static_cast<int>(frame.size()) < expected_n)
    throw ValidationError("frame shorter than the expected ion count");
  ChainConfiguration cfg = infer_configuration(frame, opt);
  if (cfg.n_slots != expected_n) {
    std::ostringstream msg;
    msg << "ambiguous frame: inferred " << cfg.n_slots << " slots, expected " << expected_n;
    throw AmbiguousFrame(msg.str());
  }
  return cfg;
}

std::vector<ReorderEvent> classify_transitions(const std::vector<TimedConfiguration>& configs) {
  std::vector<ReorderEvent> events;
  for (size_t i = 1; i < configs.size(); ++i) {
    const TimedConfiguration& prev = configs[i - 1];
    const TimedConfiguration& cur = configs[i];
    if (cur.segment != prev.segment) continue;  // no events across boundaries
    const auto& a = prev.config;
    const auto& b = cur.config;
    ReorderEvent ev;
    ev.timestamp = cur.timestamp;
    ev.pre_dark = a.dark_slots;
    ev.post_dark = b.dark_slots;
    ev.pre_n = a.n_slots;
    ev.post_n = b.n_slots;
    ev.segment = cur.segment;
    if (b.n_slots < a.n_slots) {
      ev.kind = EventKind::ion_loss;
    } else if (b.dark_slots.size() == a.dark_slots.size()) {
      if (b.dark_slots == a.dark_slots) continue;  // no change
      ev.kind = EventKind::reorder;
    } else if (b.dark_slots.size() == a.dark_slots.size() + 1) {
      ev.kind = EventKind::bright_to_dark;
    } else if (b.dark_slots.size() + 1 == a.dark_slots.size()) {
      ev.kind = EventKind::dark_to_bright;
    } else {
      continue;  // multi-step change within one frame gap; not classifiable
    }
    events.push_back(std::move(ev));
  }
  return events;
}

SeriesAnalysis analyze_series(const FrameSeries& series, int expected_n,
                              const DetectOptions& opt) {
  series.validate();
  SeriesAnalysis out;
  out.frames_total = static_cast<int>(series.frames.size());
  std::vector<TimedConfiguration> configs;
  int segment = 0;
  int current_n = expected_n;
  bool last_ok = false;

  // Slot-grid tracking. The trap fixes the slot positions in the camera
  // frame, so once a frame shows the full grid its peak positions serve as
  // a reference; later frames with dark ions at the chain ends (invisible
  // to single-frame inference, which only sees gaps between bright peaks)
  // are resolved by assigning their peaks to the nearest reference slot.
  std::vector<double> ref;
  double ref_spacing = 0.0;
  auto set_ref = [&](const ChainConfiguration& cfg) {
    ref.assign(cfg.n_slots, 0.0);
    size_t bi = 0, di = 0;
    for (int slot = 0; slot < cfg.n_slots; ++slot) {
      if (di < cfg.dark_slots.size() && cfg.dark_slots[di] == slot)
        ref[slot] = cfg.dark_px[di++];
      else
        ref[slot] = cfg.bright_px[bi++];
    }
    std::vector<double> gaps;
    for (size_t j = 1; j < ref.size(); ++j) gaps.push_back(ref[j] - ref[j - 1]);
    ref_spacing = median_of(gaps);
  };
  auto map_to_ref = [&](const ChainConfiguration& cfg, ChainConfiguration& mapped) {
    if (ref.empty() || ref_spacing <= 0) return false;
    if (cfg.bright_px.size() < 2 || cfg.bright_px.size() > ref.size()) return false;
    std::vector<char> used(ref.size(), 0);
    ChainConfiguration m;
    m.n_slots = static_cast<int>(ref.size());
    for (double p : cfg.bright_px) {
      int best = -1;
      double best_d = 1e300;
      for (size_t j = 0; j < ref.size(); ++j) {
        double d = std::abs(p - ref[j]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(j);
        }
      }
      if (best_d > 0.5 * ref_spacing || used[best]) return false;
      used[best] = 1;
      m.bright_px.push_back(p);
    }
    for (size_t j = 0; j < ref.size(); ++j) {
      if (!used[j]) {
        m.dark_slots.push_back(static_cast<int>(j));
        m.dark_px.push_back(ref[j]);
      }
    }
    mapped = std::move(m);
    return true;
  };

  for (size_t i = 0; i < series.frames.size(); ++i) {
    ChainConfiguration cfg = infer_configuration(series.frames[i], opt);
    bool ok = false;
    if (cfg.n_slots == current_n) {
      set_ref(cfg);
      ok = true;
    } else {
      ChainConfiguration mapped;
      if (map_to_ref(cfg, mapped)) {
        cfg = std::move(mapped);
        ok = true;
      } else if (cfg.n_slots == current_n - 1) {
        current_n = cfg.n_slots;  // ion loss: the whole grid shifts
        set_ref(cfg);
        ok = true;
      }
    }
    if (ok) {
      configs.push_back({series.timestamps[i], std::move(cfg), segment});
      last_ok = true;
    } else {
      ++out.frames_skipped;
      if (last_ok) ++segment;  // ambiguous frame opens a new segment
      last_ok = false;
    }
  }
  out.segments = segment + 1;
  out.events = classify_transitions(configs);
  // An ion loss terminates its segment: bump the segment of everything after.
  int bump = 0;
  for (auto& ev : out.events) {
    ev.segment += bump;
    if (ev.kind == EventKind::ion_loss) ++bump;
  }
  out.segments += bump;
  return out;
}

IntervalStats interval_statistics(const std::vector<ReorderEvent>& events,
                                  const chain::ChainObservation& obs, double bin_width_s) {
  if (bin_width_s <= 0) throw ValidationError("bin width must be positive");
  std::vector<double> intervals;
  bool have_prev = false;
  double prev_t = 0;
  int prev_seg = -1;
  for (const auto& ev : events) {
    if (ev.kind == EventKind::ion_loss) {
      have_prev = false;
      continue;
    }
    if (!ev.countable()) continue;
    if (have_prev && ev.segment == prev_seg) intervals.push_back(ev.timestamp - prev_t);
    prev_t = ev.timestamp;
    prev_seg = ev.segment;
    have_prev = true;
  }
  if (intervals.empty())
    throw SimulationError("insufficient data: need at least two countable events in a segment");

  IntervalStats st;
  st.intervals = static_cast<int>(intervals.size());
  double mean = 0;
  for (double d : intervals) mean += d;
  mean /= intervals.size();
  st.mean_interval_s = mean;
  st.per_ion_mean_hr = mean * obs.total_ions / 3600.0;
  if (intervals.size() > 1) {
    double var = 0;
    for (double d : intervals) var += (d - mean) * (d - mean);
    var /= (intervals.size() - 1);
    st.sem_hr = std::sqrt(var / intervals.size()) * obs.total_ions / 3600.0;
    st.sem_defined = true;
  }
  st.bin_width_s = bin_width_s;
  double max_iv = *std::max_element(intervals.begin(), intervals.end());
  st.histogram.assign(static_cast<size_t>(max_iv / bin_width_s) + 1, 0);
  for (double d : intervals) ++st.histogram[static_cast<size_t>(d / bin_width_s)];
  return st;
}

}  // namespace xhv::reorder
