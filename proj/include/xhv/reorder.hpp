#pragma once

#include <string>
#include <vector>

#include "xhv/chain.hpp"
#include "xhv/errors.hpp"

namespace xhv::reorder {

// A frame that does not yield an unambiguous slot assignment (melted
// chain, all-dark image). Such frames end an interval segment.
class AmbiguousFrame : public SimulationError {
 public:
  explicit AmbiguousFrame(const std::string& msg) : SimulationError(msg) {}
};

struct FrameSeries {
  std::vector<double> timestamps;             // s, strictly increasing
  std::vector<std::vector<double>> frames;    // 1D intensity slices
  double pixel_pitch_m = 0.0;                 // optional

  void validate() const;
};

struct ChainConfiguration {
  int n_slots = 0;
  std::vector<int> dark_slots;        // sorted slot indices
  std::vector<double> bright_px;      // detected peak positions, pixels
  std::vector<double> dark_px;        // inferred dark positions, pixels
};

struct DetectOptions {
  // threshold = median + k * MAD, capped at the bright/dark midpoint of
  // a two-means split (the cap matters when most of the chain is bright)
  double mad_k = 5.0;
};

// Slot inference for a single slice without a slot-count expectation.
ChainConfiguration infer_configuration(const std::vector<double>& frame,
                                       const DetectOptions& opt = {});

// As above but requires exactly `expected_n` slots; otherwise throws
// AmbiguousFrame.
ChainConfiguration detect_configuration(const std::vector<double>& frame, int expected_n,
                                        const DetectOptions& opt = {});

enum class EventKind { reorder, bright_to_dark, dark_to_bright, ion_loss };

const char* to_string(EventKind k);

struct ReorderEvent {
  double timestamp = 0.0;
  EventKind kind = EventKind::reorder;
  std::vector<int> pre_dark, post_dark;
  int pre_n = 0, post_n = 0;
  int segment = 0;

  // Counts toward collision statistics (reorder, bright_to_dark).
  bool countable() const {
    return kind == EventKind::reorder || kind == EventKind::bright_to_dark;
  }
};

struct TimedConfiguration {
  double timestamp = 0.0;
  ChainConfiguration config;
  int segment = 0;  // increases across ambiguous frames
};

// Fold over consecutive configurations within segments. An ion loss ends
// the segment for interval purposes.
std::vector<ReorderEvent> classify_transitions(const std::vector<TimedConfiguration>& configs);

struct SeriesAnalysis {
  std::vector<ReorderEvent> events;
  int frames_total = 0;
  int frames_skipped = 0;
  int segments = 1;
};

// Full pipeline: per-frame detection (skipping ambiguous frames, which
// start a new segment), then transition classification.
SeriesAnalysis analyze_series(const FrameSeries& series, int expected_n,
                              const DetectOptions& opt = {});

struct IntervalStats {
  double mean_interval_s = 0.0;      // chain-level, between countable events
  double per_ion_mean_hr = 0.0;      // mean interval x N
  double sem_hr = 0.0;               // standard error of the per-ion mean
  bool sem_defined = false;          // false with a single interval
  int intervals = 0;
  double bin_width_s = 600.0;
  std::vector<long> histogram;       // counts per bin, starting at 0 s
};

IntervalStats interval_statistics(const std::vector<ReorderEvent>& events,
                                  const chain::ChainObservation& obs,
                                  double bin_width_s = 600.0);

}  // namespace xhv::reorder
