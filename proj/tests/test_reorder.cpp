#include <cmath>
#include <vector>

#include "doctest.h"
#include "support/synthetic_frames.hpp"
#include "xhv/errors.hpp"
#include "xhv/reorder.hpp"

using namespace xhv;
using namespace xhv::reorder;

namespace {

std::vector<double> render_single(const std::vector<int>& dark, std::uint64_t seed = 1) {
  synth::GeneratorOptions opt;
  opt.initial_dark = dark;
  opt.seed = seed;
  return synth::generate(opt, {}).series.frames.front();
}

TimedConfiguration tc(double t, int n, std::vector<int> dark, int segment = 0) {
  TimedConfiguration c;
  c.timestamp = t;
  c.segment = segment;
  c.config.n_slots = n;
  c.config.dark_slots = std::move(dark);
  return c;
}

ReorderEvent countable_at(double t, int segment = 0,
                          EventKind kind = EventKind::reorder) {
  ReorderEvent ev;
  ev.timestamp = t;
  ev.segment = segment;
  ev.kind = kind;
  return ev;
}

}  // namespace

TEST_CASE("dark slots are recovered exactly at moderate signal-to-noise") {
  auto frame = render_single({2, 9, 15});
  ChainConfiguration cfg = detect_configuration(frame, 20);
  CHECK(cfg.n_slots == 20);
  REQUIRE(cfg.dark_slots == std::vector<int>{2, 9, 15});
  CHECK(cfg.bright_px.size() == 17);
  CHECK(cfg.dark_px.size() == 3);
  // peak positions land on the rendered grid (margin 10, spacing 6)
  CHECK(cfg.bright_px.front() == doctest::Approx(10.0).epsilon(0.15));
  CHECK(cfg.dark_px.front() == doctest::Approx(10.0 + 2 * 6.0).epsilon(0.15));
}

TEST_CASE("an all-bright chain has no dark slots") {
  ChainConfiguration cfg = detect_configuration(render_single({}), 20);
  CHECK(cfg.n_slots == 20);
  CHECK(cfg.dark_slots.empty());
  CHECK(cfg.bright_px.size() == 20);
}

TEST_CASE("featureless frames are ambiguous") {
  std::vector<double> flat(130, 0.0);
  ChainConfiguration cfg = infer_configuration(flat);
  CHECK(cfg.n_slots == 0);
  CHECK_THROWS_AS(detect_configuration(flat, 20), AmbiguousFrame);
  CHECK_THROWS_AS(detect_configuration({1.0, 2.0}, 20), ValidationError);
}

TEST_CASE("transition classification covers all single-step changes") {
  std::vector<TimedConfiguration> seq = {
      tc(0, 20, {3, 7, 12}),
      tc(5, 20, {3, 8, 12}),        // dark ion moved: reorder
      tc(10, 20, {3, 8, 12}),       // unchanged: nothing
      tc(15, 20, {3, 8, 12, 14}),   // new dark ion
      tc(20, 20, {3, 8, 12}),       // lit back up
      tc(25, 19, {3, 8, 12}),       // chain shrank
  };
  auto events = classify_transitions(seq);
  REQUIRE(events.size() == 4);
  CHECK(events[0].kind == EventKind::reorder);
  CHECK(events[0].timestamp == doctest::Approx(5.0));
  CHECK(events[0].pre_dark == std::vector<int>{3, 7, 12});
  CHECK(events[0].post_dark == std::vector<int>{3, 8, 12});
  CHECK(events[1].kind == EventKind::bright_to_dark);
  CHECK(events[2].kind == EventKind::dark_to_bright);
  CHECK(events[3].kind == EventKind::ion_loss);
  CHECK(events[0].countable());
  CHECK(events[1].countable());
  CHECK_FALSE(events[2].countable());
  CHECK_FALSE(events[3].countable());
}

TEST_CASE("no events are inferred across a segment boundary") {
  std::vector<TimedConfiguration> seq = {
      tc(0, 20, {3}, 0),
      tc(10, 20, {5}, 1),  // configuration changed, but segment did too
      tc(15, 20, {6}, 1),
  };
  auto events = classify_transitions(seq);
  REQUIRE(events.size() == 1);
  CHECK(events[0].timestamp == doctest::Approx(15.0));
}

TEST_CASE("interval statistics") {
  chain::ChainObservation obs;
  obs.total_ions = 20;
  obs.dark_ions = 3;

  SUBCASE("two intervals, histogram, per-ion scaling") {
    std::vector<ReorderEvent> events = {countable_at(0), countable_at(500),
                                        countable_at(1800)};
    IntervalStats st = interval_statistics(events, obs);
    CHECK(st.intervals == 2);
    CHECK(st.mean_interval_s == doctest::Approx(900.0));
    CHECK(st.per_ion_mean_hr == doctest::Approx(900.0 * 20 / 3600.0));
    CHECK(st.sem_defined);
    REQUIRE(st.histogram.size() == 3);  // 600 s bins up to 1300 s
    CHECK(st.histogram[0] == 1);
    CHECK(st.histogram[1] == 0);
    CHECK(st.histogram[2] == 1);
  }
  SUBCASE("a single interval has no standard error") {
    std::vector<ReorderEvent> events = {countable_at(0), countable_at(700)};
    IntervalStats st = interval_statistics(events, obs);
    CHECK(st.intervals == 1);
    CHECK_FALSE(st.sem_defined);
    CHECK(st.sem_hr == doctest::Approx(0.0));
  }
  SUBCASE("segment-crossing gaps are not intervals") {
    std::vector<ReorderEvent> events = {countable_at(0, 0), countable_at(400, 0),
                                        countable_at(900, 1), countable_at(1000, 1)};
    IntervalStats st = interval_statistics(events, obs);
    CHECK(st.intervals == 2);
    CHECK(st.mean_interval_s == doctest::Approx(250.0));
  }
  SUBCASE("an ion loss breaks the running interval") {
    std::vector<ReorderEvent> events = {countable_at(0),
                                        countable_at(300, 0, EventKind::ion_loss),
                                        countable_at(600)};
    // ion_loss is not countable and forgets the previous event
    CHECK_THROWS_AS(interval_statistics(events, obs), SimulationError);
  }
  SUBCASE("no pairs at all") {
    CHECK_THROWS_AS(interval_statistics({countable_at(0)}, obs), SimulationError);
    CHECK_THROWS_AS(interval_statistics({countable_at(0), countable_at(5)}, obs,
                                        -1.0),
                    ValidationError);
  }
}

TEST_CASE("scripted series round-trips through the full pipeline") {
  synth::GeneratorOptions opt;
  opt.initial_dark = {2, 9, 15};
  opt.seed = 11;
  auto script = synth::exponential_script(opt, 12, 2, 60.0, 3);
  synth::SyntheticSeries truth = synth::generate(opt, script);

  SeriesAnalysis analysis = analyze_series(truth.series, opt.n_slots);
  // rare noise excursions may make an isolated frame ambiguous; that must
  // stay rare and must not lose events
  CHECK(analysis.frames_skipped <= 4);
  REQUIRE(analysis.events.size() == truth.events.size());
  int countable = 0;
  for (size_t i = 0; i < truth.events.size(); ++i) {
    CHECK(analysis.events[i].kind == truth.events[i].kind);
    // a skipped frame can defer an event to the next readable one
    CHECK(std::abs(analysis.events[i].timestamp - truth.events[i].time_s) <=
          2 * opt.cadence_s);
    if (analysis.events[i].countable()) ++countable;
  }
  CHECK(countable == truth.countable_events);
  CHECK(countable == 14);

  chain::ChainObservation obs;
  obs.total_ions = opt.n_slots;
  obs.dark_ions = 3;
  IntervalStats st = interval_statistics(analysis.events, obs);
  CHECK(st.mean_interval_s ==
        doctest::Approx(truth.mean_countable_interval_s).epsilon(0.10));

  SUBCASE("detection is invariant under intensity rescaling") {
    FrameSeries scaled = truth.series;
    for (auto& f : scaled.frames)
      for (auto& v : f) v *= 3.7;
    SeriesAnalysis again = analyze_series(scaled, opt.n_slots);
    REQUIRE(again.events.size() == analysis.events.size());
    for (size_t i = 0; i < again.events.size(); ++i) {
      CHECK(again.events[i].kind == analysis.events[i].kind);
      CHECK(again.events[i].post_dark == analysis.events[i].post_dark);
    }
  }
  SUBCASE("a clock offset shifts event times and nothing else") {
    FrameSeries shifted = truth.series;
    for (auto& t : shifted.timestamps) t += 12345.0;
    SeriesAnalysis again = analyze_series(shifted, opt.n_slots);
    REQUIRE(again.events.size() == analysis.events.size());
    for (size_t i = 0; i < again.events.size(); ++i)
      CHECK(again.events[i].timestamp ==
            doctest::Approx(analysis.events[i].timestamp + 12345.0));
  }
}

TEST_CASE("series validation rejects inconsistent input") {
  FrameSeries s;
  s.timestamps = {0.0, 1.0};
  s.frames = {std::vector<double>(50, 0.0)};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.frames.push_back(std::vector<double>(50, 0.0));
  s.timestamps[1] = 0.0;  // not increasing
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
