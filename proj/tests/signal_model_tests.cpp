#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "tcdiag/rng.hpp"
#include "tcdiag/signal_model.hpp"

using namespace tcdiag;

namespace {

VoltageTrace trace_of(std::initializer_list<double> values) {
  VoltageTrace t;
  t.samples = Eigen::Map<const Eigen::VectorXd>(values.begin(),
                                                static_cast<Index>(values.size()));
  return t;
}

}  // namespace

TEST_SUITE("signal_model") {

TEST_CASE("constant free-track trace has no occupancies") {
  VoltageTrace t;
  t.samples = Eigen::VectorXd::Constant(100, 20.0);
  CHECK(detect_occupancies(t, 17.0).empty());
}

TEST_CASE("an interior sub-threshold run is one event") {
  const auto events = detect_occupancies(trace_of({20, 20, 0, 0, 0, 20}), 17.0);
  REQUIRE(events.size() == 1);
  CHECK(events[0] == OccupancyEvent{2, 5});
  CHECK(events[0].duration() == 3);
}

TEST_CASE("runs touching either trace edge are reported") {
  const auto events = detect_occupancies(trace_of({16, 20, 16}), 17.0);
  REQUIRE(events.size() == 2);
  CHECK(events[0] == OccupancyEvent{0, 1});
  CHECK(events[1] == OccupancyEvent{2, 3});
}

TEST_CASE("a sample exactly at the threshold counts as free") {
  CHECK(detect_occupancies(trace_of({17.0, 17.0}), 17.0).empty());
  CHECK(detect_occupancies(trace_of({16.9999}), 17.0).size() == 1);
}

TEST_CASE("detected events cover exactly the sub-threshold samples") {
  Rng rng(31);
  const double levels[] = {0.0, 5.0, 16.99, 17.0, 18.0, 20.0, 25.0};
  for (int trial = 0; trial < 20; ++trial) {
    VoltageTrace t;
    t.samples.resize(200);
    for (Index i = 0; i < t.size(); ++i) {
      t.samples[i] = levels[rng.uniform_int(0, 6)];
    }
    const auto events = detect_occupancies(t, 17.0);
    std::vector<bool> covered(200, false);
    Index prev_end = -1;
    for (const auto& e : events) {
      CHECK(e.start_index > prev_end);  // ordered, disjoint, maximal
      prev_end = e.end_index;
      for (Index i = e.start_index; i < e.end_index; ++i) covered[static_cast<std::size_t>(i)] = true;
    }
    for (Index i = 0; i < t.size(); ++i) {
      CHECK(covered[static_cast<std::size_t>(i)] == (t.samples[i] < 17.0));
    }
  }
}

TEST_CASE("nominal generator round-trips through detection") {
  TrackCircuitConfig config;
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Index duration = 300 + rng.uniform_int(0, 500);
    std::vector<OccupancyEvent> occupancies;
    Index cursor = rng.uniform_int(5, 40);
    const int event_count = static_cast<int>(rng.uniform_int(0, 3));
    for (int e = 0; e < event_count && cursor + 80 < duration; ++e) {
      const Index len = rng.uniform_int(5, 40);
      occupancies.push_back({cursor, cursor + len});
      cursor += len + rng.uniform_int(2, 30);
    }
    const VoltageTrace t = gen_nominal_trace(config, duration, occupancies,
                                             rng.next_u64());
    CHECK(t.size() == duration);
    CHECK(detect_occupancies(t, config.occupancy_threshold) == occupancies);

    for (const auto& occ : occupancies) {
      for (Index i = occ.start_index; i < occ.end_index; ++i) {
        CHECK(t.samples[i] == 0.0);
      }
    }
    const double lo = config.base_voltage - config.nominal_noise_halfband;
    const double hi = config.base_voltage + config.nominal_noise_halfband;
    Index inside = 0;
    for (const auto& occ : occupancies) inside += occ.duration();
    Index free_checked = 0;
    Index next_event = 0;
    for (Index i = 0; i < duration; ++i) {
      const bool occupied = next_event < static_cast<Index>(occupancies.size()) &&
                            i >= occupancies[static_cast<std::size_t>(next_event)].start_index &&
                            i < occupancies[static_cast<std::size_t>(next_event)].end_index;
      if (next_event < static_cast<Index>(occupancies.size()) &&
          i + 1 == occupancies[static_cast<std::size_t>(next_event)].end_index) {
        ++next_event;
      }
      if (!occupied) {
        CHECK(t.samples[i] >= lo);
        CHECK(t.samples[i] <= hi);
        ++free_checked;
      }
    }
    CHECK(free_checked == duration - inside);
  }
}

TEST_CASE("nominal generator is a pure function of its arguments") {
  TrackCircuitConfig config;
  const std::vector<OccupancyEvent> occs = {{40, 70}, {200, 230}};
  const VoltageTrace a = gen_nominal_trace(config, 400, occs, 99);
  const VoltageTrace b = gen_nominal_trace(config, 400, occs, 99);
  CHECK((a.samples.array() == b.samples.array()).all());
  const VoltageTrace c = gen_nominal_trace(config, 400, occs, 100);
  CHECK((a.samples.array() != c.samples.array()).any());
}

TEST_CASE("event placement is validated") {
  TrackCircuitConfig config;
  const std::vector<OccupancyEvent> overlapping = {{10, 30}, {20, 40}};
  CHECK_THROWS_AS(gen_nominal_trace(config, 100, overlapping, 1), std::invalid_argument);
  const std::vector<OccupancyEvent> past_end = {{90, 120}};
  CHECK_THROWS_AS(gen_nominal_trace(config, 100, past_end, 1), std::invalid_argument);
  const std::vector<OccupancyEvent> unsorted_ok = {{50, 60}, {10, 20}};
  const auto sorted = checked_sorted_events(unsorted_ok, 100);
  REQUIRE(sorted.size() == 2);
  CHECK(sorted[0].start_index == 10);
  CHECK(sorted[1].start_index == 50);
}

TEST_CASE("configuration limits are enforced") {
  TrackCircuitConfig config;
  config.base_voltage = 25.0;  // outside the hardware's free-track band
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  TrackCircuitConfig negative_noise;
  negative_noise.nominal_noise_halfband = -0.1;
  CHECK_THROWS_AS(negative_noise.validate(), std::invalid_argument);
}

TEST_CASE("trace validation rejects out-of-range voltages") {
  VoltageTrace over = trace_of({20.0, 41.0});
  CHECK_THROWS_AS(over.validate(), std::invalid_argument);
  VoltageTrace negative = trace_of({-0.5});
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
  VoltageTrace fine = trace_of({0.0, 40.0, 20.0});
  CHECK_NOTHROW(fine.validate());
}

}  // TEST_SUITE
