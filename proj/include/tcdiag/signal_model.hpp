#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tcdiag {

using Index = Eigen::Index;

// Hardware sanity bound on a received RMS voltage sample.
inline constexpr double kMaxPhysicalVoltage = 40.0;

// Half-open run of samples during which the receiver sees the track occupied.
struct OccupancyEvent {
  Index start_index = 0;
  Index end_index = 0;  // exclusive

  Index duration() const { return end_index - start_index; }
  friend bool operator==(const OccupancyEvent&, const OccupancyEvent&) = default;
};

// Static electrical configuration of one track circuit receiver.
struct TrackCircuitConfig {
  double base_voltage = 20.0;            // free-track level, volts
  double occupancy_threshold = 17.0;     // below => occupied
  double nominal_noise_halfband = 0.25;  // hardware jitter half-band, volts

  void validate() const;
};

// A 1 Hz sequence of received RMS voltage samples. Index i corresponds to
// absolute time start_time + i.
struct VoltageTrace {
  Eigen::VectorXd samples;
  std::int64_t start_time = 0;
  std::string circuit_id;

  Index size() const { return samples.size(); }
  void validate() const;
};

// Synthesizes a fault-free trace: base voltage plus uniform jitter outside
// occupancies, exactly 0 V inside them. Pure function of its arguments.
VoltageTrace gen_nominal_trace(const TrackCircuitConfig& config, Index duration_s,
                               std::span<const OccupancyEvent> occupancies,
                               std::uint64_t seed);

// Maximal runs of consecutive samples strictly below the threshold, in index
// order. A sample exactly at the threshold counts as free.
std::vector<OccupancyEvent> detect_occupancies(const VoltageTrace& trace, double threshold);

// Shared helper: throws std::invalid_argument unless the events are within
// [0, duration) and pairwise disjoint. Returns the events sorted by start.
std::vector<OccupancyEvent> checked_sorted_events(std::span<const OccupancyEvent> occupancies,
                                                  Index duration_s);

}  // namespace tcdiag
