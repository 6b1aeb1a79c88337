#include "tcdiag/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tcdiag/rng.hpp"

namespace tcdiag {

void TrackCircuitConfig::validate() const {
  if (!std::isfinite(base_voltage) || base_voltage < 19.0 || base_voltage > 21.0) {
    throw std::invalid_argument("base_voltage must lie in [19, 21] V, got " +
                                std::to_string(base_voltage));
  }
  if (!std::isfinite(nominal_noise_halfband) || nominal_noise_halfband < 0.0) {
    throw std::invalid_argument("nominal_noise_halfband must be >= 0");
  }
  if (!std::isfinite(occupancy_threshold) || occupancy_threshold <= 0.0) {
    throw std::invalid_argument("occupancy_threshold must be > 0");
  }
  if (occupancy_threshold >= base_voltage - nominal_noise_halfband) {
    throw std::invalid_argument(
        "occupancy_threshold must be below the lowest nominal voltage (base - halfband)");
  }
}

void VoltageTrace::validate() const {
  if (samples.size() == 0) {
    throw std::invalid_argument("trace must contain at least one sample");
  }
  for (Index i = 0; i < samples.size(); ++i) {
    const double v = samples[i];
    if (!std::isfinite(v) || v < 0.0 || v > kMaxPhysicalVoltage) {
      throw std::invalid_argument("sample " + std::to_string(i) + " out of range [0, " +
                                  std::to_string(kMaxPhysicalVoltage) + "]: " +
                                  std::to_string(v));
    }
  }
}

std::vector<OccupancyEvent> checked_sorted_events(std::span<const OccupancyEvent> occupancies,
                                                  Index duration_s) {
  std::vector<OccupancyEvent> events(occupancies.begin(), occupancies.end());
  std::sort(events.begin(), events.end(),
            [](const OccupancyEvent& a, const OccupancyEvent& b) {
              return a.start_index < b.start_index;
            });
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    if (e.start_index < 0 || e.end_index > duration_s || e.start_index >= e.end_index) {
      throw std::invalid_argument("occupancy [" + std::to_string(e.start_index) + ", " +
                                  std::to_string(e.end_index) + ") is not a valid range within " +
                                  std::to_string(duration_s) + " samples");
    }
    if (k > 0 && events[k - 1].end_index > e.start_index) {
      throw std::invalid_argument("occupancies overlap near index " +
                                  std::to_string(e.start_index));
    }
  }
  return events;
}

VoltageTrace gen_nominal_trace(const TrackCircuitConfig& config, Index duration_s,
                               std::span<const OccupancyEvent> occupancies,
                               std::uint64_t seed) {
  config.validate();
  if (duration_s <= 0) {
    throw std::invalid_argument("duration_s must be positive");
  }
  const auto events = checked_sorted_events(occupancies, duration_s);

  Rng rng(seed);
  VoltageTrace trace;
  trace.samples.resize(duration_s);
  const double lo = config.base_voltage - config.nominal_noise_halfband;
  const double hi = config.base_voltage + config.nominal_noise_halfband;
  for (Index i = 0; i < duration_s; ++i) {
    trace.samples[i] = rng.uniform(lo, hi);
  }
  for (const auto& e : events) {
    trace.samples.segment(e.start_index, e.duration()).setZero();
  }
  return trace;
}

std::vector<OccupancyEvent> detect_occupancies(const VoltageTrace& trace, double threshold) {
  std::vector<OccupancyEvent> events;
  const Index n = trace.size();
  Index i = 0;
  while (i < n) {
    if (trace.samples[i] < threshold) {
      Index j = i + 1;
      while (j < n && trace.samples[j] < threshold) ++j;
      events.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }
  return events;
}

}  // namespace tcdiag
