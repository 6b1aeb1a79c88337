#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>

#include "tcdiag/signal_model.hpp"

namespace tcdiag {

// The three diagnosable failure categories. Integer codes are stable and used
// in every serialized artifact.
enum class AnomalyClass : int {
  BadContact = 0,
  TractionNoise = 1,
  ContactInterrupted = 2,
};

inline constexpr int kNumClasses = 3;
inline constexpr std::array<AnomalyClass, kNumClasses> kAllClasses = {
    AnomalyClass::BadContact, AnomalyClass::TractionNoise, AnomalyClass::ContactInterrupted};

std::string anomaly_class_name(AnomalyClass c);
AnomalyClass anomaly_class_from_name(const std::string& name);
AnomalyClass anomaly_class_from_code(int code);

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct IndexRange {
  Index lo = 0;
  Index hi = 0;
};

// Intermittent poor electrical contact: a square-wave depression of the
// received voltage over a bounded interval, with its own jitter band that
// replaces the nominal one inside the interval.
struct BadContactParams {
  double square_freq_hz = 0.01;    // admissible range [0.005, 0.03]
  double square_amplitude_v = 2.0; // admissible range [0, 4]
  double noise_halfband_v = 0.5;
  Index onset_index = 0;
  Index end_index = 0;  // exclusive

  void validate() const;
};

// Electrification/traction interference: a flat voltage pedestal immediately
// before a train occupancy; the signal recovers to nominal afterwards.
struct TractionNoiseParams {
  double rise_v = 2.0;
  Index rise_duration_s = 30;
  OccupancyEvent occupancy;

  void validate() const;
};

// Damaged bonding/contact after a train passes: the voltage never recovers,
// staying a fixed drop below baseline from the end of the occupancy onward.
struct ContactInterruptedParams {
  double drop_v = 4.0;
  OccupancyEvent occupancy;

  void validate() const;
};

// Knobs controlling how pronounced randomly drawn anomalies are. Defaults keep
// every drawn signature clearly outside the nominal jitter band.
struct SeverityProfile {
  double min_square_amplitude_v = 1.0;
  RealRange traction_rise_range_v = {1.0, 4.0};
  IndexRange traction_rise_duration_range_s = {10, 60};
  RealRange interrupted_drop_range_v = {2.0, 6.0};
  IndexRange occupancy_duration_range_s = {10, 60};

  void validate() const;
};

// Seconds of in-window context required after a sampled signature's occupancy,
// so a training window always shows how the signal behaves once the train has
// cleared (recovery vs. permanent drop).
inline constexpr Index kPostContextS = 60;

using AnomalyParams =
    std::variant<BadContactParams, TractionNoiseParams, ContactInterruptedParams>;

AnomalyClass anomaly_class_of(const AnomalyParams& params);

// Each generator draws the nominal jitter sequence for the full duration first
// (so, for a shared seed, samples outside the anomaly match gen_nominal_trace
// exactly), then applies the class signature.
VoltageTrace gen_bad_contact(const TrackCircuitConfig& config, const BadContactParams& params,
                             Index duration_s, std::uint64_t seed);
VoltageTrace gen_traction_noise(const TrackCircuitConfig& config,
                                const TractionNoiseParams& params, Index duration_s,
                                std::uint64_t seed);
VoltageTrace gen_contact_interrupted(const TrackCircuitConfig& config,
                                     const ContactInterruptedParams& params, Index duration_s,
                                     std::uint64_t seed);

// Draws class parameters uniformly from the admissible ranges intersected with
// the severity profile, placing the whole signature (anomalous interval, or
// occupancy plus its pre-rise and post-occupancy context) inside
// [0, window_len_s). Deterministic given seed.
AnomalyParams sample_params(AnomalyClass cls, const SeverityProfile& severity, Index window_len_s,
                            std::uint64_t seed);

struct GeneratedAnomaly {
  VoltageTrace trace;
  AnomalyParams params;
};

// sample_params + the matching generator, with sub-seeds derived from `seed`.
GeneratedAnomaly gen_anomaly(const TrackCircuitConfig& config, AnomalyClass cls,
                             const SeverityProfile& severity, Index window_len_s,
                             std::uint64_t seed);

}  // namespace tcdiag
