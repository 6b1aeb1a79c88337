#include "tcdiag/failure_generator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tcdiag/rng.hpp"

namespace tcdiag {
namespace {

constexpr double kMinSquareFreqHz = 0.005;
constexpr double kMaxSquareFreqHz = 0.03;
constexpr double kMaxSquareAmplitudeV = 4.0;

void check_voltage_band(double lowest, double highest, const char* what) {
  if (lowest < 0.0 || highest > kMaxPhysicalVoltage) {
    throw std::invalid_argument(std::string(what) + " would push voltages outside [0, " +
                                std::to_string(kMaxPhysicalVoltage) + "] V");
  }
}

// Draws the fault-free jitter sequence for every sample. Generators call this
// before applying their signature so that, for equal seeds, samples they leave
// untouched are bit-identical with gen_nominal_trace.
VoltageTrace draw_nominal(const TrackCircuitConfig& config, Index duration_s, Rng& rng) {
  VoltageTrace trace;
  trace.samples.resize(duration_s);
  const double lo = config.base_voltage - config.nominal_noise_halfband;
  const double hi = config.base_voltage + config.nominal_noise_halfband;
  for (Index i = 0; i < duration_s; ++i) {
    trace.samples[i] = rng.uniform(lo, hi);
  }
  return trace;
}

void require_positive_duration(Index duration_s) {
  if (duration_s <= 0) throw std::invalid_argument("duration_s must be positive");
}

double uniform_in(Rng& rng, const RealRange& r) { return rng.uniform(r.lo, r.hi); }
Index uniform_in(Rng& rng, const IndexRange& r) {
  return static_cast<Index>(rng.uniform_int(static_cast<std::int64_t>(r.lo),
                                            static_cast<std::int64_t>(r.hi)));
}

}  // namespace

std::string anomaly_class_name(AnomalyClass c) {
  switch (c) {
    case AnomalyClass::BadContact: return "bad_contact";
    case AnomalyClass::TractionNoise: return "traction_noise";
    case AnomalyClass::ContactInterrupted: return "contact_interrupted";
  }
  throw std::invalid_argument("unknown anomaly class code " +
                              std::to_string(static_cast<int>(c)));
}

AnomalyClass anomaly_class_from_name(const std::string& name) {
  for (AnomalyClass c : kAllClasses) {
    if (anomaly_class_name(c) == name) return c;
  }
  throw std::invalid_argument("unknown anomaly class name \"" + name + "\"");
}

AnomalyClass anomaly_class_from_code(int code) {
  if (code < 0 || code >= kNumClasses) {
    throw std::invalid_argument("anomaly class code must be 0, 1, or 2; got " +
                                std::to_string(code));
  }
  return static_cast<AnomalyClass>(code);
}

AnomalyClass anomaly_class_of(const AnomalyParams& params) {
  return std::visit(
      [](const auto& p) -> AnomalyClass {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BadContactParams>) return AnomalyClass::BadContact;
        if constexpr (std::is_same_v<T, TractionNoiseParams>) return AnomalyClass::TractionNoise;
        if constexpr (std::is_same_v<T, ContactInterruptedParams>)
          return AnomalyClass::ContactInterrupted;
      },
      params);
}

void BadContactParams::validate() const {
  if (!std::isfinite(square_freq_hz) || square_freq_hz < kMinSquareFreqHz ||
      square_freq_hz > kMaxSquareFreqHz) {
    throw std::invalid_argument("square_freq_hz must lie in [0.005, 0.03], got " +
                                std::to_string(square_freq_hz));
  }
  if (!std::isfinite(square_amplitude_v) || square_amplitude_v < 0.0 ||
      square_amplitude_v > kMaxSquareAmplitudeV) {
    throw std::invalid_argument("square_amplitude_v must lie in [0, 4], got " +
                                std::to_string(square_amplitude_v));
  }
  if (!std::isfinite(noise_halfband_v) || noise_halfband_v < 0.0) {
    throw std::invalid_argument("noise_halfband_v must be >= 0");
  }
  if (onset_index < 0 || onset_index >= end_index) {
    throw std::invalid_argument("bad-contact interval [" + std::to_string(onset_index) + ", " +
                                std::to_string(end_index) + ") is empty or negative");
  }
}

void TractionNoiseParams::validate() const {
  if (!std::isfinite(rise_v) || rise_v <= 0.0) {
    throw std::invalid_argument("rise_v must be > 0");
  }
  if (rise_duration_s <= 0) {
    throw std::invalid_argument("rise_duration_s must be > 0");
  }
  if (occupancy.start_index < occupancy.end_index &&
      occupancy.start_index - rise_duration_s < 0) {
    throw std::invalid_argument("rise interval extends before the start of the trace");
  }
}

void ContactInterruptedParams::validate() const {
  if (!std::isfinite(drop_v) || drop_v <= 0.0) {
    throw std::invalid_argument("drop_v must be > 0");
  }
}

void SeverityProfile::validate() const {
  auto check_real = [](const RealRange& r, const char* name) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo < 0.0 || r.lo > r.hi) {
      throw std::invalid_argument(std::string(name) + " must satisfy 0 <= lo <= hi");
    }
  };
  auto check_index = [](const IndexRange& r, const char* name) {
    if (r.lo < 0 || r.lo > r.hi) {
      throw std::invalid_argument(std::string(name) + " must satisfy 0 <= lo <= hi");
    }
  };
  if (!std::isfinite(min_square_amplitude_v) || min_square_amplitude_v < 0.0 ||
      min_square_amplitude_v > kMaxSquareAmplitudeV) {
    throw std::invalid_argument("min_square_amplitude_v must lie in [0, 4]");
  }
  check_real(traction_rise_range_v, "traction_rise_range_v");
  check_index(traction_rise_duration_range_s, "traction_rise_duration_range_s");
  check_real(interrupted_drop_range_v, "interrupted_drop_range_v");
  check_index(occupancy_duration_range_s, "occupancy_duration_range_s");
}

VoltageTrace gen_bad_contact(const TrackCircuitConfig& config, const BadContactParams& params,
                             Index duration_s, std::uint64_t seed) {
  config.validate();
  require_positive_duration(duration_s);
  params.validate();
  if (params.end_index > duration_s) {
    throw std::invalid_argument("bad-contact interval extends past the end of the trace");
  }
  check_voltage_band(config.base_voltage - params.square_amplitude_v - params.noise_halfband_v,
                     config.base_voltage + params.noise_halfband_v, "bad-contact parameters");

  Rng rng(seed);
  VoltageTrace trace = draw_nominal(config, duration_s, rng);
  const double phase01 = rng.uniform01();
  for (Index i = params.onset_index; i < params.end_index; ++i) {
    const double cycles =
        static_cast<double>(i - params.onset_index) * params.square_freq_hz + phase01;
    const double s = (cycles - std::floor(cycles)) < 0.5 ? 1.0 : 0.0;
    const double u = rng.uniform(-params.noise_halfband_v, params.noise_halfband_v);
    trace.samples[i] = config.base_voltage - s * params.square_amplitude_v + u;
  }
  trace.validate();
  return trace;
}

VoltageTrace gen_traction_noise(const TrackCircuitConfig& config,
                                const TractionNoiseParams& params, Index duration_s,
                                std::uint64_t seed) {
  config.validate();
  require_positive_duration(duration_s);
  params.validate();
  const OccupancyEvent occ = params.occupancy;
  checked_sorted_events(std::span<const OccupancyEvent>(&occ, 1), duration_s);
  if (occ.start_index - params.rise_duration_s < 0) {
    throw std::invalid_argument("rise interval extends before the start of the trace");
  }
  check_voltage_band(config.base_voltage - config.nominal_noise_halfband,
                     config.base_voltage + config.nominal_noise_halfband + params.rise_v,
                     "traction-noise parameters");

  Rng rng(seed);
  VoltageTrace trace = draw_nominal(config, duration_s, rng);
  trace.samples.segment(occ.start_index - params.rise_duration_s, params.rise_duration_s)
      .array() += params.rise_v;
  trace.samples.segment(occ.start_index, occ.duration()).setZero();
  trace.validate();
  return trace;
}

VoltageTrace gen_contact_interrupted(const TrackCircuitConfig& config,
                                     const ContactInterruptedParams& params, Index duration_s,
                                     std::uint64_t seed) {
  config.validate();
  require_positive_duration(duration_s);
  params.validate();
  const OccupancyEvent occ = params.occupancy;
  checked_sorted_events(std::span<const OccupancyEvent>(&occ, 1), duration_s);
  if (occ.end_index >= duration_s) {
    throw std::invalid_argument(
        "occupancy must end before the trace does so the dropped level is observable");
  }
  check_voltage_band(
      config.base_voltage - config.nominal_noise_halfband - params.drop_v,
      config.base_voltage + config.nominal_noise_halfband, "contact-interrupted parameters");

  Rng rng(seed);
  VoltageTrace trace = draw_nominal(config, duration_s, rng);
  trace.samples.tail(duration_s - occ.end_index).array() -= params.drop_v;
  trace.samples.segment(occ.start_index, occ.duration()).setZero();
  trace.validate();
  return trace;
}

AnomalyParams sample_params(AnomalyClass cls, const SeverityProfile& severity, Index window_len_s,
                            std::uint64_t seed) {
  severity.validate();
  if (window_len_s <= 0) throw std::invalid_argument("window_len_s must be positive");
  Rng rng(seed);

  switch (cls) {
    case AnomalyClass::BadContact: {
      // Keep at least two full periods inside the interval so the alternation
      // is observable; for short windows this lifts the admissible frequency
      // floor.
      const double freq_floor =
          std::max(kMinSquareFreqHz, 2.0 / static_cast<double>(window_len_s));
      if (freq_floor > kMaxSquareFreqHz) {
        throw std::invalid_argument("window too short to contain a bad-contact signature");
      }
      BadContactParams p;
      p.square_freq_hz = rng.uniform(freq_floor, kMaxSquareFreqHz);
      p.square_amplitude_v = rng.uniform(severity.min_square_amplitude_v, kMaxSquareAmplitudeV);
      const Index min_len =
          static_cast<Index>(std::ceil(2.0 / p.square_freq_hz));
      const Index len = static_cast<Index>(rng.uniform_int(min_len, window_len_s));
      p.onset_index = static_cast<Index>(rng.uniform_int(0, window_len_s - len));
      p.end_index = p.onset_index + len;
      p.validate();
      return p;
    }
    case AnomalyClass::TractionNoise: {
      if (severity.traction_rise_range_v.lo <= 0.0 ||
          severity.traction_rise_duration_range_s.lo <= 0 ||
          severity.occupancy_duration_range_s.lo <= 0) {
        throw std::invalid_argument(
            "severity lower bounds for rise and occupancy must be positive");
      }
      const Index needed = severity.traction_rise_duration_range_s.hi +
                           severity.occupancy_duration_range_s.hi + kPostContextS;
      if (window_len_s < needed) {
        throw std::invalid_argument("window too short to contain a traction-noise signature (" +
                                    std::to_string(needed) + " s needed)");
      }
      TractionNoiseParams p;
      p.rise_v = uniform_in(rng, severity.traction_rise_range_v);
      p.rise_duration_s = uniform_in(rng, severity.traction_rise_duration_range_s);
      const Index occ_len = uniform_in(rng, severity.occupancy_duration_range_s);
      const Index start = static_cast<Index>(
          rng.uniform_int(p.rise_duration_s, window_len_s - occ_len - kPostContextS));
      p.occupancy = {start, start + occ_len};
      p.validate();
      return p;
    }
    case AnomalyClass::ContactInterrupted: {
      if (severity.interrupted_drop_range_v.lo <= 0.0 ||
          severity.occupancy_duration_range_s.lo <= 0) {
        throw std::invalid_argument(
            "severity lower bounds for drop and occupancy must be positive");
      }
      const Index needed = severity.occupancy_duration_range_s.hi + kPostContextS;
      if (window_len_s < needed) {
        throw std::invalid_argument(
            "window too short to contain a contact-interrupted signature (" +
            std::to_string(needed) + " s needed)");
      }
      ContactInterruptedParams p;
      p.drop_v = uniform_in(rng, severity.interrupted_drop_range_v);
      const Index occ_len = uniform_in(rng, severity.occupancy_duration_range_s);
      const Index start =
          static_cast<Index>(rng.uniform_int(0, window_len_s - occ_len - kPostContextS));
      p.occupancy = {start, start + occ_len};
      p.validate();
      return p;
    }
  }
  throw std::invalid_argument("unknown anomaly class");
}

GeneratedAnomaly gen_anomaly(const TrackCircuitConfig& config, AnomalyClass cls,
                             const SeverityProfile& severity, Index window_len_s,
                             std::uint64_t seed) {
  GeneratedAnomaly out;
  out.params = sample_params(cls, severity, window_len_s, derive_seed(seed, 0));
  const std::uint64_t trace_seed = derive_seed(seed, 1);
  out.trace = std::visit(
      [&](const auto& p) -> VoltageTrace {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BadContactParams>) {
          return gen_bad_contact(config, p, window_len_s, trace_seed);
        } else if constexpr (std::is_same_v<T, TractionNoiseParams>) {
          return gen_traction_noise(config, p, window_len_s, trace_seed);
        } else {
          return gen_contact_interrupted(config, p, window_len_s, trace_seed);
        }
      },
      out.params);
  return out;
}

}  // namespace tcdiag
