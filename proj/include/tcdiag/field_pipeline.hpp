#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tcdiag/dataset.hpp"
#include "tcdiag/evaluation.hpp"
#include "tcdiag/multiclass.hpp"
#include "tcdiag/signal_model.hpp"

namespace tcdiag {

// One telemetry sample from a field log: epoch-second timestamp and the
// received RMS voltage.
struct FieldRecord {
  std::int64_t timestamp_s = 0;
  double voltage_v = 0.0;
};

// Field log format: optional leading `# key value` metadata lines (the
// `circuit_id` key names the circuit; the file stem is the fallback), a
// `timestamp_s,voltage_v` header, then one record per sampled second.
// Timestamp gaps of at most 5 s are forward-filled with the last voltage;
// larger gaps split the log into separate trace segments; non-monotonic
// timestamps are an error. Returned segments share the circuit id and are
// ordered by start time.
std::vector<VoltageTrace> parse_field_csv(const std::filesystem::path& path);
std::vector<VoltageTrace> parse_field_csv_text(const std::string& text,
                                               const std::string& fallback_circuit_id);

// Inverse of parsing: segments reappear as timestamp jumps. Parsing the
// rendered text yields the same segments (forward-filled samples are explicit
// rows, so the round-trip is idempotent).
std::string render_field_csv(const std::vector<VoltageTrace>& segments);
void save_field_csv(const std::vector<VoltageTrace>& segments,
                    const std::filesystem::path& path);

enum class GateVerdict { Nominal, Suspect };

// Rule-based screen implementing nominal operation: every sample is either
// inside [base - band, base + band] or part of at most one maximal
// occupied-level (~0 V) run — a clean train pass. Runs touching a window edge
// are clean: a pass can straddle adjacent windows. Anything else is Suspect
// and goes to the classifier; the trained model has no nominal class, so
// gating must precede it.
GateVerdict nominal_gate(const Eigen::Ref<const Eigen::VectorXd>& window,
                         const TrackCircuitConfig& config, double band = 0.5);

struct WindowVerdict {
  std::int64_t start_time = 0;
  bool nominal = true;
  AnomalyClass label = AnomalyClass::BadContact;  // meaningful iff !nominal
  VoteDetail votes;                               // meaningful iff !nominal
};

// Maximal run of consecutive anomalous windows, labelled by majority class
// (ties go to the earliest member window's class). end_time is exclusive.
struct Episode {
  std::int64_t start_time = 0;
  std::int64_t end_time = 0;
  AnomalyClass label = AnomalyClass::BadContact;
  Index window_count = 0;
};

struct DiagnosisReport {
  std::string circuit_id;
  std::int64_t trace_start = 0;
  Index trace_samples = 0;
  std::vector<WindowVerdict> windows;
  std::vector<Episode> episodes;
  std::string fingerprint;  // of the model that produced the verdicts
};

// Windows the trace, gates each window, classifies the suspects in one batch,
// and merges consecutive anomalous windows into episodes. Deterministic.
DiagnosisReport classify_trace(const VoltageTrace& trace, const MulticlassSvmModel& model,
                               const TrackCircuitConfig& config, Index stride = kWindowWidth,
                               double band = 0.5);

// Text form lists episodes and the anomalous windows; the delimited form is
// complete (every window verdict) and parses back exactly.
std::string render_diagnosis(const DiagnosisReport& report, ReportFormat format);
DiagnosisReport parse_delimited_diagnosis(const std::string& text);

// Diagnoses for one whole field log: one report per analyzable trace segment
// plus the segments too short for a single window, which are reported but
// never classified.
struct SkippedSegment {
  std::int64_t start_time = 0;
  Index samples = 0;
};

struct DiagnosisSet {
  std::string circuit_id;
  std::vector<DiagnosisReport> segments;
  std::vector<SkippedSegment> skipped;

  Index total_episodes() const;
};

// Set renderings wrap the per-segment forms; the delimited one parses back
// exactly (leading `# ...` lines carry caller metadata, as everywhere).
std::string render_diagnosis_set(const DiagnosisSet& set, ReportFormat format);
DiagnosisSet parse_delimited_diagnosis_set(const std::string& text);

}  // namespace tcdiag
