#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tcdiag/failure_generator.hpp"

namespace tcdiag {

// Rows are the true class, columns the predicted class, ordered by class code.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

  std::int64_t total() const;
  std::int64_t row_sum(std::size_t true_class) const;
  std::int64_t col_sum(std::size_t predicted_class) const;
};

// Per-class precision/recall plus their unweighted means. A class that was
// never predicted has no defined precision (flagged, never NaN); undefined
// entries are excluded from the macro mean. Same treatment for recall of a
// class absent from the truth labels.
struct MetricsReport {
  ConfusionMatrix confusion;
  std::array<double, kNumClasses> precision{};
  std::array<bool, kNumClasses> precision_defined{};
  std::array<double, kNumClasses> recall{};
  std::array<bool, kNumClasses> recall_defined{};
  double macro_precision = 0.0;
  // Free-form provenance (split sizes, seeds, hyperparameters); rendered into
  // both report forms and round-tripped by the delimited parser.
  std::vector<std::pair<std::string, std::string>> meta;
};

// Tallies one (truth, prediction) pair per sample. Inputs must be equal
// length, non-empty, with every label a valid class code.
MetricsReport compute_metrics(const std::vector<AnomalyClass>& truths,
                              const std::vector<AnomalyClass>& preds);

enum class ReportFormat {
  Text,       // aligned human-readable table, 4-decimal metrics
  Delimited,  // versioned key,value lines with full-precision values
};

// Both renderings are byte-deterministic for a given report.
std::string render_report(const MetricsReport& report, ReportFormat format);

// Parses the Delimited rendering back; every numeric value round-trips
// exactly. Raises ParseError on malformed input.
MetricsReport parse_delimited_report(const std::string& text);

}  // namespace tcdiag
