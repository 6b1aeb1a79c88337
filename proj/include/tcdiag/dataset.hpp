#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tcdiag/failure_generator.hpp"
#include "tcdiag/signal_model.hpp"

namespace tcdiag {

class Rng;

// Fixed width, in samples, of every classifier input window.
inline constexpr Index kWindowWidth = 600;

// One classifier input: a fixed-width slice of a trace, optionally labelled,
// with provenance back to the source circuit and absolute start time.
struct Window {
  Eigen::VectorXd values;
  std::optional<AnomalyClass> label;
  std::string circuit_id;
  std::int64_t start_time = 0;
};

// Column-count-checked matrix of labelled windows (one row per window).
struct LabeledDataset {
  Eigen::MatrixXd windows;  // shape: count x kWindowWidth
  std::vector<AnomalyClass> labels;

  Index size() const { return windows.rows(); }
  std::array<Index, kNumClasses> class_counts() const;
  void validate() const;
};

struct SplitSpec {
  double train_fraction = 0.70;
  std::uint64_t seed = 0;
  bool stratified = true;

  void validate() const;
};

struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> test;
};

// Cuts a trace into width-sized windows starting at 0, stride, 2*stride, ...;
// a trailing remainder shorter than width is discarded. Returns an empty
// sequence when the trace is shorter than one window.
std::vector<Window> window_trace(const VoltageTrace& trace, Index width = kWindowWidth,
                                 Index stride = kWindowWidth);

// Builds the labelled corpus: per_class independent window-length traces per
// failure class, each carrying one randomly drawn signature. Rows are grouped
// by class (all BadContact first), each generated from a seed derived from the
// row index, so serial and parallel builds agree.
LabeledDataset build_training_corpus(const TrackCircuitConfig& config,
                                     const SeverityProfile& severity, Index per_class,
                                     std::uint64_t seed);

// Deterministic train/test partition. Stratified mode shuffles each class
// separately and assigns round(train_fraction * class_count) rows to train.
SplitIndices split_indices(const LabeledDataset& ds, const SplitSpec& spec);
std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds,
                                                        const SplitSpec& spec);

// Copies the selected rows into a new dataset (order follows `rows`).
LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<Index>& rows);

// In-place Fisher-Yates shuffle driven by the supplied generator.
void shuffle_indices(std::vector<Index>& idx, Rng& rng);

// CSV persistence: optional `# ...` metadata lines, then a
// `label,v0,...,v599` header, then one row per window with full-precision
// values. load_dataset raises ParseError (with the line number) on any
// malformed content.
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path,
                  const std::vector<std::string>& meta_lines = {});
LabeledDataset load_dataset(const std::filesystem::path& path);

// Split persistence: `tcdiag-split v1`, `rows <total>`, then one
// `<index> train|test` line per dataset row in ascending index order. The
// indices must partition 0..total-1; both render and parse enforce that, and
// parse skips leading `# ...` metadata lines.
std::string render_split_indices(const SplitIndices& split, Index total_rows);
SplitIndices parse_split_indices(const std::string& text);
void save_split_indices(const SplitIndices& split, Index total_rows,
                        const std::filesystem::path& path,
                        const std::vector<std::string>& meta_lines = {});
SplitIndices load_split_indices(const std::filesystem::path& path);

}  // namespace tcdiag
