#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcdiag/dataset.hpp"
#include "tcdiag/multiclass.hpp"

namespace tcdiag {

// Hyperparameter grid; defaults cover the full 4 x 4 x 2 search space.
struct HyperGrid {
  std::vector<double> c_values = {0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma_values = {0.0001, 0.001, 0.1, 1.0};
  std::vector<KernelKind> kernels = {KernelKind::RBF, KernelKind::Polynomial};

  void validate() const;
  std::size_t size() const { return c_values.size() * gamma_values.size() * kernels.size(); }
};

struct GridPoint {
  double c = 1.0;
  double gamma = 0.1;
  KernelKind kind = KernelKind::RBF;
};

// One disjoint train/validation partition; all k of them cover the dataset.
struct FoldSplit {
  std::vector<Index> train;
  std::vector<Index> validation;
};

// Shuffles each class independently, then deals rows round-robin so per-class
// fold sizes differ by at most one. Requires every class count >= k.
std::vector<FoldSplit> stratified_kfold(const LabeledDataset& ds, int k = 5,
                                        std::uint64_t seed = 0);

// Result for one grid point: per-fold validation accuracies and their mean.
// A convergence failure on any fold marks the whole combination with the
// error note and a mean accuracy of 0. Wall times are informational only and
// never rendered into artifacts.
struct CvCell {
  GridPoint point;
  std::vector<double> fold_accuracies;
  std::vector<double> fold_fit_seconds;
  double mean_accuracy = 0.0;
  std::string error_note;  // empty when every fold converged
};

struct CvResult {
  std::vector<CvCell> cells;  // one per grid point, grid enumeration order
  std::size_t best_index = 0;
  int folds = 0;
  std::uint64_t seed = 0;

  const CvCell& best() const { return cells.at(best_index); }
};

// Evaluates every grid point by mean k-fold validation accuracy on `ds`
// (callers pass the training split; the held-out test split must stay
// untouched). Ties break toward smaller C, then smaller gamma, then RBF
// before Polynomial -- by value, so reordering the grid lists cannot change
// the winner. Deterministic given `seed` regardless of thread count.
CvResult grid_search(const LabeledDataset& ds, const HyperGrid& grid, int k,
                     const SmoSettings& settings, std::uint64_t seed,
                     bool scale_features = false);

// Versioned text renderings: one row per (c, gamma, kernel, fold), a summary
// row per combination, and the winning combination. Byte-deterministic.
std::string render_cv_table(const CvResult& result);
CvResult parse_cv_table(const std::string& text);

// Human-readable summary table: one aligned row per combination with its
// per-fold accuracies and mean, the winner marked. Byte-deterministic.
std::string render_cv_text(const CvResult& result);

}  // namespace tcdiag
