#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tcdiag/dataset.hpp"
#include "tcdiag/svm.hpp"

namespace tcdiag {

// Per-feature affine rescaling onto [0, 1], fitted on training data only:
// apply(x) = (x - lo) / span. Rows outside the fitted range map outside
// [0, 1]; that is intentional, the transform must stay affine.
struct FeatureScaling {
  Eigen::VectorXd lo;    // per-feature minimum over the fitted rows
  Eigen::VectorXd span;  // per-feature max - min, floored to 1 where constant

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

FeatureScaling fit_feature_scaling(const Eigen::MatrixXd& x);

struct TrainingMeta {
  std::uint64_t seed = 0;
  double c = 1.0;
  KernelSpec kernel;
  Index train_rows = 0;
  // Wall-clock time of training. Kept in memory for operator display only;
  // never serialized, so artifacts depend only on inputs.
  std::int64_t trained_at_unix = 0;
};

// One-vs-one ensemble: one binary model per unordered class pair, in the
// fixed order (0,1), (0,2), (1,2).
struct MulticlassSvmModel {
  std::array<BinarySvmModel, 3> binary_models;
  std::optional<FeatureScaling> scaling;
  TrainingMeta meta;
};

struct VoteDetail {
  std::array<int, kNumClasses> votes{};
  std::array<double, kNumClasses> magnitude{};  // sum |decision| where class won the pair
  AnomalyClass winner = AnomalyClass::BadContact;
};

// Trains the three pairwise models on the corresponding class subsets. All
// three classes must be present in `ds`. With `scale_features` the corpus is
// rescaled onto [0, 1] per feature before training and the fitted transform
// is stored in the model, so prediction applies it transparently.
MulticlassSvmModel train_one_vs_one(const LabeledDataset& ds, double c, const KernelSpec& kernel,
                                    const SmoSettings& settings = {}, std::uint64_t seed = 0,
                                    bool scale_features = false);

// Majority vote across the three pairwise decisions; ties go to the tied
// class with the largest summed |decision value|, then to the lowest code.
std::vector<AnomalyClass> predict_classes(const MulticlassSvmModel& model,
                                          const Eigen::MatrixXd& x,
                                          std::vector<VoteDetail>* details = nullptr);
AnomalyClass predict_class(const MulticlassSvmModel& model,
                           const Eigen::Ref<const Eigen::VectorXd>& x);

// Versioned text serialization with full-precision values and a trailing
// content fingerprint; round-trips decision values exactly. Lines starting
// with '#' ahead of the version header carry caller metadata.
void save_model(const MulticlassSvmModel& model, const std::filesystem::path& path,
                const std::vector<std::string>& meta_lines = {});
MulticlassSvmModel load_model(const std::filesystem::path& path);

// FNV-1a over the canonical serialization (metadata lines excluded).
std::string model_fingerprint(const MulticlassSvmModel& model);

}  // namespace tcdiag
