#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <list>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

#include "tcdiag/failure_generator.hpp"
#include "tcdiag/kernel.hpp"
#include "tcdiag/signal_model.hpp"

namespace tcdiag {

struct SmoSettings {
  double kkt_tolerance = 1e-3;
  int max_passes_without_progress = 10;
  std::int64_t max_iterations = 0;  // 0 => max(100 * training size, 100000)
  Index cache_budget_rows = 0;      // 0 => auto (targets ~512 MB of kernel rows)

  void validate() const;
};

struct SmoDiagnostics {
  std::int64_t iterations = 0;
  double kkt_violation = 0.0;  // worst-pair gap when the solver stopped
  double objective = 0.0;      // dual objective at the final iterate
  Index support_count = 0;
  bool converged = false;
};

// Raised when the optimizer hits its iteration or stall limit before reaching
// the KKT tolerance; carries the best-so-far state for error reporting.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& message, SmoDiagnostics diagnostics)
      : std::runtime_error(message), diagnostics_(diagnostics) {}
  const SmoDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  SmoDiagnostics diagnostics_;
};

// One soft-margin decision function over a class pair. A positive decision
// value votes for class_pair.first.
struct BinarySvmModel {
  Eigen::MatrixXd support_vectors;  // one row per support vector
  Eigen::VectorXd dual_coefs;       // alpha_i * y_i, |coef| <= c
  double bias = 0.0;
  KernelSpec kernel;
  double c = 1.0;
  std::pair<AnomalyClass, AnomalyClass> class_pair = {AnomalyClass::BadContact,
                                                      AnomalyClass::TractionNoise};
  SmoDiagnostics training_diagnostics;

  void validate() const;
};

// LRU cache of kernel rows against a fixed training matrix. References
// returned by row() stay valid until the second-next row() call (the cache
// never evicts its two most recently used rows).
class KernelRowCache {
 public:
  KernelRowCache(const KernelSpec& spec, const Eigen::MatrixXd& x, Index budget_rows = 0);

  const Eigen::VectorXd& row(Index i);
  Index budget() const { return budget_; }
  std::int64_t misses() const { return misses_; }

 private:
  const KernelSpec spec_;
  const Eigen::MatrixXd& x_;
  Eigen::VectorXd sq_rows_;
  Index budget_ = 0;
  std::int64_t misses_ = 0;
  std::list<std::pair<Index, Eigen::VectorXd>> lru_;  // front = most recent
  std::unordered_map<Index, std::list<std::pair<Index, Eigen::VectorXd>>::iterator> index_;
};

// Trains the dual soft-margin problem by sequential minimal optimization with
// maximal-violating-pair selection. Labels must be +1/-1 with both present.
// The result satisfies the KKT conditions within settings.kkt_tolerance. The
// selection rule is deterministic; `seed` is accepted for interface stability
// and currently unused.
BinarySvmModel train_binary_smo(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, double c,
                                const KernelSpec& kernel, const SmoSettings& settings = {},
                                std::uint64_t seed = 0);

// f(x) = sum_i dual_coefs[i] * k(sv_i, x) + bias.
double decision_value(const BinarySvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

// Decision values for each row of `x`, evaluated in fixed-size chunks whose
// boundaries depend only on the row count.
Eigen::VectorXd decision_values(const BinarySvmModel& model, const Eigen::MatrixXd& x);

}  // namespace tcdiag
