#include "tcdiag/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tcdiag {
namespace {

constexpr double kEtaFloor = 1e-12;
constexpr Index kPredictChunk = 256;

Index auto_cache_budget(Index n) {
  const Index by_memory = static_cast<Index>((512ll << 20) / (8ll * std::max<Index>(n, 1)));
  return std::clamp<Index>(by_memory, 2, n);
}

}  // namespace

void SmoSettings::validate() const {
  if (!std::isfinite(kkt_tolerance) || kkt_tolerance <= 0.0) {
    throw std::invalid_argument("kkt_tolerance must be > 0");
  }
  if (max_passes_without_progress <= 0) {
    throw std::invalid_argument("max_passes_without_progress must be > 0");
  }
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (cache_budget_rows < 0) throw std::invalid_argument("cache_budget_rows must be >= 0");
}

void BinarySvmModel::validate() const {
  if (support_vectors.rows() == 0 || support_vectors.rows() != dual_coefs.size()) {
    throw std::invalid_argument("model must hold one dual coefficient per support vector");
  }
  if (!std::isfinite(bias)) throw std::invalid_argument("model bias must be finite");
  if (!std::isfinite(c) || c <= 0.0) throw std::invalid_argument("model C must be > 0");
  kernel.validate();
  for (Index i = 0; i < dual_coefs.size(); ++i) {
    if (std::abs(dual_coefs[i]) > c * (1.0 + 1e-9)) {
      throw std::invalid_argument("dual coefficient exceeds the box constraint");
    }
  }
}

KernelRowCache::KernelRowCache(const KernelSpec& spec, const Eigen::MatrixXd& x,
                               Index budget_rows)
    : spec_(spec), x_(x), sq_rows_(row_squared_norms(x)) {
  budget_ = budget_rows > 0 ? std::max<Index>(budget_rows, 2) : auto_cache_budget(x.rows());
}

const Eigen::VectorXd& KernelRowCache::row(Index i) {
  if (auto it = index_.find(i); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return lru_.front().second;
  }
  ++misses_;
  if (static_cast<Index>(lru_.size()) >= budget_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  lru_.emplace_front(i, Eigen::VectorXd());
  kernel_column(spec_, x_, sq_rows_, x_.row(i).transpose(), sq_rows_[i], lru_.front().second);
  index_[i] = lru_.begin();
  return lru_.front().second;
}

BinarySvmModel train_binary_smo(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, double c,
                                const KernelSpec& kernel, const SmoSettings& settings,
                                std::uint64_t /*seed*/) {
  kernel.validate();
  settings.validate();
  if (!std::isfinite(c) || c <= 0.0) throw std::invalid_argument("C must be > 0");
  const Index n = x.rows();
  if (n < 2) throw std::invalid_argument("training needs at least 2 points");
  if (y.size() != n) throw std::invalid_argument("label count must match row count");

  bool has_pos = false;
  bool has_neg = false;
  for (Index t = 0; t < n; ++t) {
    if (y[t] == 1) {
      has_pos = true;
    } else if (y[t] == -1) {
      has_neg = true;
    } else {
      throw std::invalid_argument("labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("training needs both classes present");
  }

  const Eigen::VectorXd yd = y.cast<double>();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  // Gradient of the dual objective: G_t = sum_s y_t y_s K_ts alpha_s - 1.
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);

  KernelRowCache cache(kernel, x, settings.cache_budget_rows);
  const std::int64_t max_iter =
      settings.max_iterations > 0
          ? settings.max_iterations
          : std::max<std::int64_t>(100 * static_cast<std::int64_t>(n), 100000);

  auto diagnostics = [&](std::int64_t iters, double violation, bool converged) {
    SmoDiagnostics d;
    d.iterations = iters;
    d.kkt_violation = violation;
    d.objective = 0.5 * (alpha.sum() - alpha.dot(grad));
    d.support_count = static_cast<Index>((alpha.array() > 0.0).count());
    d.converged = converged;
    return d;
  };

  std::int64_t iter = 0;
  int stall = 0;
  double violation = std::numeric_limits<double>::infinity();
  bool converged = false;

  while (iter < max_iter) {
    // Maximal violating pair over -y_t * grad_t: the largest ascent candidate
    // among coordinates free to increase vs. the smallest among those free to
    // decrease.
    double up_best = -std::numeric_limits<double>::infinity();
    double low_best = std::numeric_limits<double>::infinity();
    Index i = -1;
    Index j = -1;
    for (Index t = 0; t < n; ++t) {
      const double v = -yd[t] * grad[t];
      const bool positive = y[t] == 1;
      const bool can_up = positive ? alpha[t] < c : alpha[t] > 0.0;
      const bool can_down = positive ? alpha[t] > 0.0 : alpha[t] < c;
      if (can_up && v > up_best) {
        up_best = v;
        i = t;
      }
      if (can_down && v < low_best) {
        low_best = v;
        j = t;
      }
    }
    if (i < 0 || j < 0) {  // no feasible direction remains
      violation = 0.0;
      converged = true;
      break;
    }
    violation = up_best - low_best;
    if (violation <= settings.kkt_tolerance) {
      converged = true;
      break;
    }
    ++iter;

    const Eigen::VectorXd& ki = cache.row(i);
    const Eigen::VectorXd& kj = cache.row(j);  // cannot evict ki (see cache contract)

    const double ai_old = alpha[i];
    const double aj_old = alpha[j];
    const double yi = yd[i];
    const double yj = yd[j];

    double eta = ki[i] + kj[j] - 2.0 * ki[j];
    if (eta < kEtaFloor) eta = kEtaFloor;

    // Analytic step for the pair, then clipping by explicit region tests.
    // When a variable leaves its box it is assigned the exact bound and its
    // partner is reconstructed from the conserved sum/difference. Bound hits
    // must be bitwise-exact: a coordinate parked within an ulp of its bound
    // still looks free to the selection above, gets re-picked, and moves by
    // zero, so inexact bound arithmetic livelocks the whole loop.
    double ai_new;
    double aj_new;
    if (y[i] != y[j]) {
      const double step = (-grad[i] - grad[j]) / eta;
      const double diff = ai_old - aj_old;  // conserved by the pair move
      ai_new = ai_old + step;
      aj_new = aj_old + step;
      if (diff > 0.0) {
        if (aj_new < 0.0) {
          aj_new = 0.0;
          ai_new = diff;
        }
      } else {
        if (ai_new < 0.0) {
          ai_new = 0.0;
          aj_new = -diff;
        }
      }
      if (diff > 0.0) {
        if (ai_new > c) {
          ai_new = c;
          aj_new = c - diff;
        }
      } else {
        if (aj_new > c) {
          aj_new = c;
          ai_new = c + diff;
        }
      }
    } else {
      const double step = (grad[i] - grad[j]) / eta;
      const double sum = ai_old + aj_old;  // conserved by the pair move
      ai_new = ai_old - step;
      aj_new = aj_old + step;
      if (sum > c) {
        if (ai_new > c) {
          ai_new = c;
          aj_new = sum - c;
        }
      } else {
        if (aj_new < 0.0) {
          aj_new = 0.0;
          ai_new = sum;
        }
      }
      if (sum > c) {
        if (aj_new > c) {
          aj_new = c;
          ai_new = sum - c;
        }
      } else {
        if (ai_new < 0.0) {
          ai_new = 0.0;
          aj_new = sum;
        }
      }
    }

    if (ai_new == ai_old && aj_new == aj_old) {
      // The pair moved by exactly zero: both coordinates are pinned. Retrying
      // the same pair cannot help, so repeated zero steps are a stall.
      if (++stall >= settings.max_passes_without_progress) {
        throw ConvergenceError(
            "optimizer stalled: no progress on the worst KKT-violating pair (violation " +
                std::to_string(violation) + ", tolerance " +
                std::to_string(settings.kkt_tolerance) + ")",
            diagnostics(iter, violation, false));
      }
      continue;
    }
    stall = 0;
    alpha[i] = ai_new;
    alpha[j] = aj_new;

    const double wi = (ai_new - ai_old) * yi;
    const double wj = (aj_new - aj_old) * yj;
    grad.array() += wi * (yd.array() * ki.array()) + wj * (yd.array() * kj.array());
  }

  if (!converged) {
    throw ConvergenceError("iteration cap " + std::to_string(max_iter) +
                               " reached before KKT satisfaction (violation " +
                               std::to_string(violation) + ")",
                           diagnostics(iter, violation, false));
  }

  // Bias: mean of the per-point estimates -y_t * grad_t over margin support
  // vectors; when none exist, the midpoint of the interval the KKT
  // inequalities leave feasible.
  double bias = 0.0;
  Index margin_count = 0;
  for (Index t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < c) {
      bias += -yd[t] * grad[t];
      ++margin_count;
    }
  }
  if (margin_count > 0) {
    bias /= static_cast<double>(margin_count);
  } else {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Index t = 0; t < n; ++t) {
      const double candidate = -yd[t] * grad[t];
      const bool at_zero = alpha[t] <= 0.0;
      const bool lower = (at_zero && y[t] == 1) || (!at_zero && y[t] == -1);
      if (lower) {
        lo = std::max(lo, candidate);
      } else {
        hi = std::min(hi, candidate);
      }
    }
    if (std::isfinite(lo) && std::isfinite(hi)) {
      bias = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      bias = lo;
    } else if (std::isfinite(hi)) {
      bias = hi;
    }
  }

  std::vector<Index> support;
  for (Index t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) support.push_back(t);
  }
  if (support.empty()) {
    throw ConvergenceError("optimizer converged with an empty support set",
                           diagnostics(iter, violation, false));
  }

  BinarySvmModel model;
  model.support_vectors.resize(static_cast<Index>(support.size()), x.cols());
  model.dual_coefs.resize(static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    const Index t = support[k];
    model.support_vectors.row(static_cast<Index>(k)) = x.row(t);
    model.dual_coefs[static_cast<Index>(k)] = alpha[t] * yd[t];
  }
  model.bias = bias;
  model.kernel = kernel;
  model.c = c;
  model.training_diagnostics = diagnostics(iter, violation, true);
  return model;
}

double decision_value(const BinarySvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.support_vectors.cols()) {
    throw std::invalid_argument("input has dimension " + std::to_string(x.size()) +
                                " but the model expects " +
                                std::to_string(model.support_vectors.cols()));
  }
  Eigen::MatrixXd one(1, x.size());
  one.row(0) = x.transpose();
  return decision_values(model, one)[0];
}

Eigen::VectorXd decision_values(const BinarySvmModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.support_vectors.cols()) {
    throw std::invalid_argument("input has dimension " + std::to_string(x.cols()) +
                                " but the model expects " +
                                std::to_string(model.support_vectors.cols()));
  }
  Eigen::VectorXd out(x.rows());
  for (Index start = 0; start < x.rows(); start += kPredictChunk) {
    const Index count = std::min<Index>(kPredictChunk, x.rows() - start);
    const Eigen::MatrixXd k =
        kernel_matrix(model.kernel, x.middleRows(start, count), model.support_vectors);
    out.segment(start, count) = (k * model.dual_coefs).array() + model.bias;
  }
  return out;
}

}  // namespace tcdiag
