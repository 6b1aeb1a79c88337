#include "tcdiag/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace tcdiag {
namespace {

double ipow(double base, int exponent) {
  double r = 1.0;
  while (exponent > 0) {
    if (exponent & 1) r *= base;
    base *= base;
    exponent >>= 1;
  }
  return r;
}

// Shared per-element transforms so every evaluation path rounds identically.
double rbf_from_parts(double gamma, double sq_x, double sq_y, double dot) {
  double d2 = sq_x + sq_y - 2.0 * dot;
  if (d2 < 0.0) d2 = 0.0;
  return std::exp(-gamma * d2);
}

double poly_from_dot(const KernelSpec& spec, double dot) {
  return ipow(spec.gamma * dot + spec.coef0, spec.degree);
}

}  // namespace

std::string kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::RBF: return "rbf";
    case KernelKind::Polynomial: return "poly";
  }
  throw std::invalid_argument("unknown kernel kind");
}

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "rbf") return KernelKind::RBF;
  if (name == "poly") return KernelKind::Polynomial;
  throw std::invalid_argument("kernel must be \"rbf\" or \"poly\", got \"" + name + "\"");
}

void KernelSpec::validate() const {
  if (!std::isfinite(gamma) || gamma <= 0.0) {
    throw std::invalid_argument("kernel gamma must be > 0");
  }
  if (kind == KernelKind::Polynomial) {
    if (degree < 1) throw std::invalid_argument("polynomial degree must be >= 1");
    if (!std::isfinite(coef0)) throw std::invalid_argument("coef0 must be finite");
  }
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  spec.validate();
  if (x.size() != y.size()) {
    throw std::invalid_argument("kernel arguments have different dimensions: " +
                                std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  const double dot = x.dot(y);
  if (spec.kind == KernelKind::RBF) {
    return rbf_from_parts(spec.gamma, x.dot(x), y.dot(y), dot);
  }
  return poly_from_dot(spec, dot);
}

Eigen::VectorXd row_squared_norms(const Eigen::MatrixXd& x) {
  Eigen::VectorXd sq(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sq[i] = x.row(i).dot(x.row(i));
  }
  return sq;
}

void kernel_column(const KernelSpec& spec, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& sq_rows, const Eigen::VectorXd& y, double sq_y,
                   Eigen::VectorXd& out) {
  out.noalias() = x * y;  // inner products
  if (spec.kind == KernelKind::RBF) {
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out[i] = rbf_from_parts(spec.gamma, sq_rows[i], sq_y, out[i]);
    }
  } else {
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out[i] = poly_from_dot(spec, out[i]);
    }
  }
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  spec.validate();
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("kernel matrix arguments have different dimensions");
  }
  Eigen::MatrixXd k(a.rows(), b.rows());
  k.noalias() = a * b.transpose();
  if (spec.kind == KernelKind::RBF) {
    const Eigen::VectorXd sq_a = row_squared_norms(a);
    const Eigen::VectorXd sq_b = row_squared_norms(b);
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      for (Eigen::Index i = 0; i < k.rows(); ++i) {
        k(i, j) = rbf_from_parts(spec.gamma, sq_a[i], sq_b[j], k(i, j));
      }
    }
  } else {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      for (Eigen::Index i = 0; i < k.rows(); ++i) {
        k(i, j) = poly_from_dot(spec, k(i, j));
      }
    }
  }
  return k;
}

}  // namespace tcdiag
