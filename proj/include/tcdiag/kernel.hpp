#pragma once

#include <Eigen/Dense>

#include <string>

namespace tcdiag {

enum class KernelKind { RBF, Polynomial };

std::string kernel_kind_name(KernelKind kind);  // "rbf" / "poly"
KernelKind kernel_kind_from_name(const std::string& name);

struct KernelSpec {
  KernelKind kind = KernelKind::RBF;
  double gamma = 0.1;
  int degree = 3;      // Polynomial only
  double coef0 = 0.0;  // Polynomial only

  void validate() const;
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// k(x, y). RBF uses the inner-product expansion of the squared distance
// (clamped at 0) so x == y gives exactly 1.0 and the scalar and batch paths
// share one formula.
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

// Squared norm of every row, computed the same way the kernel routines do.
Eigen::VectorXd row_squared_norms(const Eigen::MatrixXd& x);

// out[i] = k(X.row(i), y). sq_rows must be row_squared_norms(x); sq_y the
// query's squared norm. The inner products come from one matrix-vector
// product, so this is the fast path for kernel rows.
void kernel_column(const KernelSpec& spec, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& sq_rows, const Eigen::VectorXd& y, double sq_y,
                   Eigen::VectorXd& out);

// K(i, j) = k(a.row(i), b.row(j)) via one matrix product.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

}  // namespace tcdiag
