#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "tcdiag/kernel.hpp"
#include "tcdiag/rng.hpp"

using namespace tcdiag;

namespace {

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index dims, double scale = 2.0) {
  Eigen::VectorXd v(dims);
  for (Eigen::Index i = 0; i < dims; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

KernelSpec rbf(double gamma) {
  KernelSpec spec;
  spec.kind = KernelKind::RBF;
  spec.gamma = gamma;
  return spec;
}

KernelSpec poly(double gamma, int degree, double coef0) {
  KernelSpec spec;
  spec.kind = KernelKind::Polynomial;
  spec.gamma = gamma;
  spec.degree = degree;
  spec.coef0 = coef0;
  return spec;
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("kernel kind names round-trip") {
  CHECK(kernel_kind_name(KernelKind::RBF) == "rbf");
  CHECK(kernel_kind_name(KernelKind::Polynomial) == "poly");
  CHECK(kernel_kind_from_name("rbf") == KernelKind::RBF);
  CHECK(kernel_kind_from_name("poly") == KernelKind::Polynomial);
  CHECK_THROWS_AS(kernel_kind_from_name("linear"), std::invalid_argument);
}

TEST_CASE("radial similarity of a point with itself is exactly one") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = random_vector(rng, 1 + rng.uniform_int(0, 7), 40.0);
    CHECK(kernel_eval(rbf(0.1), x, x) == 1.0);
    CHECK(kernel_eval(rbf(1.0), x, x) == 1.0);
  }
}

TEST_CASE("radial similarity at unit distance matches the closed form") {
  Eigen::VectorXd x(1), y(1);
  x << 0.0;
  y << 1.0;
  CHECK(std::abs(kernel_eval(rbf(0.1), x, y) - std::exp(-0.1)) <= 1e-12);
}

TEST_CASE("polynomial similarity matches the closed form") {
  Eigen::VectorXd x(2), y(2);
  x << 1.0, 1.0;
  y << 1.0, 1.0;
  CHECK(kernel_eval(poly(1.0, 2, 0.0), x, y) == 4.0);
  CHECK(kernel_eval(poly(1.0, 1, 0.0), x, y) == 2.0);
  CHECK(kernel_eval(poly(0.5, 2, 1.0), x, y) == 4.0);  // (0.5 * 2 + 1)^2
}

TEST_CASE("both kernels are symmetric in their arguments") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index dims = 1 + rng.uniform_int(0, 5);
    const Eigen::VectorXd x = random_vector(rng, dims);
    const Eigen::VectorXd y = random_vector(rng, dims);
    CHECK(kernel_eval(rbf(0.3), x, y) == kernel_eval(rbf(0.3), y, x));
    CHECK(kernel_eval(poly(0.7, 3, 1.0), x, y) == kernel_eval(poly(0.7, 3, 1.0), y, x));
  }
}

TEST_CASE("radial similarities lie in (0, 1] and reach 1 only at zero distance") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index dims = 1 + rng.uniform_int(0, 5);
    const Eigen::VectorXd x = random_vector(rng, dims);
    Eigen::VectorXd y = random_vector(rng, dims);
    const double k = kernel_eval(rbf(0.5), x, y);
    CHECK(k > 0.0);
    CHECK(k <= 1.0);
    if ((x - y).norm() > 1e-3) CHECK(k < 1.0);
  }
}

TEST_CASE("similarity matrices over random point sets are positive semidefinite") {
  Rng rng(4);
  for (int set = 0; set < 5; ++set) {
    Eigen::MatrixXd points(20, 3);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      points.row(i) = random_vector(rng, 3).transpose();
    }
    for (const KernelSpec& spec : {rbf(0.5), rbf(0.01), poly(0.7, 3, 1.0)}) {
      const Eigen::MatrixXd gram = kernel_matrix(spec, points, points);
      CHECK(((gram - gram.transpose()).cwiseAbs().maxCoeff()) <= 1e-12);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(gram);
      CHECK(eigs.eigenvalues().minCoeff() >= -1e-8);
    }
  }
}

TEST_CASE("batch kernel paths agree with the scalar path") {
  Rng rng(5);
  Eigen::MatrixXd a(7, 4), b(5, 4);
  for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) = random_vector(rng, 4).transpose();
  for (Eigen::Index i = 0; i < b.rows(); ++i) b.row(i) = random_vector(rng, 4).transpose();

  for (const KernelSpec& spec : {rbf(0.2), poly(1.0, 2, 0.5)}) {
    const Eigen::MatrixXd k = kernel_matrix(spec, a, b);
    REQUIRE(k.rows() == 7);
    REQUIRE(k.cols() == 5);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.rows(); ++j) {
        CHECK(k(i, j) == doctest::Approx(kernel_eval(spec, a.row(i).transpose(), b.row(j).transpose())).epsilon(1e-12));
      }
    }

    const Eigen::VectorXd sq = row_squared_norms(a);
    Eigen::VectorXd column(a.rows());
    const Eigen::VectorXd query = b.row(2).transpose();
    kernel_column(spec, a, sq, query, query.squaredNorm(), column);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      CHECK(column[i] == doctest::Approx(kernel_eval(spec, a.row(i).transpose(), query)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mismatched dimensions are rejected") {
  Eigen::VectorXd x(3), y(4);
  x.setZero();
  y.setZero();
  CHECK_THROWS_AS(kernel_eval(rbf(0.1), x, y), std::invalid_argument);
}

TEST_CASE("kernel settings are validated") {
  KernelSpec zero_gamma = rbf(0.0);
  CHECK_THROWS_AS(zero_gamma.validate(), std::invalid_argument);
  KernelSpec negative_gamma = rbf(-1.0);
  CHECK_THROWS_AS(negative_gamma.validate(), std::invalid_argument);
  KernelSpec bad_degree = poly(1.0, 0, 0.0);
  CHECK_THROWS_AS(bad_degree.validate(), std::invalid_argument);
  CHECK_NOTHROW(rbf(0.0001).validate());
  CHECK_NOTHROW(poly(1.0, 3, 0.0).validate());
}

}  // TEST_SUITE
