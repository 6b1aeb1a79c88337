#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "tcdiag/dataset.hpp"
#include "tcdiag/errors.hpp"
#include "tcdiag/multiclass.hpp"
#include "tcdiag/parallel.hpp"
#include "tcdiag/rng.hpp"
#include "test_support.hpp"

using namespace tcdiag;
using testsupport::classifier_fixture;
using testsupport::TempDir;

namespace {

// A hand-built ensemble whose three pairwise decisions are (numerically) the
// chosen constants: a single zero support vector with a vanishing weight
// leaves only the bias.
MulticlassSvmModel constant_vote_model(double bias01, double bias02, double bias12) {
  MulticlassSvmModel model;
  const std::array<std::pair<AnomalyClass, AnomalyClass>, 3> pairs = {
      std::pair{AnomalyClass::BadContact, AnomalyClass::TractionNoise},
      std::pair{AnomalyClass::BadContact, AnomalyClass::ContactInterrupted},
      std::pair{AnomalyClass::TractionNoise, AnomalyClass::ContactInterrupted}};
  const std::array<double, 3> biases = {bias01, bias02, bias12};
  for (std::size_t p = 0; p < 3; ++p) {
    BinarySvmModel& bm = model.binary_models[p];
    bm.support_vectors = Eigen::MatrixXd::Zero(1, 4);
    bm.dual_coefs = Eigen::VectorXd::Constant(1, 1e-300);
    bm.bias = biases[p];
    bm.c = 1.0;
    bm.kernel.kind = KernelKind::RBF;
    bm.kernel.gamma = 0.1;
    bm.class_pair = pairs[p];
  }
  return model;
}

}  // namespace

TEST_SUITE("multiclass") {

TEST_CASE("pairwise models cover the class pairs in a fixed order") {
  const auto& model = classifier_fixture().model;
  CHECK(model.binary_models[0].class_pair ==
        std::pair{AnomalyClass::BadContact, AnomalyClass::TractionNoise});
  CHECK(model.binary_models[1].class_pair ==
        std::pair{AnomalyClass::BadContact, AnomalyClass::ContactInterrupted});
  CHECK(model.binary_models[2].class_pair ==
        std::pair{AnomalyClass::TractionNoise, AnomalyClass::ContactInterrupted});
}

TEST_CASE("every support vector is a training row of its pair's classes") {
  const auto& fixture = classifier_fixture();
  REQUIRE(fixture.model.scaling.has_value());
  const Eigen::MatrixXd scaled = fixture.model.scaling->apply(fixture.corpus.windows);

  for (const BinarySvmModel& bm : fixture.model.binary_models) {
    for (Eigen::Index s = 0; s < bm.support_vectors.rows(); ++s) {
      bool found = false;
      for (Eigen::Index r = 0; r < scaled.rows() && !found; ++r) {
        const AnomalyClass label = fixture.corpus.labels[static_cast<std::size_t>(r)];
        if (label != bm.class_pair.first && label != bm.class_pair.second) continue;
        found = (scaled.row(r).array() == bm.support_vectors.row(s).array()).all();
      }
      CHECK(found);
    }
  }
}

TEST_CASE("majority vote picks the class winning two pairwise decisions") {
  // (0,1) -> BadContact, (0,2) -> BadContact, (1,2) -> ContactInterrupted.
  const MulticlassSvmModel model = constant_vote_model(1.0, 1.0, -1.0);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 4);
  std::vector<VoteDetail> details;
  const auto picked = predict_classes(model, x, &details);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0] == AnomalyClass::BadContact);
  CHECK(details[0].votes == std::array<int, 3>{2, 0, 1});
  CHECK(details[0].winner == AnomalyClass::BadContact);
}

TEST_CASE("three-way ties break on summed decision magnitude, then lowest code") {
  // Each class wins exactly one pair: magnitudes 0.5 / 0.3 / 0.7.
  const MulticlassSvmModel by_magnitude = constant_vote_model(0.5, -0.7, 0.3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 4);
  std::vector<VoteDetail> details;
  const auto picked = predict_classes(by_magnitude, x, &details);
  CHECK(picked[0] == AnomalyClass::ContactInterrupted);
  CHECK(details[0].votes == std::array<int, 3>{1, 1, 1});

  // Equal magnitudes: the lowest class code wins.
  const MulticlassSvmModel by_code = constant_vote_model(0.5, -0.5, 0.5);
  CHECK(predict_classes(by_code, x)[0] == AnomalyClass::BadContact);
}

TEST_CASE("training requires all three classes") {
  LabeledDataset two_classes;
  two_classes.windows = Eigen::MatrixXd::Constant(4, kWindowWidth, 20.0);
  two_classes.windows.col(0) << 1, 2, 3, 4;
  two_classes.labels = {AnomalyClass::BadContact, AnomalyClass::BadContact,
                        AnomalyClass::TractionNoise, AnomalyClass::TractionNoise};
  CHECK_THROWS_AS(train_one_vs_one(two_classes, 1.0, KernelSpec{}), std::invalid_argument);
}

TEST_CASE("feature scaling maps the fitted range onto the unit interval") {
  Eigen::MatrixXd x(3, 2);
  x << 0.0, 10.0, 5.0, 10.0, 10.0, 10.0;
  const FeatureScaling scaling = fit_feature_scaling(x);
  CHECK(scaling.lo[0] == 0.0);
  CHECK(scaling.lo[1] == 10.0);
  CHECK(scaling.span[0] == 10.0);
  CHECK(scaling.span[1] == 1.0);  // constant feature: floored span, no division blowup

  const Eigen::MatrixXd mapped = scaling.apply(x);
  CHECK(mapped(0, 0) == 0.0);
  CHECK(mapped(1, 0) == 0.5);
  CHECK(mapped(2, 0) == 1.0);
  CHECK(mapped.col(1).cwiseAbs().maxCoeff() == 0.0);

  // The transform stays affine outside the fitted range.
  Eigen::VectorXd outside(2);
  outside << 20.0, 12.0;
  const Eigen::VectorXd mapped_outside =
      scaling.apply(Eigen::Ref<const Eigen::VectorXd>(outside));
  CHECK(mapped_outside[0] == 2.0);
  CHECK(mapped_outside[1] == 2.0);
}

TEST_CASE("generated windows are classified back to their generating category") {
  const auto& fixture = classifier_fixture();
  const LabeledDataset probe =
      build_training_corpus(fixture.config, SeverityProfile{}, 10, 987654321);
  const auto predictions = predict_classes(fixture.model, probe.windows);

  std::array<int, kNumClasses> correct{};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == probe.labels[i]) {
      ++correct[static_cast<std::size_t>(probe.labels[i])];
    }
  }
  // Fresh draws, never seen in training; the fixture model is small but the
  // classes are far apart, so demand at least 8 of 10 per class.
  for (int count : correct) CHECK(count >= 8);
}

TEST_CASE("predictions do not depend on the worker thread count") {
  const auto& fixture = classifier_fixture();
  const LabeledDataset probe =
      build_training_corpus(fixture.config, SeverityProfile{}, 10, 31337);

  set_thread_cap(1);
  const auto serial = predict_classes(fixture.model, probe.windows);
  set_thread_cap(3);
  const auto threaded = predict_classes(fixture.model, probe.windows);
  set_thread_cap(0);
  CHECK(serial == threaded);
}

TEST_CASE("model files round-trip fingerprints, scaling, and decisions") {
  const auto& fixture = classifier_fixture();
  TempDir dir("model-roundtrip");
  const auto path = dir.file("classifier.model");
  save_model(fixture.model, path, {"trained for the round-trip test"});

  const MulticlassSvmModel loaded = load_model(path);
  CHECK(model_fingerprint(loaded) == model_fingerprint(fixture.model));
  CHECK(loaded.meta.seed == fixture.model.meta.seed);
  CHECK(loaded.meta.c == fixture.model.meta.c);
  CHECK(loaded.meta.kernel == fixture.model.meta.kernel);
  CHECK(loaded.meta.train_rows == fixture.model.meta.train_rows);
  REQUIRE(loaded.scaling.has_value());
  CHECK(testsupport::exact_equal(loaded.scaling->lo, fixture.model.scaling->lo));
  CHECK(testsupport::exact_equal(loaded.scaling->span, fixture.model.scaling->span));

  const LabeledDataset probe =
      build_training_corpus(fixture.config, SeverityProfile{}, 5, 2222);
  for (std::size_t p = 0; p < 3; ++p) {
    const Eigen::MatrixXd scaled_probe = fixture.model.scaling->apply(probe.windows);
    const Eigen::VectorXd before =
        decision_values(fixture.model.binary_models[p], scaled_probe);
    const Eigen::VectorXd after = decision_values(loaded.binary_models[p], scaled_probe);
    for (Eigen::Index i = 0; i < before.size(); ++i) {
      CHECK(std::abs(before[i] - after[i]) <= 1e-9);
    }
  }
  CHECK(predict_classes(loaded, probe.windows) ==
        predict_classes(fixture.model, probe.windows));
}

TEST_CASE("tampered model files are rejected") {
  const auto& fixture = classifier_fixture();
  TempDir dir("model-tamper");
  const auto path = dir.file("classifier.model");
  save_model(fixture.model, path);

  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  // Corrupt one digit of a stored coefficient (not the fingerprint line).
  const auto pos = content.find("bias");
  REQUIRE(pos != std::string::npos);
  const auto digit = content.find_first_of("0123456789", pos);
  REQUIRE(digit != std::string::npos);
  content[digit] = content[digit] == '9' ? '8' : '9';
  const auto tampered = dir.file("tampered.model");
  std::ofstream(tampered, std::ios::binary) << content;
  CHECK_THROWS_AS(load_model(tampered), ParseError);

  // Truncated files are rejected, too.
  const auto truncated = dir.file("truncated.model");
  std::ofstream(truncated, std::ios::binary) << content.substr(0, content.size() / 2);
  CHECK_THROWS_AS(load_model(truncated), ParseError);
}

}  // TEST_SUITE
