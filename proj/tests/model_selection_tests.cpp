#include <doctest.h>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

#include "tcdiag/dataset.hpp"
#include "tcdiag/errors.hpp"
#include "tcdiag/model_selection.hpp"
#include "tcdiag/parallel.hpp"
#include "test_support.hpp"

using namespace tcdiag;

namespace {

LabeledDataset tiny_corpus(Index per_class, std::uint64_t seed) {
  return build_training_corpus(TrackCircuitConfig{}, SeverityProfile{}, per_class, seed);
}

HyperGrid singleton_grid() {
  HyperGrid grid;
  grid.c_values = {1.0};
  grid.gamma_values = {0.1};
  grid.kernels = {KernelKind::RBF};
  return grid;
}

}  // namespace

TEST_SUITE("model_selection") {

TEST_CASE("the default grid spans thirty-two combinations") {
  CHECK(HyperGrid{}.size() == 32);
  CHECK_NOTHROW(HyperGrid{}.validate());
  HyperGrid empty;
  empty.c_values.clear();
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("folds deal every class round-robin") {
  const LabeledDataset ds = tiny_corpus(10, 5);
  const auto folds = stratified_kfold(ds, 5, 17);
  REQUIRE(folds.size() == 5);
  for (const auto& fold : folds) {
    CHECK(fold.validation.size() == 6);
    CHECK(fold.train.size() == 24);
    std::array<Index, kNumClasses> counts{};
    for (Index row : fold.validation) {
      ++counts[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(row)])];
    }
    CHECK(counts == std::array<Index, kNumClasses>{2, 2, 2});
  }
}

TEST_CASE("uneven classes spread their remainder across folds") {
  const LabeledDataset ds = tiny_corpus(11, 6);
  const auto folds = stratified_kfold(ds, 5, 18);
  std::array<Index, kNumClasses> totals{};
  for (const auto& fold : folds) {
    std::array<Index, kNumClasses> counts{};
    for (Index row : fold.validation) {
      ++counts[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(row)])];
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      CHECK(counts[c] >= 2);
      CHECK(counts[c] <= 3);
      totals[c] += counts[c];
    }
  }
  CHECK(totals == std::array<Index, kNumClasses>{11, 11, 11});
}

TEST_CASE("folds partition the dataset") {
  const LabeledDataset ds = tiny_corpus(8, 7);
  const auto folds = stratified_kfold(ds, 4, 19);
  std::set<Index> seen;
  for (const auto& fold : folds) {
    for (Index row : fold.validation) {
      CHECK(seen.insert(row).second);  // no row validates twice
    }
    // train = complement of validation
    std::set<Index> train(fold.train.begin(), fold.train.end());
    CHECK(train.size() == fold.train.size());
    for (Index row : fold.validation) CHECK(train.count(row) == 0);
    CHECK(fold.train.size() + fold.validation.size() == static_cast<std::size_t>(ds.size()));
  }
  CHECK(seen.size() == static_cast<std::size_t>(ds.size()));
}

TEST_CASE("fold counts beyond a class size are rejected") {
  const LabeledDataset ds = tiny_corpus(4, 8);
  CHECK_THROWS_AS(stratified_kfold(ds, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(stratified_kfold(ds, 1, 1), std::invalid_argument);
  CHECK_NOTHROW(stratified_kfold(ds, 4, 1));
}

TEST_CASE("a singleton grid wins its own search") {
  const LabeledDataset ds = tiny_corpus(12, 9);
  const CvResult cv = grid_search(ds, singleton_grid(), 2, SmoSettings{}, 3, true);
  REQUIRE(cv.cells.size() == 1);
  CHECK(cv.best_index == 0);
  CHECK(cv.folds == 2);
  REQUIRE(cv.cells[0].fold_accuracies.size() == 2);
  CHECK(cv.cells[0].error_note.empty());
  double mean = 0.0;
  for (double acc : cv.cells[0].fold_accuracies) {
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    mean += acc;
  }
  mean /= 2.0;
  CHECK(cv.cells[0].mean_accuracy == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("reordering the grid lists does not change the winner") {
  const LabeledDataset ds = tiny_corpus(12, 10);
  HyperGrid forward;
  forward.c_values = {1.0, 10.0};
  forward.gamma_values = {0.01, 0.1};
  forward.kernels = {KernelKind::RBF};

  HyperGrid backward = forward;
  std::reverse(backward.c_values.begin(), backward.c_values.end());
  std::reverse(backward.gamma_values.begin(), backward.gamma_values.end());

  const CvResult a = grid_search(ds, forward, 2, SmoSettings{}, 21, true);
  const CvResult b = grid_search(ds, backward, 2, SmoSettings{}, 21, true);
  CHECK(a.best().point.c == b.best().point.c);
  CHECK(a.best().point.gamma == b.best().point.gamma);
  CHECK(a.best().point.kind == b.best().point.kind);
  CHECK(a.best().mean_accuracy == doctest::Approx(b.best().mean_accuracy).epsilon(1e-12));
}

TEST_CASE("every combination carries one accuracy per fold and the best mean wins") {
  const LabeledDataset ds = tiny_corpus(9, 11);
  HyperGrid grid;
  grid.c_values = {1.0, 10.0};
  grid.gamma_values = {0.1};
  grid.kernels = {KernelKind::RBF, KernelKind::Polynomial};

  const CvResult cv = grid_search(ds, grid, 3, SmoSettings{}, 4, true);
  REQUIRE(cv.cells.size() == 4);
  double best_seen = -1.0;
  for (const auto& cell : cv.cells) {
    REQUIRE(cell.fold_accuracies.size() == 3);
    best_seen = std::max(best_seen, cell.mean_accuracy);
  }
  CHECK(cv.best().mean_accuracy == best_seen);
}

TEST_CASE("convergence failures are recorded per combination, not thrown") {
  const LabeledDataset ds = tiny_corpus(8, 12);
  SmoSettings strangled;
  strangled.max_iterations = 1;
  const CvResult cv = grid_search(ds, singleton_grid(), 2, strangled, 5, true);
  REQUIRE(cv.cells.size() == 1);
  CHECK(!cv.cells[0].error_note.empty());
  CHECK(cv.cells[0].mean_accuracy == 0.0);
}

TEST_CASE("search results are identical across worker thread counts") {
  const LabeledDataset ds = tiny_corpus(10, 13);
  HyperGrid grid;
  grid.c_values = {1.0, 10.0};
  grid.gamma_values = {0.1};
  grid.kernels = {KernelKind::RBF};

  set_thread_cap(1);
  const std::string serial = render_cv_table(grid_search(ds, grid, 2, SmoSettings{}, 6, true));
  set_thread_cap(4);
  const std::string threaded = render_cv_table(grid_search(ds, grid, 2, SmoSettings{}, 6, true));
  set_thread_cap(0);
  CHECK(serial == threaded);
}

TEST_CASE("the result table round-trips through its text form") {
  const LabeledDataset ds = tiny_corpus(9, 14);
  HyperGrid grid;
  grid.c_values = {1.0, 10.0};
  grid.gamma_values = {0.001, 0.1};
  grid.kernels = {KernelKind::RBF};

  const CvResult cv = grid_search(ds, grid, 2, SmoSettings{}, 7, true);
  const std::string table = render_cv_table(cv);
  const CvResult parsed = parse_cv_table(table);
  CHECK(render_cv_table(parsed) == table);
  CHECK(parsed.best_index == cv.best_index);
  CHECK(parsed.folds == cv.folds);
  CHECK(parsed.seed == cv.seed);
  REQUIRE(parsed.cells.size() == cv.cells.size());
  for (std::size_t i = 0; i < cv.cells.size(); ++i) {
    CHECK(parsed.cells[i].mean_accuracy == cv.cells[i].mean_accuracy);
    CHECK(parsed.cells[i].fold_accuracies == cv.cells[i].fold_accuracies);
  }

  // Error notes survive the round trip as well.
  SmoSettings strangled;
  strangled.max_iterations = 1;
  const CvResult failed = grid_search(ds, singleton_grid(), 2, strangled, 8, true);
  const std::string failed_table = render_cv_table(failed);
  CHECK(render_cv_table(parse_cv_table(failed_table)) == failed_table);
  CHECK(!parse_cv_table(failed_table).cells[0].error_note.empty());

  CHECK_THROWS_AS(parse_cv_table("nonsense\n"), ParseError);
}

TEST_CASE("the human-readable summary marks exactly one winner") {
  const LabeledDataset ds = tiny_corpus(9, 15);
  HyperGrid grid;
  grid.c_values = {1.0, 10.0};
  grid.gamma_values = {0.1};
  grid.kernels = {KernelKind::RBF};
  const CvResult cv = grid_search(ds, grid, 2, SmoSettings{}, 9, true);

  const std::string text = render_cv_text(cv);
  CHECK(text.find("best: ") != std::string::npos);
  CHECK(text.find("rbf") != std::string::npos);
  std::size_t stars = 0;
  for (std::size_t pos = 0; (pos = text.find("\n* ", pos)) != std::string::npos; ++pos) {
    ++stars;
  }
  CHECK(stars == 1);
  // Two renders agree byte for byte.
  CHECK(render_cv_text(cv) == text);
}

}  // TEST_SUITE
