#include "tcdiag/model_selection.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "tcdiag/errors.hpp"
#include "tcdiag/num_format.hpp"
#include "tcdiag/parallel.hpp"
#include "tcdiag/rng.hpp"
#include "tcdiag/text_parse.hpp"

namespace tcdiag {
namespace {

constexpr std::string_view kCvHeader = "tcdiag-cv v1";

// Strictly better under the value-based ordering: higher mean accuracy, then
// smaller C, then smaller gamma, then RBF before Polynomial.
bool better(const CvCell& a, const CvCell& b) {
  if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
  if (a.point.c != b.point.c) return a.point.c < b.point.c;
  if (a.point.gamma != b.point.gamma) return a.point.gamma < b.point.gamma;
  return a.point.kind == KernelKind::RBF && b.point.kind == KernelKind::Polynomial;
}

std::size_t pick_best(const std::vector<CvCell>& cells) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (better(cells[i], cells[best])) best = i;
  }
  return best;
}

void append_point(std::string& out, const GridPoint& p) {
  append_double(out, p.c);
  out += ' ';
  append_double(out, p.gamma);
  out += ' ';
  out += kernel_kind_name(p.kind);
}

}  // namespace

void HyperGrid::validate() const {
  if (c_values.empty() || gamma_values.empty() || kernels.empty()) {
    throw std::invalid_argument("hyperparameter grid lists must be non-empty");
  }
  for (double c : c_values) {
    if (!std::isfinite(c) || c <= 0.0) throw std::invalid_argument("grid C values must be > 0");
  }
  for (double g : gamma_values) {
    if (!std::isfinite(g) || g <= 0.0) {
      throw std::invalid_argument("grid gamma values must be > 0");
    }
  }
}

std::vector<FoldSplit> stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed) {
  ds.validate();
  if (k < 2) throw std::invalid_argument("cross-validation needs k >= 2");
  const auto counts = ds.class_counts();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (counts[c] < k) {
      throw std::invalid_argument("class " + anomaly_class_name(static_cast<AnomalyClass>(c)) +
                                  " has " + std::to_string(counts[c]) + " windows, fewer than " +
                                  std::to_string(k) + " folds");
    }
  }

  // Shuffle each class independently, then deal its rows round-robin so the
  // per-class share of any two folds differs by at most one.
  std::vector<int> fold_of(static_cast<std::size_t>(ds.size()), 0);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<Index> rows;
    for (Index i = 0; i < ds.size(); ++i) {
      if (static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)]) == c) {
        rows.push_back(i);
      }
    }
    Rng rng(derive_seed(seed, c));
    shuffle_indices(rows, rng);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      fold_of[static_cast<std::size_t>(rows[i])] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
  }

  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  for (Index i = 0; i < ds.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      auto& fold = folds[static_cast<std::size_t>(f)];
      (fold_of[static_cast<std::size_t>(i)] == f ? fold.validation : fold.train).push_back(i);
    }
  }
  return folds;
}

CvResult grid_search(const LabeledDataset& ds, const HyperGrid& grid, int k,
                     const SmoSettings& settings, std::uint64_t seed, bool scale_features) {
  grid.validate();
  settings.validate();
  const std::vector<FoldSplit> folds = stratified_kfold(ds, k, derive_seed(seed, 0));

  std::vector<GridPoint> points;
  points.reserve(grid.size());
  for (double c : grid.c_values) {
    for (double g : grid.gamma_values) {
      for (KernelKind kind : grid.kernels) {
        points.push_back(GridPoint{c, g, kind});
      }
    }
  }

  std::vector<LabeledDataset> fold_train(folds.size());
  std::vector<LabeledDataset> fold_valid(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    fold_train[f] = take_rows(ds, folds[f].train);
    fold_valid[f] = take_rows(ds, folds[f].validation);
  }

  struct ItemOut {
    double accuracy = 0.0;
    double seconds = 0.0;
    std::string note;
  };
  const std::size_t items = points.size() * folds.size();
  std::vector<ItemOut> outs(items);

  // One work item per (grid point, fold); results land in slots keyed by the
  // item index, so assembly below is independent of completion order.
  parallel_for(static_cast<std::int64_t>(items), [&](std::int64_t item) {
    const std::size_t pi = static_cast<std::size_t>(item) / folds.size();
    const std::size_t f = static_cast<std::size_t>(item) % folds.size();
    const GridPoint& gp = points[pi];
    KernelSpec spec;
    spec.kind = gp.kind;
    spec.gamma = gp.gamma;
    ItemOut& slot = outs[static_cast<std::size_t>(item)];
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const MulticlassSvmModel model =
          train_one_vs_one(fold_train[f], gp.c, spec, settings,
                           derive_seed(seed, 1 + static_cast<std::uint64_t>(item)), scale_features);
      slot.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const std::vector<AnomalyClass> preds = predict_classes(model, fold_valid[f].windows);
      Index hits = 0;
      for (std::size_t r = 0; r < preds.size(); ++r) {
        if (preds[r] == fold_valid[f].labels[r]) ++hits;
      }
      slot.accuracy = static_cast<double>(hits) / static_cast<double>(fold_valid[f].size());
    } catch (const ConvergenceError& e) {
      slot.accuracy = 0.0;
      slot.note = e.what();
    }
  });

  CvResult result;
  result.folds = k;
  result.seed = seed;
  result.cells.resize(points.size());
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    CvCell& cell = result.cells[pi];
    cell.point = points[pi];
    double sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const ItemOut& slot = outs[pi * folds.size() + f];
      cell.fold_accuracies.push_back(slot.accuracy);
      cell.fold_fit_seconds.push_back(slot.seconds);
      sum += slot.accuracy;
      if (!slot.note.empty() && cell.error_note.empty()) cell.error_note = slot.note;
    }
    cell.mean_accuracy =
        cell.error_note.empty() ? sum / static_cast<double>(folds.size()) : 0.0;
  }
  result.best_index = pick_best(result.cells);
  return result;
}

std::string render_cv_table(const CvResult& result) {
  std::string out;
  out += kCvHeader;
  out += '\n';
  out += "folds " + std::to_string(result.folds) + '\n';
  out += "seed " + std::to_string(result.seed) + '\n';
  out += "grid " + std::to_string(result.cells.size()) + '\n';
  for (const CvCell& cell : result.cells) {
    for (std::size_t f = 0; f < cell.fold_accuracies.size(); ++f) {
      out += "fold_row ";
      append_point(out, cell.point);
      out += ' ' + std::to_string(f) + ' ';
      append_double(out, cell.fold_accuracies[f]);
      out += '\n';
    }
  }
  for (const CvCell& cell : result.cells) {
    out += "combo ";
    append_point(out, cell.point);
    out += ' ';
    append_double(out, cell.mean_accuracy);
    if (cell.error_note.empty()) {
      out += " ok";
    } else {
      out += " error ";
      out += cell.error_note;
    }
    out += '\n';
  }
  out += "best ";
  append_point(out, result.best().point);
  out += '\n';
  return out;
}

std::string render_cv_text(const CvResult& result) {
  auto fixed4 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  auto pad_left = [](const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
  };

  std::size_t c_width = 1;
  std::size_t gamma_width = 5;
  std::size_t kernel_width = 6;
  std::vector<std::array<std::string, 3>> heads(result.cells.size());
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const GridPoint& p = result.cells[i].point;
    heads[i] = {format_double(p.c), format_double(p.gamma),
                std::string(kernel_kind_name(p.kind))};
    c_width = std::max(c_width, heads[i][0].size());
    gamma_width = std::max(gamma_width, heads[i][1].size());
    kernel_width = std::max(kernel_width, heads[i][2].size());
  }

  std::string out = "cross-validation: " + std::to_string(result.cells.size()) +
                    " combinations x " + std::to_string(result.folds) + " folds (seed " +
                    std::to_string(result.seed) + ")\n\n";
  out += "  " + pad_left("c", c_width) + "  " + pad_left("gamma", gamma_width) + "  kernel";
  out += std::string(kernel_width > 6 ? kernel_width - 6 : 0, ' ');
  out += "  mean    folds\n";
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const CvCell& cell = result.cells[i];
    out += (i == result.best_index) ? "* " : "  ";
    out += pad_left(heads[i][0], c_width);
    out += "  ";
    out += pad_left(heads[i][1], gamma_width);
    out += "  ";
    out += heads[i][2];
    out += std::string(std::max<std::size_t>(kernel_width, 6) - heads[i][2].size(), ' ');
    out += "  ";
    out += fixed4(cell.mean_accuracy);
    if (!cell.error_note.empty()) {
      out += "  error: ";
      out += cell.error_note;
    } else {
      for (double acc : cell.fold_accuracies) {
        out += "  ";
        out += fixed4(acc);
      }
    }
    out += '\n';
  }
  const GridPoint& best = result.best().point;
  out += "\nbest: c=" + format_double(best.c) + " gamma=" + format_double(best.gamma) +
         " kernel=" + std::string(kernel_kind_name(best.kind)) + " (mean accuracy " +
         fixed4(result.best().mean_accuracy) + ")\n";
  return out;
}

CvResult parse_cv_table(const std::string& text) {
  LineReader reader(text);
  std::string_view line;
  // Leading '#' lines carry caller metadata.
  do {
    if (!reader.next(line)) throw ParseError("empty cross-validation table");
  } while (!line.empty() && line.front() == '#');
  if (line != kCvHeader) {
    throw ParseError("cross-validation table must start with \"" + std::string(kCvHeader) + "\"",
                     reader.line_no());
  }

  auto next_line = [&]() {
    if (!reader.next(line)) throw ParseError("cross-validation table ended early",
                                             reader.line_no());
    return split_ws(line);
  };
  auto expect_field = [&](const char* name) {
    auto tokens = next_line();
    if (tokens.size() != 2 || tokens[0] != name) {
      throw ParseError("expected \"" + std::string(name) + "\" line", reader.line_no());
    }
    return tokens[1];
  };

  CvResult result;
  result.folds = static_cast<int>(need_int(expect_field("folds"), reader.line_no(), "folds"));
  if (result.folds < 2) throw ParseError("folds must be >= 2", reader.line_no());
  result.seed = need_u64(expect_field("seed"), reader.line_no(), "seed");
  const std::int64_t grid_count = need_int(expect_field("grid"), reader.line_no(), "grid size");
  if (grid_count <= 0) throw ParseError("grid size must be positive", reader.line_no());

  auto parse_point = [&](const std::vector<std::string_view>& tokens, std::size_t at) {
    GridPoint p;
    p.c = need_double(tokens[at], reader.line_no(), "c");
    p.gamma = need_double(tokens[at + 1], reader.line_no(), "gamma");
    p.kind = kernel_kind_from_name(std::string(tokens[at + 2]));
    return p;
  };

  result.cells.resize(static_cast<std::size_t>(grid_count));
  for (std::size_t pi = 0; pi < result.cells.size(); ++pi) {
    CvCell& cell = result.cells[pi];
    for (int f = 0; f < result.folds; ++f) {
      auto tokens = next_line();
      if (tokens.size() != 6 || tokens[0] != "fold_row") {
        throw ParseError("expected \"fold_row <c> <gamma> <kernel> <fold> <accuracy>\" line",
                         reader.line_no());
      }
      const GridPoint p = parse_point(tokens, 1);
      if (f == 0) {
        cell.point = p;
      } else if (p.c != cell.point.c || p.gamma != cell.point.gamma ||
                 p.kind != cell.point.kind) {
        throw ParseError("fold rows for one combination must be contiguous", reader.line_no());
      }
      if (need_int(tokens[4], reader.line_no(), "fold index") != f) {
        throw ParseError("fold rows must appear in fold order", reader.line_no());
      }
      cell.fold_accuracies.push_back(need_double(tokens[5], reader.line_no(), "accuracy"));
    }
  }
  for (std::size_t pi = 0; pi < result.cells.size(); ++pi) {
    CvCell& cell = result.cells[pi];
    auto tokens = next_line();
    if (tokens.size() < 5 || tokens[0] != "combo") {
      throw ParseError("expected \"combo <c> <gamma> <kernel> <mean> <status>\" line",
                       reader.line_no());
    }
    const GridPoint p = parse_point(tokens, 1);
    if (p.c != cell.point.c || p.gamma != cell.point.gamma || p.kind != cell.point.kind) {
      throw ParseError("combo rows must follow the fold_row order", reader.line_no());
    }
    cell.mean_accuracy = need_double(tokens[4], reader.line_no(), "mean accuracy");
    if (tokens.size() == 6 && tokens[5] == "ok") {
      cell.error_note.clear();
    } else if (tokens.size() >= 6 && tokens[5] == "error") {
      // The note is everything after the literal " error " marker, verbatim.
      const std::size_t marker = line.find(" error ");
      cell.error_note = std::string(line.substr(marker + 7));
    } else {
      throw ParseError("combo status must be \"ok\" or \"error <note>\"", reader.line_no());
    }
  }

  auto tokens = next_line();
  if (tokens.size() != 4 || tokens[0] != "best") {
    throw ParseError("expected \"best <c> <gamma> <kernel>\" line", reader.line_no());
  }
  const GridPoint best = parse_point(tokens, 1);
  bool found = false;
  for (std::size_t pi = 0; pi < result.cells.size(); ++pi) {
    const GridPoint& p = result.cells[pi].point;
    if (p.c == best.c && p.gamma == best.gamma && p.kind == best.kind) {
      result.best_index = pi;
      found = true;
      break;
    }
  }
  if (!found) {
    throw ParseError("best combination does not appear in the table", reader.line_no());
  }
  return result;
}

}  // namespace tcdiag
