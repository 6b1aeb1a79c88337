#include "tcdiag/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "tcdiag/errors.hpp"
#include "tcdiag/num_format.hpp"
#include "tcdiag/text_parse.hpp"

namespace tcdiag {
namespace {

constexpr std::string_view kMetricsHeader = "tcdiag-metrics v1";

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string class_name(std::size_t code) {
  return anomaly_class_name(static_cast<AnomalyClass>(code));
}

}  // namespace

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) {
    for (std::int64_t v : row) t += v;
  }
  return t;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t true_class) const {
  std::int64_t t = 0;
  for (std::int64_t v : counts.at(true_class)) t += v;
  return t;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t predicted_class) const {
  std::int64_t t = 0;
  for (const auto& row : counts) t += row.at(predicted_class);
  return t;
}

MetricsReport compute_metrics(const std::vector<AnomalyClass>& truths,
                              const std::vector<AnomalyClass>& preds) {
  if (truths.size() != preds.size()) {
    throw std::invalid_argument("truth and prediction lists differ in length");
  }
  if (truths.empty()) throw std::invalid_argument("cannot compute metrics on no samples");

  MetricsReport report;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = static_cast<int>(truths[i]);
    const int p = static_cast<int>(preds[i]);
    if (t < 0 || t >= static_cast<int>(kNumClasses) || p < 0 ||
        p >= static_cast<int>(kNumClasses)) {
      throw std::invalid_argument("label outside the class set at sample " + std::to_string(i));
    }
    ++report.confusion.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }

  double macro_sum = 0.0;
  int macro_terms = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const std::int64_t col = report.confusion.col_sum(c);
    report.precision_defined[c] = col > 0;
    if (col > 0) {
      report.precision[c] =
          static_cast<double>(report.confusion.counts[c][c]) / static_cast<double>(col);
      macro_sum += report.precision[c];
      ++macro_terms;
    }
    const std::int64_t row = report.confusion.row_sum(c);
    report.recall_defined[c] = row > 0;
    if (row > 0) {
      report.recall[c] =
          static_cast<double>(report.confusion.counts[c][c]) / static_cast<double>(row);
    }
  }
  // preds is non-empty, so at least one column is populated.
  report.macro_precision = macro_sum / static_cast<double>(macro_terms);
  return report;
}

std::string render_report(const MetricsReport& report, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Delimited) {
    out += kMetricsHeader;
    out += '\n';
    out += "windows," + std::to_string(report.confusion.total()) + '\n';
    for (const auto& [key, value] : report.meta) {
      out += "meta_" + key + ',' + value + '\n';
    }
    for (std::size_t t = 0; t < kNumClasses; ++t) {
      for (std::size_t p = 0; p < kNumClasses; ++p) {
        out += "confusion_" + std::to_string(t) + '_' + std::to_string(p) + ',' +
               std::to_string(report.confusion.counts[t][p]) + '\n';
      }
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      out += "precision_" + std::to_string(c) + ',';
      if (report.precision_defined[c]) {
        append_double(out, report.precision[c]);
      } else {
        out += "undefined";
      }
      out += '\n';
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      out += "recall_" + std::to_string(c) + ',';
      if (report.recall_defined[c]) {
        append_double(out, report.recall[c]);
      } else {
        out += "undefined";
      }
      out += '\n';
    }
    out += "macro_precision,";
    append_double(out, report.macro_precision);
    out += '\n';
    return out;
  }

  // Text: aligned, 4-decimal, human-oriented.
  std::size_t name_w = std::string("true \\ predicted").size();
  for (std::size_t c = 0; c < kNumClasses; ++c) name_w = std::max(name_w, class_name(c).size());
  std::size_t cell_w = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) cell_w = std::max(cell_w, class_name(c).size());
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      cell_w = std::max(cell_w, std::to_string(report.confusion.counts[t][p]).size());
    }
  }

  out += "classification metrics\n";
  out += "windows evaluated: " + std::to_string(report.confusion.total()) + '\n';
  if (!report.meta.empty()) {
    out += '\n';
    for (const auto& [key, value] : report.meta) {
      out += key + ": " + value + '\n';
    }
  }
  out += "\nconfusion matrix (rows = true class, columns = predicted class)\n";
  out += pad_right("true \\ predicted", name_w);
  for (std::size_t p = 0; p < kNumClasses; ++p) {
    out += "  " + pad_left(class_name(p), cell_w);
  }
  out += '\n';
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    out += pad_right(class_name(t), name_w);
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      out += "  " + pad_left(std::to_string(report.confusion.counts[t][p]), cell_w);
    }
    out += '\n';
  }

  out += "\n" + pad_right("class", name_w) + "  precision     recall\n";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out += pad_right(class_name(c), name_w);
    out += "  " + pad_left(report.precision_defined[c] ? fixed4(report.precision[c]) : "n/a", 9);
    out += "  " + pad_left(report.recall_defined[c] ? fixed4(report.recall[c]) : "n/a", 9);
    out += '\n';
  }
  out += "\nmacro_precision " + fixed4(report.macro_precision) + '\n';
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!report.precision_defined[c]) {
      out += "warning: " + class_name(c) +
             " was never predicted; its precision is undefined and excluded from the macro "
             "mean\n";
    }
  }
  return out;
}

MetricsReport parse_delimited_report(const std::string& text) {
  LineReader reader(text);
  std::string_view line;
  do {
    if (!reader.next(line)) throw ParseError("empty metrics report");
  } while (!line.empty() && line.front() == '#');
  if (line != kMetricsHeader) {
    throw ParseError("metrics report must start with \"" + std::string(kMetricsHeader) + "\"",
                     reader.line_no());
  }

  auto next_kv = [&](std::string_view& key, std::string_view& value) {
    if (!reader.next(line)) throw ParseError("metrics report ended early", reader.line_no());
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError("expected key,value line", reader.line_no());
    }
    key = line.substr(0, comma);
    value = line.substr(comma + 1);
  };

  MetricsReport report;
  std::string_view key;
  std::string_view value;
  next_kv(key, value);
  if (key != "windows") throw ParseError("expected windows line", reader.line_no());
  const std::int64_t windows = need_int(value, reader.line_no(), "window count");

  next_kv(key, value);
  while (key.substr(0, 5) == "meta_") {
    report.meta.emplace_back(std::string(key.substr(5)), std::string(value));
    next_kv(key, value);
  }

  for (std::size_t t = 0; t < kNumClasses; ++t) {
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      const std::string want = "confusion_" + std::to_string(t) + '_' + std::to_string(p);
      if (key != want) throw ParseError("expected " + want + " line", reader.line_no());
      const std::int64_t n = need_int(value, reader.line_no(), "confusion count");
      if (n < 0) throw ParseError("confusion counts must be >= 0", reader.line_no());
      report.confusion.counts[t][p] = n;
      next_kv(key, value);
    }
  }
  if (report.confusion.total() != windows) {
    throw ParseError("confusion counts do not sum to the declared window count",
                     reader.line_no());
  }

  auto parse_metric = [&](const char* prefix, std::array<double, kNumClasses>& values,
                          std::array<bool, kNumClasses>& defined) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const std::string want = std::string(prefix) + '_' + std::to_string(c);
      if (key != want) throw ParseError("expected " + want + " line", reader.line_no());
      if (value == "undefined") {
        defined[c] = false;
        values[c] = 0.0;
      } else {
        defined[c] = true;
        values[c] = need_double(value, reader.line_no(), prefix);
      }
      next_kv(key, value);
    }
  };
  parse_metric("precision", report.precision, report.precision_defined);
  parse_metric("recall", report.recall, report.recall_defined);

  if (key != "macro_precision") {
    throw ParseError("expected macro_precision line", reader.line_no());
  }
  report.macro_precision = need_double(value, reader.line_no(), "macro precision");
  return report;
}

}  // namespace tcdiag
