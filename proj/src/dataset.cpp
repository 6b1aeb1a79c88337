#include "tcdiag/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tcdiag/errors.hpp"
#include "tcdiag/num_format.hpp"
#include "tcdiag/parallel.hpp"
#include "tcdiag/rng.hpp"
#include "tcdiag/text_parse.hpp"

namespace tcdiag {
namespace {

std::string expected_header() {
  std::string h = "label";
  for (Index i = 0; i < kWindowWidth; ++i) {
    h += ",v";
    h += std::to_string(i);
  }
  return h;
}

// Splits a CSV line in place; no quoting in this format.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return fields;
}

}  // namespace

void shuffle_indices(std::vector<Index>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
}

std::array<Index, kNumClasses> LabeledDataset::class_counts() const {
  std::array<Index, kNumClasses> counts{};
  for (AnomalyClass c : labels) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

void LabeledDataset::validate() const {
  if (windows.rows() != static_cast<Index>(labels.size())) {
    throw std::invalid_argument("dataset has " + std::to_string(windows.rows()) +
                                " windows but " + std::to_string(labels.size()) + " labels");
  }
  if (windows.rows() > 0 && windows.cols() != kWindowWidth) {
    throw std::invalid_argument("dataset windows must have " + std::to_string(kWindowWidth) +
                                " samples, got " + std::to_string(windows.cols()));
  }
  if (!windows.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite values");
  }
}

void SplitSpec::validate() const {
  if (!std::isfinite(train_fraction) || train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
  }
}

std::vector<Window> window_trace(const VoltageTrace& trace, Index width, Index stride) {
  if (width <= 0) throw std::invalid_argument("window width must be positive");
  if (stride <= 0) throw std::invalid_argument("window stride must be positive");
  std::vector<Window> out;
  for (Index start = 0; start + width <= trace.size(); start += stride) {
    Window w;
    w.values = trace.samples.segment(start, width);
    w.circuit_id = trace.circuit_id;
    w.start_time = trace.start_time + start;
    out.push_back(std::move(w));
  }
  return out;
}

LabeledDataset build_training_corpus(const TrackCircuitConfig& config,
                                     const SeverityProfile& severity, Index per_class,
                                     std::uint64_t seed) {
  config.validate();
  severity.validate();
  if (per_class <= 0) throw std::invalid_argument("per_class must be positive");

  const Index total = per_class * kNumClasses;
  LabeledDataset ds;
  ds.windows.resize(total, kWindowWidth);
  ds.labels.resize(static_cast<std::size_t>(total));

  parallel_for(total, [&](std::int64_t row) {
    const AnomalyClass cls =
        kAllClasses[static_cast<std::size_t>(row / static_cast<std::int64_t>(per_class))];
    const GeneratedAnomaly g = gen_anomaly(config, cls, severity, kWindowWidth,
                                           derive_seed(seed, static_cast<std::uint64_t>(row)));
    ds.windows.row(static_cast<Index>(row)) = g.trace.samples.transpose();
    ds.labels[static_cast<std::size_t>(row)] = cls;
  });
  return ds;
}

SplitIndices split_indices(const LabeledDataset& ds, const SplitSpec& spec) {
  ds.validate();
  spec.validate();
  if (ds.size() == 0) throw std::invalid_argument("cannot split an empty dataset");

  SplitIndices out;
  if (spec.stratified) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      std::vector<Index> rows;
      for (Index i = 0; i < ds.size(); ++i) {
        if (static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)]) == c) {
          rows.push_back(i);
        }
      }
      if (rows.size() < 2) {
        throw std::invalid_argument("stratified split needs >= 2 windows of class " +
                                    anomaly_class_name(static_cast<AnomalyClass>(c)));
      }
      Rng rng(derive_seed(spec.seed, c));
      shuffle_indices(rows, rng);
      const auto train_k = static_cast<std::size_t>(
          std::llround(spec.train_fraction * static_cast<double>(rows.size())));
      out.train.insert(out.train.end(), rows.begin(), rows.begin() + train_k);
      out.test.insert(out.test.end(), rows.begin() + train_k, rows.end());
    }
  } else {
    std::vector<Index> rows(static_cast<std::size_t>(ds.size()));
    for (Index i = 0; i < ds.size(); ++i) rows[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(spec.seed, kNumClasses));
    shuffle_indices(rows, rng);
    const auto train_k = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(rows.size())));
    out.train.assign(rows.begin(), rows.begin() + train_k);
    out.test.assign(rows.begin() + train_k, rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<Index>& rows) {
  LabeledDataset out;
  out.windows.resize(static_cast<Index>(rows.size()), ds.windows.cols());
  out.labels.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index r = rows[k];
    if (r < 0 || r >= ds.size()) {
      throw std::invalid_argument("row index " + std::to_string(r) + " out of range");
    }
    out.windows.row(static_cast<Index>(k)) = ds.windows.row(r);
    out.labels[k] = ds.labels[static_cast<std::size_t>(r)];
  }
  return out;
}

std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds,
                                                        const SplitSpec& spec) {
  const SplitIndices idx = split_indices(ds, spec);
  return {take_rows(ds, idx.train), take_rows(ds, idx.test)};
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path,
                  const std::vector<std::string>& meta_lines) {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");

  std::string buf;
  for (const auto& m : meta_lines) {
    buf += "# ";
    buf += m;
    buf += '\n';
  }
  buf += expected_header();
  buf += '\n';
  for (Index r = 0; r < ds.size(); ++r) {
    buf += std::to_string(static_cast<int>(ds.labels[static_cast<std::size_t>(r)]));
    for (Index c = 0; c < kWindowWidth; ++c) {
      buf += ',';
      append_double(buf, ds.windows(r, c));
    }
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

// Checks that train/test jointly cover 0..total-1 with no overlap; both lists
// are required to be sorted ascending (split_indices and parse both emit them
// that way).
void check_partition(const SplitIndices& split, Index total_rows) {
  const std::size_t total = static_cast<std::size_t>(total_rows);
  if (split.train.size() + split.test.size() != total) {
    throw std::invalid_argument("split lists " +
                                std::to_string(split.train.size() + split.test.size()) +
                                " rows but the dataset has " + std::to_string(total));
  }
  std::size_t ti = 0;
  std::size_t si = 0;
  for (Index expect = 0; expect < total_rows; ++expect) {
    if (ti < split.train.size() && split.train[ti] == expect) {
      ++ti;
    } else if (si < split.test.size() && split.test[si] == expect) {
      ++si;
    } else {
      throw std::invalid_argument("split does not partition the dataset: row " +
                                  std::to_string(expect) + " is missing or duplicated");
    }
  }
}

}  // namespace

std::string render_split_indices(const SplitIndices& split, Index total_rows) {
  check_partition(split, total_rows);
  std::string out = "tcdiag-split v1\n";
  out += "rows ";
  out += std::to_string(total_rows);
  out += '\n';
  std::size_t ti = 0;
  for (Index row = 0; row < total_rows; ++row) {
    out += std::to_string(row);
    if (ti < split.train.size() && split.train[ti] == row) {
      out += " train\n";
      ++ti;
    } else {
      out += " test\n";
    }
  }
  return out;
}

SplitIndices parse_split_indices(const std::string& text) {
  LineReader reader(text);
  std::string_view line;
  bool have_line = false;
  while (reader.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    have_line = true;
    break;
  }
  if (!have_line || line != "tcdiag-split v1") {
    throw ParseError("expected header \"tcdiag-split v1\"", reader.line_no());
  }
  if (!reader.next(line)) throw ParseError("missing \"rows <n>\" line", reader.line_no());
  auto tokens = split_ws(line);
  if (tokens.size() != 2 || tokens[0] != "rows") {
    throw ParseError("expected \"rows <n>\"", reader.line_no());
  }
  const std::int64_t total = need_int(tokens[1], reader.line_no(), "row count");
  if (total < 0) throw ParseError("row count must be non-negative", reader.line_no());

  SplitIndices split;
  for (std::int64_t expect = 0; expect < total; ++expect) {
    if (!reader.next(line)) {
      throw ParseError("expected " + std::to_string(total) + " row lines, found " +
                           std::to_string(expect),
                       reader.line_no());
    }
    tokens = split_ws(line);
    if (tokens.size() != 2) throw ParseError("expected \"<index> train|test\"", reader.line_no());
    const std::int64_t row = need_int(tokens[0], reader.line_no(), "row index");
    if (row != expect) {
      throw ParseError("row indices must run 0.." + std::to_string(total - 1) +
                           " in order; expected " + std::to_string(expect),
                       reader.line_no());
    }
    if (tokens[1] == "train") {
      split.train.push_back(static_cast<Index>(row));
    } else if (tokens[1] == "test") {
      split.test.push_back(static_cast<Index>(row));
    } else {
      throw ParseError("row role must be train or test, got \"" + std::string(tokens[1]) + "\"",
                       reader.line_no());
    }
  }
  if (reader.next(line) && !line.empty()) {
    throw ParseError("unexpected trailing content", reader.line_no());
  }
  return split;
}

void save_split_indices(const SplitIndices& split, Index total_rows,
                        const std::filesystem::path& path,
                        const std::vector<std::string>& meta_lines) {
  std::string buf;
  for (const auto& m : meta_lines) {
    buf += "# ";
    buf += m;
    buf += '\n';
  }
  buf += render_split_indices(split, total_rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

SplitIndices load_split_indices(const std::filesystem::path& path) {
  return parse_split_indices(read_text_file(path));
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());

  std::string line;
  int line_no = 0;
  bool header_seen = false;
  const std::string header = expected_header();
  std::vector<Eigen::VectorXd> rows;
  std::vector<AnomalyClass> labels;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != header) {
        throw ParseError("expected dataset header \"label,v0,...,v599\"", line_no);
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != static_cast<std::size_t>(kWindowWidth) + 1) {
      throw ParseError("expected " + std::to_string(kWindowWidth + 1) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    bool ok = false;
    const std::int64_t code = parse_int_token(fields[0], ok);
    if (!ok || code < 0 || code >= kNumClasses) {
      throw ParseError("label code must be 0, 1, or 2; got \"" + std::string(fields[0]) + "\"",
                       line_no);
    }
    Eigen::VectorXd v(kWindowWidth);
    for (Index c = 0; c < kWindowWidth; ++c) {
      v[c] = parse_double_token(fields[static_cast<std::size_t>(c) + 1], ok);
      if (!ok) {
        throw ParseError("bad value in column v" + std::to_string(c), line_no);
      }
    }
    rows.push_back(std::move(v));
    labels.push_back(static_cast<AnomalyClass>(code));
  }
  if (!header_seen) throw ParseError("missing dataset header in " + path.string());

  LabeledDataset ds;
  ds.windows.resize(static_cast<Index>(rows.size()), kWindowWidth);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ds.windows.row(static_cast<Index>(r)) = rows[r].transpose();
  }
  ds.labels = std::move(labels);
  ds.validate();
  return ds;
}

}  // namespace tcdiag
