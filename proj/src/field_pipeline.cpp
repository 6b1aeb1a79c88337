#include "tcdiag/field_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tcdiag/errors.hpp"
#include "tcdiag/num_format.hpp"
#include "tcdiag/text_parse.hpp"

namespace tcdiag {
namespace {

constexpr std::string_view kFieldHeader = "timestamp_s,voltage_v";
constexpr std::string_view kDiagnosisHeader = "tcdiag-diagnosis v1";
constexpr std::string_view kDiagnosisSetHeader = "tcdiag-diagnosis-set v1";

// Samples at or below this level read as the occupied (shorted) state. Well
// separated from every anomaly signature: the deepest configurable drop still
// leaves more than 10 V on the line.
constexpr double kOccupiedCeilingV = 0.5;

constexpr std::int64_t kMaxFillGapS = 5;

void append_votes(std::string& out, const VoteDetail& votes) {
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (c) out += ':';
    out += std::to_string(votes.votes[c]);
  }
  out += ',';
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (c) out += ':';
    append_double(out, votes.magnitude[c]);
  }
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(text.substr(pos));
      return parts;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
}

}  // namespace

std::vector<VoltageTrace> parse_field_csv_text(const std::string& text,
                                               const std::string& fallback_circuit_id) {
  LineReader reader(text);
  std::string_view line;
  std::string circuit_id = fallback_circuit_id;

  // Leading metadata/comments; `# circuit_id <name>` names the circuit.
  bool have_header = false;
  while (reader.next(line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto tokens = split_ws(line.substr(1));
      if (tokens.size() >= 2 && tokens[0] == "circuit_id") {
        const std::size_t at = line.find("circuit_id") + std::string("circuit_id ").size();
        circuit_id = std::string(line.substr(at));
      }
      continue;
    }
    if (line != kFieldHeader) {
      throw ParseError("field log must start with a \"" + std::string(kFieldHeader) +
                           "\" header",
                       reader.line_no());
    }
    have_header = true;
    break;
  }
  if (!have_header) throw ParseError("field log has no header line");

  std::vector<VoltageTrace> segments;
  std::vector<double> samples;
  std::int64_t segment_start = 0;
  std::int64_t prev_ts = 0;
  bool in_segment = false;

  auto flush = [&]() {
    if (!in_segment) return;
    VoltageTrace trace;
    trace.samples = Eigen::Map<const Eigen::VectorXd>(samples.data(),
                                                      static_cast<Index>(samples.size()));
    trace.start_time = segment_start;
    trace.circuit_id = circuit_id;
    trace.validate();
    segments.push_back(std::move(trace));
    samples.clear();
    in_segment = false;
  };

  while (reader.next(line)) {
    if (line.empty()) continue;
    if (line.front() == '#') continue;
    const auto fields = split_on(line, ',');
    if (fields.size() != 2) {
      throw ParseError("field record must be timestamp_s,voltage_v", reader.line_no());
    }
    const std::int64_t ts = need_int(fields[0], reader.line_no(), "timestamp");
    const double v = need_double(fields[1], reader.line_no(), "voltage");
    if (!std::isfinite(v) || v < 0.0 || v > kMaxPhysicalVoltage) {
      throw ParseError("voltage outside the physical range [0, 40]", reader.line_no());
    }
    if (in_segment) {
      const std::int64_t gap = ts - prev_ts;
      if (gap <= 0) {
        throw ParseError("timestamps must be strictly increasing", reader.line_no());
      }
      if (gap > kMaxFillGapS) {
        flush();
        segment_start = ts;
      } else {
        // gap in [2, 5]: bridge by repeating the last value gap-1 times.
        for (std::int64_t k = 1; k < gap; ++k) samples.push_back(samples.back());
      }
    } else {
      segment_start = ts;
    }
    in_segment = true;
    samples.push_back(v);
    prev_ts = ts;
  }
  flush();
  if (segments.empty()) throw ParseError("field log contains no records");
  return segments;
}

std::vector<VoltageTrace> parse_field_csv(const std::filesystem::path& path) {
  return parse_field_csv_text(read_text_file(path), path.stem().string());
}

std::string render_field_csv(const std::vector<VoltageTrace>& segments) {
  if (segments.empty()) throw std::invalid_argument("nothing to render: no trace segments");
  std::string out;
  if (!segments.front().circuit_id.empty()) {
    out += "# circuit_id " + segments.front().circuit_id + '\n';
  }
  out += kFieldHeader;
  out += '\n';
  for (const VoltageTrace& trace : segments) {
    trace.validate();
    for (Index i = 0; i < trace.size(); ++i) {
      out += std::to_string(trace.start_time + i);
      out += ',';
      append_double(out, trace.samples[i]);
      out += '\n';
    }
  }
  return out;
}

void save_field_csv(const std::vector<VoltageTrace>& segments,
                    const std::filesystem::path& path) {
  const std::string text = render_field_csv(segments);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

GateVerdict nominal_gate(const Eigen::Ref<const Eigen::VectorXd>& window,
                         const TrackCircuitConfig& config, double band) {
  if (!std::isfinite(band) || band <= 0.0) {
    throw std::invalid_argument("nominal band must be > 0");
  }
  const double lo = config.base_voltage - band;
  const double hi = config.base_voltage + band;
  bool in_run = false;
  int runs = 0;
  for (Index i = 0; i < window.size(); ++i) {
    const double v = window[i];
    if (v <= kOccupiedCeilingV) {
      if (!in_run) {
        in_run = true;
        if (++runs > 1) return GateVerdict::Suspect;  // two separate passes
      }
    } else {
      in_run = false;
      if (v < lo || v > hi) return GateVerdict::Suspect;
    }
  }
  return GateVerdict::Nominal;
}

DiagnosisReport classify_trace(const VoltageTrace& trace, const MulticlassSvmModel& model,
                               const TrackCircuitConfig& config, Index stride, double band) {
  trace.validate();
  config.validate();
  if (trace.size() < kWindowWidth) {
    throw std::invalid_argument("trace has " + std::to_string(trace.size()) +
                                " samples, shorter than one " +
                                std::to_string(kWindowWidth) + "-sample window");
  }
  const std::vector<Window> windows = window_trace(trace, kWindowWidth, stride);

  DiagnosisReport report;
  report.circuit_id = trace.circuit_id;
  report.trace_start = trace.start_time;
  report.trace_samples = trace.size();
  report.fingerprint = model_fingerprint(model);
  report.windows.resize(windows.size());

  std::vector<std::size_t> suspects;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    report.windows[w].start_time = windows[w].start_time;
    if (nominal_gate(windows[w].values, config, band) == GateVerdict::Suspect) {
      suspects.push_back(w);
    }
  }

  if (!suspects.empty()) {
    Eigen::MatrixXd x(static_cast<Index>(suspects.size()), kWindowWidth);
    for (std::size_t s = 0; s < suspects.size(); ++s) {
      x.row(static_cast<Index>(s)) = windows[suspects[s]].values.transpose();
    }
    std::vector<VoteDetail> details;
    const std::vector<AnomalyClass> labels = predict_classes(model, x, &details);
    for (std::size_t s = 0; s < suspects.size(); ++s) {
      WindowVerdict& verdict = report.windows[suspects[s]];
      verdict.nominal = false;
      verdict.label = labels[s];
      verdict.votes = details[s];
    }
  }

  // Merge maximal runs of consecutive anomalous windows into episodes.
  std::size_t w = 0;
  while (w < report.windows.size()) {
    if (report.windows[w].nominal) {
      ++w;
      continue;
    }
    std::size_t end = w;
    while (end + 1 < report.windows.size() && !report.windows[end + 1].nominal) ++end;

    std::array<Index, kNumClasses> tally{};
    for (std::size_t m = w; m <= end; ++m) {
      ++tally[static_cast<std::size_t>(report.windows[m].label)];
    }
    const Index top = *std::max_element(tally.begin(), tally.end());
    AnomalyClass label = report.windows[w].label;
    for (std::size_t m = w; m <= end; ++m) {  // earliest window holding a top class
      if (tally[static_cast<std::size_t>(report.windows[m].label)] == top) {
        label = report.windows[m].label;
        break;
      }
    }

    Episode ep;
    ep.start_time = report.windows[w].start_time;
    ep.end_time = report.windows[end].start_time + kWindowWidth;
    ep.label = label;
    ep.window_count = static_cast<Index>(end - w + 1);
    report.episodes.push_back(ep);
    w = end + 1;
  }
  return report;
}

std::string render_diagnosis(const DiagnosisReport& report, ReportFormat format) {
  std::size_t anomalous = 0;
  for (const WindowVerdict& v : report.windows) {
    if (!v.nominal) ++anomalous;
  }

  std::string out;
  if (format == ReportFormat::Delimited) {
    out += kDiagnosisHeader;
    out += '\n';
    out += "circuit," + report.circuit_id + '\n';
    out += "trace_start," + std::to_string(report.trace_start) + '\n';
    out += "trace_samples," + std::to_string(report.trace_samples) + '\n';
    out += "model," + report.fingerprint + '\n';
    out += "windows," + std::to_string(report.windows.size()) + '\n';
    for (const WindowVerdict& v : report.windows) {
      out += "window," + std::to_string(v.start_time) + ',';
      if (v.nominal) {
        out += "nominal";
      } else {
        out += anomaly_class_name(v.label) + ',';
        append_votes(out, v.votes);
      }
      out += '\n';
    }
    out += "episodes," + std::to_string(report.episodes.size()) + '\n';
    for (const Episode& ep : report.episodes) {
      out += "episode," + std::to_string(ep.start_time) + ',' + std::to_string(ep.end_time) +
             ',' + anomaly_class_name(ep.label) + ',' + std::to_string(ep.window_count) + '\n';
    }
    return out;
  }

  out += "track circuit diagnosis\n";
  out += "circuit: " + (report.circuit_id.empty() ? "(unnamed)" : report.circuit_id) + '\n';
  out += "model fingerprint: " + report.fingerprint + '\n';
  out += "trace: " + std::to_string(report.trace_samples) + " samples from t=" +
         std::to_string(report.trace_start) + '\n';
  out += "windows evaluated: " + std::to_string(report.windows.size()) + " (" +
         std::to_string(anomalous) + " anomalous)\n";
  out += "episodes found: " + std::to_string(report.episodes.size()) + '\n';
  for (std::size_t e = 0; e < report.episodes.size(); ++e) {
    const Episode& ep = report.episodes[e];
    out += "  episode " + std::to_string(e + 1) + ": " + anomaly_class_name(ep.label) +
           " t=[" + std::to_string(ep.start_time) + ", " + std::to_string(ep.end_time) +
           ") spanning " + std::to_string(ep.window_count) + " window" +
           (ep.window_count == 1 ? "" : "s") + '\n';
  }
  if (anomalous == 0) {
    out += "all windows nominal\n";
    return out;
  }
  out += "anomalous windows:\n";
  for (const WindowVerdict& v : report.windows) {
    if (v.nominal) continue;
    out += "  t=" + std::to_string(v.start_time) + ' ' + anomaly_class_name(v.label) + " votes(";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (c) out += ", ";
      out += anomaly_class_name(static_cast<AnomalyClass>(c)) + '=' +
             std::to_string(v.votes.votes[c]);
    }
    out += ")\n";
  }
  return out;
}

namespace {

// Parses one delimited diagnosis block; the next non-metadata line must be
// the version header. Leaves the reader just past the block's last line.
DiagnosisReport parse_diagnosis_block(LineReader& reader) {
  std::string_view line;
  do {
    if (!reader.next(line)) throw ParseError("empty diagnosis report");
  } while (!line.empty() && line.front() == '#');
  if (line != kDiagnosisHeader) {
    throw ParseError("diagnosis report must start with \"" + std::string(kDiagnosisHeader) +
                     "\"", reader.line_no());
  }

  auto next_kv = [&](std::string_view& key, std::string_view& value) {
    if (!reader.next(line)) throw ParseError("diagnosis report ended early", reader.line_no());
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError("expected key,value line", reader.line_no());
    }
    key = line.substr(0, comma);
    value = line.substr(comma + 1);
  };
  auto expect = [&](const char* name) {
    std::string_view key;
    std::string_view value;
    next_kv(key, value);
    if (key != name) {
      throw ParseError("expected \"" + std::string(name) + "\" line", reader.line_no());
    }
    return value;
  };

  DiagnosisReport report;
  report.circuit_id = std::string(expect("circuit"));
  report.trace_start = need_int(expect("trace_start"), reader.line_no(), "trace start");
  report.trace_samples =
      static_cast<Index>(need_int(expect("trace_samples"), reader.line_no(), "trace samples"));
  report.fingerprint = std::string(expect("model"));
  const std::int64_t window_count = need_int(expect("windows"), reader.line_no(), "window count");
  if (window_count < 0) throw ParseError("window count must be >= 0", reader.line_no());

  report.windows.resize(static_cast<std::size_t>(window_count));
  for (WindowVerdict& verdict : report.windows) {
    const std::string_view body = expect("window");
    const auto fields = split_on(body, ',');
    if (fields.size() != 2 && fields.size() != 4) {
      throw ParseError("window line must be start,nominal or start,class,votes,magnitudes",
                       reader.line_no());
    }
    verdict.start_time = need_int(fields[0], reader.line_no(), "window start");
    if (fields[1] == "nominal") {
      if (fields.size() != 2) throw ParseError("nominal window carries no votes",
                                               reader.line_no());
      verdict.nominal = true;
      continue;
    }
    verdict.nominal = false;
    verdict.label = anomaly_class_from_name(std::string(fields[1]));
    const auto votes = split_on(fields[2], ':');
    const auto mags = split_on(fields[3], ':');
    if (votes.size() != kNumClasses || mags.size() != kNumClasses) {
      throw ParseError("vote detail must carry one entry per class", reader.line_no());
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      verdict.votes.votes[c] =
          static_cast<int>(need_int(votes[c], reader.line_no(), "vote count"));
      verdict.votes.magnitude[c] = need_double(mags[c], reader.line_no(), "vote magnitude");
    }
    verdict.votes.winner = verdict.label;
  }

  const std::int64_t episode_count =
      need_int(expect("episodes"), reader.line_no(), "episode count");
  if (episode_count < 0) throw ParseError("episode count must be >= 0", reader.line_no());
  report.episodes.resize(static_cast<std::size_t>(episode_count));
  for (Episode& ep : report.episodes) {
    const std::string_view body = expect("episode");
    const auto fields = split_on(body, ',');
    if (fields.size() != 4) {
      throw ParseError("episode line must be start,end,class,window_count", reader.line_no());
    }
    ep.start_time = need_int(fields[0], reader.line_no(), "episode start");
    ep.end_time = need_int(fields[1], reader.line_no(), "episode end");
    ep.label = anomaly_class_from_name(std::string(fields[2]));
    ep.window_count = static_cast<Index>(need_int(fields[3], reader.line_no(), "window count"));
    if (ep.end_time <= ep.start_time || ep.window_count <= 0) {
      throw ParseError("episode must span at least one window", reader.line_no());
    }
  }
  return report;
}

}  // namespace

DiagnosisReport parse_delimited_diagnosis(const std::string& text) {
  LineReader reader(text);
  return parse_diagnosis_block(reader);
}

Index DiagnosisSet::total_episodes() const {
  Index total = 0;
  for (const DiagnosisReport& seg : segments) {
    total += static_cast<Index>(seg.episodes.size());
  }
  return total;
}

std::string render_diagnosis_set(const DiagnosisSet& set, ReportFormat format) {
  const std::size_t segment_count = set.segments.size() + set.skipped.size();
  std::string out;

  if (format == ReportFormat::Delimited) {
    out += kDiagnosisSetHeader;
    out += '\n';
    out += "circuit," + set.circuit_id + '\n';
    out += "segments," + std::to_string(segment_count) + '\n';
    for (const SkippedSegment& s : set.skipped) {
      out += "skipped," + std::to_string(s.start_time) + ',' + std::to_string(s.samples) + '\n';
    }
    out += "analyzed," + std::to_string(set.segments.size()) + '\n';
    for (const DiagnosisReport& seg : set.segments) {
      out += render_diagnosis(seg, ReportFormat::Delimited);
    }
    return out;
  }

  out += "field log diagnosis\n";
  out += "circuit: " + (set.circuit_id.empty() ? "(unnamed)" : set.circuit_id) + '\n';
  out += "segments: " + std::to_string(segment_count) + " (" +
         std::to_string(set.segments.size()) + " analyzed, " +
         std::to_string(set.skipped.size()) + " skipped)\n";
  for (const SkippedSegment& s : set.skipped) {
    out += "warning: segment at t=" + std::to_string(s.start_time) + " has " +
           std::to_string(s.samples) + " samples, shorter than one " +
           std::to_string(kWindowWidth) + "-sample window; skipped\n";
  }
  out += "total episodes: " + std::to_string(set.total_episodes()) + '\n';
  for (const DiagnosisReport& seg : set.segments) {
    out += '\n';
    out += render_diagnosis(seg, ReportFormat::Text);
  }
  return out;
}

DiagnosisSet parse_delimited_diagnosis_set(const std::string& text) {
  LineReader reader(text);
  std::string_view line;
  do {
    if (!reader.next(line)) throw ParseError("empty diagnosis set");
  } while (!line.empty() && line.front() == '#');
  if (line != kDiagnosisSetHeader) {
    throw ParseError("diagnosis set must start with \"" + std::string(kDiagnosisSetHeader) +
                     "\"", reader.line_no());
  }

  auto expect = [&](const char* name) {
    if (!reader.next(line)) throw ParseError("diagnosis set ended early", reader.line_no());
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos || line.substr(0, comma) != name) {
      throw ParseError("expected \"" + std::string(name) + "\" line", reader.line_no());
    }
    return line.substr(comma + 1);
  };

  DiagnosisSet set;
  set.circuit_id = std::string(expect("circuit"));
  const std::int64_t segment_count =
      need_int(expect("segments"), reader.line_no(), "segment count");
  if (segment_count < 0) throw ParseError("segment count must be >= 0", reader.line_no());

  // Zero or more skipped lines, then the analyzed count.
  std::int64_t analyzed = -1;
  while (true) {
    if (!reader.next(line)) throw ParseError("diagnosis set ended early", reader.line_no());
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError("expected skipped or analyzed line", reader.line_no());
    }
    const std::string_view key = line.substr(0, comma);
    const std::string_view value = line.substr(comma + 1);
    if (key == "skipped") {
      const auto fields = split_on(value, ',');
      if (fields.size() != 2) {
        throw ParseError("skipped line must be start,samples", reader.line_no());
      }
      SkippedSegment s;
      s.start_time = need_int(fields[0], reader.line_no(), "segment start");
      s.samples = static_cast<Index>(need_int(fields[1], reader.line_no(), "sample count"));
      set.skipped.push_back(s);
    } else if (key == "analyzed") {
      analyzed = need_int(value, reader.line_no(), "analyzed count");
      break;
    } else {
      throw ParseError("expected skipped or analyzed line", reader.line_no());
    }
  }
  if (analyzed < 0 ||
      analyzed + static_cast<std::int64_t>(set.skipped.size()) != segment_count) {
    throw ParseError("analyzed + skipped segments must match the segment count",
                     reader.line_no());
  }

  set.segments.reserve(static_cast<std::size_t>(analyzed));
  for (std::int64_t i = 0; i < analyzed; ++i) {
    set.segments.push_back(parse_diagnosis_block(reader));
  }
  return set;
}

}  // namespace tcdiag
