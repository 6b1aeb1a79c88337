// tcdiag: command-line front end for the track circuit diagnostics toolkit.
//
// Subcommands: generate, train, evaluate, classify, report. Every artifact
// written here starts with `# cmd <subcommand>` and `# cfg <key>=<value>`
// metadata lines carrying the fully resolved run configuration, so any
// artifact can be reproduced byte-for-byte by feeding those keys back through
// `--config`. Flags always win over the config file.
//
// Exit codes: 0 success, 2 operational failure (missing/corrupt files, bad
// values), 3 classify found anomaly episodes (distinguishes findings from
// failures in scripts). Flag misuse exits nonzero through the parser.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

#include "tcdiag/dataset.hpp"
#include "tcdiag/errors.hpp"
#include "tcdiag/evaluation.hpp"
#include "tcdiag/failure_generator.hpp"
#include "tcdiag/field_pipeline.hpp"
#include "tcdiag/kernel.hpp"
#include "tcdiag/model_selection.hpp"
#include "tcdiag/multiclass.hpp"
#include "tcdiag/num_format.hpp"
#include "tcdiag/parallel.hpp"
#include "tcdiag/rng.hpp"
#include "tcdiag/signal_model.hpp"
#include "tcdiag/svm.hpp"
#include "tcdiag/text_parse.hpp"

namespace fs = std::filesystem;
using namespace tcdiag;

namespace {

constexpr int kExitFailure = 2;
constexpr int kExitEpisodes = 3;

// Accumulates the resolved configuration of one run as artifact metadata
// lines. Keys are the long flag names, values re-parse to the same resolved
// state (doubles use shortest round-trip formatting), so the `# cfg` lines of
// any artifact form a complete `--config` file for an identical re-run.
class ResolvedConfig {
 public:
  explicit ResolvedConfig(std::string command) : command_(std::move(command)) {}

  void add(const std::string& key, const std::string& value) {
    lines_.push_back("cfg " + key + "=" + value);
  }
  void add(const std::string& key, double value) { add(key, format_double(value)); }
  void add(const std::string& key, std::int64_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }

  std::vector<std::string> meta_lines() const {
    std::vector<std::string> out;
    out.reserve(lines_.size() + 1);
    out.push_back("cmd " + command_);
    out.insert(out.end(), lines_.begin(), lines_.end());
    return out;
  }

 private:
  std::string command_;
  std::vector<std::string> lines_;
};

void write_text_artifact(const fs::path& path, const std::vector<std::string>& meta_lines,
                         const std::string& body) {
  std::string buf;
  for (const auto& m : meta_lines) {
    buf += "# ";
    buf += m;
    buf += '\n';
  }
  buf += body;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    throw std::runtime_error(std::string(what) + " file not found: " + path.string());
  }
}

void require_value(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw std::runtime_error(std::string(flag) + " is required");
  }
}

// Applies `key=value` lines from a config file to every option of `sub` the
// command line left unset, so flags always win. Keys are the long flag names
// without the leading dashes; unknown keys are errors, `#` lines comments.
// (CLI11's own config loader only runs on the root app, not subcommands, so
// the merge is done by hand; the file format matches the `# cfg` metadata
// lines embedded in every artifact.)
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown config key \"" +
                               key + "\"");
    }
    if (opt->count() > 0) continue;  // set on the command line (or earlier in the file)
    opt->add_result(value);
    opt->run_callback();
  }
}

std::vector<std::string_view> split_on_colon(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find(':', pos);
    if (next == std::string_view::npos) {
      parts.push_back(text.substr(pos));
      return parts;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (std::string_view token : split_on_colon(text)) {
    bool ok = false;
    const double v = parse_double_token(token, ok);
    if (!ok) {
      throw std::runtime_error(std::string(what) + " must be a colon-separated list of " +
                               "numbers; bad entry \"" + std::string(token) + "\"");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<KernelKind> parse_kernel_list(const std::string& text) {
  std::vector<KernelKind> out;
  for (std::string_view token : split_on_colon(text)) {
    out.push_back(kernel_kind_from_name(std::string(token)));
  }
  return out;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
  std::string config;
  std::string out;
  std::int64_t per_class = 2800;
  std::uint64_t seed = 42;
  int threads = 0;
  double base_voltage = 20.0;
  double noise_halfband = 0.25;
  double occupancy_threshold = 17.0;
  double square_amplitude_min = 1.0;
  double rise_min = 1.0;
  double rise_max = 4.0;
  std::int64_t rise_duration_min = 10;
  std::int64_t rise_duration_max = 60;
  double drop_min = 2.0;
  double drop_max = 6.0;
  std::int64_t occupancy_min = 10;
  std::int64_t occupancy_max = 60;
};

int run_generate(const GenerateOpts& o) {
  require_value(o.out, "--out");
  set_thread_cap(o.threads);

  TrackCircuitConfig config;
  config.base_voltage = o.base_voltage;
  config.nominal_noise_halfband = o.noise_halfband;
  config.occupancy_threshold = o.occupancy_threshold;

  SeverityProfile severity;
  severity.min_square_amplitude_v = o.square_amplitude_min;
  severity.traction_rise_range_v = {o.rise_min, o.rise_max};
  severity.traction_rise_duration_range_s = {o.rise_duration_min, o.rise_duration_max};
  severity.interrupted_drop_range_v = {o.drop_min, o.drop_max};
  severity.occupancy_duration_range_s = {o.occupancy_min, o.occupancy_max};

  const LabeledDataset ds = build_training_corpus(config, severity, o.per_class, o.seed);

  ResolvedConfig cfg("generate");
  cfg.add("out", o.out);
  cfg.add("seed", o.seed);
  cfg.add("threads", o.threads);
  cfg.add("per-class", o.per_class);
  cfg.add("base-voltage", o.base_voltage);
  cfg.add("noise-halfband", o.noise_halfband);
  cfg.add("occupancy-threshold", o.occupancy_threshold);
  cfg.add("square-amplitude-min", o.square_amplitude_min);
  cfg.add("rise-min", o.rise_min);
  cfg.add("rise-max", o.rise_max);
  cfg.add("rise-duration-min", o.rise_duration_min);
  cfg.add("rise-duration-max", o.rise_duration_max);
  cfg.add("drop-min", o.drop_min);
  cfg.add("drop-max", o.drop_max);
  cfg.add("occupancy-min", o.occupancy_min);
  cfg.add("occupancy-max", o.occupancy_max);

  save_dataset(ds, o.out, cfg.meta_lines());

  const auto counts = ds.class_counts();
  std::cout << "wrote " << o.out << ": " << ds.size() << " windows (";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (c) std::cout << ", ";
    std::cout << anomaly_class_name(static_cast<AnomalyClass>(c)) << ' ' << counts[c];
  }
  std::cout << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string config;
  std::string dataset;
  std::string out = "model.txt";
  std::string cv_out;     // default: out + ".cv"
  std::string split_out;  // default: out + ".split"
  std::uint64_t seed = 42;
  int threads = 0;
  double train_fraction = 0.70;
  int folds = 5;
  double c = 10.0;
  double gamma = 0.1;
  std::string kernel = "rbf";
  int degree = 3;
  double coef0 = 0.0;
  std::string grid_c = "0.1:1:10:100";
  std::string grid_gamma = "0.0001:0.001:0.1:1";
  std::string grid_kernels = "rbf:poly";
  bool scale_features = false;
  double kkt_tolerance = 1e-3;
  std::int64_t max_iterations = 0;
  bool direct = false;  // set after parsing from flag presence
};

int run_train(const TrainOpts& o) {
  require_value(o.dataset, "--dataset");
  set_thread_cap(o.threads);
  require_file(o.dataset, "dataset");

  const std::string cv_out = o.cv_out.empty() ? o.out + ".cv" : o.cv_out;
  const std::string split_out = o.split_out.empty() ? o.out + ".split" : o.split_out;

  const LabeledDataset ds = load_dataset(o.dataset);

  SplitSpec split_spec;
  split_spec.train_fraction = o.train_fraction;
  split_spec.seed = derive_seed(o.seed, 1);
  const SplitIndices split = split_indices(ds, split_spec);
  const LabeledDataset train_ds = take_rows(ds, split.train);

  SmoSettings settings;
  settings.kkt_tolerance = o.kkt_tolerance;
  settings.max_iterations = o.max_iterations;

  ResolvedConfig cfg("train");
  cfg.add("dataset", o.dataset);
  cfg.add("out", o.out);
  cfg.add("cv-out", cv_out);
  cfg.add("split-out", split_out);
  cfg.add("seed", o.seed);
  cfg.add("threads", o.threads);
  cfg.add("train-fraction", o.train_fraction);
  cfg.add("folds", o.folds);
  cfg.add("scale-features", o.scale_features);
  cfg.add("kkt-tolerance", o.kkt_tolerance);
  cfg.add("max-iterations", o.max_iterations);
  cfg.add("degree", o.degree);
  cfg.add("coef0", o.coef0);

  GridPoint winner;
  CvResult cv;
  bool searched = false;
  if (o.direct) {
    winner.c = o.c;
    winner.gamma = o.gamma;
    winner.kind = kernel_kind_from_name(o.kernel);
    cfg.add("c", o.c);
    cfg.add("gamma", o.gamma);
    cfg.add("kernel", o.kernel);
    std::cout << "direct fit: c=" << format_double(winner.c) << " gamma="
              << format_double(winner.gamma) << " kernel=" << kernel_kind_name(winner.kind)
              << " (search skipped)\n";
  } else {
    HyperGrid grid;
    grid.c_values = parse_double_list(o.grid_c, "--grid-c");
    grid.gamma_values = parse_double_list(o.grid_gamma, "--grid-gamma");
    grid.kernels = parse_kernel_list(o.grid_kernels);
    cfg.add("grid-c", o.grid_c);
    cfg.add("grid-gamma", o.grid_gamma);
    cfg.add("grid-kernels", o.grid_kernels);

    cv = grid_search(train_ds, grid, o.folds, settings, derive_seed(o.seed, 2),
                     o.scale_features);
    winner = cv.best().point;
    searched = true;
    std::cout << "grid search over " << cv.cells.size() << " combinations, " << o.folds
              << " folds: best c=" << format_double(winner.c) << " gamma="
              << format_double(winner.gamma) << " kernel=" << kernel_kind_name(winner.kind)
              << " (mean accuracy " << fixed4(cv.best().mean_accuracy) << ")\n";
  }

  KernelSpec kernel;
  kernel.kind = winner.kind;
  kernel.gamma = winner.gamma;
  kernel.degree = o.degree;
  kernel.coef0 = o.coef0;

  const MulticlassSvmModel model = train_one_vs_one(train_ds, winner.c, kernel, settings,
                                                    derive_seed(o.seed, 3), o.scale_features);

  save_model(model, o.out, cfg.meta_lines());
  save_split_indices(split, ds.size(), split_out, cfg.meta_lines());
  if (searched) write_text_artifact(cv_out, cfg.meta_lines(), render_cv_table(cv));

  std::cout << "wrote model " << o.out << " (fingerprint " << model_fingerprint(model)
            << ", trained on " << train_ds.size() << " of " << ds.size() << " windows)\n";
  if (searched) std::cout << "wrote cv table " << cv_out << '\n';
  std::cout << "wrote split " << split_out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOpts {
  std::string config;
  std::string model;
  std::string dataset;
  std::string split;
  std::string out = "metrics";
  int threads = 0;
};

int run_evaluate(const EvaluateOpts& o) {
  require_value(o.model, "--model");
  require_value(o.dataset, "--dataset");
  require_value(o.split, "--split");
  set_thread_cap(o.threads);
  require_file(o.model, "model");
  require_file(o.dataset, "dataset");
  require_file(o.split, "split");

  const MulticlassSvmModel model = load_model(o.model);
  const LabeledDataset ds = load_dataset(o.dataset);
  const SplitIndices split = load_split_indices(o.split);

  if (split.train.size() + split.test.size() != static_cast<std::size_t>(ds.size())) {
    throw std::runtime_error("split file covers " +
                             std::to_string(split.train.size() + split.test.size()) +
                             " rows but the dataset has " + std::to_string(ds.size()));
  }
  const Index model_features = model.binary_models[0].support_vectors.cols();
  if (model_features != ds.windows.cols()) {
    throw std::runtime_error("model expects " + std::to_string(model_features) +
                             " features per window but the dataset has " +
                             std::to_string(ds.windows.cols()));
  }

  ResolvedConfig cfg("evaluate");
  cfg.add("model", o.model);
  cfg.add("dataset", o.dataset);
  cfg.add("split", o.split);
  cfg.add("out", o.out);
  cfg.add("threads", o.threads);

  const std::string fingerprint = model_fingerprint(model);
  for (const bool is_test : {false, true}) {
    const char* role = is_test ? "test" : "train";
    const LabeledDataset sub = take_rows(ds, is_test ? split.test : split.train);
    const std::vector<AnomalyClass> preds = predict_classes(model, sub.windows);

    MetricsReport report = compute_metrics(sub.labels, preds);
    report.meta.emplace_back("role", role);
    report.meta.emplace_back("model", fingerprint);
    report.meta.emplace_back("kernel", kernel_kind_name(model.meta.kernel.kind));
    report.meta.emplace_back("c", format_double(model.meta.c));
    report.meta.emplace_back("gamma", format_double(model.meta.kernel.gamma));

    const std::string prefix = o.out + "_" + role;
    write_text_artifact(prefix + ".txt", cfg.meta_lines(),
                        render_report(report, ReportFormat::Text));
    write_text_artifact(prefix + ".csv", cfg.meta_lines(),
                        render_report(report, ReportFormat::Delimited));
    std::cout << role << " macro precision " << fixed4(report.macro_precision) << " over "
              << sub.size() << " windows -> " << prefix << ".txt, " << prefix << ".csv\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyOpts {
  std::string config;
  std::string model;
  std::string input;
  std::string out;  // default: input path with "-diagnosis" suffix
  int threads = 0;
  double base_voltage = 20.0;
  double noise_halfband = 0.25;
  double occupancy_threshold = 17.0;
  double band = 0.5;
  std::int64_t stride = kWindowWidth;
};

int run_classify(const ClassifyOpts& o) {
  require_value(o.model, "--model");
  require_value(o.input, "--input");
  set_thread_cap(o.threads);
  require_file(o.model, "model");
  require_file(o.input, "input");

  const MulticlassSvmModel model = load_model(o.model);
  const std::vector<VoltageTrace> segments = parse_field_csv(o.input);

  TrackCircuitConfig config;
  config.base_voltage = o.base_voltage;
  config.nominal_noise_halfband = o.noise_halfband;
  config.occupancy_threshold = o.occupancy_threshold;
  config.validate();

  const fs::path input_path(o.input);
  const std::string prefix =
      o.out.empty() ? (input_path.parent_path() / (input_path.stem().string() + "-diagnosis"))
                          .string()
                    : o.out;

  ResolvedConfig cfg("classify");
  cfg.add("model", o.model);
  cfg.add("input", o.input);
  cfg.add("out", prefix);
  cfg.add("threads", o.threads);
  cfg.add("base-voltage", o.base_voltage);
  cfg.add("noise-halfband", o.noise_halfband);
  cfg.add("occupancy-threshold", o.occupancy_threshold);
  cfg.add("band", o.band);
  cfg.add("stride", o.stride);

  DiagnosisSet set;
  set.circuit_id = segments.front().circuit_id;
  for (const VoltageTrace& segment : segments) {
    if (segment.size() < kWindowWidth) {
      std::cerr << "warning: segment at t=" << segment.start_time << " has " << segment.size()
                << " samples, shorter than one " << kWindowWidth
                << "-sample window; skipped\n";
      set.skipped.push_back({segment.start_time, segment.size()});
      continue;
    }
    set.segments.push_back(classify_trace(segment, model, config, o.stride, o.band));
  }

  write_text_artifact(prefix + ".txt", cfg.meta_lines(),
                      render_diagnosis_set(set, ReportFormat::Text));
  write_text_artifact(prefix + ".csv", cfg.meta_lines(),
                      render_diagnosis_set(set, ReportFormat::Delimited));

  const Index episodes = set.total_episodes();
  std::cout << set.segments.size() << " segment" << (set.segments.size() == 1 ? "" : "s")
            << " analyzed (" << set.skipped.size() << " skipped), " << episodes << " episode"
            << (episodes == 1 ? "" : "s") << " -> " << prefix << ".txt, " << prefix << ".csv\n";
  return episodes > 0 ? kExitEpisodes : 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOpts {
  std::string config;
  std::string input;
  std::string out;  // empty: print to stdout
};

std::string rerender_artifact(const std::string& text, const fs::path& source) {
  // Dispatch on the first content line (leading `# ...` metadata skipped).
  std::string_view first;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') {
      first = line;
      break;
    }
    pos = end + 1;
  }

  if (first == "tcdiag-metrics v1") {
    return render_report(parse_delimited_report(text), ReportFormat::Text);
  }
  if (first == "tcdiag-cv v1") {
    return render_cv_text(parse_cv_table(text));
  }
  if (first == "tcdiag-diagnosis-set v1") {
    return render_diagnosis_set(parse_delimited_diagnosis_set(text), ReportFormat::Text);
  }
  if (first == "tcdiag-diagnosis v1") {
    return render_diagnosis(parse_delimited_diagnosis(text), ReportFormat::Text);
  }
  if (first == "tcdiag-split v1") {
    const SplitIndices split = parse_split_indices(text);
    return "train/test split\ntrain rows: " + std::to_string(split.train.size()) +
           "\ntest rows: " + std::to_string(split.test.size()) + '\n';
  }
  if (first == "tcdiag-model v1") {
    const MulticlassSvmModel model = load_model(source);
    std::string out = "multiclass svm model\n";
    out += "fingerprint: " + model_fingerprint(model) + '\n';
    out += "kernel: " + kernel_kind_name(model.meta.kernel.kind) +
           " gamma=" + format_double(model.meta.kernel.gamma) + '\n';
    out += "c: " + format_double(model.meta.c) + '\n';
    out += "trained on: " + std::to_string(model.meta.train_rows) + " windows (seed " +
           std::to_string(model.meta.seed) + ")\n";
    out += "feature scaling: " + std::string(model.scaling ? "on" : "off") + '\n';
    for (const BinarySvmModel& bm : model.binary_models) {
      out += "pair " + anomaly_class_name(bm.class_pair.first) + " vs " +
             anomaly_class_name(bm.class_pair.second) + ": " +
             std::to_string(bm.support_vectors.rows()) + " support vectors\n";
    }
    return out;
  }
  if (first.substr(0, 9) == "label,v0,") {
    const LabeledDataset ds = load_dataset(source);
    const auto counts = ds.class_counts();
    std::string out = "labelled dataset\nwindows: " + std::to_string(ds.size()) + '\n';
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      out += anomaly_class_name(static_cast<AnomalyClass>(c)) + ": " +
             std::to_string(counts[c]) + '\n';
    }
    return out;
  }
  throw std::runtime_error("unrecognized artifact format in " + source.string());
}

int run_report(const ReportOpts& o) {
  require_value(o.input, "--input");
  require_file(o.input, "input");
  const std::string text = read_text_file(o.input);
  const std::string rendered = rerender_artifact(text, o.input);

  if (o.out.empty()) {
    std::cout << rendered;
    return 0;
  }
  ResolvedConfig cfg("report");
  cfg.add("input", o.input);
  cfg.add("out", o.out);
  write_text_artifact(o.out, cfg.meta_lines(), rendered);
  std::cout << "wrote " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tcdiag: track circuit diagnostics toolkit"};
  app.require_subcommand(1);

  GenerateOpts gen_opts;
  CLI::App* gen = app.add_subcommand("generate", "Synthesize a labelled training corpus");
  gen->add_option("--config", gen_opts.config, "Flat key=value file; command-line flags win");
  gen->add_option("--out", gen_opts.out, "Output dataset CSV path (required)");
  gen->add_option("--per-class", gen_opts.per_class, "Windows per failure class")
      ->capture_default_str();
  gen->add_option("--seed", gen_opts.seed, "Master seed")->capture_default_str();
  gen->add_option("--threads", gen_opts.threads, "Worker thread cap (0: machine)")
      ->capture_default_str();
  gen->add_option("--base-voltage", gen_opts.base_voltage, "Free-track voltage, volts")
      ->capture_default_str();
  gen->add_option("--noise-halfband", gen_opts.noise_halfband, "Nominal jitter half-band, volts")
      ->capture_default_str();
  gen->add_option("--occupancy-threshold", gen_opts.occupancy_threshold,
                  "Occupancy decision threshold, volts")
      ->capture_default_str();
  gen->add_option("--square-amplitude-min", gen_opts.square_amplitude_min,
                  "Minimum square-wave amplitude, volts")
      ->capture_default_str();
  gen->add_option("--rise-min", gen_opts.rise_min, "Minimum traction rise, volts")
      ->capture_default_str();
  gen->add_option("--rise-max", gen_opts.rise_max, "Maximum traction rise, volts")
      ->capture_default_str();
  gen->add_option("--rise-duration-min", gen_opts.rise_duration_min,
                  "Minimum traction rise duration, seconds")
      ->capture_default_str();
  gen->add_option("--rise-duration-max", gen_opts.rise_duration_max,
                  "Maximum traction rise duration, seconds")
      ->capture_default_str();
  gen->add_option("--drop-min", gen_opts.drop_min, "Minimum interrupted-contact drop, volts")
      ->capture_default_str();
  gen->add_option("--drop-max", gen_opts.drop_max, "Maximum interrupted-contact drop, volts")
      ->capture_default_str();
  gen->add_option("--occupancy-min", gen_opts.occupancy_min,
                  "Minimum occupancy duration, seconds")
      ->capture_default_str();
  gen->add_option("--occupancy-max", gen_opts.occupancy_max,
                  "Maximum occupancy duration, seconds")
      ->capture_default_str();

  TrainOpts train_opts;
  CLI::App* train = app.add_subcommand("train", "Fit the classifier on a labelled dataset");
  train->add_option("--config", train_opts.config, "Flat key=value file; command-line flags win");
  train->add_option("--dataset", train_opts.dataset, "Labelled dataset CSV (required)");
  train->add_option("--out", train_opts.out, "Output model path")->capture_default_str();
  train->add_option("--cv-out", train_opts.cv_out, "Cross-validation table path (default: <out>.cv)");
  train->add_option("--split-out", train_opts.split_out,
                    "Held-out split indices path (default: <out>.split)");
  train->add_option("--seed", train_opts.seed, "Master seed")->capture_default_str();
  train->add_option("--threads", train_opts.threads, "Worker thread cap (0: machine)")
      ->capture_default_str();
  train->add_option("--train-fraction", train_opts.train_fraction,
                    "Fraction of each class assigned to the train split")
      ->capture_default_str();
  train->add_option("--folds", train_opts.folds, "Cross-validation fold count")
      ->capture_default_str();
  CLI::Option* opt_c = train->add_option("--c", train_opts.c,
                                         "Soft-margin penalty; skips the grid search");
  CLI::Option* opt_gamma =
      train->add_option("--gamma", train_opts.gamma, "Kernel gamma; skips the grid search");
  CLI::Option* opt_kernel = train->add_option("--kernel", train_opts.kernel,
                                              "Kernel (rbf or poly); skips the grid search")
                                ->check(CLI::IsMember({"rbf", "poly"}));
  train->add_option("--degree", train_opts.degree, "Polynomial kernel degree")
      ->capture_default_str();
  train->add_option("--coef0", train_opts.coef0, "Polynomial kernel offset")
      ->capture_default_str();
  train->add_option("--grid-c", train_opts.grid_c, "Colon-separated C grid")
      ->capture_default_str();
  train->add_option("--grid-gamma", train_opts.grid_gamma, "Colon-separated gamma grid")
      ->capture_default_str();
  train->add_option("--grid-kernels", train_opts.grid_kernels, "Colon-separated kernel grid")
      ->capture_default_str();
  train->add_flag("--scale-features", train_opts.scale_features,
                  "Rescale features onto [0, 1] (fitted on the train split)");
  train->add_option("--kkt-tolerance", train_opts.kkt_tolerance, "Optimizer stopping tolerance")
      ->capture_default_str();
  train->add_option("--max-iterations", train_opts.max_iterations,
                    "Optimizer iteration cap (0: auto)")
      ->capture_default_str();

  EvaluateOpts eval_opts;
  CLI::App* evaluate = app.add_subcommand("evaluate",
                                          "Score a model on the train and test splits");
  evaluate->add_option("--config", eval_opts.config, "Flat key=value file; command-line flags win");
  evaluate->add_option("--model", eval_opts.model, "Trained model file (required)");
  evaluate->add_option("--dataset", eval_opts.dataset, "Labelled dataset CSV (required)");
  evaluate->add_option("--split", eval_opts.split, "Split indices file (required)");
  evaluate->add_option("--out", eval_opts.out, "Report path prefix")->capture_default_str();
  evaluate->add_option("--threads", eval_opts.threads, "Worker thread cap (0: machine)")
      ->capture_default_str();

  ClassifyOpts cls_opts;
  CLI::App* classify = app.add_subcommand("classify", "Diagnose a field voltage log");
  classify->add_option("--config", cls_opts.config, "Flat key=value file; command-line flags win");
  classify->add_option("--model", cls_opts.model, "Trained model file (required)");
  classify->add_option("--input", cls_opts.input, "Field log CSV (timestamp_s,voltage_v; required)");
  classify->add_option("--out", cls_opts.out,
                       "Report path prefix (default: <input>-diagnosis)");
  classify->add_option("--threads", cls_opts.threads, "Worker thread cap (0: machine)")
      ->capture_default_str();
  classify->add_option("--base-voltage", cls_opts.base_voltage, "Free-track voltage, volts")
      ->capture_default_str();
  classify->add_option("--noise-halfband", cls_opts.noise_halfband,
                       "Nominal jitter half-band, volts")
      ->capture_default_str();
  classify->add_option("--occupancy-threshold", cls_opts.occupancy_threshold,
                       "Occupancy decision threshold, volts")
      ->capture_default_str();
  classify->add_option("--band", cls_opts.band, "Nominal screening band around base, volts")
      ->capture_default_str();
  classify->add_option("--stride", cls_opts.stride, "Window stride, seconds")
      ->capture_default_str();

  ReportOpts rep_opts;
  CLI::App* report = app.add_subcommand("report", "Re-render a saved artifact as text");
  report->add_option("--config", rep_opts.config, "Flat key=value file; command-line flags win");
  report->add_option("--input", rep_opts.input, "Saved artifact file (required)");
  report->add_option("--out", rep_opts.out, "Output path (default: print to stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(gen)) {
      if (!gen_opts.config.empty()) apply_config_file(gen, gen_opts.config);
      return run_generate(gen_opts);
    }
    if (app.got_subcommand(train)) {
      if (!train_opts.config.empty()) apply_config_file(train, train_opts.config);
      const bool any = opt_c->count() || opt_gamma->count() || opt_kernel->count();
      const bool all = opt_c->count() && opt_gamma->count() && opt_kernel->count();
      if (any && !all) {
        std::cerr << "error: --c, --gamma, and --kernel must be given together (or all "
                     "omitted to run the grid search)\n";
        return kExitFailure;
      }
      train_opts.direct = all;
      return run_train(train_opts);
    }
    if (app.got_subcommand(evaluate)) {
      if (!eval_opts.config.empty()) apply_config_file(evaluate, eval_opts.config);
      return run_evaluate(eval_opts);
    }
    if (app.got_subcommand(classify)) {
      if (!cls_opts.config.empty()) apply_config_file(classify, cls_opts.config);
      return run_classify(cls_opts);
    }
    if (app.got_subcommand(report)) {
      if (!rep_opts.config.empty()) apply_config_file(report, rep_opts.config);
      return run_report(rep_opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
