#include "tcdiag/multiclass.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "tcdiag/errors.hpp"
#include "tcdiag/num_format.hpp"
#include "tcdiag/parallel.hpp"
#include "tcdiag/rng.hpp"
#include "tcdiag/text_parse.hpp"

namespace tcdiag {
namespace {

constexpr std::string_view kModelHeader = "tcdiag-model v1";

constexpr std::array<std::pair<int, int>, 3> kClassPairs = {{{0, 1}, {0, 2}, {1, 2}}};

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

void append_vector(std::string& out, const Eigen::VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) {
    out += ' ';
    append_double(out, v[i]);
  }
}

// Canonical text body: everything the model is, minus caller metadata.
std::string serialize_body(const MulticlassSvmModel& model) {
  std::string out;
  out += kModelHeader;
  out += '\n';
  out += "dims " + std::to_string(model.binary_models[0].support_vectors.cols()) + '\n';
  const KernelSpec& k = model.meta.kernel;
  out += "kernel " + kernel_kind_name(k.kind) + ' ' + format_double(k.gamma) + ' ' +
         std::to_string(k.degree) + ' ' + format_double(k.coef0) + '\n';
  out += "c " + format_double(model.meta.c) + '\n';
  out += "seed " + std::to_string(model.meta.seed) + '\n';
  out += "train_rows " + std::to_string(model.meta.train_rows) + '\n';
  out += "scale_features ";
  out += model.scaling ? '1' : '0';
  out += '\n';
  if (model.scaling) {
    out += "lo";
    append_vector(out, model.scaling->lo);
    out += '\n';
    out += "span";
    append_vector(out, model.scaling->span);
    out += '\n';
  }
  for (const BinarySvmModel& bm : model.binary_models) {
    out += "pair " + std::to_string(static_cast<int>(bm.class_pair.first)) + ' ' +
           std::to_string(static_cast<int>(bm.class_pair.second)) + " bias " +
           format_double(bm.bias) + " support " + std::to_string(bm.support_vectors.rows()) +
           '\n';
    for (Index s = 0; s < bm.support_vectors.rows(); ++s) {
      append_double(out, bm.dual_coefs[s]);
      append_vector(out, bm.support_vectors.row(s).transpose());
      out += '\n';
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd FeatureScaling::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != lo.size()) {
    throw std::invalid_argument("feature scaling dimension mismatch");
  }
  Eigen::MatrixXd out = x;
  out.rowwise() -= lo.transpose();
  out.array().rowwise() /= span.transpose().array();
  return out;
}

Eigen::VectorXd FeatureScaling::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != lo.size()) {
    throw std::invalid_argument("feature scaling dimension mismatch");
  }
  return (x - lo).cwiseQuotient(span);
}

FeatureScaling fit_feature_scaling(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw std::invalid_argument("cannot fit feature scaling on no rows");
  FeatureScaling fs;
  fs.lo = x.colwise().minCoeff();
  fs.span.resize(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double range = x.col(j).maxCoeff() - fs.lo[j];
    fs.span[j] = range > 1e-12 ? range : 1.0;
  }
  return fs;
}

MulticlassSvmModel train_one_vs_one(const LabeledDataset& ds, double c, const KernelSpec& kernel,
                                    const SmoSettings& settings, std::uint64_t seed,
                                    bool scale_features) {
  ds.validate();
  kernel.validate();
  settings.validate();
  const auto counts = ds.class_counts();
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (counts[k] == 0) {
      throw std::invalid_argument("training corpus is missing class " +
                                  anomaly_class_name(static_cast<AnomalyClass>(k)));
    }
  }

  MulticlassSvmModel model;
  model.meta.seed = seed;
  model.meta.c = c;
  model.meta.kernel = kernel;
  model.meta.train_rows = ds.size();
  model.meta.trained_at_unix = static_cast<std::int64_t>(std::time(nullptr));

  const Eigen::MatrixXd* features = &ds.windows;
  Eigen::MatrixXd rescaled;
  if (scale_features) {
    model.scaling = fit_feature_scaling(ds.windows);
    rescaled = model.scaling->apply(ds.windows);
    features = &rescaled;
  }

  parallel_for(static_cast<std::int64_t>(kClassPairs.size()), [&](std::int64_t p) {
    const auto [a, b] = kClassPairs[static_cast<std::size_t>(p)];
    const Index rows = counts[static_cast<std::size_t>(a)] + counts[static_cast<std::size_t>(b)];
    Eigen::MatrixXd x(rows, features->cols());
    Eigen::VectorXi y(rows);
    Index r = 0;
    for (Index i = 0; i < ds.size(); ++i) {
      const int code = static_cast<int>(ds.labels[static_cast<std::size_t>(i)]);
      if (code != a && code != b) continue;
      x.row(r) = features->row(i);
      y[r] = code == a ? 1 : -1;
      ++r;
    }
    BinarySvmModel bm = train_binary_smo(x, y, c, kernel, settings,
                                         derive_seed(seed, static_cast<std::uint64_t>(p)));
    bm.class_pair = {static_cast<AnomalyClass>(a), static_cast<AnomalyClass>(b)};
    model.binary_models[static_cast<std::size_t>(p)] = std::move(bm);
  });
  return model;
}

std::vector<AnomalyClass> predict_classes(const MulticlassSvmModel& model,
                                          const Eigen::MatrixXd& x,
                                          std::vector<VoteDetail>* details) {
  const Eigen::MatrixXd* features = &x;
  Eigen::MatrixXd rescaled;
  if (model.scaling) {
    rescaled = model.scaling->apply(x);
    features = &rescaled;
  }

  std::vector<VoteDetail> tally(static_cast<std::size_t>(x.rows()));
  for (const BinarySvmModel& bm : model.binary_models) {
    const Eigen::VectorXd f = decision_values(bm, *features);
    for (Index r = 0; r < f.size(); ++r) {
      const AnomalyClass voted = f[r] > 0.0 ? bm.class_pair.first : bm.class_pair.second;
      auto& t = tally[static_cast<std::size_t>(r)];
      ++t.votes[static_cast<std::size_t>(voted)];
      t.magnitude[static_cast<std::size_t>(voted)] += std::abs(f[r]);
    }
  }

  std::vector<AnomalyClass> out(static_cast<std::size_t>(x.rows()));
  for (std::size_t r = 0; r < tally.size(); ++r) {
    auto& t = tally[r];
    std::size_t best = 0;
    for (std::size_t cls = 1; cls < kNumClasses; ++cls) {
      if (t.votes[cls] > t.votes[best] ||
          (t.votes[cls] == t.votes[best] && t.magnitude[cls] > t.magnitude[best])) {
        best = cls;
      }
    }
    t.winner = static_cast<AnomalyClass>(best);
    out[r] = t.winner;
  }
  if (details) *details = std::move(tally);
  return out;
}

AnomalyClass predict_class(const MulticlassSvmModel& model,
                           const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::MatrixXd one(1, x.size());
  one.row(0) = x.transpose();
  return predict_classes(model, one).front();
}

std::string model_fingerprint(const MulticlassSvmModel& model) {
  return hex16(fnv1a64(serialize_body(model)));
}

void save_model(const MulticlassSvmModel& model, const std::filesystem::path& path,
                const std::vector<std::string>& meta_lines) {
  for (const BinarySvmModel& bm : model.binary_models) bm.validate();
  const std::string body = serialize_body(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& m : meta_lines) {
    out << "# " << m << '\n';
  }
  out << body << "fingerprint " << hex16(fnv1a64(body)) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

MulticlassSvmModel load_model(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);

  // Skip caller metadata, then hash the canonical body up to the fingerprint.
  std::size_t body_start = 0;
  while (body_start < text.size() && text[body_start] == '#') {
    std::size_t end = text.find('\n', body_start);
    if (end == std::string::npos) throw ParseError("model file has no content");
    body_start = end + 1;
  }
  const std::size_t fp_pos = text.rfind("\nfingerprint ");
  if (fp_pos == std::string::npos || fp_pos < body_start) {
    throw ParseError("model file is missing its fingerprint line");
  }
  const std::size_t fp_line_start = fp_pos + 1;
  const std::string_view body(text.data() + body_start, fp_line_start - body_start);

  LineReader reader(std::string_view(text).substr(body_start));
  auto next_tokens = [&](std::string_view& line) {
    if (!reader.next(line)) throw ParseError("model file ended early", reader.line_no());
    return split_ws(line);
  };

  std::string_view line;
  if (!reader.next(line) || line != kModelHeader) {
    throw ParseError("model file must start with \"" + std::string(kModelHeader) + "\"",
                     reader.line_no());
  }

  auto expect_field = [&](const char* name, std::size_t count) {
    auto tokens = next_tokens(line);
    if (tokens.size() != count || tokens[0] != name) {
      throw ParseError("expected \"" + std::string(name) + "\" line", reader.line_no());
    }
    return tokens;
  };

  MulticlassSvmModel model;
  auto dims_tokens = expect_field("dims", 2);
  const std::int64_t dims = need_int(dims_tokens[1], reader.line_no(), "dims");
  if (dims <= 0) throw ParseError("dims must be positive", reader.line_no());

  auto kernel_tokens = expect_field("kernel", 5);
  KernelSpec kernel;
  kernel.kind = kernel_kind_from_name(std::string(kernel_tokens[1]));
  kernel.gamma = need_double(kernel_tokens[2], reader.line_no(), "gamma");
  kernel.degree = static_cast<int>(need_int(kernel_tokens[3], reader.line_no(), "degree"));
  kernel.coef0 = need_double(kernel_tokens[4], reader.line_no(), "coef0");
  kernel.validate();
  model.meta.kernel = kernel;

  model.meta.c = need_double(expect_field("c", 2)[1], reader.line_no(), "c");
  model.meta.seed = need_u64(expect_field("seed", 2)[1], reader.line_no(), "seed");
  model.meta.train_rows = static_cast<Index>(
      need_int(expect_field("train_rows", 2)[1], reader.line_no(), "train_rows"));

  auto scale_tokens = expect_field("scale_features", 2);
  const bool scaled = scale_tokens[1] == "1";
  if (!scaled && scale_tokens[1] != "0") {
    throw ParseError("scale_features must be 0 or 1", reader.line_no());
  }
  if (scaled) {
    FeatureScaling fs;
    auto parse_vec = [&](const char* name) {
      auto tokens = next_tokens(line);
      if (tokens.size() != static_cast<std::size_t>(dims) + 1 || tokens[0] != name) {
        throw ParseError("expected \"" + std::string(name) + "\" line with " +
                             std::to_string(dims) + " values",
                         reader.line_no());
      }
      Eigen::VectorXd v(dims);
      for (Index i = 0; i < dims; ++i) {
        v[i] = need_double(tokens[static_cast<std::size_t>(i) + 1], reader.line_no(), name);
      }
      return v;
    };
    fs.lo = parse_vec("lo");
    fs.span = parse_vec("span");
    model.scaling = std::move(fs);
  }

  for (std::size_t p = 0; p < kClassPairs.size(); ++p) {
    auto tokens = next_tokens(line);
    if (tokens.size() != 7 || tokens[0] != "pair" || tokens[3] != "bias" ||
        tokens[5] != "support") {
      throw ParseError("expected \"pair <a> <b> bias <v> support <n>\" line", reader.line_no());
    }
    const int a = static_cast<int>(need_int(tokens[1], reader.line_no(), "class code"));
    const int b = static_cast<int>(need_int(tokens[2], reader.line_no(), "class code"));
    if (a != kClassPairs[p].first || b != kClassPairs[p].second) {
      throw ParseError("class pairs must appear in order (0,1), (0,2), (1,2)", reader.line_no());
    }
    BinarySvmModel bm;
    bm.class_pair = {anomaly_class_from_code(a), anomaly_class_from_code(b)};
    bm.bias = need_double(tokens[4], reader.line_no(), "bias");
    const std::int64_t support = need_int(tokens[6], reader.line_no(), "support count");
    if (support <= 0) throw ParseError("support count must be positive", reader.line_no());
    bm.kernel = kernel;
    bm.c = model.meta.c;
    bm.support_vectors.resize(support, dims);
    bm.dual_coefs.resize(support);
    for (Index s = 0; s < support; ++s) {
      auto row = next_tokens(line);
      if (row.size() != static_cast<std::size_t>(dims) + 1) {
        throw ParseError("support vector row must hold " + std::to_string(dims + 1) + " values",
                         reader.line_no());
      }
      bm.dual_coefs[s] = need_double(row[0], reader.line_no(), "dual coefficient");
      for (Index d = 0; d < dims; ++d) {
        bm.support_vectors(s, d) =
            need_double(row[static_cast<std::size_t>(d) + 1], reader.line_no(), "support value");
      }
    }
    bm.validate();
    model.binary_models[p] = std::move(bm);
  }

  auto fp_tokens = next_tokens(line);
  if (fp_tokens.size() != 2 || fp_tokens[0] != "fingerprint") {
    throw ParseError("expected fingerprint line", reader.line_no());
  }
  if (std::string(fp_tokens[1]) != hex16(fnv1a64(body))) {
    throw ParseError("model fingerprint mismatch: file is corrupt or was edited");
  }
  return model;
}

}  // namespace tcdiag
