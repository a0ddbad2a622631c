#include "emoeeg/artifact.hpp"

#include "emoeeg/errors.hpp"
#include "emoeeg/json_eigen.hpp"

#include <fstream>
#include <sstream>

namespace emoeeg {

using nlohmann::json;

namespace {

void expect_kind(const Artifact& a, std::string_view kind) {
  require(a.kind == kind, ErrorCode::SchemaMismatch,
          "expected artifact kind '" + std::string(kind) + "', got '" + a.kind + "'");
}

json class_names() {
  json names = json::array();
  for (auto n : kLabelNames) names.push_back(std::string(n));
  return names;
}

json metrics_to_json(const ClassificationMetrics& m) {
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"support", m.support},
          {"macro_f1", m.macro_f1},
          {"weighted_f1", m.weighted_f1},
          {"undefined_ratios", m.undefined_ratios}};
}

ClassificationMetrics metrics_from_json(const json& j) {
  ClassificationMetrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<std::array<double, kNumClasses>>();
  m.recall = j.at("recall").get<std::array<double, kNumClasses>>();
  m.f1 = j.at("f1").get<std::array<double, kNumClasses>>();
  m.support = j.at("support").get<std::array<long, kNumClasses>>();
  m.macro_f1 = j.at("macro_f1").get<double>();
  m.weighted_f1 = j.at("weighted_f1").get<double>();
  m.undefined_ratios = j.at("undefined_ratios").get<int>();
  return m;
}

json confusion_to_json(const ConfusionMatrix& cm) { return jsonio::matrix_to_json(cm); }

ConfusionMatrix confusion_from_json(const json& j) {
  require(j.is_array() && j.size() == kNumClasses, ErrorCode::SchemaMismatch,
          "confusion matrix must be 3 x 3");
  ConfusionMatrix cm;
  for (int r = 0; r < kNumClasses; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    require(row.is_array() && row.size() == kNumClasses, ErrorCode::SchemaMismatch,
            "confusion matrix must be 3 x 3");
    for (int c = 0; c < kNumClasses; ++c) cm(r, c) = row[static_cast<std::size_t>(c)].get<long>();
  }
  return cm;
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("malformed artifact payload: ") + e.what());
  }
}

}  // namespace

void write_artifact(const Artifact& artifact, const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  std::error_code ec;
  if (!parent.empty() && !std::filesystem::is_directory(parent, ec)) {
    throw Error(ErrorCode::PathError, "directory does not exist: " + parent.string());
  }
  const json doc = {{"schema_version", artifact.schema_version},
                    {"kind", artifact.kind},
                    {"payload", artifact.payload}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::PathError, "cannot write artifact: " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error(ErrorCode::PathError, "write failed: " + path.string());
}

Artifact read_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open artifact: " + path.string());
  return guarded([&] {
    const json doc = json::parse(in);
    Artifact a;
    a.schema_version = doc.at("schema_version").get<int>();
    require(a.schema_version == kArtifactSchemaVersion, ErrorCode::SchemaMismatch,
            "unsupported artifact schema version " + std::to_string(a.schema_version));
    a.kind = doc.at("kind").get<std::string>();
    a.payload = doc.at("payload");
    return a;
  });
}

Artifact make_artifact(const EegRecording& recording, int transient_samples) {
  return {kArtifactSchemaVersion, "timeseries",
          {{"sampling_rate", recording.sampling_rate},
           {"channels", recording.channel_names},
           {"samples", jsonio::matrix_to_json(recording.samples)},
           {"transient_samples", transient_samples}}};
}

EegRecording recording_from_artifact(const Artifact& a) {
  expect_kind(a, "timeseries");
  return guarded([&] {
    EegRecording r;
    r.sampling_rate = a.payload.at("sampling_rate").get<double>();
    r.channel_names = a.payload.at("channels").get<std::vector<std::string>>();
    r.samples = jsonio::matrix_from_json(a.payload.at("samples"));
    r.validate();
    return r;
  });
}

Artifact make_artifact(const PsdEstimate& psd) {
  json channels = json::array();
  for (Eigen::Index c = 0; c < psd.power.rows(); ++c) {
    channels.push_back({{"name", psd.channel_names[static_cast<std::size_t>(c)]},
                        {"power", jsonio::vector_to_json(psd.power.row(c))}});
  }
  return {kArtifactSchemaVersion, "psd",
          {{"frequencies_hz", jsonio::vector_to_json(psd.frequencies_hz)},
           {"channels", channels},
           {"segment_length", psd.segment_length},
           {"overlap_fraction", psd.overlap_fraction},
           {"window", "hann"},
           {"units", "signal^2/Hz"}}};
}

PsdEstimate psd_from_artifact(const Artifact& a) {
  expect_kind(a, "psd");
  return guarded([&] {
    PsdEstimate psd;
    psd.frequencies_hz = jsonio::vector_from_json(a.payload.at("frequencies_hz"));
    psd.segment_length = a.payload.at("segment_length").get<int>();
    psd.overlap_fraction = a.payload.at("overlap_fraction").get<double>();
    const auto& channels = a.payload.at("channels");
    psd.power.resize(static_cast<Eigen::Index>(channels.size()), psd.frequencies_hz.size());
    for (std::size_t c = 0; c < channels.size(); ++c) {
      psd.channel_names.push_back(channels[c].at("name").get<std::string>());
      const Eigen::VectorXd p = jsonio::vector_from_json(channels[c].at("power"));
      require(p.size() == psd.frequencies_hz.size(), ErrorCode::SchemaMismatch,
              "power and frequency arrays differ in length");
      psd.power.row(static_cast<Eigen::Index>(c)) = p.transpose();
    }
    return psd;
  });
}

Artifact make_artifact(const CorrelationMatrix& corr) {
  return {kArtifactSchemaVersion, "correlation",
          {{"feature_names", corr.feature_names},
           {"values", jsonio::matrix_to_json(corr.values)},
           {"constant_columns", corr.constant_columns},
           {"method", "pearson"}}};
}

CorrelationMatrix correlation_from_artifact(const Artifact& a) {
  expect_kind(a, "correlation");
  return guarded([&] {
    CorrelationMatrix c;
    c.feature_names = a.payload.at("feature_names").get<std::vector<std::string>>();
    c.values = jsonio::matrix_from_json(a.payload.at("values"));
    c.constant_columns = a.payload.at("constant_columns").get<std::vector<bool>>();
    return c;
  });
}

Artifact make_artifact(const SignificanceSummary& summary) {
  json classes = json::array();
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& cls = summary.per_class[static_cast<std::size_t>(c)];
    json tests = json::array();
    for (const auto& t : cls.tests) {
      tests.push_back({{"feature", t.feature_name},
                       {"t", t.t_statistic},
                       {"df", t.degrees_of_freedom},
                       {"p", t.p_value},
                       {"significant", t.significant}});
    }
    classes.push_back({{"label", c},
                       {"name", std::string(kLabelNames[static_cast<std::size_t>(c)])},
                       {"significant", cls.significant},
                       {"non_significant", cls.non_significant},
                       {"tests", tests}});
  }
  return {kArtifactSchemaVersion, "significance",
          {{"alpha", summary.alpha},
           {"test", "welch_one_vs_rest"},
           {"correction", "none"},
           {"classes", classes}}};
}

SignificanceSummary significance_from_artifact(const Artifact& a) {
  expect_kind(a, "significance");
  return guarded([&] {
    SignificanceSummary s;
    s.alpha = a.payload.at("alpha").get<double>();
    const auto& classes = a.payload.at("classes");
    require(classes.size() == kNumClasses, ErrorCode::SchemaMismatch, "expected 3 classes");
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      auto& cls = s.per_class[c];
      cls.significant = classes[c].at("significant").get<std::size_t>();
      cls.non_significant = classes[c].at("non_significant").get<std::size_t>();
      for (const auto& t : classes[c].at("tests")) {
        cls.tests.push_back({t.at("feature").get<std::string>(), t.at("t").get<double>(),
                             t.at("df").get<double>(), t.at("p").get<double>(),
                             t.at("significant").get<bool>()});
      }
    }
    return s;
  });
}

Artifact make_artifact(const Embedding2D& e) {
  return {kArtifactSchemaVersion, "embedding",
          {{"coordinates", jsonio::matrix_to_json(e.coordinates)},
           {"labels", e.labels},
           {"label_names", class_names()},
           {"perplexity", e.perplexity},
           {"initial_kl", e.initial_kl},
           {"final_kl", e.final_kl}}};
}

Embedding2D embedding_from_artifact(const Artifact& a) {
  expect_kind(a, "embedding");
  return guarded([&] {
    Embedding2D e;
    e.coordinates = jsonio::matrix_from_json(a.payload.at("coordinates"), 2);
    e.labels = a.payload.at("labels").get<std::vector<int>>();
    e.perplexity = a.payload.at("perplexity").get<double>();
    e.initial_kl = a.payload.at("initial_kl").get<double>();
    e.final_kl = a.payload.at("final_kl").get<double>();
    return e;
  });
}

Artifact make_artifact(const ConfusionMatrix& cm, ModelKind model) {
  return {kArtifactSchemaVersion, "confusion",
          {{"model", std::string(model_key(model))},
           {"display_name", std::string(model_display_name(model))},
           {"class_names", class_names()},
           {"axes", "rows=true,cols=predicted"},
           {"counts", confusion_to_json(cm)}}};
}

ConfusionMatrix confusion_from_artifact(const Artifact& a) {
  expect_kind(a, "confusion");
  return guarded([&] { return confusion_from_json(a.payload.at("counts")); });
}

Artifact make_artifact(const EvaluationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"model", std::string(model_key(r.kind))},
                    {"display_name", std::string(model_display_name(r.kind))},
                    {"accuracy_percent", 100.0 * r.metrics.accuracy},
                    {"f1_score", r.metrics.weighted_f1},
                    {"metrics", metrics_to_json(r.metrics)},
                    {"confusion", confusion_to_json(r.confusion)}});
  }
  json ranking = json::array();
  for (int i : report.ranking()) {
    ranking.push_back(std::string(model_key(report.rows[static_cast<std::size_t>(i)].kind)));
  }
  const int best = report.best_index();
  return {kArtifactSchemaVersion, "comparison",
          {{"columns", {"Model", "Accuracy %", "F1-score"}},
           {"f1_average", "weighted"},
           {"class_names", class_names()},
           {"rows", rows},
           {"best_model", best >= 0 ? json(std::string(model_key(
                                          report.rows[static_cast<std::size_t>(best)].kind)))
                                    : json(nullptr)},
           {"ranking", ranking},
           {"provenance",
            {{"seed", report.split.seed},
             {"test_fraction", report.split.test_fraction},
             {"train_rows", report.split.train_rows},
             {"test_rows", report.split.test_rows},
             {"n_features", report.feature_names.size()},
             {"feature_names", report.feature_names},
             {"significant_only", report.significant_only}}}}};
}

EvaluationReport report_from_artifact(const Artifact& a) {
  expect_kind(a, "comparison");
  return guarded([&] {
    EvaluationReport r;
    for (const auto& row : a.payload.at("rows")) {
      ModelResult m;
      m.kind = parse_model_kind(row.at("model").get<std::string>());
      m.metrics = metrics_from_json(row.at("metrics"));
      m.confusion = confusion_from_json(row.at("confusion"));
      r.rows.push_back(m);
    }
    const auto& p = a.payload.at("provenance");
    r.split.seed = p.at("seed").get<std::uint64_t>();
    r.split.test_fraction = p.at("test_fraction").get<double>();
    r.split.train_rows = p.at("train_rows").get<std::vector<Eigen::Index>>();
    r.split.test_rows = p.at("test_rows").get<std::vector<Eigen::Index>>();
    r.significant_only = p.at("significant_only").get<bool>();
    r.feature_names = p.at("feature_names").get<std::vector<std::string>>();
    return r;
  });
}

}  // namespace emoeeg
