#pragma once

#include "emoeeg/analysis.hpp"
#include "emoeeg/dataio.hpp"
#include "emoeeg/dsp.hpp"
#include "emoeeg/eval.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace emoeeg {

inline constexpr int kArtifactSchemaVersion = 1;

// Every artifact file is {"schema_version", "kind", "payload"}.
struct Artifact {
  int schema_version = kArtifactSchemaVersion;
  std::string kind;
  nlohmann::json payload;
};

// Compact JSON plus a trailing newline; identical inputs give identical bytes.
void write_artifact(const Artifact& artifact, const std::filesystem::path& path);

// Throws SchemaMismatch for malformed files or a version other than ours.
Artifact read_artifact(const std::filesystem::path& path);

Artifact make_artifact(const EegRecording& recording, int transient_samples = 0);  // "timeseries"
Artifact make_artifact(const PsdEstimate& psd);                                    // "psd"
Artifact make_artifact(const CorrelationMatrix& corr);                             // "correlation"
Artifact make_artifact(const SignificanceSummary& summary);                        // "significance"
Artifact make_artifact(const Embedding2D& embedding);                              // "embedding"
Artifact make_artifact(const ConfusionMatrix& cm, ModelKind model);                // "confusion"
Artifact make_artifact(const EvaluationReport& report);                            // "comparison"

template <class T>
void write_artifact(const T& value, const std::filesystem::path& path) {
  write_artifact(make_artifact(value), path);
}

EegRecording recording_from_artifact(const Artifact& artifact);
PsdEstimate psd_from_artifact(const Artifact& artifact);
CorrelationMatrix correlation_from_artifact(const Artifact& artifact);
SignificanceSummary significance_from_artifact(const Artifact& artifact);
Embedding2D embedding_from_artifact(const Artifact& artifact);
ConfusionMatrix confusion_from_artifact(const Artifact& artifact);
EvaluationReport report_from_artifact(const Artifact& artifact);

}  // namespace emoeeg
