#pragma once

#include "emoeeg/forest.hpp"
#include "emoeeg/logreg.hpp"
#include "emoeeg/svm.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace emoeeg {

enum class ModelKind { LogisticRegression, Svm, RandomForest };

std::string_view model_key(ModelKind kind);           // "lr", "svm", "rf"
std::string_view model_display_name(ModelKind kind);  // "Logistic regression", ...
ModelKind parse_model_kind(std::string_view key);

struct ModelConfig {
  ModelKind kind = ModelKind::LogisticRegression;
  LogRegParams logreg;
  SvmParams svm;
  ForestParams forest;
};

// LR and SVM consume standardized features; RF consumes raw features.
inline bool uses_standardized_features(ModelKind kind) { return kind != ModelKind::RandomForest; }

using TrainedModel = std::variant<LogRegModel, SvmEnsemble, RandomForestModel>;

ModelKind kind_of(const TrainedModel& model);

TrainedModel train_model(const ModelConfig& config, const Eigen::Ref<const Eigen::MatrixXd>& features,
                         const std::vector<int>& labels);

std::vector<int> predict(const TrainedModel& model,
                         const Eigen::Ref<const Eigen::MatrixXd>& features);

inline constexpr int kModelSchemaVersion = 1;

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace emoeeg
