#include "emoeeg/models.hpp"

#include "emoeeg/errors.hpp"
#include "emoeeg/json_eigen.hpp"

namespace emoeeg {

namespace jsonio {

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  require(j.is_array(), ErrorCode::SchemaMismatch, "expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index cols) {
  require(j.is_array(), ErrorCode::SchemaMismatch, "expected a nested numeric array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows > 0) cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols,
            ErrorCode::SchemaMismatch, "ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace jsonio

std::string_view model_key(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogisticRegression: return "lr";
    case ModelKind::Svm: return "svm";
    case ModelKind::RandomForest: return "rf";
  }
  return "?";
}

std::string_view model_display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogisticRegression: return "Logistic regression";
    case ModelKind::Svm: return "SVM";
    case ModelKind::RandomForest: return "Random Forest";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view key) {
  if (key == "lr") return ModelKind::LogisticRegression;
  if (key == "svm") return ModelKind::Svm;
  if (key == "rf") return ModelKind::RandomForest;
  throw Error(ErrorCode::InvalidArgument, "unknown model '" + std::string(key) + "' (lr|svm|rf)");
}

ModelKind kind_of(const TrainedModel& model) {
  return static_cast<ModelKind>(model.index());
}

TrainedModel train_model(const ModelConfig& config, const Eigen::Ref<const Eigen::MatrixXd>& features,
                         const std::vector<int>& labels) {
  switch (config.kind) {
    case ModelKind::LogisticRegression: return train_logreg(features, labels, config.logreg);
    case ModelKind::Svm: return train_svm(features, labels, config.svm);
    case ModelKind::RandomForest: return train_rf(features, labels, config.forest);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model kind");
}

std::vector<int> predict(const TrainedModel& model,
                         const Eigen::Ref<const Eigen::MatrixXd>& features) {
  struct Visitor {
    const Eigen::Ref<const Eigen::MatrixXd>& x;
    std::vector<int> operator()(const LogRegModel& m) const { return predict_logreg(m, x); }
    std::vector<int> operator()(const SvmEnsemble& m) const { return predict_svm(m, x); }
    std::vector<int> operator()(const RandomForestModel& m) const { return predict_rf(m, x); }
  };
  return std::visit(Visitor{features}, model);
}

namespace {

using nlohmann::json;

json to_json_impl(const LogRegModel& m) {
  return {{"weights", jsonio::matrix_to_json(m.weights)},
          {"biases", jsonio::vector_to_json(m.biases)},
          {"l2_lambda", m.l2_lambda},
          {"epochs", m.epochs},
          {"converged", m.converged},
          {"training_history", m.training_history}};
}

json to_json_impl(const SvmEnsemble& e) {
  json models = json::array();
  for (std::size_t k = 0; k < e.models.size(); ++k) {
    const auto& m = e.models[k];
    models.push_back({{"classes", {kClassPairs[k].first, kClassPairs[k].second}},
                      {"support_vectors", jsonio::matrix_to_json(m.support_vectors)},
                      {"labels", jsonio::vector_to_json(m.labels)},
                      {"alphas", jsonio::vector_to_json(m.alphas)},
                      {"bias", m.bias},
                      {"gamma", m.gamma},
                      {"C", m.C},
                      {"n_features", m.n_features()}});
  }
  return {{"pairwise", models}, {"tie_break", "largest_margin_then_lowest_class"}};
}

json to_json_impl(const RandomForestModel& f) {
  json trees = json::array();
  for (const auto& t : f.trees) {
    json feature = json::array(), threshold = json::array(), left = json::array(),
         right = json::array(), label = json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      label.push_back(n.label);
    }
    trees.push_back({{"seed", t.seed},
                     {"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"label", label}});
  }
  return {{"mtry", f.mtry}, {"n_features", f.n_features}, {"trees", trees}};
}

}  // namespace

nlohmann::json model_to_json(const TrainedModel& model) {
  nlohmann::json body = std::visit([](const auto& m) { return to_json_impl(m); }, model);
  return {{"schema_version", kModelSchemaVersion},
          {"model", model_key(kind_of(model))},
          {"parameters", std::move(body)}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    require(j.at("schema_version").get<int>() == kModelSchemaVersion, ErrorCode::SchemaMismatch,
            "unsupported model schema version");
    const auto kind = parse_model_kind(j.at("model").get<std::string>());
    const auto& p = j.at("parameters");
    switch (kind) {
      case ModelKind::LogisticRegression: {
        LogRegModel m;
        m.weights = jsonio::matrix_from_json(p.at("weights"));
        m.biases = jsonio::vector_from_json(p.at("biases"));
        m.l2_lambda = p.at("l2_lambda").get<double>();
        m.epochs = p.at("epochs").get<int>();
        m.converged = p.at("converged").get<bool>();
        m.training_history = p.at("training_history").get<std::vector<double>>();
        return m;
      }
      case ModelKind::Svm: {
        SvmEnsemble e;
        const auto& models = p.at("pairwise");
        require(models.size() == 3, ErrorCode::SchemaMismatch, "expected 3 pairwise models");
        for (std::size_t k = 0; k < 3; ++k) {
          const auto& mj = models[k];
          auto& m = e.models[k];
          const auto d = mj.at("n_features").get<Eigen::Index>();
          m.support_vectors = jsonio::matrix_from_json(mj.at("support_vectors"), d);
          m.labels = jsonio::vector_from_json(mj.at("labels"));
          m.alphas = jsonio::vector_from_json(mj.at("alphas"));
          m.bias = mj.at("bias").get<double>();
          m.gamma = mj.at("gamma").get<double>();
          m.C = mj.at("C").get<double>();
        }
        return e;
      }
      case ModelKind::RandomForest: {
        RandomForestModel f;
        f.mtry = p.at("mtry").get<int>();
        f.n_features = p.at("n_features").get<Eigen::Index>();
        for (const auto& tj : p.at("trees")) {
          DecisionTree t;
          t.seed = tj.at("seed").get<std::uint64_t>();
          const auto feature = tj.at("feature").get<std::vector<int>>();
          const auto threshold = tj.at("threshold").get<std::vector<double>>();
          const auto left = tj.at("left").get<std::vector<int>>();
          const auto right = tj.at("right").get<std::vector<int>>();
          const auto label = tj.at("label").get<std::vector<int>>();
          require(threshold.size() == feature.size() && left.size() == feature.size() &&
                      right.size() == feature.size() && label.size() == feature.size(),
                  ErrorCode::SchemaMismatch, "tree arrays disagree in length");
          for (std::size_t i = 0; i < feature.size(); ++i) {
            t.nodes.push_back({feature[i], threshold[i], left[i], right[i], label[i]});
          }
          f.trees.push_back(std::move(t));
        }
        return f;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("malformed model JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaMismatch) throw;
    throw Error(ErrorCode::SchemaMismatch, std::string("malformed model JSON: ") + e.what());
  }
  throw Error(ErrorCode::SchemaMismatch, "unknown model kind");
}

}  // namespace emoeeg
