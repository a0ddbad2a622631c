#include "doctest.h"

#include "emoeeg/dataio.hpp"
#include "emoeeg/errors.hpp"
#include "emoeeg/featext.hpp"
#include "emoeeg/models.hpp"

using namespace emoeeg;
using nlohmann::json;

namespace {

struct Fixture {
  LabeledDataset train = generate_synthetic({40, 5, 2.0, 13});
  LabeledDataset probe = generate_synthetic({30, 5, 2.0, 14});
  Standardizer st = fit_standardizer(train.features);
  Eigen::MatrixXd xtr = apply_standardizer(st, train.features);
  Eigen::MatrixXd xpr = apply_standardizer(st, probe.features);
};

// Serialize to text and back so that number formatting is exercised.
TrainedModel through_text(const TrainedModel& m) {
  return model_from_json(json::parse(model_to_json(m).dump()));
}

}  // namespace

TEST_CASE("model keys and names") {
  CHECK(model_key(ModelKind::LogisticRegression) == "lr");
  CHECK(model_key(ModelKind::Svm) == "svm");
  CHECK(model_key(ModelKind::RandomForest) == "rf");
  for (auto k : {ModelKind::LogisticRegression, ModelKind::Svm, ModelKind::RandomForest})
    CHECK(parse_model_kind(model_key(k)) == k);
  CHECK_THROWS_AS(parse_model_kind("knn"), Error);
  CHECK(uses_standardized_features(ModelKind::Svm));
  CHECK_FALSE(uses_standardized_features(ModelKind::RandomForest));
}

TEST_CASE("logistic regression round-trips bit for bit") {
  Fixture f;
  ModelConfig c;
  c.logreg.max_epochs = 50;
  const auto m = train_model(c, f.xtr, f.train.labels);
  const auto back = through_text(m);
  REQUIRE(kind_of(back) == ModelKind::LogisticRegression);
  const auto& a = std::get<LogRegModel>(m);
  const auto& b = std::get<LogRegModel>(back);
  CHECK(a.weights == b.weights);
  CHECK(a.biases == b.biases);
  CHECK(predict_proba_logreg(a, f.xpr) == predict_proba_logreg(b, f.xpr));
  CHECK(predict(m, f.xpr) == predict(back, f.xpr));
}

TEST_CASE("SVM round-trips bit for bit") {
  Fixture f;
  ModelConfig c;
  c.kind = ModelKind::Svm;
  const auto m = train_model(c, f.xtr, f.train.labels);
  const auto back = through_text(m);
  REQUIRE(kind_of(back) == ModelKind::Svm);
  const auto& a = std::get<SvmEnsemble>(m);
  const auto& b = std::get<SvmEnsemble>(back);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.models[k].support_vectors == b.models[k].support_vectors);
    CHECK(a.models[k].alphas == b.models[k].alphas);
    CHECK(a.models[k].bias == b.models[k].bias);
    CHECK(a.models[k].gamma == b.models[k].gamma);
  }
  CHECK(svm_decisions(a, f.xpr) == svm_decisions(b, f.xpr));
  CHECK(predict(m, f.xpr) == predict(back, f.xpr));
}

TEST_CASE("random forest round-trips bit for bit") {
  Fixture f;
  ModelConfig c;
  c.kind = ModelKind::RandomForest;
  c.forest.n_trees = 12;
  c.forest.seed = 5;
  const auto m = train_model(c, f.train.features, f.train.labels);
  const auto back = through_text(m);
  REQUIRE(kind_of(back) == ModelKind::RandomForest);
  const auto& a = std::get<RandomForestModel>(m);
  const auto& b = std::get<RandomForestModel>(back);
  REQUIRE(a.trees.size() == b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
    for (std::size_t k = 0; k < a.trees[t].nodes.size(); ++k) {
      CHECK(a.trees[t].nodes[k].threshold == b.trees[t].nodes[k].threshold);
      CHECK(a.trees[t].nodes[k].feature == b.trees[t].nodes[k].feature);
    }
  }
  CHECK(predict(m, f.probe.features) == predict(back, f.probe.features));
}

TEST_CASE("malformed model JSON is a schema mismatch") {
  Fixture f;
  ModelConfig c;
  c.logreg.max_epochs = 5;
  const json good = model_to_json(train_model(c, f.xtr, f.train.labels));
  auto code_of = [](const json& j) {
    try {
      model_from_json(j);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::EmptyFile;
  };
  json bad = good;
  bad["schema_version"] = kModelSchemaVersion + 1;
  CHECK(code_of(bad) == ErrorCode::SchemaMismatch);
  bad = good;
  bad["model"] = "knn";
  CHECK(code_of(bad) == ErrorCode::SchemaMismatch);
  CHECK(code_of(json::object()) == ErrorCode::SchemaMismatch);
  CHECK(code_of(json::array({1, 2})) == ErrorCode::SchemaMismatch);
}
