#include "doctest.h"
#include "support.hpp"

#include "emoeeg/csv.hpp"
#include "emoeeg/dataio.hpp"
#include "emoeeg/errors.hpp"
#include "emoeeg/random.hpp"

#include <functional>

#include <set>

using namespace emoeeg;
using testing_support::TempDir;
using testing_support::write_text;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an emoeeg::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("label encoding is a bijection over the class names") {
  for (int c = 0; c < kNumClasses; ++c) CHECK(encode_label(label_name(c)) == c);
  CHECK(encode_label("negative") == 0);
  CHECK(encode_label("Neutral") == 1);
  CHECK(encode_label("POSITIVE") == 2);
  CHECK(encode_label("2") == 2);
  CHECK(code_of([] { encode_label("HAPPY"); }) == ErrorCode::UnknownLabel);
  CHECK(code_of([] { encode_label("3"); }) == ErrorCode::UnknownLabel);
}

TEST_CASE("toy feature CSV loads with encoded labels") {
  TempDir dir("dataio");
  write_text(dir / "toy.csv", "f1,f2,label\n1,2,NEGATIVE\n3,4,NEUTRAL\n5,6,POSITIVE\n");
  const auto ds = load_feature_dataset(dir / "toy.csv");
  CHECK(ds.n_features() == 2);
  CHECK(ds.n_samples() == 3);
  CHECK(ds.labels == std::vector<int>{0, 1, 2});
  CHECK(ds.feature_names == std::vector<std::string>{"f1", "f2"});
  CHECK(ds.features(2, 1) == 6.0);
  const auto counts = ds.class_counts();
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 1);
  CHECK(counts[2] == 1);
}

TEST_CASE("label column may sit anywhere and keeps feature order") {
  TempDir dir("dataio");
  write_text(dir / "mid.csv", "a,emotion,b\n1,0,2\n3,2,4\n");
  const auto ds = load_feature_dataset(dir / "mid.csv", "emotion");
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.labels == std::vector<int>{0, 2});
  CHECK(ds.features(1, 0) == 3.0);
}

TEST_CASE("loader errors are distinct and located") {
  TempDir dir("dataio");
  CHECK(code_of([&] { load_feature_dataset(dir / "absent.csv"); }) == ErrorCode::MissingFile);

  write_text(dir / "nolabel.csv", "f1,f2\n1,2\n");
  CHECK(code_of([&] { load_feature_dataset(dir / "nolabel.csv"); }) == ErrorCode::MissingColumn);

  write_text(dir / "badlabel.csv", "f1,label\n1,ANGRY\n");
  CHECK(code_of([&] { load_feature_dataset(dir / "badlabel.csv"); }) == ErrorCode::UnknownLabel);

  write_text(dir / "abc.csv", "f1,f2,label\n1,2,NEGATIVE\n3,abc,NEUTRAL\n");
  try {
    load_feature_dataset(dir / "abc.csv");
    FAIL("expected NonNumericCell");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonNumericCell);
    REQUIRE(e.row().has_value());
    CHECK(*e.row() == 3);  // 1-based line number, header is line 1
    REQUIRE(e.column().has_value());
    CHECK(*e.column() == "f2");
  }

  write_text(dir / "nan.csv", "f1,label\nnan,NEGATIVE\n");
  CHECK(code_of([&] { load_feature_dataset(dir / "nan.csv"); }) == ErrorCode::NonFiniteCell);
  write_text(dir / "inf.csv", "f1,label\n-inf,NEGATIVE\n");
  CHECK(code_of([&] { load_feature_dataset(dir / "inf.csv"); }) == ErrorCode::NonFiniteCell);

  write_text(dir / "dup.csv", "f1,f1,label\n1,2,NEGATIVE\n");
  CHECK(code_of([&] { load_feature_dataset(dir / "dup.csv"); }) == ErrorCode::DuplicateName);

  write_text(dir / "empty.csv", "");
  CHECK(code_of([&] { load_feature_dataset(dir / "empty.csv"); }) == ErrorCode::EmptyFile);
}

TEST_CASE("feature dataset write then read is exact") {
  TempDir dir("dataio");
  const auto ds = generate_synthetic({20, 5, 3.0, 11});
  write_feature_dataset(ds, dir / "rt.csv");
  const auto back = load_feature_dataset(dir / "rt.csv");
  CHECK(back.feature_names == ds.feature_names);
  CHECK(back.labels == ds.labels);
  CHECK(back.features == ds.features);
}

TEST_CASE("csv number formatting round-trips doubles bit-exactly") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
    const auto parsed = csv::parse_number(csv::format_number(v));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == v);
  }
  CHECK_FALSE(csv::parse_number("1.0x").has_value());
  CHECK_FALSE(csv::parse_number("").has_value());
  CHECK(csv::parse_number(" 2.5 ").value() == 2.5);
}

TEST_CASE("csv quoting") {
  const auto cells = csv::split_line(R"(a,"b,c","d""e",)");
  REQUIRE(cells.size() == 4);
  CHECK(cells[1] == "b,c");
  CHECK(cells[2] == "d\"e");
  CHECK(cells[3].empty());
  CHECK(csv::quote_if_needed("x,y") == "\"x,y\"");
  CHECK(csv::quote_if_needed("plain") == "plain");
}

TEST_CASE("raw EEG loading counts channels and samples") {
  TempDir dir("dataio");
  std::string text = "TP9,AF7,AF8,TP10\n";
  for (int i = 0; i < 300; ++i) text += "1,2,3,4\n";
  write_text(dir / "raw.csv", text);
  const auto rec = load_raw_eeg(dir / "raw.csv", 150.0);
  CHECK(rec.n_channels() == 4);
  CHECK(rec.n_samples() == 300);
  CHECK(rec.duration() == doctest::Approx(2.0));
  CHECK(rec.channel_names[3] == "TP10");

  std::string wide;
  for (int c = 0; c < 19; ++c) wide += (c ? ",ch" : "ch") + std::to_string(c);
  wide += "\n";
  for (int i = 0; i < 10; ++i) {
    for (int c = 0; c < 19; ++c) wide += (c ? ",0.5" : "0.5");
    wide += "\n";
  }
  write_text(dir / "wide.csv", wide);
  CHECK(load_raw_eeg(dir / "wide.csv", 150.0).n_channels() == 19);

  write_text(dir / "ragged.csv", "TP9,AF7,AF8,TP10\n1,2,3,4\n1,2,3\n");
  CHECK(code_of([&] { load_raw_eeg(dir / "ragged.csv", 150.0); }) == ErrorCode::RaggedRow);
  write_text(dir / "empty.csv", "");
  CHECK(code_of([&] { load_raw_eeg(dir / "empty.csv", 150.0); }) == ErrorCode::EmptyFile);
  write_text(dir / "text.csv", "TP9\nx\n");
  CHECK(code_of([&] { load_raw_eeg(dir / "text.csv", 150.0); }) == ErrorCode::NonNumericCell);
  CHECK(code_of([&] { load_raw_eeg(dir / "raw.csv", 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("raw EEG round trip") {
  TempDir dir("dataio");
  EegRecording rec;
  rec.channel_names = {"TP9", "AF7"};
  rec.samples = Eigen::MatrixXd::Random(2, 40);
  rec.sampling_rate = 150.0;
  write_raw_eeg(rec, dir / "r.csv");
  const auto back = load_raw_eeg(dir / "r.csv", 150.0);
  CHECK(back.channel_names == rec.channel_names);
  CHECK(back.samples == rec.samples);
}

TEST_CASE("synthetic generator geometry and determinism") {
  const SyntheticSpec spec{50, 4, 10.0, 7};
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(a.n_samples() == 150);
  CHECK(a.n_features() == 4);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);

  const Eigen::MatrixXd means = class_means(spec);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      CHECK((means.row(i) - means.row(j)).norm() == doctest::Approx(10.0).epsilon(1e-12));
    }
  }
  // Every feature carries a between-class shift.
  for (Eigen::Index f = 0; f < 4; ++f) {
    const double spread = means.col(f).maxCoeff() - means.col(f).minCoeff();
    CHECK(spread > 0.5);
  }

  const auto one = class_means({10, 1, 6.0, 1});
  CHECK(std::abs(one(0, 0) - one(2, 0)) == doctest::Approx(12.0));
}

TEST_CASE("nearest-centroid oracle separates class_separation=10 on a fresh draw") {
  const SyntheticSpec spec{50, 4, 10.0, 7};
  const auto train = generate_synthetic(spec);
  const auto fresh = generate_synthetic({200, 4, 10.0, 8});
  // Centroids estimated from the training draw, not the generator's means.
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(3, 4);
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  for (Eigen::Index r = 0; r < train.n_samples(); ++r) {
    centroids.row(train.labels[r]) += train.features.row(r);
    counts(train.labels[r]) += 1.0;
  }
  for (int c = 0; c < 3; ++c) centroids.row(c) /= counts(c);
  int correct = 0;
  for (Eigen::Index r = 0; r < fresh.n_samples(); ++r) {
    Eigen::Index best = 0;
    (centroids.rowwise() - fresh.features.row(r)).rowwise().squaredNorm().minCoeff(&best);
    correct += static_cast<int>(best) == fresh.labels[r];
  }
  CHECK(static_cast<double>(correct) / fresh.n_samples() >= 0.99);
}

TEST_CASE("every feature separates every class from the rest") {
  for (int d = 2; d <= 12; ++d) {
    const auto means = class_means({10, d, 10.0, 1});
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        CHECK((means.row(i) - means.row(j)).norm() == doctest::Approx(10.0).epsilon(1e-12));
      }
    }
    CHECK(means.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    // With centroid 0, mean_c - avg(others) = 1.5 mean_c.
    CHECK(means.cwiseAbs().minCoeff() > 0.2 * 10.0 / std::sqrt(3.0 * d));
  }
}

TEST_CASE("zero separation gives coincident class means") {
  const auto means = class_means({50, 4, 0.0, 7});
  CHECK(means.isZero(0.0));
}

TEST_CASE("dataset validation") {
  LabeledDataset ds;
  ds.features = Eigen::MatrixXd::Ones(2, 2);
  ds.feature_names = {"a", "b"};
  ds.labels = {0, 5};
  CHECK(code_of([&] { ds.validate(); }) == ErrorCode::UnknownLabel);
  ds.labels = {0, 1};
  ds.features(0, 0) = std::nan("");
  CHECK(code_of([&] { ds.validate(); }) == ErrorCode::NonFiniteCell);
  ds.features(0, 0) = 1.0;
  ds.feature_names = {"a", "a"};
  CHECK(code_of([&] { ds.validate(); }) == ErrorCode::DuplicateName);
}
