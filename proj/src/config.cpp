#include "emoeeg/config.hpp"

#include "emoeeg/csv.hpp"
#include "emoeeg/errors.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace emoeeg {

namespace {

struct Value {
  enum class Type { Number, Bool, String, Array } type = Type::Number;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<Value> items;
};

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line) + ": " + message,
              line);
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing '#' comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  Value parse() {
    Value v = value();
    skip_ws();
    if (pos_ != s_.size()) fail(line_, "trailing characters after value");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  Value value() {
    skip_ws();
    if (pos_ >= s_.size()) fail(line_, "missing value");
    const char c = s_[pos_];
    if (c == '"') return string();
    if (c == '[') return array();
    return scalar();
  }

  Value string() {
    Value v;
    v.type = Value::Type::String;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
        const char e = s_[++pos_];
        v.text.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
      } else {
        v.text.push_back(s_[pos_]);
      }
      ++pos_;
    }
    if (pos_ >= s_.size()) fail(line_, "unterminated string");
    ++pos_;
    return v;
  }

  Value array() {
    Value v;
    v.type = Value::Type::Array;
    ++pos_;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return v;
    }
    for (;;) {
      v.items.push_back(value());
      skip_ws();
      if (pos_ >= s_.size()) fail(line_, "unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return v;
        }
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      fail(line_, "expected ',' or ']' in array");
    }
  }

  Value scalar() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
    const std::string_view token = s_.substr(start, pos_ - start);
    Value v;
    if (token == "true" || token == "false") {
      v.type = Value::Type::Bool;
      v.boolean = token == "true";
      return v;
    }
    std::string cleaned;
    for (char ch : token) {
      if (ch != '_') cleaned.push_back(ch);
    }
    const auto number = csv::parse_number(cleaned);
    if (!number || !std::isfinite(*number)) fail(line_, "invalid value '" + std::string(token) + "'");
    v.number = *number;
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

std::string number_text(double v) { return csv::format_number(v); }

struct Field {
  std::string section;
  std::string key;
  std::function<void(PipelineConfig&, const Value&, std::size_t)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

double as_number(const Value& v, std::size_t line, const std::string& key) {
  if (v.type != Value::Type::Number) fail(line, key + " expects a number");
  return v.number;
}

long long as_integer(const Value& v, std::size_t line, const std::string& key) {
  const double x = as_number(v, line, key);
  if (x != std::floor(x) || std::abs(x) > 9.0e15) fail(line, key + " expects an integer");
  return static_cast<long long>(x);
}

template <class T>
Field real_field(std::string section, std::string key, T PipelineConfig::*outer, double T::*member) {
  return {section, key,
          [=](PipelineConfig& c, const Value& v, std::size_t line) {
            (c.*outer).*member = as_number(v, line, key);
          },
          [=](const PipelineConfig& c) { return number_text((c.*outer).*member); }};
}

template <class T, class I>
Field int_field(std::string section, std::string key, T PipelineConfig::*outer, I T::*member) {
  return {section, key,
          [=](PipelineConfig& c, const Value& v, std::size_t line) {
            (c.*outer).*member = static_cast<I>(as_integer(v, line, key));
          },
          [=](const PipelineConfig& c) { return std::to_string((c.*outer).*member); }};
}

Field top_real(std::string section, std::string key, double PipelineConfig::*member) {
  return {section, key,
          [=](PipelineConfig& c, const Value& v, std::size_t line) { c.*member = as_number(v, line, key); },
          [=](const PipelineConfig& c) { return number_text(c.*member); }};
}

template <class I>
Field top_int(std::string section, std::string key, I PipelineConfig::*member) {
  return {section, key,
          [=](PipelineConfig& c, const Value& v, std::size_t line) {
            const long long x = as_integer(v, line, key);
            if (std::is_unsigned_v<I> && x < 0) fail(line, key + " must be non-negative");
            c.*member = static_cast<I>(x);
          },
          [=](const PipelineConfig& c) { return std::to_string(c.*member); }};
}

Field top_bool(std::string section, std::string key, bool PipelineConfig::*member) {
  return {section, key,
          [=](PipelineConfig& c, const Value& v, std::size_t line) {
            if (v.type != Value::Type::Bool) fail(line, key + " expects true or false");
            c.*member = v.boolean;
          },
          [=](const PipelineConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field top_string(std::string section, std::string key, std::string PipelineConfig::*member) {
  return {section, key,
          [=](PipelineConfig& c, const Value& v, std::size_t line) {
            if (v.type != Value::Type::String) fail(line, key + " expects a quoted string");
            c.*member = v.text;
          },
          [=](const PipelineConfig& c) { return quoted(c.*member); }};
}

Field string_list(std::string section, std::string key,
                  std::vector<std::string> PipelineConfig::*member) {
  return {section, key,
          [=](PipelineConfig& c, const Value& v, std::size_t line) {
            if (v.type != Value::Type::Array) fail(line, key + " expects an array of strings");
            (c.*member).clear();
            for (const auto& item : v.items) {
              if (item.type != Value::Type::String) fail(line, key + " expects an array of strings");
              (c.*member).push_back(item.text);
            }
          },
          [=](const PipelineConfig& c) {
            std::string out = "[";
            for (std::size_t i = 0; i < (c.*member).size(); ++i) {
              out += (i ? ", " : "") + quoted((c.*member)[i]);
            }
            return out + "]";
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(top_string("dataio", "dataset", &PipelineConfig::dataset));
    f.push_back(top_string("dataio", "label_column", &PipelineConfig::label_column));
    f.push_back(string_list("dataio", "raw_eeg", &PipelineConfig::raw_eeg));
    f.push_back(string_list("dataio", "raw_labels", &PipelineConfig::raw_labels));
    f.push_back(top_real("dataio", "sampling_rate", &PipelineConfig::sampling_rate));

    f.push_back(real_field("dsp", "filter_low", &PipelineConfig::filter, &FilterSpec::low_hz));
    f.push_back(real_field("dsp", "filter_high", &PipelineConfig::filter, &FilterSpec::high_hz));
    f.push_back(int_field("dsp", "filter_order", &PipelineConfig::filter, &FilterSpec::order));
    f.push_back(top_real("dsp", "resample_rate", &PipelineConfig::resample_rate));
    f.push_back(int_field("dsp", "welch_segment", &PipelineConfig::welch, &WelchParams::segment_length));
    f.push_back(real_field("dsp", "welch_overlap", &PipelineConfig::welch, &WelchParams::overlap_fraction));

    f.push_back(real_field("featext", "window_seconds", &PipelineConfig::windows,
                           &WindowPlan::window_seconds));
    f.push_back({"featext", "offsets",
                 [](PipelineConfig& c, const Value& v, std::size_t line) {
                   if (v.type != Value::Type::Array) fail(line, "offsets expects an array of numbers");
                   c.windows.offsets_seconds.clear();
                   for (const auto& item : v.items) {
                     c.windows.offsets_seconds.push_back(as_number(item, line, "offsets"));
                   }
                 },
                 [](const PipelineConfig& c) {
                   std::string out = "[";
                   for (std::size_t i = 0; i < c.windows.offsets_seconds.size(); ++i) {
                     out += (i ? ", " : "") + number_text(c.windows.offsets_seconds[i]);
                   }
                   return out + "]";
                 }});

    f.push_back(top_real("analysis", "alpha", &PipelineConfig::alpha));
    f.push_back(top_bool("analysis", "significant_only", &PipelineConfig::significant_only));
    f.push_back(top_real("analysis", "tsne_perplexity", &PipelineConfig::tsne_perplexity));
    f.push_back(top_int("analysis", "tsne_iterations", &PipelineConfig::tsne_iterations));
    f.push_back(top_int("analysis", "tsne_max_rows", &PipelineConfig::tsne_max_rows));

    f.push_back(top_string("models", "model", &PipelineConfig::model));
    f.push_back(real_field("models", "lr_lambda", &PipelineConfig::logreg, &LogRegParams::l2_lambda));
    f.push_back(real_field("models", "lr_learning_rate", &PipelineConfig::logreg,
                           &LogRegParams::learning_rate));
    f.push_back(int_field("models", "lr_max_epochs", &PipelineConfig::logreg, &LogRegParams::max_epochs));
    f.push_back(real_field("models", "lr_tolerance", &PipelineConfig::logreg, &LogRegParams::tolerance));
    f.push_back(real_field("models", "svm_c", &PipelineConfig::svm, &SvmParams::C));
    f.push_back(real_field("models", "svm_gamma", &PipelineConfig::svm, &SvmParams::gamma));
    f.push_back(real_field("models", "svm_tol", &PipelineConfig::svm, &SvmParams::tol));
    f.push_back(int_field("models", "svm_max_passes", &PipelineConfig::svm, &SvmParams::max_passes));
    f.push_back(top_bool("models", "svm_grid", &PipelineConfig::svm_grid));
    f.push_back(int_field("models", "rf_trees", &PipelineConfig::forest, &ForestParams::n_trees));
    f.push_back(int_field("models", "rf_mtry", &PipelineConfig::forest, &ForestParams::mtry));
    f.push_back(int_field("models", "rf_max_depth", &PipelineConfig::forest, &ForestParams::max_depth));
    f.push_back(int_field("models", "rf_min_leaf", &PipelineConfig::forest, &ForestParams::min_leaf));
    f.push_back(int_field("models", "rf_threads", &PipelineConfig::forest, &ForestParams::threads));

    f.push_back(top_real("eval", "test_fraction", &PipelineConfig::test_fraction));
    f.push_back(top_int("eval", "seed", &PipelineConfig::seed));

    f.push_back(top_string("cli", "out", &PipelineConfig::out));
    return f;
  }();
  return table;
}

}  // namespace

std::vector<ModelConfig> PipelineConfig::model_configs() const {
  std::vector<ModelKind> kinds;
  if (model == "all") {
    kinds = {ModelKind::LogisticRegression, ModelKind::Svm, ModelKind::RandomForest};
  } else {
    kinds = {parse_model_kind(model)};
  }
  std::vector<ModelConfig> out;
  for (auto kind : kinds) {
    ModelConfig mc;
    mc.kind = kind;
    mc.logreg = logreg;
    mc.svm = svm;
    mc.svm.seed = seed;
    mc.forest = forest;
    mc.forest.seed = seed;
    out.push_back(mc);
  }
  return out;
}

TsneParams PipelineConfig::tsne_params() const {
  TsneParams p;
  p.perplexity = tsne_perplexity;
  p.iterations = tsne_iterations;
  p.seed = seed;
  return p;
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig config;
  std::map<std::pair<std::string, std::string>, const Field*> index;
  std::map<std::string, bool> sections;
  for (const auto& f : fields()) {
    index[{f.section, f.key}] = &f;
    sections[f.section] = true;
  }

  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::map<std::pair<std::string, std::string>, bool> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = std::string(strip(line.substr(1, line.size() - 2)));
      if (!sections.count(section)) fail(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const std::string key(strip(line.substr(0, eq)));
    if (section.empty()) fail(line_no, "key '" + key + "' outside of any section");
    const auto it = index.find({section, key});
    if (it == index.end()) fail(line_no, "unknown key '" + key + "' in [" + section + "]");
    if (seen[{section, key}]) fail(line_no, "duplicate key '" + key + "'");
    seen[{section, key}] = true;
    const Value value = ValueParser(strip(line.substr(eq + 1)), line_no).parse();
    it->second->set(config, value, line_no);
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_toml(const PipelineConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

nlohmann::json config_to_json(const PipelineConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) {
    const std::string text = f.get(config);
    // Every emitted value is valid JSON except bare identifiers, which we never emit.
    j[f.section][f.key] = nlohmann::json::parse(text);
  }
  return j;
}

void validate(const PipelineConfig& c) {
  auto check = [](bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::InvalidConfig, message);
  };
  check(c.sampling_rate > 0.0, "dataio.sampling_rate must be > 0");
  check(c.raw_labels.empty() || c.raw_labels.size() == c.raw_eeg.size(),
        "dataio.raw_labels must match dataio.raw_eeg in length");
  check(c.filter.order >= 1, "dsp.filter_order must be >= 1");
  check(c.filter.low_hz > 0.0 && c.filter.low_hz < c.filter.high_hz,
        "dsp.filter_low must be > 0 and below dsp.filter_high");
  check(c.resample_rate >= 0.0, "dsp.resample_rate must be >= 0");
  check(c.welch.segment_length >= 8, "dsp.welch_segment must be >= 8");
  check(c.welch.overlap_fraction >= 0.0 && c.welch.overlap_fraction < 1.0,
        "dsp.welch_overlap must lie in [0, 1)");
  check(c.windows.window_seconds > 0.0, "featext.window_seconds must be > 0");
  check(c.alpha > 0.0 && c.alpha < 1.0, "analysis.alpha must lie in (0, 1)");
  check(c.tsne_perplexity > 0.0, "analysis.tsne_perplexity must be > 0");
  check(c.tsne_iterations >= 1, "analysis.tsne_iterations must be >= 1");
  check(c.tsne_max_rows >= 4, "analysis.tsne_max_rows must be >= 4");
  check(c.model == "all" || c.model == "lr" || c.model == "svm" || c.model == "rf",
        "models.model must be one of lr, svm, rf, all");
  check(c.test_fraction > 0.0 && c.test_fraction < 1.0, "eval.test_fraction must lie in (0, 1)");
  check(!c.out.empty(), "cli.out must not be empty");
}

}  // namespace emoeeg
