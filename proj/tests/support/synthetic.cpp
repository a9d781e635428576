#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <unistd.h>

#include "fairprobe/trainer.hpp"

namespace fptest {

namespace {

std::size_t pick(Rng& rng, std::initializer_list<double> weights) {
  double u = rng.uniform01();
  std::size_t i = 0;
  for (double w : weights) {
    if (u < w) {
      return i;
    }
    u -= w;
    ++i;
  }
  return i - 1;
}

FeatureSpec categorical(std::string name, std::vector<std::string> values, bool sensitive) {
  return {std::move(name), CategoricalDomain{std::move(values)}, sensitive};
}

FeatureSpec continuous(std::string name, double lo, double hi, bool integer, bool sensitive) {
  return {std::move(name), ContinuousDomain{lo, hi, integer}, sensitive};
}

} // namespace

FeatureSchema planted_schema() {
  return FeatureSchema({categorical("gender", {"female", "male"}, true),
                        categorical("race", {"white", "black", "asian", "other"}, true),
                        categorical("age_group", {"young", "middle", "old"}, true),
                        continuous("x1", 0, 1, false, false), continuous("x2", 0, 1, false, false)},
                       {"0", "1"}, "1");
}

FeatureSchema mixed_schema() {
  return FeatureSchema({categorical("gender", {"female", "male"}, true),
                        categorical("race", {"white", "black", "asian", "other"}, true),
                        continuous("age", 18, 80, true, true), continuous("x1", 0, 1, false, false),
                        continuous("x2", 0, 1, false, false)},
                       {"0", "1"}, "1");
}

StructuredDataset planted_dataset(std::size_t rows, std::uint64_t seed,
                                  const std::function<std::size_t(const FeatureVector&, Rng&)>& label_of) {
  const auto schema = planted_schema();
  const auto planted = planted_rule_set(schema);
  Rng rng(seed);
  std::vector<FeatureVector> xs;
  std::vector<std::size_t> in_group;
  std::vector<std::size_t> out_group;
  for (std::size_t r = 0; r < rows; ++r) {
    FeatureVector x(5);
    x[0] = static_cast<double>(pick(rng, {0.5, 0.5}));
    x[1] = static_cast<double>(pick(rng, {0.4, 0.3, 0.15, 0.15}));
    x[2] = static_cast<double>(pick(rng, {0.5, 0.3, 0.2}));
    x[4] = std::round(rng.uniform01() * 100.0) / 100.0;
    (planted.satisfied_by(x) ? in_group : out_group).push_back(r);
    xs.push_back(std::move(x));
  }
  for (auto* group : {&in_group, &out_group}) {
    std::vector<double> grid(group->size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(grid.size());
    }
    for (std::size_t i = grid.size(); i > 1; --i) {
      std::swap(grid[i - 1], grid[rng.uniform_index(i)]);
    }
    for (std::size_t i = 0; i < group->size(); ++i) {
      xs[(*group)[i]][3] = grid[i];
    }
  }
  std::vector<LabeledRow> out;
  for (auto& x : xs) {
    const auto label = label_of(x, rng);
    out.push_back({std::move(x), label});
  }
  return StructuredDataset(schema, std::move(out));
}

RuleSet planted_rule_set(const FeatureSchema& schema) {
  return RuleSet({Rule::categorical(schema, 0, {0}), Rule::categorical(schema, 1, {1}),
                  Rule::categorical(schema, 2, {0})});
}

std::function<Label(const FeatureVector&)> threshold_rule(const FeatureSchema& schema, double p_inside,
                                                          double p_outside) {
  auto planted = planted_rule_set(schema);
  return [=](const FeatureVector& x) {
    const double p = planted.satisfied_by(x) ? p_inside : p_outside;
    return Label(x[3] < p ? "1" : "0");
  };
}

StructuredDataset random_small_dataset(Rng& rng, std::size_t rows) {
  std::vector<FeatureSpec> specs;
  const std::size_t sensitive = 1 + rng.uniform_index(3);
  for (std::size_t i = 0; i < sensitive; ++i) {
    if (rng.bernoulli(0.5)) {
      std::vector<std::string> values;
      const std::size_t n = 2 + rng.uniform_index(3);
      for (std::size_t v = 0; v < n; ++v) {
        values.push_back("v" + std::to_string(v));
      }
      specs.push_back(categorical("s" + std::to_string(i), values, true));
    } else {
      specs.push_back(continuous("s" + std::to_string(i), 0, 10, rng.bernoulli(0.5), true));
    }
  }
  specs.push_back(continuous("x", 0, 1, false, false));
  FeatureSchema schema(specs, {"0", "1"}, "1");
  std::vector<LabeledRow> out;
  for (std::size_t r = 0; r < rows; ++r) {
    FeatureVector x;
    for (const auto& spec : schema.features()) {
      if (spec.is_categorical()) {
        // skewed so that some value combinations are rare
        const auto n = spec.categorical().values.size();
        x.push_back(static_cast<double>(std::min(rng.uniform_index(n), rng.uniform_index(n))));
      } else if (spec.continuous().integer) {
        x.push_back(static_cast<double>(rng.uniform_index(11)));
      } else {
        x.push_back(std::round(rng.uniform01() * spec.continuous().max * 100.0) / 100.0);
      }
    }
    out.push_back({std::move(x), rng.uniform_index(2)});
  }
  return StructuredDataset(schema, std::move(out));
}

BernoulliOracle::BernoulliOracle(RuleSet rules, double p_inside, double p_outside, std::uint64_t seed)
    : rules_(std::move(rules)), p_inside_(p_inside), p_outside_(p_outside), rng_(seed) {}

std::vector<Label> BernoulliOracle::predict_batch(std::span<const FeatureVector> samples) {
  std::lock_guard lock(mutex_);
  std::vector<Label> out;
  for (const auto& x : samples) {
    const double p = rules_.satisfied_by(x) ? p_inside_ : p_outside_;
    out.push_back(rng_.bernoulli(p) ? "1" : "0");
  }
  return out;
}

std::vector<Label> CountingOracle::predict_batch(std::span<const FeatureVector> xs) {
  ++calls;
  samples += xs.size();
  std::vector<Label> out;
  for (const auto& x : xs) {
    out.push_back(fn_(x));
  }
  return out;
}

TextDataset small_corpus(std::size_t docs, std::uint64_t seed) {
  const auto lexicon = Lexicon::builtin();
  static const std::vector<std::string> fillers = {"the", "movie", "was", "great", "my", "friend", "said",
                                                   "that", "people", "are", "kind", "today"};
  Rng rng(seed);
  std::vector<Document> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    const std::size_t words = 4 + rng.uniform_index(8);
    for (std::size_t w = 0; w < words; ++w) {
      if (rng.bernoulli(0.25)) {
        const auto& cat = lexicon.category(rng.uniform_index(lexicon.size()));
        text += cat.terms[rng.uniform_index(cat.terms.size())];
      } else {
        text += fillers[rng.uniform_index(fillers.size())];
      }
      text += ' ';
    }
    out.push_back({tokenize(text), rng.bernoulli(0.5) ? "positive" : "negative"});
  }
  return TextDataset(lexicon, std::move(out));
}

MlpModel tiny_model() {
  MlpModel m;
  DenseLayer hidden{11, 3, {}, {0.1, -0.2, 0.05}, Activation::relu};
  for (std::size_t o = 0; o < 3; ++o) {
    for (std::size_t i = 0; i < 11; ++i) {
      hidden.weights.push_back(0.1 * static_cast<double>((o + 1) * (i % 4)) - 0.15 * static_cast<double>(o));
    }
  }
  DenseLayer out{3, 2, {0.5, -0.4, 0.3, -0.6, 0.7, 0.2}, {0.0, 0.1}, Activation::softmax};
  m.layers = {hidden, out};
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace fptest

namespace fptest {

Workspace::Workspace(const std::string& name)
    : dir(std::filesystem::temp_directory_path() / (name + "-" + std::to_string(::getpid()))) {
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto data = planted_dataset(1500, 21, [](const FeatureVector& x, Rng& rng) {
    const bool group = x[0] == 0 && x[1] == 1 && x[2] == 0;
    const double logit = 4.0 * (x[3] + x[4] - 1.0) - (group ? 2.0 : 0.0);
    return static_cast<std::size_t>(rng.bernoulli(1.0 / (1.0 + std::exp(-logit))) ? 1 : 0);
  });
  {
    std::ofstream out(path("schema.json"));
    out << schema_to_json(data.schema());
  }
  {
    std::ofstream out(path("data.csv"));
    write_structured(out, data);
  }
  TrainerConfig t{.learning_rate = 0.01, .epochs = 20, .batch_size = 32, .seed = 2, .validation_fraction = 0};
  save_mlp(train_mlp(data, Architecture{{8}, Activation::relu}, t).model, path("model.json"));
  {
    std::ofstream out(path("corpus.tsv"));
    write_text(out, small_corpus(300, 5));
  }
  std::ofstream out(path("audit.json"));
  out << R"({
  "data": {"kind": "structured", "path": "data.csv", "schema": "schema.json"},
  "oracle": {"mlp": "model.json"},
  "mining": {"theta": 0.05, "bins": 4},
  "scorer": {"sample_threshold": 200, "error_threshold": 0.1, "seed": 1},
  "sampler": {"seed": 1},
  "ranking": {"tolerance": 0.05, "top_k": 3}
}
)";
}

Workspace::~Workspace() {
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
}

std::string Workspace::path(const std::string& file) const {
  return (dir / file).string();
}

} // namespace fptest
