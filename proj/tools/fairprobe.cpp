// fairprobe: mine rule sets over sensitive features, score subgroup fairness
// against a black-box model, and optionally mitigate the worst finding.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairprobe/audit.hpp"

namespace fs = std::filesystem;
using namespace fairprobe;

namespace {

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<double> theta;
  std::optional<std::size_t> bins;
  std::optional<std::string> interval_mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<double> tolerance;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> sample_threshold;
  std::optional<double> error_threshold;
  std::optional<std::size_t> max_samples;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("-c,--config", o.config, "audit config (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--set", o.overrides, "override a config field, e.g. --set scorer.seed=7");
  app->add_option("--theta", o.theta, "minimum support of a rule set");
  app->add_option("--bins", o.bins, "bins per continuous feature");
  app->add_option("--interval-mode", o.interval_mode, "union or single-bin")
      ->check(CLI::IsMember({"union", "single-bin"}));
  app->add_option("--seed", o.seed, "seed for both scorer and sampler");
  app->add_option("-j,--jobs", o.jobs, "rule sets scored in parallel");
  app->add_option("--tolerance", o.tolerance, "scores above this are flagged");
  app->add_option("--top-k", o.top_k, "findings shown in the table");
  app->add_option("--sample-threshold", o.sample_threshold, "pairs drawn before the margin is checked");
  app->add_option("--error-threshold", o.error_threshold, "target margin of error");
  app->add_option("--max-samples", o.max_samples, "cap on pairs per rule set");
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

std::string absolute_path(const std::string& p) { return fs::absolute(p).string(); }

AuditConfig load(const CommonOptions& o, std::vector<std::string> extra) {
  std::vector<std::string> all;
  auto set = [&](const std::string& key, const auto& value) {
    if (value) {
      if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, std::string>) {
        all.push_back(key + "=" + quoted(*value));
      } else {
        all.push_back(key + "=" + nlohmann::json(*value).dump());
      }
    }
  };
  set("mining.theta", o.theta);
  set("mining.bins", o.bins);
  set("mining.interval_mode", o.interval_mode);
  set("scorer.seed", o.seed);
  set("sampler.seed", o.seed);
  set("jobs", o.jobs);
  set("ranking.tolerance", o.tolerance);
  set("ranking.top_k", o.top_k);
  set("scorer.sample_threshold", o.sample_threshold);
  set("scorer.error_threshold", o.error_threshold);
  set("scorer.max_samples", o.max_samples);
  all.insert(all.end(), extra.begin(), extra.end());
  all.insert(all.end(), o.overrides.begin(), o.overrides.end());
  auto config = load_audit_config(o.config, all);
  config.validate();
  return config;
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(output);
  out << text;
  if (!out) {
    throw Error("cannot write " + output);
  }
}

ReportFormat parse_format(const std::string& f) { return f == "markdown" ? ReportFormat::markdown : ReportFormat::json; }

nlohmann::json sample_json(const FeatureSchema& schema, const FeatureVector& x) {
  nlohmann::json features = nlohmann::json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& spec = schema.feature(i);
    if (spec.is_categorical()) {
      features[spec.name] = spec.categorical().values[static_cast<std::size_t>(x[i])];
    } else {
      features[spec.name] = x[i];
    }
  }
  return features;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Find and measure subgroup discrimination in black-box classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fairprobe 0.1.0");

  CommonOptions common;
  std::string format = "markdown";
  std::string output;
  bool all_rows = false;
  bool timings = false;

  auto* audit = app.add_subcommand("audit", "mine, score and rank rule sets");
  add_common(audit, common);
  audit->add_option("-f,--format", format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));
  audit->add_option("-o,--output", output, "write the report here instead of stdout");
  audit->add_flag("--all", all_rows, "list every finding in the markdown table");
  audit->add_flag("--timings", timings, "include per-phase wall time in the report");

  std::string model_output;
  std::string augmented_output;
  auto* mitigate_cmd = app.add_subcommand("mitigate", "audit, then mitigate the worst finding");
  add_common(mitigate_cmd, common);
  mitigate_cmd->add_option("-f,--format", format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));
  mitigate_cmd->add_option("-o,--output", output, "write the report here instead of stdout");
  mitigate_cmd->add_flag("--all", all_rows, "list every finding in the markdown table");
  mitigate_cmd->add_flag("--timings", timings, "include per-phase wall time in the report");
  mitigate_cmd->add_option("--model-output", model_output, "where to save the retrained model");
  mitigate_cmd->add_option("--augmented-output", augmented_output, "where to save data plus counter samples");

  auto* rules = app.add_subcommand("rules", "list frequent rule sets with their support");
  add_common(rules, common);
  std::string rules_format = "text";
  rules->add_option("-f,--format", rules_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  rules->add_option("-o,--output", output, "write here instead of stdout");

  std::size_t rule_index = 0;
  std::string side = "inside";
  std::size_t count = 10;
  auto* sample = app.add_subcommand("sample", "dump generated samples for one rule set as JSON lines");
  add_common(sample, common);
  sample->add_option("-r,--rule-set", rule_index, "index into the list printed by `rules`")->required();
  sample->add_option("--side", side, "inside or outside")->check(CLI::IsMember({"inside", "outside"}));
  sample->add_option("-n,--count", count, "number of samples");
  sample->add_option("-o,--output", output, "write here instead of stdout");

  std::string train_schema;
  std::string train_data;
  std::vector<std::size_t> hidden = {16, 8};
  std::string activation = "relu";
  TrainerConfig trainer;
  auto* train = app.add_subcommand("train", "fit the built-in network on a labelled CSV");
  train->add_option("--schema", train_schema, "schema JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--data", train_data, "labelled CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--hidden", hidden, "hidden layer widths")->delimiter(',');
  train->add_option("--activation", activation, "hidden activation")
      ->check(CLI::IsMember({"relu", "sigmoid", "identity"}));
  train->add_option("--epochs", trainer.epochs, "passes over the data");
  train->add_option("--learning-rate", trainer.learning_rate, "Adam step size");
  train->add_option("--batch-size", trainer.batch_size, "rows per update");
  train->add_option("--seed", trainer.seed, "initialization and shuffling seed");
  train->add_option("--validation", trainer.validation_fraction, "fraction held out for validation accuracy");
  train->add_option("-o,--output", output, "model JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(train)) {
    try {
      const auto schema = load_schema(train_schema);
      const auto data = load_structured(train_data, schema);
      const auto result = train_mlp(data, Architecture{hidden, parse_activation(activation)}, trainer);
      save_mlp(result.model, output);
      std::cerr << "train accuracy " << result.train_accuracy;
      if (result.validation_accuracy) {
        std::cerr << ", validation accuracy " << *result.validation_accuracy;
      }
      std::cerr << "\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "fairprobe: " << e.what() << "\n";
      return 1;
    }
  }

  try {
    std::vector<std::string> extra;
    if (timings) {
      extra.push_back("include_timings=true");
    }
    if (app.got_subcommand(mitigate_cmd)) {
      extra.push_back("mitigation.enabled=true");
      if (!model_output.empty()) {
        extra.push_back("mitigation.model_output=" + quoted(absolute_path(model_output)));
      }
      if (!augmented_output.empty()) {
        extra.push_back("mitigation.augmented_output=" + quoted(absolute_path(augmented_output)));
      }
    }
    AuditConfig config;
    try {
      config = load(common, extra);
    } catch (const ConfigError& e) {
      std::cerr << "fairprobe: config: " << e.what() << "\n";
      return 2;
    }

    if (app.got_subcommand(audit) || app.got_subcommand(mitigate_cmd)) {
      const auto report = run_audit(config);
      emit(render_report(report, parse_format(format), all_rows), output);
      return 0;
    }

    const auto inputs = load_inputs(config);
    const auto mined = mine(config, inputs);
    if (app.got_subcommand(rules)) {
      std::string text;
      if (rules_format == "json") {
        auto arr = nlohmann::json::array();
        for (const auto& f : mined.frequent) {
          arr.push_back({{"rule_set", f.rule_set.render()},
                         {"support", f.support},
                         {"satisfying", f.satisfying},
                         {"rules", nlohmann::json::parse(rule_set_to_json(f.rule_set))}});
        }
        text = nlohmann::json({{"single_rules", mined.single_rules},
                               {"candidates", mined.candidates},
                               {"evaluated", mined.evaluated},
                               {"frequent", arr}})
                   .dump(2) +
               "\n";
      } else {
        for (std::size_t i = 0; i < mined.frequent.size(); ++i) {
          const auto& f = mined.frequent[i];
          char support[32];
          std::snprintf(support, sizeof support, "%.4f", f.support);
          text += std::to_string(i) + "\t" + support + "\t" + f.rule_set.render() + "\n";
        }
        text += "# " + std::to_string(mined.frequent.size()) + " frequent of " + std::to_string(mined.candidates) +
                " candidates, " + std::to_string(mined.evaluated) + " supports computed\n";
      }
      emit(text, output);
      return 0;
    }

    if (rule_index >= mined.frequent.size()) {
      std::cerr << "fairprobe: rule set " << rule_index << " out of range (" << mined.frequent.size()
                << " frequent)\n";
      return 2;
    }
    const auto& rule_set = mined.frequent[rule_index].rule_set;
    const auto which = side == "inside" ? Side::inside : Side::outside;
    Rng rng(sampler_stream_seed(config.sampler.seed, rule_set, which));
    std::string text;
    if (inputs.structured) {
      const StructuredSampler sampler(*inputs.structured, rule_set, config.sampler);
      std::vector<FeatureVector> xs;
      for (std::size_t i = 0; i < count; ++i) {
        xs.push_back(sampler.draw(which, rng));
      }
      const auto labels = inputs.structured_oracle->predict_batch(xs);
      for (std::size_t i = 0; i < count; ++i) {
        text += nlohmann::json({{"index", i},
                                {"side", side},
                                {"features", sample_json(inputs.structured->schema(), xs[i])},
                                {"label", labels[i]}})
                    .dump() +
                "\n";
      }
    } else {
      const TextSampler sampler(*inputs.text, rule_set, config.sampler.seed);
      std::vector<TokenSequence> docs;
      for (std::size_t i = 0; i < count; ++i) {
        docs.push_back(sampler.draw(which, rng));
      }
      const auto labels = inputs.text_oracle->predict_batch(docs);
      for (std::size_t i = 0; i < count; ++i) {
        text += nlohmann::json({{"index", i}, {"side", side}, {"tokens", docs[i]}, {"label", labels[i]}}).dump() +
                "\n";
      }
    }
    emit(text, output);
    return 0;
  } catch (const PhaseError& e) {
    std::cerr << "fairprobe: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "fairprobe: config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fairprobe: " << e.what() << "\n";
    return 1;
  }
}
