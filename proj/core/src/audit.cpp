#include "fairprobe/audit.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <thread>

#include "fairprobe/subprocess_oracle.hpp"

namespace fairprobe {

namespace {

template <class F>
auto in_phase(const char* phase, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PhaseError&) {
    throw;
  } catch (const std::exception& e) {
    throw PhaseError(phase, e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Lexicon resolve_lexicon(const AuditConfig& config) {
  if (!config.lexicon.empty()) {
    return load_lexicon(config.lexicon);
  }
  return Lexicon::builtin();
}

std::string interval_mode_name(IntervalMode m) { return m == IntervalMode::bin_union ? "union" : "single-bin"; }

} // namespace

AuditInputs load_inputs(const AuditConfig& config) {
  config.validate();
  AuditInputs in;
  std::shared_ptr<SubprocessClient> client;
  if (!config.oracle.command.empty()) {
    SubprocessOptions opts;
    opts.argv = config.oracle.command;
    opts.timeout = std::chrono::milliseconds(static_cast<long long>(config.oracle.timeout_seconds * 1000.0));
    client = std::make_shared<SubprocessClient>(std::move(opts));
  }
  if (config.kind == DataKind::structured) {
    auto schema = load_schema(config.schema);
    in.structured = load_structured(config.dataset, schema);
    in.favorable = schema.favorable_label();
    if (client) {
      in.structured_oracle = std::make_shared<SubprocessStructuredOracle>(client, schema);
    } else {
      in.mlp = load_mlp(config.oracle.mlp);
      in.structured_oracle = std::make_shared<MlpOracle>(*in.mlp, schema);
    }
  } else {
    in.text = load_text(config.dataset, resolve_lexicon(config));
    in.favorable = config.favorable_label;
    in.text_oracle = std::make_shared<SubprocessTextOracle>(client);
  }
  return in;
}

MiningResult mine(const AuditConfig& config, const AuditInputs& inputs) {
  if (inputs.structured) {
    return frequent_rule_sets(*inputs.structured, config.mining);
  }
  return frequent_rule_sets(*inputs.text, config.mining);
}

std::vector<FairnessReport> score_rule_sets(const AuditInputs& inputs, const std::vector<RuleSet>& rule_sets,
                                            const AuditConfig& config) {
  std::vector<std::optional<FairnessReport>> results(rule_sets.size());
  std::vector<std::exception_ptr> errors(rule_sets.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rule_sets.size(); i = next++) {
      try {
        if (inputs.structured) {
          const StructuredSampler sampler(*inputs.structured, rule_sets[i], config.sampler);
          results[i] = group_fairness_score(*inputs.structured_oracle, sampler, inputs.favorable, config.scorer);
        } else {
          const TextSampler sampler(*inputs.text, rule_sets[i], config.sampler.seed);
          results[i] = group_fairness_score(*inputs.text_oracle, sampler, inputs.favorable, config.scorer);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = std::min(config.jobs, std::max<std::size_t>(rule_sets.size(), 1));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) {
      pool.emplace_back(worker);
    }
  }
  std::vector<FairnessReport> out;
  out.reserve(rule_sets.size());
  for (std::size_t i = 0; i < rule_sets.size(); ++i) {
    if (errors[i]) {
      std::rethrow_exception(errors[i]);
    }
    out.push_back(std::move(*results[i]));
  }
  return out;
}

AuditReport run_audit(const AuditConfig& config) {
  AuditReport report;
  PhaseTimings timings;
  auto inputs = in_phase("config", [&] { return load_inputs(config); });

  auto& s = report.settings;
  s.data_kind = config.kind == DataKind::structured ? "structured" : "text";
  s.favorable_label = inputs.favorable;
  s.theta = config.mining.theta;
  s.bins = config.mining.rules.bins;
  s.interval_mode = interval_mode_name(config.mining.rules.interval_mode);
  s.sample_threshold = config.scorer.sample_threshold;
  s.error_threshold = config.scorer.error_threshold;
  s.z = config.scorer.z;
  s.confidence = config.scorer.confidence;
  s.max_samples = config.scorer.max_samples;
  s.scorer_seed = config.scorer.seed;
  s.sampler_seed = config.sampler.seed;

  auto start = std::chrono::steady_clock::now();
  const auto mined = in_phase("mining", [&] { return mine(config, inputs); });
  timings.mining_seconds = seconds_since(start);
  report.single_rules = mined.single_rules;
  report.candidates = mined.candidates;
  report.evaluated = mined.evaluated;
  report.frequent = mined.frequent.size();
  report.skipped_empty_complement = mined.skipped_empty_complement.size();

  start = std::chrono::steady_clock::now();
  std::vector<RuleSet> sets;
  for (const auto& f : mined.frequent) {
    sets.push_back(f.rule_set);
  }
  auto scores = in_phase("scoring", [&] { return score_rule_sets(inputs, sets, config); });
  report.ranking = rank_rule_sets(std::move(scores), config.tolerance, config.top_k);
  timings.scoring_seconds = seconds_since(start);

  if (config.mitigation.enabled) {
    start = std::chrono::steady_clock::now();
    report.mitigation = in_phase("mitigation", [&] {
      MitigationSummary summary;
      const auto& opts = config.mitigation;
      summary.model_output = opts.model_output.string();
      summary.augmented_output = opts.augmented_output.string();
      if (report.ranking.ranked.empty()) {
        summary.diagnostics.push_back("no findings to mitigate");
        return summary;
      }
      const auto& worst = report.ranking.ranked.front().report;
      summary.before = worst;
      summary.after = worst;
      if (inputs.mlp) {
        const auto& data = *inputs.structured;
        auto result = mitigate(*inputs.mlp, data, worst, opts.config, config.scorer, config.sampler);
        summary.after = result.after;
        summary.accuracy_before = result.accuracy_before;
        summary.accuracy_after = result.accuracy_after;
        summary.target_label = result.target_label;
        summary.rounds = result.rounds;
        summary.chosen_round = result.chosen_round;
        summary.augmentation_count = result.augmentation.size();
        summary.retrained = result.chosen_round.has_value();
        summary.warm_start = result.warm_start;
        summary.diagnostics = result.diagnostics;
        if (!opts.model_output.empty()) {
          save_mlp(result.model, opts.model_output);
        }
        if (!opts.augmented_output.empty()) {
          std::vector<LabeledRow> rows(data.rows().begin(), data.rows().end());
          rows.insert(rows.end(), result.augmentation.begin(), result.augmentation.end());
          std::ofstream out(opts.augmented_output);
          write_structured(out, StructuredDataset(data.schema(), std::move(rows)), data.size());
          if (!out) {
            throw Error("cannot write " + opts.augmented_output.string());
          }
        }
        return summary;
      }
      // external oracle: counter samples only, retraining is left to the model owner
      const std::size_t n = inputs.structured ? inputs.structured->size() : inputs.text->size();
      const auto schedule = augmentation_schedule(opts.config, n);
      if (worst.score == 0.0 || schedule.empty()) {
        summary.diagnostics.push_back(worst.score == 0.0 ? "score is zero; nothing to mitigate"
                                                         : "dataset too small for any counter samples");
        return summary;
      }
      const auto count = schedule.back();
      Rng rng(derive_seed(opts.config.trainer.seed, {worst.rule_set.fingerprint(), 0xc0}));
      std::ofstream out;
      if (!opts.augmented_output.empty()) {
        out.open(opts.augmented_output);
      } else {
        summary.diagnostics.push_back("no augmented_output path; counter samples were not written");
      }
      if (inputs.structured) {
        const auto& data = *inputs.structured;
        const auto& labels = data.schema().label_names();
        summary.target_label = counter_label(worst, labels, inputs.favorable);
        const StructuredSampler sampler(data, worst.rule_set, config.sampler);
        auto samples = generate_counter_samples(*inputs.structured_oracle, sampler, summary.target_label, count,
                                                count * opts.config.attempts_per_sample, rng);
        summary.augmentation_count = samples.size();
        if (out.is_open()) {
          std::vector<LabeledRow> rows(data.rows().begin(), data.rows().end());
          rows.insert(rows.end(), samples.begin(), samples.end());
          write_structured(out, StructuredDataset(data.schema(), std::move(rows)), data.size());
        }
      } else {
        const auto& data = *inputs.text;
        summary.target_label = counter_label(worst, data.labels(), inputs.favorable);
        const TextSampler sampler(data, worst.rule_set, config.sampler.seed);
        auto docs = generate_counter_samples(*inputs.text_oracle, sampler, summary.target_label, count,
                                             count * opts.config.attempts_per_sample, rng);
        summary.augmentation_count = docs.size();
        if (out.is_open()) {
          std::vector<Document> all(data.documents().begin(), data.documents().end());
          all.insert(all.end(), docs.begin(), docs.end());
          write_text(out, TextDataset(data.lexicon(), std::move(all)), data.size());
        }
      }
      if (out.is_open() && !out) {
        throw Error("cannot write " + opts.augmented_output.string());
      }
      return summary;
    });
    timings.mitigation_seconds = seconds_since(start);
  }
  if (config.include_timings) {
    report.timings = timings;
  }
  return report;
}

} // namespace fairprobe
