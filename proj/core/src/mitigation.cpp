#include "fairprobe/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairprobe/error.hpp"

namespace fairprobe {

void MitigationConfig::validate() const {
  if (start_count < 1) {
    throw ConfigError("mitigation start count must be at least 1");
  }
  if (!(max_fraction > 0.0 && max_fraction <= 1.0)) {
    throw ConfigError("mitigation max fraction must lie in (0, 1]");
  }
  if (!(growth > 1.0)) {
    throw ConfigError("mitigation growth must exceed 1");
  }
  if (!(accuracy_drop_budget >= 0.0)) {
    throw ConfigError("accuracy drop budget must be non-negative");
  }
  if (attempts_per_sample < 1) {
    throw ConfigError("attempts per sample must be at least 1");
  }
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("holdout fraction must lie in (0, 1)");
  }
  trainer.validate();
}

Label counter_label(const FairnessReport& report, const std::vector<std::string>& labels, const Label& favorable) {
  if (report.phi_inside < report.phi_outside) {
    return favorable;
  }
  for (const auto& l : labels) {
    if (l != favorable) {
      return l;
    }
  }
  throw ConfigError("no label other than '" + favorable + "' to counter with");
}

namespace {

template <class Sample, class Sampler, class Out, class Make>
std::vector<Out> generate(PredictionOracle<Sample>& oracle, const Sampler& sampler, const Label& target,
                          std::size_t count, std::size_t attempt_budget, Rng& rng, std::size_t* attempts_out, Make make) {
  std::vector<Out> out;
  std::size_t attempts = 0;
  std::vector<Sample> block;
  while (out.size() < count && attempts < attempt_budget) {
    const std::size_t n = std::min<std::size_t>(std::max<std::size_t>(count - out.size(), 64), attempt_budget - attempts);
    block.clear();
    for (std::size_t i = 0; i < n; ++i) {
      block.push_back(sampler.draw(Side::inside, rng));
    }
    const auto labels = oracle.predict_batch(block);
    for (std::size_t i = 0; i < n && out.size() < count; ++i) {
      ++attempts;
      if (labels[i] == target) {
        out.push_back(make(std::move(block[i])));
      }
    }
  }
  if (attempts_out) {
    *attempts_out = attempts;
  }
  if (out.size() < count) {
    throw CounterSampleShortfall(out.size(), count, attempts);
  }
  return out;
}

} // namespace

std::vector<LabeledRow> generate_counter_samples(StructuredOracle& oracle, const StructuredSampler& sampler,
                                                 const Label& target, std::size_t count,
                                                 std::size_t attempt_budget, Rng& rng, std::size_t* attempts) {
  const auto index = sampler.dataset().schema().label_index(target);
  if (!index) {
    throw ConfigError("unknown target label '" + target + "'");
  }
  return generate<FeatureVector, StructuredSampler, LabeledRow>(
      oracle, sampler, target, count, attempt_budget, rng, attempts,
      [&](FeatureVector&& x) { return LabeledRow{std::move(x), *index}; });
}

std::vector<Document> generate_counter_samples(TextOracle& oracle, const TextSampler& sampler, const Label& target,
                                               std::size_t count, std::size_t attempt_budget, Rng& rng,
                                               std::size_t* attempts) {
  return generate<TokenSequence, TextSampler, Document>(
      oracle, sampler, target, count, attempt_budget, rng, attempts,
      [&](TokenSequence&& t) { return Document{std::move(t), target}; });
}

std::vector<std::size_t> augmentation_schedule(const MitigationConfig& config, std::size_t dataset_size) {
  const auto cap = static_cast<std::size_t>(std::floor(config.max_fraction * static_cast<double>(dataset_size)));
  std::vector<std::size_t> out;
  if (cap == 0) {
    return out;
  }
  std::size_t c = std::min(config.start_count, cap);
  while (c < cap) {
    out.push_back(c);
    c = std::max(c + 1, static_cast<std::size_t>(std::ceil(static_cast<double>(c) * config.growth)));
  }
  out.push_back(cap);
  return out;
}

MitigationResult mitigate(const MlpModel& model, const StructuredDataset& data, const FairnessReport& worst,
                          const MitigationConfig& config, const ScorerConfig& scorer, const SamplerConfig& sampler) {
  config.validate();
  MitigationResult result;
  result.model = model;
  result.before = worst;
  result.after = worst;

  const auto& schema = data.schema();
  Rng split_rng(derive_seed(config.trainer.seed, {0x5b1, data.size()}));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[split_rng.uniform_index(i)]);
  }
  const auto n_hold = static_cast<std::size_t>(std::ceil(config.holdout_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> hold_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_hold), order.end());
  std::sort(hold_idx.begin(), hold_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  auto subset = [&](const std::vector<std::size_t>& idx) {
    std::vector<LabeledRow> rows;
    rows.reserve(idx.size());
    for (auto i : idx) {
      rows.push_back(data.row(i));
    }
    return rows;
  };
  const StructuredDataset holdout(schema, subset(hold_idx));
  const auto train_rows = subset(train_idx);
  const StructuredDataset train(schema, train_rows);

  result.accuracy_before = accuracy(model, holdout);
  result.accuracy_after = result.accuracy_before;

  if (worst.score == 0.0) {
    result.diagnostics.push_back("score is zero; nothing to mitigate");
    return result;
  }
  if (train.empty()) {
    result.diagnostics.push_back("no rows left for retraining");
    return result;
  }

  result.target_label = counter_label(worst, schema.label_names(), schema.favorable_label());
  MlpOracle original(model, schema);
  const StructuredSampler generator(train, worst.rule_set, sampler);
  const StructuredSampler rescorer(data, worst.rule_set, sampler);
  Rng rng(derive_seed(config.trainer.seed, {worst.rule_set.fingerprint(), 0xc0}));

  std::vector<LabeledRow> pool;
  std::size_t attempts = 0;
  std::optional<double> best;
  std::vector<std::size_t> schedule = augmentation_schedule(config, data.size());
  if (schedule.empty()) {
    result.diagnostics.push_back("dataset too small for any counter samples");
  }
  for (auto count : schedule) {
    MitigationRound round;
    round.count = count;
    const std::size_t need = count - pool.size();
    std::size_t used = 0;
    try {
      auto more = generate_counter_samples(original, generator, result.target_label, need,
                                           need * config.attempts_per_sample, rng, &used);
      attempts += used;
      pool.insert(pool.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    } catch (const CounterSampleShortfall& e) {
      result.diagnostics.push_back("round with " + std::to_string(count) + " samples stopped: " + e.what());
      break;
    }
    round.attempts = attempts;

    auto rows = train_rows;
    rows.insert(rows.end(), pool.begin(), pool.end());
    auto trained = fit_mlp(model, StructuredDataset(schema, std::move(rows)), config.trainer);
    round.accuracy = accuracy(trained.model, holdout);
    MlpOracle retrained(trained.model, schema);
    const auto report = group_fairness_score(retrained, rescorer, schema.favorable_label(), scorer);
    round.score = report.score;
    round.margin = report.margin;
    round.within_budget = result.accuracy_before - round.accuracy <= config.accuracy_drop_budget + 1e-12;
    result.rounds.push_back(round);

    if (round.within_budget && (!best || report.score < *best)) {
      best = report.score;
      result.chosen_round = result.rounds.size() - 1;
      result.model = std::move(trained.model);
      result.after = report;
      result.accuracy_after = round.accuracy;
      result.augmentation = pool;
    }
  }
  if (!result.rounds.empty() && !result.chosen_round) {
    result.diagnostics.push_back("no round kept the accuracy drop within " +
                                 format_number(config.accuracy_drop_budget) + "; original model kept");
  }
  return result;
}

} // namespace fairprobe
