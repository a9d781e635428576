#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fairprobe/dataset.hpp"
#include "fairprobe/error.hpp"
#include "fairprobe/mlp.hpp"
#include "fairprobe/oracle.hpp"
#include "fairprobe/sampler.hpp"
#include "fairprobe/scorer.hpp"
#include "fairprobe/trainer.hpp"

namespace fairprobe {

struct MitigationConfig {
  std::size_t start_count = 50;
  double max_fraction = 0.10; ///< cap on counter samples, as a fraction of the dataset
  double growth = 2.0;        ///< count multiplier between rounds
  TrainerConfig trainer{.learning_rate = 0.002, .epochs = 10, .batch_size = 32, .seed = 0, .validation_fraction = 0.0};
  double accuracy_drop_budget = 0.02;
  std::size_t attempts_per_sample = 200; ///< generation gives up after count * this many draws
  double holdout_fraction = 0.2;         ///< rows kept out of retraining to measure accuracy

  void validate() const;
};

/// Thrown when the attempt budget runs out before enough counter samples
/// were found.
class CounterSampleShortfall : public SamplingError {
public:
  CounterSampleShortfall(std::size_t found, std::size_t wanted, std::size_t attempts)
      : SamplingError("found " + std::to_string(found) + " of " + std::to_string(wanted) +
                      " counter samples in " + std::to_string(attempts) + " attempts"),
        found_(found) {}
  std::size_t found() const noexcept { return found_; }

private:
  std::size_t found_;
};

/// The label counter samples should carry: favorable when the group is
/// favored less often than its complement, otherwise the first other label.
Label counter_label(const FairnessReport& report, const std::vector<std::string>& labels, const Label& favorable);

/// Draws in-group samples until `count` of them are predicted `target` by the
/// oracle, labelling them `target`. At most `attempt_budget` draws are made;
/// the number used is stored in `attempts` when given.
std::vector<LabeledRow> generate_counter_samples(StructuredOracle& oracle, const StructuredSampler& sampler,
                                                 const Label& target, std::size_t count,
                                                 std::size_t attempt_budget, Rng& rng,
                                                 std::size_t* attempts = nullptr);
std::vector<Document> generate_counter_samples(TextOracle& oracle, const TextSampler& sampler, const Label& target,
                                               std::size_t count, std::size_t attempt_budget, Rng& rng,
                                               std::size_t* attempts = nullptr);

/// Augmentation sizes: start_count growing geometrically, capped at
/// floor(max_fraction * dataset_size). Empty when the cap is zero.
std::vector<std::size_t> augmentation_schedule(const MitigationConfig& config, std::size_t dataset_size);

struct MitigationRound {
  std::size_t count = 0;
  std::size_t attempts = 0; ///< draws so far, cumulative over rounds
  double score = 0.0;
  double margin = 0.0;
  double accuracy = 0.0;
  bool within_budget = false;

  bool operator==(const MitigationRound&) const = default;
};

struct MitigationResult {
  MlpModel model; ///< chosen model, or the original when no round qualifies
  FairnessReport before;
  FairnessReport after;
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  Label target_label;
  std::vector<MitigationRound> rounds;
  std::optional<std::size_t> chosen_round;
  std::vector<LabeledRow> augmentation; ///< counter samples of the chosen round
  std::vector<std::string> diagnostics;
  std::string warm_start = "original-weights";
};

/// Generates counter samples for `worst.rule_set` at growing counts, retrains
/// from the original weights on the non-held-out rows plus the samples,
/// rescores the same rule set, and keeps the lowest-scoring round whose
/// held-out accuracy drop is within budget. Counter labels come from the
/// original model, not from ground truth.
MitigationResult mitigate(const MlpModel& model, const StructuredDataset& data, const FairnessReport& worst,
                          const MitigationConfig& config, const ScorerConfig& scorer, const SamplerConfig& sampler);

} // namespace fairprobe
