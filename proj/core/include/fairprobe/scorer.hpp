#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fairprobe/oracle.hpp"
#include "fairprobe/rules.hpp"
#include "fairprobe/sampler.hpp"

namespace fairprobe {

struct ScorerConfig {
  std::size_t sample_threshold = 1000; ///< margins are checked once more pairs than this are drawn
  double error_threshold = 0.05;       ///< stop when the composed margin is at most this
  double z = 1.96;                     ///< normal quantile matching `confidence`
  double confidence = 0.95;            ///< per-side confidence; the score holds with its square
  std::size_t max_samples = 200000;    ///< pairs drawn before giving up unconverged
  std::uint64_t seed = 0;
  std::size_t block_size = 256; ///< pairs generated and predicted per oracle round trip

  void validate() const;
};

/// Estimated group fairness of one rule set.
///
/// `score = |phi_inside - phi_outside|` holds within `margin` with probability
/// at least `confidence` (the per-side confidence squared).
struct FairnessReport {
  RuleSet rule_set;
  double phi_inside = 0.0;
  double phi_outside = 0.0;
  double score = 0.0;
  double margin_inside = 0.0;
  double margin_outside = 0.0;
  double margin = 0.0;
  double confidence = 0.0;
  std::size_t samples = 0; ///< pairs drawn, i.e. samples per side
  std::size_t favorable_inside = 0;
  std::size_t favorable_outside = 0;
  bool converged = false;

  bool operator==(const FairnessReport&) const = default;
};

/// Half-width of the normal-approximation interval for a proportion:
/// z * sqrt(phi * (1 - phi) / num).
double margin_of_error(double phi, std::size_t num, double z);

/// Builds a report from raw favorable counts over `num` pairs.
FairnessReport make_report(RuleSet rules, std::size_t favorable_inside, std::size_t favorable_outside,
                           std::size_t num, const ScorerConfig& config, bool converged);

/// Adaptive paired sampling: draw one sample per side per iteration and,
/// once more than `sample_threshold` pairs exist, stop as soon as the summed
/// margin is within `error_threshold`, or at `max_samples` pairs
/// (unconverged). Draws are generated and predicted in blocks; the stopping
/// check still happens after every pair, so blocking does not change the
/// estimate. Oracle failures are rethrown as OracleError with progress
/// context.
FairnessReport group_fairness_score(StructuredOracle& oracle, const StructuredSampler& sampler,
                                    const Label& favorable, const ScorerConfig& config);
FairnessReport group_fairness_score(TextOracle& oracle, const TextSampler& sampler, const Label& favorable,
                                    const ScorerConfig& config);

struct RankedFinding {
  FairnessReport report;
  bool discriminatory = false; ///< score above the tolerance

  bool operator==(const RankedFinding&) const = default;
};

struct Ranking {
  double tolerance = 0.05;
  std::size_t top_k = 3;
  std::vector<RankedFinding> ranked; ///< every report, best-first

  std::vector<RankedFinding> top() const;
  std::vector<RankedFinding> flagged() const;

  bool operator==(const Ranking&) const = default;
};

/// Sorts by descending score, ties in canonical rule-set order, and flags
/// scores strictly above `tolerance`.
Ranking rank_rule_sets(std::vector<FairnessReport> reports, double tolerance, std::size_t top_k);

} // namespace fairprobe
