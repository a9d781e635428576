#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairprobe/dataset.hpp"
#include "fairprobe/error.hpp"
#include "fairprobe/lexicon.hpp"
#include "fairprobe/mining.hpp"
#include "fairprobe/mitigation.hpp"
#include "fairprobe/oracle.hpp"
#include "fairprobe/sampler.hpp"
#include "fairprobe/scorer.hpp"
#include "fairprobe/text.hpp"

namespace fairprobe {

enum class DataKind { structured, text };

/// Model under test: a built-in MLP file or an external command.
struct OracleSpec {
  std::filesystem::path mlp;
  std::vector<std::string> command;
  double timeout_seconds = 30.0;

  bool operator==(const OracleSpec&) const = default;
};

struct MitigationOptions {
  bool enabled = false;
  MitigationConfig config;
  std::filesystem::path model_output;     ///< retrained model (MLP oracles)
  std::filesystem::path augmented_output; ///< original data plus counter samples
};

struct AuditConfig {
  DataKind kind = DataKind::structured;
  std::filesystem::path dataset;
  std::filesystem::path schema;  ///< structured only
  std::filesystem::path lexicon; ///< text only; empty uses $FAIRPROBE_LEXICON or the built-in lexicon
  std::string favorable_label;   ///< text only; structured data takes it from the schema
  OracleSpec oracle;
  MiningOptions mining;
  ScorerConfig scorer;
  SamplerConfig sampler;
  double tolerance = 0.05; ///< scores above this are reported as discrimination
  std::size_t top_k = 3;
  std::size_t jobs = 1;
  bool include_timings = false;
  MitigationOptions mitigation;

  /// Checks numeric ranges and that every referenced file exists.
  void validate() const;
};

/// Parses a JSON config. Relative paths resolve against `base_dir`.
/// `overrides` are `dotted.key=value` strings applied to the JSON before
/// parsing; values are read as JSON when they parse, as strings otherwise.
/// A `null` value removes the key.
AuditConfig parse_audit_config(std::string_view json, const std::filesystem::path& base_dir,
                               const std::vector<std::string>& overrides = {});
AuditConfig load_audit_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
std::string audit_config_to_json(const AuditConfig& config);

/// Error carrying the pipeline phase it came from.
class PhaseError : public Error {
public:
  PhaseError(std::string phase, const std::string& what) : Error(phase + ": " + what), phase_(std::move(phase)) {}
  const std::string& phase() const noexcept { return phase_; }

private:
  std::string phase_;
};

/// Datasets and oracle resolved from a config.
struct AuditInputs {
  std::optional<StructuredDataset> structured;
  std::optional<TextDataset> text;
  std::shared_ptr<StructuredOracle> structured_oracle;
  std::shared_ptr<TextOracle> text_oracle;
  std::optional<MlpModel> mlp; ///< set for built-in MLP oracles
  Label favorable;
};

/// Loads data and lexicon, and starts the oracle.
AuditInputs load_inputs(const AuditConfig& config);
MiningResult mine(const AuditConfig& config, const AuditInputs& inputs);

struct PhaseTimings {
  double mining_seconds = 0.0;
  double scoring_seconds = 0.0;
  double mitigation_seconds = 0.0;

  bool operator==(const PhaseTimings&) const = default;
};

struct AuditSettings {
  std::string data_kind;
  std::string favorable_label;
  double theta = 0.0;
  std::size_t bins = 0;
  std::string interval_mode;
  std::size_t sample_threshold = 0;
  double error_threshold = 0.0;
  double z = 0.0;
  double confidence = 0.0;
  std::size_t max_samples = 0;
  std::uint64_t scorer_seed = 0;
  std::uint64_t sampler_seed = 0;

  bool operator==(const AuditSettings&) const = default;
};

struct MitigationSummary {
  FairnessReport before;
  FairnessReport after;
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  Label target_label;
  std::vector<MitigationRound> rounds;
  std::optional<std::size_t> chosen_round;
  std::size_t augmentation_count = 0;
  bool retrained = false;
  std::string warm_start;
  std::vector<std::string> diagnostics;
  std::string model_output;
  std::string augmented_output;

  bool operator==(const MitigationSummary&) const = default;
};

struct AuditReport {
  AuditSettings settings;
  std::size_t single_rules = 0;
  std::uint64_t candidates = 0;
  std::size_t evaluated = 0;
  std::size_t frequent = 0;
  std::size_t skipped_empty_complement = 0;
  Ranking ranking;
  std::optional<MitigationSummary> mitigation;
  std::optional<PhaseTimings> timings;

  bool operator==(const AuditReport&) const = default;
};

/// Mines, scores (on `jobs` threads), ranks, and mitigates the top finding
/// when requested. Errors are rethrown as PhaseError.
AuditReport run_audit(const AuditConfig& config);

/// Scores every rule set with `jobs` worker threads. Results are in input
/// order and do not depend on `jobs`.
std::vector<FairnessReport> score_rule_sets(const AuditInputs& inputs, const std::vector<RuleSet>& rule_sets,
                                            const AuditConfig& config);

enum class ReportFormat { json, markdown };

/// JSON is lossless; markdown is a table of the top findings (all findings
/// with `all_rows`).
std::string render_report(const AuditReport& report, ReportFormat format, bool all_rows = false);
AuditReport parse_report_json(std::string_view json);

/// `20.2% (29.9%, 9.7%)`
std::string format_score_cell(const FairnessReport& report);

} // namespace fairprobe
