#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fairprobe/audit.hpp"
#include "json_codec.hpp"

namespace fairprobe {

using nlohmann::json;

namespace {

json finding_to_json(const FairnessReport& r) {
  return {{"rule_set", r.rule_set.render()},
          {"rules", detail::rule_set_to_json(r.rule_set)},
          {"score", r.score},
          {"phi_inside", r.phi_inside},
          {"phi_outside", r.phi_outside},
          {"margin", r.margin},
          {"margin_inside", r.margin_inside},
          {"margin_outside", r.margin_outside},
          {"confidence", r.confidence},
          {"samples", r.samples},
          {"favorable_inside", r.favorable_inside},
          {"favorable_outside", r.favorable_outside},
          {"converged", r.converged}};
}

FairnessReport finding_from_json(const json& j) {
  FairnessReport r;
  r.rule_set = detail::rule_set_from_json(j.at("rules"));
  r.score = j.at("score").get<double>();
  r.phi_inside = j.at("phi_inside").get<double>();
  r.phi_outside = j.at("phi_outside").get<double>();
  r.margin = j.at("margin").get<double>();
  r.margin_inside = j.at("margin_inside").get<double>();
  r.margin_outside = j.at("margin_outside").get<double>();
  r.confidence = j.at("confidence").get<double>();
  r.samples = j.at("samples").get<std::size_t>();
  r.favorable_inside = j.at("favorable_inside").get<std::size_t>();
  r.favorable_outside = j.at("favorable_outside").get<std::size_t>();
  r.converged = j.at("converged").get<bool>();
  return r;
}

json to_json(const AuditReport& report) {
  const auto& s = report.settings;
  json findings = json::array();
  std::size_t rank = 0;
  for (const auto& f : report.ranking.ranked) {
    auto j = finding_to_json(f.report);
    j["rank"] = ++rank;
    j["discriminatory"] = f.discriminatory;
    findings.push_back(std::move(j));
  }
  json root = {{"settings",
                {{"data_kind", s.data_kind},
                 {"favorable_label", s.favorable_label},
                 {"theta", s.theta},
                 {"bins", s.bins},
                 {"interval_mode", s.interval_mode},
                 {"sample_threshold", s.sample_threshold},
                 {"error_threshold", s.error_threshold},
                 {"z", s.z},
                 {"confidence", s.confidence},
                 {"max_samples", s.max_samples},
                 {"scorer_seed", s.scorer_seed},
                 {"sampler_seed", s.sampler_seed}}},
               {"counts",
                {{"single_rules", report.single_rules},
                 {"candidates", report.candidates},
                 {"evaluated", report.evaluated},
                 {"frequent", report.frequent},
                 {"skipped_empty_complement", report.skipped_empty_complement}}},
               {"ranking",
                {{"tolerance", report.ranking.tolerance},
                 {"top_k", report.ranking.top_k},
                 {"findings", std::move(findings)}}}};
  if (report.mitigation) {
    const auto& m = *report.mitigation;
    json rounds = json::array();
    for (const auto& r : m.rounds) {
      rounds.push_back({{"count", r.count},
                        {"attempts", r.attempts},
                        {"score", r.score},
                        {"margin", r.margin},
                        {"accuracy", r.accuracy},
                        {"within_budget", r.within_budget}});
    }
    root["mitigation"] = {{"before", finding_to_json(m.before)},
                          {"after", finding_to_json(m.after)},
                          {"accuracy_before", m.accuracy_before},
                          {"accuracy_after", m.accuracy_after},
                          {"target_label", m.target_label},
                          {"rounds", std::move(rounds)},
                          {"chosen_round", m.chosen_round ? json(*m.chosen_round) : json(nullptr)},
                          {"augmentation_count", m.augmentation_count},
                          {"retrained", m.retrained},
                          {"warm_start", m.warm_start},
                          {"diagnostics", m.diagnostics},
                          {"model_output", m.model_output},
                          {"augmented_output", m.augmented_output}};
  }
  if (report.timings) {
    root["timings"] = {{"mining_seconds", report.timings->mining_seconds},
                       {"scoring_seconds", report.timings->scoring_seconds},
                       {"mitigation_seconds", report.timings->mitigation_seconds}};
  }
  return root;
}

std::string percent(double x) { return fmt::format("{:.1f}%", x * 100.0); }

std::string escape_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += '\\';
    }
    out += c;
  }
  return out;
}

std::string markdown(const AuditReport& report, bool all_rows) {
  std::string out = "| Rank | Rule Set | Fairness Score (φ_r, φ_¬r) | ε | Flagged |\n"
                    "|---:|:---|:---|---:|:---|\n";
  const auto rows = all_rows ? report.ranking.ranked : report.ranking.top();
  std::size_t rank = 0;
  for (const auto& f : rows) {
    out += fmt::format("| {} | {} | {} | {} | {} |\n", ++rank, escape_cell(f.report.rule_set.render()),
                       format_score_cell(f.report), percent(f.report.margin), f.discriminatory ? "yes" : "no");
  }
  if (report.mitigation) {
    const auto& m = *report.mitigation;
    out += "\n";
    if (m.rounds.empty() && m.augmentation_count == 0) {
      out += "Mitigation: nothing done.\n";
    } else if (m.retrained) {
      out += fmt::format("Mitigation of {}: score {} -> {}, held-out accuracy {} -> {}, {} counter samples "
                         "labelled \"{}\" (round {} of {}).\n",
                         escape_cell(m.before.rule_set.render()), percent(m.before.score), percent(m.after.score),
                         percent(m.accuracy_before), percent(m.accuracy_after), m.augmentation_count,
                         m.target_label, *m.chosen_round + 1, m.rounds.size());
    } else if (!m.rounds.empty()) {
      out += fmt::format("Mitigation of {}: no round stayed within the accuracy budget; model unchanged.\n",
                         escape_cell(m.before.rule_set.render()));
    } else {
      out += fmt::format("Mitigation of {}: {} counter samples labelled \"{}\" generated for retraining.\n",
                         escape_cell(m.before.rule_set.render()), m.augmentation_count, m.target_label);
    }
    for (const auto& d : m.diagnostics) {
      out += "- " + d + "\n";
    }
  }
  return out;
}

} // namespace

std::string format_score_cell(const FairnessReport& report) {
  return fmt::format("{} ({}, {})", percent(report.score), percent(report.phi_inside), percent(report.phi_outside));
}

std::string render_report(const AuditReport& report, ReportFormat format, bool all_rows) {
  if (format == ReportFormat::json) {
    return to_json(report).dump(2) + "\n";
  }
  return markdown(report, all_rows);
}

AuditReport parse_report_json(std::string_view text) {
  try {
    const auto root = json::parse(text);
    AuditReport report;
    const auto& s = root.at("settings");
    auto& out = report.settings;
    out.data_kind = s.at("data_kind").get<std::string>();
    out.favorable_label = s.at("favorable_label").get<std::string>();
    out.theta = s.at("theta").get<double>();
    out.bins = s.at("bins").get<std::size_t>();
    out.interval_mode = s.at("interval_mode").get<std::string>();
    out.sample_threshold = s.at("sample_threshold").get<std::size_t>();
    out.error_threshold = s.at("error_threshold").get<double>();
    out.z = s.at("z").get<double>();
    out.confidence = s.at("confidence").get<double>();
    out.max_samples = s.at("max_samples").get<std::size_t>();
    out.scorer_seed = s.at("scorer_seed").get<std::uint64_t>();
    out.sampler_seed = s.at("sampler_seed").get<std::uint64_t>();

    const auto& c = root.at("counts");
    report.single_rules = c.at("single_rules").get<std::size_t>();
    report.candidates = c.at("candidates").get<std::uint64_t>();
    report.evaluated = c.at("evaluated").get<std::size_t>();
    report.frequent = c.at("frequent").get<std::size_t>();
    report.skipped_empty_complement = c.at("skipped_empty_complement").get<std::size_t>();

    const auto& r = root.at("ranking");
    report.ranking.tolerance = r.at("tolerance").get<double>();
    report.ranking.top_k = r.at("top_k").get<std::size_t>();
    for (const auto& f : r.at("findings")) {
      report.ranking.ranked.push_back({finding_from_json(f), f.at("discriminatory").get<bool>()});
    }

    if (root.contains("mitigation")) {
      const auto& m = root.at("mitigation");
      MitigationSummary sum;
      sum.before = finding_from_json(m.at("before"));
      sum.after = finding_from_json(m.at("after"));
      sum.accuracy_before = m.at("accuracy_before").get<double>();
      sum.accuracy_after = m.at("accuracy_after").get<double>();
      sum.target_label = m.at("target_label").get<std::string>();
      for (const auto& x : m.at("rounds")) {
        sum.rounds.push_back({x.at("count").get<std::size_t>(), x.at("attempts").get<std::size_t>(),
                              x.at("score").get<double>(), x.at("margin").get<double>(),
                              x.at("accuracy").get<double>(), x.at("within_budget").get<bool>()});
      }
      if (!m.at("chosen_round").is_null()) {
        sum.chosen_round = m.at("chosen_round").get<std::size_t>();
      }
      sum.augmentation_count = m.at("augmentation_count").get<std::size_t>();
      sum.retrained = m.at("retrained").get<bool>();
      sum.warm_start = m.at("warm_start").get<std::string>();
      sum.diagnostics = m.at("diagnostics").get<std::vector<std::string>>();
      sum.model_output = m.at("model_output").get<std::string>();
      sum.augmented_output = m.at("augmented_output").get<std::string>();
      report.mitigation = std::move(sum);
    }
    if (root.contains("timings")) {
      const auto& t = root.at("timings");
      report.timings = PhaseTimings{t.at("mining_seconds").get<double>(), t.at("scoring_seconds").get<double>(),
                                    t.at("mitigation_seconds").get<double>()};
    }
    return report;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

} // namespace fairprobe
