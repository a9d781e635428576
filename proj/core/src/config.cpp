#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairprobe/audit.hpp"

namespace fairprobe {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw ConfigError("'" + where + "' must be an object");
  }
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) {
    return;
  }
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
  }
}

void read_path(const json& j, const char* key, std::filesystem::path& out, const std::filesystem::path& base,
               const std::string& where) {
  std::string s;
  read(j, key, s, where);
  if (!s.empty()) {
    std::filesystem::path p(s);
    out = p.is_absolute() ? p : base / p;
  }
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

void apply_override(json& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + spec + "' is not key=value");
  }
  const auto key = spec.substr(0, eq);
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) {
      throw ConfigError("override key '" + key + "' has an empty component");
    }
    if (!node->is_object()) {
      throw ConfigError("override key '" + key + "' descends into a non-object");
    }
    if (dot == std::string::npos) {
      auto value = parse_override_value(spec.substr(eq + 1));
      if (value.is_null()) {
        node->erase(part);
      } else {
        (*node)[part] = std::move(value);
      }
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) {
      *node = json::object();
    }
    start = dot + 1;
  }
}

IntervalMode parse_interval_mode(const std::string& s) {
  if (s == "union") {
    return IntervalMode::bin_union;
  }
  if (s == "single-bin") {
    return IntervalMode::single_bin;
  }
  throw ConfigError("interval_mode must be 'union' or 'single-bin', got '" + s + "'");
}

std::string interval_mode_name(IntervalMode m) { return m == IntervalMode::bin_union ? "union" : "single-bin"; }

void read_trainer(const json& j, TrainerConfig& t, const std::string& where) {
  check_keys(j, where, {"learning_rate", "epochs", "batch_size", "seed", "validation_fraction"});
  read(j, "learning_rate", t.learning_rate, where);
  read(j, "epochs", t.epochs, where);
  read(j, "batch_size", t.batch_size, where);
  read(j, "seed", t.seed, where);
  read(j, "validation_fraction", t.validation_fraction, where);
}

} // namespace

void AuditConfig::validate() const {
  auto require_file = [](const std::filesystem::path& p, const char* what) {
    if (p.empty()) {
      throw ConfigError(std::string(what) + " path is required");
    }
    if (!std::filesystem::is_regular_file(p)) {
      throw ConfigError(std::string(what) + " file not found: " + p.string());
    }
  };
  require_file(dataset, "dataset");
  if (kind == DataKind::structured) {
    require_file(schema, "schema");
  } else {
    if (!lexicon.empty()) {
      require_file(lexicon, "lexicon");
    }
    if (favorable_label.empty()) {
      throw ConfigError("text audits need a favorable_label");
    }
  }
  if (oracle.mlp.empty() == oracle.command.empty()) {
    throw ConfigError("oracle needs exactly one of 'mlp' and 'command'");
  }
  if (!oracle.mlp.empty()) {
    require_file(oracle.mlp, "oracle model");
    if (kind == DataKind::text) {
      throw ConfigError("the built-in MLP oracle only handles structured data");
    }
  }
  if (!(oracle.timeout_seconds > 0.0)) {
    throw ConfigError("oracle timeout must be positive");
  }
  if (!(mining.theta > 0.0 && mining.theta < 1.0)) {
    throw ConfigError("theta must lie in (0, 1)");
  }
  if (mining.rules.bins < 2) {
    throw ConfigError("bins must be at least 2");
  }
  if (!(tolerance >= 0.0 && tolerance < 1.0)) {
    throw ConfigError("tolerance must lie in [0, 1)");
  }
  if (top_k < 1) {
    throw ConfigError("top_k must be at least 1");
  }
  if (jobs < 1) {
    throw ConfigError("jobs must be at least 1");
  }
  scorer.validate();
  sampler.validate();
  if (mitigation.enabled) {
    mitigation.config.validate();
  }
}

AuditConfig parse_audit_config(std::string_view text, const std::filesystem::path& base_dir,
                               const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  for (const auto& o : overrides) {
    apply_override(root, o);
  }
  check_keys(root, "", {"data", "oracle", "mining", "scorer", "sampler", "ranking", "jobs", "include_timings",
                        "mitigation"});

  AuditConfig c;
  const json data = root.value("data", json::object());
  check_keys(data, "data", {"kind", "path", "schema", "lexicon", "favorable_label"});
  std::string kind = "structured";
  read(data, "kind", kind, "data");
  if (kind == "structured") {
    c.kind = DataKind::structured;
  } else if (kind == "text") {
    c.kind = DataKind::text;
  } else {
    throw ConfigError("data.kind must be 'structured' or 'text', got '" + kind + "'");
  }
  read_path(data, "path", c.dataset, base_dir, "data");
  read_path(data, "schema", c.schema, base_dir, "data");
  read_path(data, "lexicon", c.lexicon, base_dir, "data");
  if (c.lexicon.empty() && c.kind == DataKind::text) {
    if (const char* env = std::getenv("FAIRPROBE_LEXICON"); env && *env) {
      c.lexicon = env;
    }
  }
  read(data, "favorable_label", c.favorable_label, "data");

  const json oracle = root.value("oracle", json::object());
  check_keys(oracle, "oracle", {"mlp", "command", "timeout_seconds"});
  read_path(oracle, "mlp", c.oracle.mlp, base_dir, "oracle");
  read(oracle, "command", c.oracle.command, "oracle");
  read(oracle, "timeout_seconds", c.oracle.timeout_seconds, "oracle");

  const json mining = root.value("mining", json::object());
  check_keys(mining, "mining", {"theta", "bins", "interval_mode", "max_rules_per_set", "max_rules_per_feature"});
  read(mining, "theta", c.mining.theta, "mining");
  read(mining, "bins", c.mining.rules.bins, "mining");
  if (mining.contains("interval_mode")) {
    std::string m;
    read(mining, "interval_mode", m, "mining");
    c.mining.rules.interval_mode = parse_interval_mode(m);
  }
  if (mining.contains("max_rules_per_set") && !mining["max_rules_per_set"].is_null()) {
    std::size_t n = 0;
    read(mining, "max_rules_per_set", n, "mining");
    c.mining.max_rules_per_set = n;
  }
  if (mining.contains("max_rules_per_feature") && !mining["max_rules_per_feature"].is_null()) {
    std::size_t n = 0;
    read(mining, "max_rules_per_feature", n, "mining");
    c.mining.rules.max_rules_per_feature = n;
  }

  const json scorer = root.value("scorer", json::object());
  check_keys(scorer, "scorer",
             {"sample_threshold", "error_threshold", "z", "confidence", "max_samples", "seed", "block_size"});
  read(scorer, "sample_threshold", c.scorer.sample_threshold, "scorer");
  read(scorer, "error_threshold", c.scorer.error_threshold, "scorer");
  read(scorer, "z", c.scorer.z, "scorer");
  read(scorer, "confidence", c.scorer.confidence, "scorer");
  read(scorer, "max_samples", c.scorer.max_samples, "scorer");
  read(scorer, "seed", c.scorer.seed, "scorer");
  read(scorer, "block_size", c.scorer.block_size, "scorer");

  const json sampler = root.value("sampler", json::object());
  check_keys(sampler, "sampler", {"integer_step", "decimal_step", "seed"});
  read(sampler, "integer_step", c.sampler.integer_step, "sampler");
  read(sampler, "decimal_step", c.sampler.decimal_step, "sampler");
  read(sampler, "seed", c.sampler.seed, "sampler");

  const json ranking = root.value("ranking", json::object());
  check_keys(ranking, "ranking", {"tolerance", "top_k"});
  read(ranking, "tolerance", c.tolerance, "ranking");
  read(ranking, "top_k", c.top_k, "ranking");

  read(root, "jobs", c.jobs, "");
  read(root, "include_timings", c.include_timings, "");

  const json mit = root.value("mitigation", json::object());
  check_keys(mit, "mitigation",
             {"enabled", "start_count", "max_fraction", "growth", "accuracy_drop_budget", "attempts_per_sample",
              "holdout_fraction", "trainer", "model_output", "augmented_output"});
  auto& m = c.mitigation;
  read(mit, "enabled", m.enabled, "mitigation");
  read(mit, "start_count", m.config.start_count, "mitigation");
  read(mit, "max_fraction", m.config.max_fraction, "mitigation");
  read(mit, "growth", m.config.growth, "mitigation");
  read(mit, "accuracy_drop_budget", m.config.accuracy_drop_budget, "mitigation");
  read(mit, "attempts_per_sample", m.config.attempts_per_sample, "mitigation");
  read(mit, "holdout_fraction", m.config.holdout_fraction, "mitigation");
  if (mit.contains("trainer")) {
    read_trainer(mit["trainer"], m.config.trainer, "mitigation.trainer");
  }
  read_path(mit, "model_output", m.model_output, base_dir, "mitigation");
  read_path(mit, "augmented_output", m.augmented_output, base_dir, "mitigation");
  return c;
}

AuditConfig load_audit_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_audit_config(ss.str(), std::filesystem::absolute(path).parent_path(), overrides);
}

std::string audit_config_to_json(const AuditConfig& c) {
  json data = {{"kind", c.kind == DataKind::structured ? "structured" : "text"}, {"path", c.dataset.string()}};
  if (!c.schema.empty()) {
    data["schema"] = c.schema.string();
  }
  if (!c.lexicon.empty()) {
    data["lexicon"] = c.lexicon.string();
  }
  if (!c.favorable_label.empty()) {
    data["favorable_label"] = c.favorable_label;
  }
  json oracle = {{"timeout_seconds", c.oracle.timeout_seconds}};
  if (!c.oracle.mlp.empty()) {
    oracle["mlp"] = c.oracle.mlp.string();
  }
  if (!c.oracle.command.empty()) {
    oracle["command"] = c.oracle.command;
  }
  json mining = {{"theta", c.mining.theta},
                 {"bins", c.mining.rules.bins},
                 {"interval_mode", interval_mode_name(c.mining.rules.interval_mode)}};
  if (c.mining.max_rules_per_set) {
    mining["max_rules_per_set"] = *c.mining.max_rules_per_set;
  }
  if (c.mining.rules.max_rules_per_feature) {
    mining["max_rules_per_feature"] = *c.mining.rules.max_rules_per_feature;
  }
  const auto& m = c.mitigation;
  const auto& t = m.config.trainer;
  json mit = {{"enabled", m.enabled},
              {"start_count", m.config.start_count},
              {"max_fraction", m.config.max_fraction},
              {"growth", m.config.growth},
              {"accuracy_drop_budget", m.config.accuracy_drop_budget},
              {"attempts_per_sample", m.config.attempts_per_sample},
              {"holdout_fraction", m.config.holdout_fraction},
              {"trainer",
               {{"learning_rate", t.learning_rate},
                {"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"seed", t.seed},
                {"validation_fraction", t.validation_fraction}}}};
  if (!m.model_output.empty()) {
    mit["model_output"] = m.model_output.string();
  }
  if (!m.augmented_output.empty()) {
    mit["augmented_output"] = m.augmented_output.string();
  }
  json root = {{"data", data},
               {"oracle", oracle},
               {"mining", mining},
               {"scorer",
                {{"sample_threshold", c.scorer.sample_threshold},
                 {"error_threshold", c.scorer.error_threshold},
                 {"z", c.scorer.z},
                 {"confidence", c.scorer.confidence},
                 {"max_samples", c.scorer.max_samples},
                 {"seed", c.scorer.seed},
                 {"block_size", c.scorer.block_size}}},
               {"sampler",
                {{"integer_step", c.sampler.integer_step},
                 {"decimal_step", c.sampler.decimal_step},
                 {"seed", c.sampler.seed}}},
               {"ranking", {{"tolerance", c.tolerance}, {"top_k", c.top_k}}},
               {"jobs", c.jobs},
               {"include_timings", c.include_timings},
               {"mitigation", mit}};
  return root.dump(2) + "\n";
}

} // namespace fairprobe
