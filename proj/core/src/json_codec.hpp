#pragma once

// nlohmann::json conversions shared by the serializers. Internal header.

#include <nlohmann/json.hpp>

#include "fairprobe/rules.hpp"

namespace fairprobe::detail {

nlohmann::json rule_to_json(const Rule& rule);
Rule rule_from_json(const nlohmann::json& j);
nlohmann::json rule_set_to_json(const RuleSet& rules);
RuleSet rule_set_from_json(const nlohmann::json& j);

} // namespace fairprobe::detail
