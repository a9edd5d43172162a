#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "densereg/core.hpp"

namespace densereg {

/// Named parameter bundles: "default", "fire", "flori21", "lsfg".
RegistrationConfig preset_config(std::string_view name);
EvaluationThresholds preset_thresholds(std::string_view name);

/// Every key accepted by apply_config_entry.
const std::vector<std::string>& config_keys();

/// Throws ContractError for unknown keys or malformed values.
void apply_config_entry(RegistrationConfig& cfg, std::string_view key, std::string_view value);

/// "key = value" per line; '#' starts a comment.
RegistrationConfig parse_config(std::string_view text, RegistrationConfig base = {});
RegistrationConfig load_config_file(const std::string& path, RegistrationConfig base = {});
std::string format_config(const RegistrationConfig& cfg);

}  // namespace densereg
