#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fluentnet {

/// Bundled data files compiled into the library: the apartment topology
/// ("casas_topology"), the default network ("network"), the activity models
/// ("a1".."a8") and the synthetic scenario scripts ("script:s1".."script:s8",
/// "script:interwoven", "script:burst").
const std::map<std::string, std::string_view>& builtin_assets();

std::optional<std::string_view> builtin_asset(const std::string& key);

}  // namespace fluentnet
