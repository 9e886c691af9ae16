#pragma once

#include <filesystem>
#include <string_view>

#include "uwbloc/simulation.hpp"

namespace uwbloc::vptl {

/// Parses a JSON scenario document. Missing keys keep their defaults;
/// unknown keys and malformed values raise ConfigError.
IntersectionScenario parse_scenario(std::string_view json_text);
IntersectionScenario load_scenario(const std::filesystem::path& path);

}  // namespace uwbloc::vptl
