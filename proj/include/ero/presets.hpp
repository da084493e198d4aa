#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace ero {

/// Names of the embedded experiment documents.
std::vector<std::string> preset_names();

/// Embedded experiment document; throws ConfigError for an unknown name.
nlohmann::json preset_document(const std::string& name);

}  // namespace ero
