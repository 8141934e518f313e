#pragma once

#include <string_view>

#include "json.hpp"

namespace trendlab {

// Every persisted model is a JSON document:
//   {"format": "trendlab-model", "version": 1, "type": <type>, ...payload}
// Loading rejects a different format tag, version or type.
inline constexpr std::string_view kModelFormat = "trendlab-model";
inline constexpr int kModelVersion = 1;

nlohmann::json model_envelope(std::string_view type);
void check_envelope(const nlohmann::json& doc, std::string_view type);

}  // namespace trendlab
