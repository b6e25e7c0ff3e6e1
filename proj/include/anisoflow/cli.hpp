#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace anisoflow::cli {

inline constexpr const char* version = "0.1.0";

/// Runs one configured command and writes its outputs plus manifest.json into
/// `out_dir`. Returns the process exit code: 0 success, 1 validation error,
/// 2 numerical abort.
int run_command(const nlohmann::json& config, const std::filesystem::path& out_dir, bool quiet = true);

// Shortest round-trip text for a double, at most 17 significant digits.
std::string format_number(double value);

} // namespace anisoflow::cli
