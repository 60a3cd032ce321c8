#pragma once
// Writes a StudyResult to disk: one CSV per table, a fits CSV, one .dat file
// per series and a JSON manifest tying them together.

#include "mvlab/config.hpp"
#include "mvlab/studies.hpp"

#include <string>
#include <vector>

#include "json.hpp"

namespace mvlab {

/// Creates `dir` if needed and checks that a file can be written there.
/// Throws std::runtime_error, so callers fail before any compute starts.
void preflight_writable(const std::string& dir);

/// Returns the paths written, manifest last.
std::vector<std::string> emit_outputs(const StudyResult& r, const std::string& dir);

nlohmann::json manifest_json(const StudyResult& r, const std::vector<std::string>& files);

/// Rebuilds the resolved configuration stored in a manifest.
Config config_from_manifest(const nlohmann::json& manifest);

}  // namespace mvlab
