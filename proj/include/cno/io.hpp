#pragma once

#include <string>

#include <json.hpp>

#include "cno/causal.hpp"

namespace cno::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "0.1.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

/// Throws IntegrityError unless j["schema_version"] is a known version.
void check_schema(const json& j, const std::string& what);

json space_to_json(const spaces::SchauderSpace& s);
spaces::SchauderSpace space_from_json(const json& j);

json spec_to_json(const net::NetSpec& s);

/// {"bytes": n, "sha256": hex} for a file.
json file_entry(const std::string& path);

// Bundle directory layout:
//   manifest.json  grid, M, Q, delta, dims, seeds, file hashes
//   weave.bin      the woven model
//   spaces.json    per-window input/output space descriptors

/// Writes a bundle. `extra` is stored under "run" in the manifest.
void write_bundle(const std::string& dir, const causal::CnoModel& m, const json& extra = json::object());

/// Reads and verifies a bundle. Hash mismatches, missing files and unknown
/// schema versions raise IntegrityError naming the failing file.
causal::CnoModel read_bundle(const std::string& dir);

/// Summary of a bundle: dims, P([d*]), Q, delta, I, M_T, packing
/// statistics and the width bound next to the measured hypernetwork.
json inspect_bundle(const std::string& dir);
std::string format_inspect(const json& summary);

}  // namespace cno::io
