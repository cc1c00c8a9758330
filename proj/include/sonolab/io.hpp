#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace sonolab::io {

/// Shortest round-trip decimal form of a double (%.17g).
std::string format_number(double v);

/// In-memory CSV table. render() emits the header row followed by data rows;
/// every row must match the header width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
  std::string render() const;
};

/// Writes content to a sibling temp file then renames it over path.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string read_text(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of the file's bytes.
std::string sha256_file(const std::filesystem::path& path);

std::string iso8601_utc_now();

struct ManifestEntry {
  std::string file;    // name relative to the run directory
  std::string sha256;  // filled by write_manifest
};

/// Run provenance record. The manifest is the only output that carries a
/// timestamp; everything else must be byte-reproducible from the seed.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::json parameters;   // resolved configuration after precedence
  nlohmann::json annotations;  // units, conventions, run counters
  std::vector<ManifestEntry> outputs;

  nlohmann::json to_json(const std::string& created_utc) const;
};

/// Checksums every listed output inside dir, writes manifest.json last, then
/// re-reads each output and verifies its checksum. Any mismatch or missing
/// file raises IoError.
void write_manifest(const std::filesystem::path& dir, RunManifest manifest);

}  // namespace sonolab::io
