#pragma once

// JSON map specifications. See docs/schema/map.schema.json.

#include "calabi/diskmap.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace calabi::io {

struct MapDocument {
    diskmap::DiskMap map;
    /// Declared boundary angle; defaults to the map's own boundary angle.
    double theta0 = 0.0;
    std::optional<double> delta;
};

/// Throws ParseError with a JSON-pointer location for malformed documents,
/// DomainError when a declared theta0 or delta contradicts the map.
MapDocument parse_map_document(const nlohmann::json& doc);
diskmap::DiskMap parse_map(const nlohmann::json& node, const std::string& pointer = "");

/// Reads and parses a JSON file; syntax errors become ParseError with a byte offset.
nlohmann::json read_json_file(const std::filesystem::path& path);

nlohmann::ordered_json map_to_json(const diskmap::DiskMap& map);

}  // namespace calabi::io
