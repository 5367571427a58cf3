#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "credrag/types.hpp"

namespace credrag {

struct LoadOptions {
    /// Scale that stored integer credibility values are read on.
    int level_count = CredibilityLevel::kDefaultLevelCount;
    /// Empty files are an error for datasets but acceptable for shot banks.
    bool allow_empty = false;
};

// JSONL codec for the QAItem schema. Emission uses a fixed key order so
// that saving the same value twice yields identical bytes.
nlohmann::ordered_json to_json(const Document& doc);
nlohmann::ordered_json to_json(const QAItem& item);

Document document_from_json(const nlohmann::json& j, int level_count = CredibilityLevel::kDefaultLevelCount);
QAItem item_from_json(const nlohmann::json& j, int level_count = CredibilityLevel::kDefaultLevelCount);

/// One canonical JSONL line without the trailing newline.
std::string to_jsonl_line(const QAItem& item);

/// Reads `path` plus the optional `<path>.meta.json` sidecar holding name
/// and metadata. Strings are NFC-normalized. Errors carry the 1-based line.
Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

/// Writes canonical JSONL and the metadata sidecar.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

std::filesystem::path metadata_path(const std::filesystem::path& dataset_path);

/// Writes `contents` through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace credrag
