#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cofi/core/error.hpp"

namespace cofi {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

template <typename Json = json>
Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(what + ": " + e.what());
    }
}

template <typename Json = json>
Json read_json_file(const std::filesystem::path& path) {
    return parse_json_text<Json>(read_text_file(path), path.string());
}

/// Typed field access that reports the offending key as a FormatError.
template <typename T, typename Json>
T get_field(const Json& j, const char* key, const std::string& what) {
    if (!j.is_object() || !j.contains(key))
        throw FormatError(what + ": missing field '" + key + "'");
    try {
        return j.at(key).template get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(what + ": field '" + key + "': " + e.what());
    }
}

template <typename T, typename Json>
T get_field_or(const Json& j, const char* key, T fallback, const std::string& what) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_field<T>(j, key, what);
}

}  // namespace cofi
