#pragma once

#include <memory>
#include <set>
#include <string>

#include "cno/io.hpp"

namespace cno::cli {

using json = nlohmann::json;

/// Reads one JSON object, recording every value actually used (defaults
/// included) into `resolved` so the run manifest echoes the full config.
/// Unknown keys are rejected by finish().
class Section {
public:
    Section(const json& src, std::string path, json& resolved)
        : src_(src), path_(std::move(path)), resolved_(resolved) {
        if (!src_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        if (!resolved_.is_object()) resolved_ = json::object();
    }

    bool has(const std::string& key) const { return src_.contains(key); }

    template <class T>
    T get(const std::string& key, const T& def) {
        used_.insert(key);
        T v = def;
        if (src_.contains(key)) v = convert<T>(key);
        resolved_[key] = v;
        return v;
    }

    template <class T>
    T require(const std::string& key) {
        used_.insert(key);
        if (!src_.contains(key)) throw ConfigError(field(key), "required field is missing");
        T v = convert<T>(key);
        resolved_[key] = v;
        return v;
    }

    /// One of a fixed set of strings.
    std::string choice(const std::string& key, const std::string& def, const std::set<std::string>& allowed) {
        auto v = get<std::string>(key, def);
        if (!allowed.count(v)) throw ConfigError(field(key), "unknown value '" + v + "'");
        return v;
    }

    /// Child object; a missing key behaves like {}.
    Section child(const std::string& key) {
        used_.insert(key);
        static const json empty = json::object();
        const json& src = src_.contains(key) ? src_.at(key) : empty;
        return Section(src, field(key), resolved_[key]);
    }

    void finish() const {
        for (const auto& [k, v] : src_.items()) {
            if (!used_.count(k)) throw ConfigError(field(k), "unknown field");
        }
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const json& raw() const { return src_; }

private:
    template <class T>
    T convert(const std::string& key) const {
        const json& v = src_.at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError(field(key), "expected a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
                if constexpr (std::is_unsigned_v<T>) {
                    if (v.is_number_integer() && !v.is_number_unsigned()) {
                        throw ConfigError(field(key), "expected a nonnegative integer");
                    }
                }
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError(field(key), "expected a string");
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(field(key), std::string("wrong type: ") + e.what());
        }
    }

    const json& src_;
    std::string path_;
    json& resolved_;
    std::set<std::string> used_;
};

/// Parses a config file. Syntax errors and schema mismatches are
/// ConfigErrors; the top level must carry schema_version.
inline json load_config(const std::string& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const Error&) {
        throw ConfigError("<file>", "cannot read " + path);
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("<root>", "expected an object");
    if (!j.contains("schema_version")) throw ConfigError("schema_version", "required field is missing");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != io::kSchemaVersion) {
        throw ConfigError("schema_version", "unsupported version " + j["schema_version"].dump());
    }
    return j;
}

}  // namespace cno::cli
