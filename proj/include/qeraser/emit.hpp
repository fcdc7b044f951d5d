// emit.hpp
// Tabular output as CSV or self-describing JSON. Both serializations are
// byte-stable for fixed inputs: CSV floats are printed at 12 significant
// digits, JSON goes through a canonical dump with sorted keys.

#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "version.hpp"

namespace qeraser::io {

using field = std::variant<std::string, double, std::int64_t, std::uint64_t>;

struct dataset {
    std::vector<std::string> columns;
    std::vector<std::vector<field>> rows;
};

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string field_text(const field& f) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) return csv_escape(v);
            else if constexpr (std::is_same_v<T, double>) return format_double(v);
            else return std::to_string(v);
        },
        f);
}

inline nlohmann::json field_json(const field& f) {
    return std::visit([](const auto& v) -> nlohmann::json { return v; }, f);
}

}  // namespace detail

inline std::string to_csv(const dataset& ds) {
    std::string out;
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
        if (c > 0) out += ',';
        out += detail::csv_escape(ds.columns[c]);
    }
    out += '\n';
    for (const auto& row : ds.rows) {
        if (row.size() != ds.columns.size())
            throw std::invalid_argument("to_csv: row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += ',';
            out += detail::field_text(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline std::string to_json(const dataset& ds, const std::string& command,
                           const nlohmann::json& params, std::uint64_t seed) {
    nlohmann::json j;
    j["meta"]["command"] = command;
    j["meta"]["params"] = params;
    j["meta"]["seed"] = seed;
    j["meta"]["version"] = artifact_version;
    j["data"] = nlohmann::json::array();
    for (const auto& row : ds.rows) {
        if (row.size() != ds.columns.size())
            throw std::invalid_argument("to_json: row width does not match header");
        nlohmann::json obj;
        for (std::size_t c = 0; c < row.size(); ++c)
            obj[ds.columns[c]] = detail::field_json(row[c]);
        j["data"].push_back(std::move(obj));
    }
    return j.dump(2) + "\n";
}

}  // namespace qeraser::io
