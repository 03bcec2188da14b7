#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sagda/table.hpp"

namespace sagda {

/// Schema sidecar format: {"column": {"dtype": "...", "units": "..."}}.
inline schema read_schema_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io_failure, "cannot open schema '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(errc::manifest_parse, "schema '" + path.string() + "': " + e.what());
    }
    if (!j.is_object()) fail(errc::manifest_parse, "schema root must be an object");
    schema out;
    for (auto& [name, entry] : j.items()) {
        column_schema cs;
        cs.type = dtype_from_name(entry.at("dtype").get<std::string>());
        cs.units = entry.value("units", "");
        out.emplace(name, std::move(cs));
    }
    return out;
}

inline void write_schema_json(const table& t, const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::object();
    for (const column& c : t.columns()) {
        nlohmann::json entry{{"dtype", dtype_name(c.type)}};
        if (!c.units.empty()) entry["units"] = c.units;
        j[c.name] = std::move(entry);
    }
    std::ofstream os(path);
    if (!os) fail(errc::io_failure, "cannot write schema '" + path.string() + "'");
    os << j.dump(2) << '\n';
}

}  // namespace sagda
