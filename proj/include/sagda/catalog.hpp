#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sagda/date.hpp"
#include "sagda/error.hpp"

namespace sagda {

enum class dataset_kind { weather, soil, trials, synthetic };

inline const char* dataset_kind_name(dataset_kind k) {
    switch (k) {
        case dataset_kind::weather: return "weather";
        case dataset_kind::soil: return "soil";
        case dataset_kind::trials: return "trials";
        case dataset_kind::synthetic: return "synthetic";
    }
    return "?";
}

inline dataset_kind dataset_kind_from(std::string_view s) {
    if (s == "weather") return dataset_kind::weather;
    if (s == "soil") return dataset_kind::soil;
    if (s == "trials") return dataset_kind::trials;
    if (s == "synthetic") return dataset_kind::synthetic;
    fail(errc::manifest_parse, "unknown dataset kind '" + std::string(s) + "'");
}

struct catalog_entry {
    std::string id;
    dataset_kind kind = dataset_kind::synthetic;
    std::string region;
    date start;
    date end;
    std::string path;                        // relative to the manifest directory
    std::optional<std::string> schema_path;  // ditto
    std::string provenance;                  // free text, e.g. "generated, seed=42"
};

struct date_range {
    date start;
    date end;
};

/// Local dataset registry backed by one JSON manifest per directory. Entries
/// resolve their file paths relative to the manifest's location, so a catalog
/// directory can be moved wholesale.
class catalog {
public:
    catalog() = default;

    static catalog load(const std::filesystem::path& manifest_path) {
        std::ifstream in(manifest_path);
        if (!in) fail(errc::io_failure, "cannot open manifest '" + manifest_path.string() + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            fail(errc::manifest_parse, manifest_path.string() + ": " + e.what());
        }
        catalog c;
        c.manifest_path_ = manifest_path;
        if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
            fail(errc::manifest_parse, manifest_path.string() + ": expected {\"entries\": [...]}");
        std::set<std::string> ids;
        for (const auto& e : j["entries"]) {
            catalog_entry entry;
            try {
                entry.id = e.at("id").get<std::string>();
                entry.kind = dataset_kind_from(e.at("kind").get<std::string>());
                entry.region = e.at("region").get<std::string>();
                entry.start = parse_date(e.at("time_range").at(0).get<std::string>());
                entry.end = parse_date(e.at("time_range").at(1).get<std::string>());
                entry.path = e.at("path").get<std::string>();
                if (e.contains("schema_path"))
                    entry.schema_path = e["schema_path"].get<std::string>();
                entry.provenance = e.value("provenance", "");
            } catch (const nlohmann::json::exception& ex) {
                fail(errc::manifest_parse, manifest_path.string() + ": " + ex.what());
            }
            c.validate_entry(entry);
            if (!ids.insert(entry.id).second)
                fail(errc::duplicate_id, "duplicate catalog id '" + entry.id + "'");
            c.entries_.push_back(std::move(entry));
        }
        return c;
    }

    const std::vector<catalog_entry>& entries() const { return entries_; }
    const std::filesystem::path& manifest_path() const { return manifest_path_; }

    std::filesystem::path resolve(const catalog_entry& e) const {
        return manifest_path_.parent_path() / e.path;
    }

    /// Entries matching every supplied filter; time filter is interval
    /// overlap. Results come back sorted by id.
    std::vector<catalog_entry> query(std::optional<dataset_kind> kind = std::nullopt,
                                     std::optional<std::string> region = std::nullopt,
                                     std::optional<date_range> overlaps = std::nullopt) const {
        std::vector<catalog_entry> out;
        for (const auto& e : entries_) {
            if (kind && e.kind != *kind) continue;
            if (region && e.region != *region) continue;
            if (overlaps && (e.end < overlaps->start || overlaps->end < e.start)) continue;
            out.push_back(e);
        }
        std::sort(out.begin(), out.end(),
                  [](const catalog_entry& a, const catalog_entry& b) { return a.id < b.id; });
        return out;
    }

    /// Appends a new entry and atomically rewrites the manifest
    /// (write-to-temp then rename).
    void register_output(const catalog_entry& entry) {
        validate_entry(entry);
        for (const auto& e : entries_)
            if (e.id == entry.id) fail(errc::duplicate_id, "catalog id '" + entry.id + "' in use");
        entries_.push_back(entry);
        save();
    }

    void save() const {
        if (manifest_path_.empty()) fail(errc::io_failure, "catalog has no manifest path");
        nlohmann::json j;
        j["entries"] = nlohmann::json::array();
        for (const auto& e : entries_) {
            nlohmann::json je{{"id", e.id},
                              {"kind", dataset_kind_name(e.kind)},
                              {"region", e.region},
                              {"time_range", {to_iso(e.start), to_iso(e.end)}},
                              {"path", e.path}};
            if (e.schema_path) je["schema_path"] = *e.schema_path;
            if (!e.provenance.empty()) je["provenance"] = e.provenance;
            j["entries"].push_back(std::move(je));
        }
        const auto tmp = manifest_path_.string() + ".tmp";
        {
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            if (!os) fail(errc::io_failure, "cannot write '" + tmp + "'");
            os << j.dump(2) << '\n';
            if (!os) fail(errc::io_failure, "short write to '" + tmp + "'");
        }
        std::error_code ec;
        std::filesystem::rename(tmp, manifest_path_, ec);
        if (ec) fail(errc::io_failure, "rename failed: " + ec.message());
    }

    /// Creates an empty manifest file at the given path.
    static catalog create(const std::filesystem::path& manifest_path) {
        catalog c;
        c.manifest_path_ = manifest_path;
        c.save();
        return c;
    }

private:
    void validate_entry(const catalog_entry& e) const {
        if (e.id.empty()) fail(errc::manifest_parse, "catalog entry id must be non-empty");
        if (e.end < e.start)
            fail(errc::manifest_parse, "entry '" + e.id + "': time_range start must be <= end");
        const auto full = manifest_path_.parent_path() / e.path;
        if (!std::filesystem::exists(full))
            fail(errc::dangling_path, "entry '" + e.id + "' points at missing file '" +
                                          full.string() + "'");
        if (e.schema_path) {
            const auto sp = manifest_path_.parent_path() / *e.schema_path;
            if (!std::filesystem::exists(sp))
                fail(errc::dangling_path,
                     "entry '" + e.id + "' schema missing: '" + sp.string() + "'");
        }
    }

    std::filesystem::path manifest_path_;
    std::vector<catalog_entry> entries_;
};

}  // namespace sagda
