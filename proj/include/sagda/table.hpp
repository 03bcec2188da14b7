#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sagda/date.hpp"
#include "sagda/error.hpp"
#include "sagda/stats.hpp"

namespace sagda {

enum class dtype { float64, int64, category, date };

inline const char* dtype_name(dtype t) {
    switch (t) {
        case dtype::float64: return "float64";
        case dtype::int64: return "int64";
        case dtype::category: return "category";
        case dtype::date: return "date";
    }
    return "?";
}

inline dtype dtype_from_name(std::string_view s) {
    if (s == "float64") return dtype::float64;
    if (s == "int64") return dtype::int64;
    if (s == "category") return dtype::category;
    if (s == "date") return dtype::date;
    fail(errc::manifest_parse, "unknown dtype '" + std::string(s) + "'");
}

struct column {
    std::string name;
    dtype type = dtype::float64;
    std::string units;  // empty = unit-less
    std::variant<std::vector<double>, std::vector<int64_t>, std::vector<std::string>,
                 std::vector<date>>
        data;

    size_t size() const {
        return std::visit([](const auto& v) { return v.size(); }, data);
    }
};

inline column float_column(std::string name, std::vector<double> v, std::string units = "") {
    return column{std::move(name), dtype::float64, std::move(units), std::move(v)};
}
inline column int_column(std::string name, std::vector<int64_t> v, std::string units = "") {
    return column{std::move(name), dtype::int64, std::move(units), std::move(v)};
}
inline column category_column(std::string name, std::vector<std::string> v) {
    return column{std::move(name), dtype::category, "", std::move(v)};
}
inline column date_column(std::string name, std::vector<date> v) {
    return column{std::move(name), dtype::date, "", std::move(v)};
}

/// Rectangular typed column store; the value passed between every module.
/// Immutable by convention: pipeline code builds new tables rather than
/// editing in place, which keeps sharing across threads safe.
class table {
public:
    table() = default;

    explicit table(std::vector<column> cols) : cols_(std::move(cols)) { check(); }

    size_t n_rows() const { return cols_.empty() ? 0 : cols_.front().size(); }
    size_t n_cols() const { return cols_.size(); }
    const std::vector<column>& columns() const { return cols_; }
    std::vector<column>& columns_mut() { return cols_; }

    bool has_column(std::string_view name) const {
        return std::any_of(cols_.begin(), cols_.end(),
                           [&](const column& c) { return c.name == name; });
    }

    size_t col_index(std::string_view name) const {
        for (size_t i = 0; i < cols_.size(); ++i)
            if (cols_[i].name == name) return i;
        fail(errc::unknown_column, "no column '" + std::string(name) + "'");
    }

    const column& col(std::string_view name) const { return cols_[col_index(name)]; }
    column& col_mut(std::string_view name) { return cols_[col_index(name)]; }

    const std::vector<double>& floats(std::string_view name) const {
        return typed<std::vector<double>>(name, dtype::float64);
    }
    const std::vector<int64_t>& ints(std::string_view name) const {
        return typed<std::vector<int64_t>>(name, dtype::int64);
    }
    const std::vector<std::string>& cats(std::string_view name) const {
        return typed<std::vector<std::string>>(name, dtype::category);
    }
    const std::vector<date>& dates(std::string_view name) const {
        return typed<std::vector<date>>(name, dtype::date);
    }

    /// float64 column as-is, or int64 column widened to double.
    std::vector<double> numeric(std::string_view name) const {
        const column& c = col(name);
        if (c.type == dtype::float64) return std::get<std::vector<double>>(c.data);
        if (c.type == dtype::int64) {
            const auto& v = std::get<std::vector<int64_t>>(c.data);
            return std::vector<double>(v.begin(), v.end());
        }
        fail(errc::type_mismatch, "column '" + std::string(name) + "' is not numeric");
    }

    void add_column(column c) {
        if (c.name.empty()) fail(errc::duplicate_header, "column name must be non-empty");
        if (has_column(c.name)) fail(errc::duplicate_header, "duplicate column '" + c.name + "'");
        if (!cols_.empty() && c.size() != n_rows())
            fail(errc::malformed_csv, "column '" + c.name + "' length " +
                                          std::to_string(c.size()) + " != " +
                                          std::to_string(n_rows()) + " rows");
        cols_.push_back(std::move(c));
    }

    /// Row subset in the given order; schema unchanged.
    table take(std::span<const size_t> rows) const {
        std::vector<column> out;
        out.reserve(cols_.size());
        for (const column& c : cols_) {
            column nc{c.name, c.type, c.units, {}};
            std::visit(
                [&](const auto& src) {
                    std::decay_t<decltype(src)> dst;
                    dst.reserve(rows.size());
                    for (size_t r : rows) dst.push_back(src.at(r));
                    nc.data = std::move(dst);
                },
                c.data);
            out.push_back(std::move(nc));
        }
        table t;
        t.cols_ = std::move(out);
        return t;
    }

    /// Appends other's rows; columns must match by name, dtype and order.
    void append_rows(const table& other) {
        if (other.n_cols() != n_cols())
            fail(errc::type_mismatch, "append_rows: column count mismatch");
        for (size_t i = 0; i < cols_.size(); ++i) {
            const column& src = other.cols_[i];
            column& dst = cols_[i];
            if (src.name != dst.name || src.type != dst.type)
                fail(errc::type_mismatch, "append_rows: schema mismatch at '" + dst.name + "'");
            std::visit(
                [&](auto& d) {
                    using vec = std::decay_t<decltype(d)>;
                    const auto& s = std::get<vec>(src.data);
                    d.insert(d.end(), s.begin(), s.end());
                },
                dst.data);
        }
    }

    /// Sorted unique values of a category column (its finite vocabulary).
    std::vector<std::string> category_vocabulary(std::string_view name) const {
        const auto& values = cats(name);
        std::set<std::string> uniq(values.begin(), values.end());
        return {uniq.begin(), uniq.end()};
    }

    /// Full invariant check: rectangular, unique non-empty names, valid dates.
    void check() const {
        std::set<std::string_view> seen;
        for (const column& c : cols_) {
            if (c.name.empty()) fail(errc::duplicate_header, "column name must be non-empty");
            if (!seen.insert(c.name).second)
                fail(errc::duplicate_header, "duplicate column '" + c.name + "'");
            if (c.size() != n_rows())
                fail(errc::malformed_csv, "ragged table at column '" + c.name + "'");
            if (c.type == dtype::date)
                for (const date& d : std::get<std::vector<date>>(c.data))
                    if (!valid_date(d))
                        fail(errc::type_coercion, "invalid date in column '" + c.name + "'");
        }
    }

private:
    template <class Vec>
    const Vec& typed(std::string_view name, dtype want) const {
        const column& c = col(name);
        if (c.type != want)
            fail(errc::type_mismatch, "column '" + std::string(name) + "' is " +
                                          dtype_name(c.type) + ", expected " + dtype_name(want));
        return std::get<Vec>(c.data);
    }

    std::vector<column> cols_;
};

// ---------------------------------------------------------------------------
// Row predicates
// ---------------------------------------------------------------------------

enum class cmp_op { eq, ne, lt, le, gt, ge };

/// Value a column gets compared against. quantile_ref resolves against the
/// table being filtered (e.g. "yield <= Q1 of this table").
struct quantile_ref {
    double p = 0.25;
};

struct condition {
    std::string column;
    cmp_op op = cmp_op::eq;
    std::variant<double, int64_t, std::string, date, quantile_ref> value;
};

/// Conjunction of conditions; empty predicate matches every row.
using predicate = std::vector<condition>;

namespace detail {

template <class T>
bool compare(const T& a, cmp_op op, const T& b) {
    switch (op) {
        case cmp_op::eq: return a == b;
        case cmp_op::ne: return a != b;
        case cmp_op::lt: return a < b;
        case cmp_op::le: return a <= b;
        case cmp_op::gt: return a > b;
        case cmp_op::ge: return a >= b;
    }
    return false;
}

}  // namespace detail

inline std::vector<size_t> matching_rows(const table& t, const predicate& pred) {
    struct resolved {
        const column* col;
        cmp_op op;
        double num;          // numeric comparisons
        std::string str;     // category
        date dt;             // date
        bool numeric;
    };
    std::vector<resolved> rs;
    rs.reserve(pred.size());
    for (const condition& c : pred) {
        const column& col = t.col(c.column);
        resolved r{&col, c.op, 0.0, {}, {}, false};
        if (col.type == dtype::float64 || col.type == dtype::int64) {
            r.numeric = true;
            if (std::holds_alternative<double>(c.value))
                r.num = std::get<double>(c.value);
            else if (std::holds_alternative<int64_t>(c.value))
                r.num = static_cast<double>(std::get<int64_t>(c.value));
            else if (std::holds_alternative<quantile_ref>(c.value))
                r.num = quantile(t.numeric(c.column), std::get<quantile_ref>(c.value).p);
            else
                fail(errc::type_mismatch,
                     "non-numeric comparison value for numeric column '" + c.column + "'");
        } else if (col.type == dtype::category) {
            if (!std::holds_alternative<std::string>(c.value))
                fail(errc::type_mismatch,
                     "category column '" + c.column + "' needs a string comparison value");
            r.str = std::get<std::string>(c.value);
        } else {  // date
            if (std::holds_alternative<date>(c.value))
                r.dt = std::get<date>(c.value);
            else if (std::holds_alternative<std::string>(c.value))
                r.dt = parse_date(std::get<std::string>(c.value));
            else
                fail(errc::type_mismatch,
                     "date column '" + c.column + "' needs a date comparison value");
        }
        rs.push_back(std::move(r));
    }

    std::vector<size_t> rows;
    for (size_t i = 0; i < t.n_rows(); ++i) {
        bool ok = true;
        for (const resolved& r : rs) {
            if (r.numeric) {
                const double x = r.col->type == dtype::float64
                                     ? std::get<std::vector<double>>(r.col->data)[i]
                                     : static_cast<double>(
                                           std::get<std::vector<int64_t>>(r.col->data)[i]);
                ok = detail::compare(x, r.op, r.num);
            } else if (r.col->type == dtype::category) {
                ok = detail::compare(std::get<std::vector<std::string>>(r.col->data)[i], r.op,
                                     r.str);
            } else {
                ok = detail::compare(std::get<std::vector<date>>(r.col->data)[i], r.op, r.dt);
            }
            if (!ok) break;
        }
        if (ok) rows.push_back(i);
    }
    return rows;
}

/// Row subset matching the conjunction; order preserved, schema unchanged.
inline table filter_rows(const table& t, const predicate& pred) {
    return t.take(matching_rows(t, pred));
}

// ---------------------------------------------------------------------------
// CSV I/O (RFC 4180, UTF-8, mandatory header row)
// ---------------------------------------------------------------------------

struct column_schema {
    dtype type = dtype::float64;
    std::string units;
};

using schema = std::map<std::string, column_schema>;

namespace detail {

/// Shortest round-trip float formatting. A bare integer form gets ".0"
/// appended so the reader infers float64, not int64.
inline std::string format_float(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    std::string s(buf, p);
    if (s.find_first_of(".eEn") == std::string::npos &&
        s.find("inf") == std::string::npos)
        s += ".0";
    return s;
}

inline bool needs_quoting(std::string_view s) {
    return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::ostream& os, std::string_view s) {
    if (!needs_quoting(s)) {
        os << s;
        return;
    }
    os << '"';
    for (char c : s) {
        if (c == '"') os << '"';
        os << c;
    }
    os << '"';
}

inline std::optional<int64_t> try_parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<double> try_parse_float(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Splits raw CSV text into records of fields, honoring quoted fields with
/// embedded separators, doubled quotes and newlines.
inline std::vector<std::vector<std::string>> parse_csv_records(const std::string& text,
                                                               const std::string& where) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    size_t i = 0;
    const size_t n = text.size();
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };
    while (i < n) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            field += c;
            ++i;
            continue;
        }
        if (c == '"' && !field_started && field.empty()) {
            in_quotes = true;
            field_started = true;
            ++i;
            continue;
        }
        if (c == ',') {
            end_field();
            ++i;
            continue;
        }
        if (c == '\r') {
            if (i + 1 < n && text[i + 1] == '\n') ++i;
            end_record();
            ++i;
            continue;
        }
        if (c == '\n') {
            end_record();
            ++i;
            continue;
        }
        field += c;
        field_started = true;
        ++i;
    }
    if (in_quotes) fail(errc::malformed_csv, where + ": unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

}  // namespace detail

/// Reads an RFC 4180 CSV with a mandatory header row. Without a schema,
/// dtypes are inferred per column in the order int64, float64, date,
/// category; a header-only column defaults to category. Missing (empty)
/// cells are rejected in numeric and date columns rather than smuggled in as
/// NaN, so downstream metrics stay total.
inline table read_csv(const std::filesystem::path& path,
                      const std::optional<schema>& forced = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    auto records = detail::parse_csv_records(text, path.string());
    if (records.empty()) fail(errc::malformed_csv, path.string() + ": missing header row");

    const std::vector<std::string>& header = records.front();
    {
        std::set<std::string_view> seen;
        for (const auto& h : header) {
            if (h.empty()) fail(errc::duplicate_header, path.string() + ": empty column name");
            if (!seen.insert(h).second)
                fail(errc::duplicate_header, path.string() + ": duplicate column '" + h + "'");
        }
    }

    const size_t ncols = header.size();
    const size_t nrows = records.size() - 1;
    for (size_t r = 1; r < records.size(); ++r)
        if (records[r].size() != ncols)
            fail(errc::malformed_csv, path.string() + ": row " + std::to_string(r) + " has " +
                                          std::to_string(records[r].size()) + " fields, expected " +
                                          std::to_string(ncols));

    std::vector<column> cols;
    cols.reserve(ncols);
    for (size_t c = 0; c < ncols; ++c) {
        std::vector<std::string_view> cells;
        cells.reserve(nrows);
        for (size_t r = 1; r < records.size(); ++r) cells.push_back(records[r][c]);

        dtype want;
        std::string units;
        if (forced) {
            auto it = forced->find(header[c]);
            if (it == forced->end())
                fail(errc::type_coercion,
                     path.string() + ": schema has no entry for column '" + header[c] + "'");
            want = it->second.type;
            units = it->second.units;
        } else {
            auto all = [&](auto&& pred) {
                return std::all_of(cells.begin(), cells.end(), pred);
            };
            if (nrows == 0)
                want = dtype::category;
            else if (all([](std::string_view s) { return detail::try_parse_int(s).has_value(); }))
                want = dtype::int64;
            else if (all([](std::string_view s) { return detail::try_parse_float(s).has_value(); }))
                want = dtype::float64;
            else if (all([](std::string_view s) { return try_parse_date(s).has_value(); }))
                want = dtype::date;
            else
                want = dtype::category;
        }

        auto coerce_fail = [&](size_t row, std::string_view cell) -> void {
            fail(errc::type_coercion, path.string() + ": column '" + header[c] + "' row " +
                                          std::to_string(row) + ": '" + std::string(cell) +
                                          "' is not " + dtype_name(want));
        };

        column col{header[c], want, units, {}};
        switch (want) {
            case dtype::int64: {
                std::vector<int64_t> v;
                v.reserve(nrows);
                for (size_t r = 0; r < nrows; ++r) {
                    auto x = detail::try_parse_int(cells[r]);
                    if (!x) coerce_fail(r, cells[r]);
                    v.push_back(*x);
                }
                col.data = std::move(v);
                break;
            }
            case dtype::float64: {
                std::vector<double> v;
                v.reserve(nrows);
                for (size_t r = 0; r < nrows; ++r) {
                    auto x = detail::try_parse_float(cells[r]);
                    if (!x) coerce_fail(r, cells[r]);
                    v.push_back(*x);
                }
                col.data = std::move(v);
                break;
            }
            case dtype::date: {
                std::vector<date> v;
                v.reserve(nrows);
                for (size_t r = 0; r < nrows; ++r) {
                    auto x = try_parse_date(cells[r]);
                    if (!x) coerce_fail(r, cells[r]);
                    v.push_back(*x);
                }
                col.data = std::move(v);
                break;
            }
            case dtype::category: {
                std::vector<std::string> v;
                v.reserve(nrows);
                for (size_t r = 0; r < nrows; ++r) v.emplace_back(cells[r]);
                col.data = std::move(v);
                break;
            }
        }
        cols.push_back(std::move(col));
    }
    return table(std::move(cols));
}

/// RFC 4180 output, LF line endings. Floats use shortest round-trip decimal
/// form, so read_csv(write_csv(t)) reproduces values bit-exactly.
inline void write_csv(const table& t, const std::filesystem::path& path) {
    t.check();
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(errc::io_failure, "cannot write '" + path.string() + "'");
    const auto& cols = t.columns();
    for (size_t c = 0; c < cols.size(); ++c) {
        if (c) os << ',';
        detail::write_field(os, cols[c].name);
    }
    os << '\n';
    for (size_t r = 0; r < t.n_rows(); ++r) {
        for (size_t c = 0; c < cols.size(); ++c) {
            if (c) os << ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v[r])>;
                    if constexpr (std::is_same_v<T, double>)
                        os << detail::format_float(v[r]);
                    else if constexpr (std::is_same_v<T, int64_t>)
                        os << v[r];
                    else if constexpr (std::is_same_v<T, std::string>)
                        detail::write_field(os, v[r]);
                    else
                        os << to_iso(v[r]);
                },
                cols[c].data);
        }
        os << '\n';
    }
    if (!os) fail(errc::io_failure, "short write to '" + path.string() + "'");
}

}  // namespace sagda
