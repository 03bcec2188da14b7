#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sagda/date.hpp"
#include "sagda/error.hpp"
#include "sagda/stats.hpp"

namespace sagda {

/// Parser for the TOML subset the CLI configs use: [table] and [[array]]
/// headers with dotted paths, bare or quoted keys, strings (basic and
/// literal), integers, floats, booleans, ISO dates (kept as strings), nested
/// arrays that may span lines, inline tables, and # comments. Parsed values
/// land in an nlohmann::json tree, which gives downstream code one config
/// representation for both TOML input and JSON artifacts.
class toml_parser {
public:
    static nlohmann::json parse(std::string_view text, const std::string& where = "config") {
        toml_parser p{text, where};
        return p.run();
    }

private:
    toml_parser(std::string_view s, std::string where) : s_(s), where_(std::move(where)) {}

    nlohmann::json run() {
        root_ = nlohmann::json::object();
        current_ = &root_;
        for (;;) {
            skip_blank();
            if (eof()) break;
            if (peek() == '[')
                table_header();
            else
                key_value(*current_);
        }
        return std::move(root_);
    }

    [[noreturn]] void err(const std::string& msg) const {
        fail(errc::config_parse, where_ + ":" + std::to_string(line_) + ": " + msg);
    }

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    char get() {
        const char c = s_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    void skip_spaces() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment() {
        while (!eof() && peek() != '\n') ++pos_;
    }

    /// Whitespace, newlines and comments between top-level items.
    void skip_blank() {
        for (;;) {
            skip_spaces();
            if (eof()) return;
            if (peek() == '#') {
                skip_comment();
                continue;
            }
            if (peek() == '\n' || peek() == '\r') {
                get();
                continue;
            }
            return;
        }
    }

    void expect_line_end() {
        skip_spaces();
        if (eof()) return;
        if (peek() == '#') {
            skip_comment();
            return;
        }
        if (peek() == '\n' || peek() == '\r') return;
        err("unexpected trailing characters");
    }

    static bool bare_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::string parse_key() {
        skip_spaces();
        if (eof()) err("expected key");
        if (peek() == '"' || peek() == '\'') return parse_string();
        std::string k;
        while (!eof() && bare_char(peek())) k += get();
        if (k.empty()) err("expected key");
        return k;
    }

    std::string parse_string() {
        const char quote = get();
        std::string out;
        while (!eof()) {
            char c = get();
            if (c == quote) return out;
            if (c == '\n') err("newline inside string");
            if (quote == '"' && c == '\\') {
                if (eof()) err("dangling escape");
                const char e = get();
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: err(std::string("unsupported escape \\") + e);
                }
                continue;
            }
            out += c;
        }
        err("unterminated string");
    }

    void table_header() {
        get();  // '['
        const bool array_of_tables = !eof() && peek() == '[';
        if (array_of_tables) get();

        nlohmann::json* node = &root_;
        for (;;) {
            const std::string key = parse_key();
            skip_spaces();
            const bool last = eof() || peek() != '.';
            if (!last) get();  // '.'
            if (last) {
                if (array_of_tables) {
                    auto& arr = (*node)[key];
                    if (arr.is_null()) arr = nlohmann::json::array();
                    if (!arr.is_array()) err("'" + key + "' is not an array of tables");
                    arr.push_back(nlohmann::json::object());
                    node = &arr.back();
                } else {
                    auto& child = (*node)[key];
                    if (child.is_null()) child = nlohmann::json::object();
                    if (!child.is_object()) err("'" + key + "' is not a table");
                    node = &child;
                }
                break;
            }
            auto& child = (*node)[key];
            if (child.is_null()) child = nlohmann::json::object();
            if (child.is_array()) {
                if (child.empty()) err("'" + key + "' array of tables is empty");
                node = &child.back();
            } else if (child.is_object()) {
                node = &child;
            } else {
                err("'" + key + "' is not a table");
            }
        }
        skip_spaces();
        if (eof() || get() != ']') err("expected ']'");
        if (array_of_tables) {
            if (eof() || get() != ']') err("expected ']]'");
        }
        expect_line_end();
        current_ = node;
    }

    void key_value(nlohmann::json& target) {
        const std::string key = parse_key();
        skip_spaces();
        if (eof() || get() != '=') err("expected '=' after key '" + key + "'");
        skip_spaces();
        if (target.contains(key)) err("duplicate key '" + key + "'");
        target[key] = parse_value();
        expect_line_end();
    }

    nlohmann::json parse_value() {
        skip_spaces();
        if (eof()) err("expected value");
        const char c = peek();
        if (c == '"' || c == '\'') return parse_string();
        if (c == '[') return parse_array();
        if (c == '{') return parse_inline_table();
        return parse_scalar();
    }

    nlohmann::json parse_array() {
        get();  // '['
        nlohmann::json arr = nlohmann::json::array();
        for (;;) {
            skip_blank();
            if (eof()) err("unterminated array");
            if (peek() == ']') {
                get();
                return arr;
            }
            arr.push_back(parse_value());
            skip_blank();
            if (eof()) err("unterminated array");
            if (peek() == ',') {
                get();
                continue;
            }
            if (peek() == ']') {
                get();
                return arr;
            }
            err("expected ',' or ']' in array");
        }
    }

    nlohmann::json parse_inline_table() {
        get();  // '{'
        nlohmann::json obj = nlohmann::json::object();
        skip_spaces();
        if (!eof() && peek() == '}') {
            get();
            return obj;
        }
        for (;;) {
            const std::string key = parse_key();
            skip_spaces();
            if (eof() || get() != '=') err("expected '=' in inline table");
            if (obj.contains(key)) err("duplicate key '" + key + "'");
            obj[key] = parse_value();
            skip_spaces();
            if (eof()) err("unterminated inline table");
            if (peek() == ',') {
                get();
                skip_spaces();
                continue;
            }
            if (peek() == '}') {
                get();
                return obj;
            }
            err("expected ',' or '}' in inline table");
        }
    }

    nlohmann::json parse_scalar() {
        std::string tok;
        while (!eof()) {
            const char c = peek();
            if (c == ',' || c == ']' || c == '}' || c == '#' || c == '\n' || c == '\r' ||
                c == ' ' || c == '\t')
                break;
            tok += get();
        }
        if (tok == "true") return true;
        if (tok == "false") return false;
        if (try_parse_date(tok)) return tok;  // ISO dates stay strings

        {
            int64_t v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec == std::errc{} && p == tok.data() + tok.size()) return v;
        }
        {
            double v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec == std::errc{} && p == tok.data() + tok.size()) return v;
        }
        err("cannot parse value '" + tok + "'");
    }

    std::string_view s_;
    std::string where_;
    size_t pos_ = 0;
    int line_ = 1;
    nlohmann::json root_;
    nlohmann::json* current_ = nullptr;
};

inline nlohmann::json parse_toml(std::string_view text, const std::string& where = "config") {
    return toml_parser::parse(text, where);
}

inline nlohmann::json load_toml(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_toml(ss.str(), path.string());
}

/// Stable digest of a config: nlohmann::json keeps object keys sorted, so
/// dump() is canonical and the hash does not depend on key order in the file.
inline std::string config_digest(const nlohmann::json& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

}  // namespace sagda
