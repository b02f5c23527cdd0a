#pragma once

// Run configurations are TOML documents. They are parsed with toml++ and
// converted to an ordered JSON tree (echoed verbatim into manifests); every
// key keeps the line it was defined on for validation messages.

#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>
#include <toml.hpp>

#include "degdiff/errors.hpp"

namespace degdiff {

class ParseError : public InvalidArgument {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& msg)
        : InvalidArgument(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct StructuredText {
    nlohmann::ordered_json root = nlohmann::ordered_json::object();
    std::map<std::string, std::size_t> key_lines;  // "particles.N" -> line
    std::string source;

    std::size_t line_of(const std::string& key) const {
        const auto it = key_lines.find(key);
        return it == key_lines.end() ? 0 : it->second;
    }
};

namespace detail {

inline nlohmann::ordered_json toml_to_json(const toml::node& node, const std::string& key, StructuredText& out) {
    if (const auto* table = node.as_table()) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (const auto& [k, v] : *table) {
            const std::string child = key.empty() ? std::string(k.str()) : key + "." + std::string(k.str());
            out.key_lines[child] = k.source().begin.line ? k.source().begin.line : v.source().begin.line;
            obj[std::string(k.str())] = toml_to_json(v, child, out);
        }
        return obj;
    }
    if (const auto* arr = node.as_array()) {
        nlohmann::ordered_json a = nlohmann::ordered_json::array();
        for (const auto& v : *arr) a.push_back(toml_to_json(v, key, out));
        return a;
    }
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    if (const auto* v = node.as_string()) return v->get();
    throw ParseError(out.source, node.source().begin.line,
                     "key '" + key + "': dates and times are not supported in run configurations");
}

}  // namespace detail

inline StructuredText parse_structured_text(std::string_view text, const std::string& source = "<text>") {
    StructuredText out;
    out.source = source;
    try {
        const toml::table table = toml::parse(text, std::string_view(source));
        out.root = detail::toml_to_json(table, "", out);
    } catch (const toml::parse_error& e) {
        throw ParseError(source, e.source().begin.line, std::string(e.description()));
    }
    return out;
}

inline StructuredText read_structured_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_structured_text(ss.str(), path);
}

}  // namespace degdiff
