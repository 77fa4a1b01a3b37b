#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "ceh/matrix.hpp"

namespace ceh {

// Rendering is kept byte-deterministic: object keys are emitted in sorted
// order (the default json container already sorts), and floating point
// values are always printed with 17 significant digits so values survive a
// round trip unchanged.

inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void render_json_to(const nlohmann::json& j, std::string& out) {
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            out += '{';
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(key).dump();
                out += ':';
                render_json_to(value, out);
            }
            out += '}';
            break;
        }
        case nlohmann::json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                render_json_to(j[i], out);
            }
            out += ']';
            break;
        }
        case nlohmann::json::value_t::number_float:
            out += format_double(j.get<double>());
            break;
        default:
            out += j.dump();
    }
}

inline void render_text_to(const nlohmann::json& j, std::string& out, const std::string& indent) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            out += indent + key + ":";
            if (value.is_object() || value.is_array()) {
                out += '\n';
                render_text_to(value, out, indent + "  ");
            } else {
                out += ' ';
                render_text_to(value, out, "");
                out += '\n';
            }
        }
    } else if (j.is_array()) {
        for (const auto& value : j) {
            if (value.is_object() || value.is_array()) {
                out += indent + "-\n";
                render_text_to(value, out, indent + "  ");
            } else {
                out += indent + "- ";
                render_text_to(value, out, "");
                out += '\n';
            }
        }
    } else if (j.is_number_float()) {
        out += format_double(j.get<double>());
    } else if (j.is_string()) {
        out += j.get<std::string>();
    } else {
        out += j.dump();
    }
}

}  // namespace detail

inline std::string render_report(const nlohmann::json& j, const std::string& format) {
    std::string out;
    if (format == "text") {
        detail::render_text_to(j, out, "");
    } else {
        detail::render_json_to(j, out);
        out += '\n';
    }
    return out;
}

// --- json encoding of numeric values ---

inline nlohmann::json complex_to_json(const Complex& c) {
    return nlohmann::json::array({c.real(), c.imag()});
}

inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ceh
