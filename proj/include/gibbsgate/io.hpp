#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gibbsgate/grid.hpp"
#include "gibbsgate/kgibbs.hpp"
#include "gibbsgate/space.hpp"

namespace gibbsgate {

using ordered_json = nlohmann::ordered_json;

// Shortest decimal form that parses back to the same 64-bit value.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline ordered_json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string(e.what()));
    }
}

namespace detail {

inline std::vector<double> number_list(const ordered_json& arr, const char* what) {
    if (!arr.is_array()) throw std::invalid_argument(std::string(what) + ": expected an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw std::invalid_argument(std::string(what) + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline std::vector<std::string> string_list(const ordered_json& arr, const char* what) {
    if (!arr.is_array()) throw std::invalid_argument(std::string(what) + ": expected an array");
    std::vector<std::string> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_string()) throw std::invalid_argument(std::string(what) + ": expected strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

inline RealGrid number_grid(const ordered_json& arr, const char* what) {
    if (!arr.is_array() || arr.empty())
        throw std::invalid_argument(std::string(what) + ": expected a non-empty 2D array");
    const std::size_t rows = arr.size();
    std::size_t cols = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (!arr[i].is_array()) throw std::invalid_argument(std::string(what) + ": expected rows");
        if (i == 0) cols = arr[i].size();
        else if (arr[i].size() != cols) throw std::invalid_argument("shape error");
    }
    RealGrid g(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            if (!arr[i][j].is_number())
                throw std::invalid_argument(std::string(what) + ": expected numbers");
            g(i, j) = arr[i][j].get<double>();
        }
    return g;
}

} // namespace detail

inline FiniteJoint joint_from_json(const ordered_json& doc) {
    if (!doc.is_object() || !doc.contains("weights"))
        throw std::invalid_argument("missing weights");
    const RealGrid w = detail::number_grid(doc["weights"], "weights");
    std::vector<std::string> xl, yl;
    std::vector<double> mu, nu;
    if (doc.contains("x_labels")) xl = detail::string_list(doc["x_labels"], "x_labels");
    if (doc.contains("y_labels")) yl = detail::string_list(doc["y_labels"], "y_labels");
    if (doc.contains("mu")) mu = detail::number_list(doc["mu"], "mu");
    if (doc.contains("nu")) nu = detail::number_list(doc["nu"], "nu");
    return build_joint(w, xl, yl, mu, nu);
}

// Emits the raw weights, so parse -> emit -> parse reproduces the in-memory
// value bit for bit.
inline ordered_json joint_to_json(const FiniteJoint& j) {
    ordered_json doc;
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < j.x_size; ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t k = 0; k < j.y_size; ++k) row.push_back(j.weights(i, k));
        rows.push_back(std::move(row));
    }
    doc["weights"] = std::move(rows);
    doc["x_labels"] = j.x_labels;
    doc["y_labels"] = j.y_labels;
    doc["mu"] = j.mu;
    doc["nu"] = j.nu;
    return doc;
}

inline FiniteJoint load_joint(const std::string& path) {
    return joint_from_json(parse_json_file(path));
}

inline RealGrid load_observable(const std::string& path) {
    const ordered_json doc = parse_json_file(path);
    if (!doc.is_object() || !doc.contains("values"))
        throw std::invalid_argument("missing values");
    return detail::number_grid(doc["values"], "values");
}

inline std::vector<std::pair<std::string, Event>> load_events(const std::string& path) {
    const ordered_json doc = parse_json_file(path);
    if (!doc.is_object() || !doc.contains("sets") || !doc["sets"].is_array())
        throw std::invalid_argument("missing sets");
    std::vector<std::pair<std::string, Event>> out;
    for (const auto& item : doc["sets"]) {
        if (!item.is_object() || !item.contains("name") || !item["name"].is_string() ||
            !item.contains("member"))
            throw std::invalid_argument("sets: expected {name, member} objects");
        const RealGrid g = detail::number_grid(item["member"], "member");
        Event e(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = g.at_flat(i);
            if (v != 0.0 && v != 1.0)
                throw std::invalid_argument("member: expected 0/1 entries");
            e.member.at_flat(i) = v != 0.0 ? 1 : 0;
        }
        out.emplace_back(item["name"].get<std::string>(), std::move(e));
    }
    return out;
}

inline KJoint load_kjoint(const std::string& path) {
    const ordered_json doc = parse_json_file(path);
    if (!doc.is_object() || !doc.contains("shape") || !doc.contains("weights"))
        throw std::invalid_argument("missing shape or weights");
    if (!doc["shape"].is_array()) throw std::invalid_argument("shape: expected an array");
    std::vector<std::size_t> shape;
    for (const auto& v : doc["shape"]) {
        if (!v.is_number_unsigned()) throw std::invalid_argument("shape: expected positive sizes");
        shape.push_back(v.get<std::size_t>());
    }
    const std::vector<double> weights = detail::number_list(doc["weights"], "weights");
    return build_kjoint(shape, weights);
}

} // namespace gibbsgate
