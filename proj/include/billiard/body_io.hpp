#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "billiard/errors.hpp"
#include "billiard/geometry.hpp"

namespace billiard {

// Body specification files:
//   {"type": "ball",             "dim": n, "center": [...], "radius": r}
//   {"type": "ellipsoid",        "dim": n, "semi_axes": [...]}
//   {"type": "capsule",          "dim": n, "half_length": L, "radius": r}
//   {"type": "rounded_polytope", "dim": n, "halfspaces": [{"normal": [...], "offset": b}, ...], "radius": r}
// "center" defaults to the origin.

namespace detail {

inline Vector vector_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) throw InputError(std::string("body spec: missing array field '") + key + "'");
    const auto& arr = j.at(key);
    Vector v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) throw InputError(std::string("body spec: non-numeric entry in '") + key + "'");
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return v;
}

inline double number_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw InputError(std::string("body spec: missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

inline nlohmann::json to_array(const Vector& v) {
    auto arr = nlohmann::json::array();
    for (double x : v) arr.push_back(x);
    return arr;
}

}  // namespace detail

inline BodySpec body_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("body spec: expected a JSON object");
    if (!j.contains("type") || !j.at("type").is_string()) throw InputError("body spec: missing string field 'type'");
    if (!j.contains("dim") || !j.at("dim").is_number_integer()) throw InputError("body spec: missing integer field 'dim'");
    const auto type = j.at("type").get<std::string>();
    const int dim = j.at("dim").get<int>();
    if (dim < 2) throw InputError("body spec: 'dim' must be >= 2");

    const auto require_size = [&](const Vector& v, const char* key) {
        if (v.size() != dim) throw InputError(std::string("body spec: '") + key + "' does not match 'dim'");
    };

    if (type == "ball") {
        shape::Ball b;
        b.center = j.contains("center") ? detail::vector_field(j, "center") : Vector::Zero(dim);
        require_size(b.center, "center");
        b.radius = detail::number_field(j, "radius");
        return b;
    }
    if (type == "ellipsoid") {
        shape::Ellipsoid e;
        e.semi_axes = detail::vector_field(j, "semi_axes");
        require_size(e.semi_axes, "semi_axes");
        return e;
    }
    if (type == "capsule") {
        shape::Capsule c;
        c.dim = dim;
        c.half_length = detail::number_field(j, "half_length");
        c.radius = detail::number_field(j, "radius");
        return c;
    }
    if (type == "rounded_polytope") {
        shape::RoundedPolytope p;
        p.radius = detail::number_field(j, "radius");
        if (!j.contains("halfspaces") || !j.at("halfspaces").is_array())
            throw InputError("body spec: missing array field 'halfspaces'");
        for (const auto& h : j.at("halfspaces")) {
            shape::Halfspace hs;
            hs.normal = detail::vector_field(h, "normal");
            require_size(hs.normal, "normal");
            hs.offset = detail::number_field(h, "offset");
            p.halfspaces.push_back(std::move(hs));
        }
        return p;
    }
    throw InputError("body spec: unknown type '" + type + "'");
}

inline nlohmann::json body_spec_to_json(const BodySpec& spec) {
    nlohmann::json j;
    j["type"] = std::string(kind_name(spec));
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, shape::Ball>) {
                j["dim"] = s.center.size();
                j["center"] = detail::to_array(s.center);
                j["radius"] = s.radius;
            } else if constexpr (std::is_same_v<T, shape::Ellipsoid>) {
                j["dim"] = s.semi_axes.size();
                j["semi_axes"] = detail::to_array(s.semi_axes);
            } else if constexpr (std::is_same_v<T, shape::Capsule>) {
                j["dim"] = s.dim;
                j["half_length"] = s.half_length;
                j["radius"] = s.radius;
            } else {
                j["dim"] = s.halfspaces.empty() ? 0 : s.halfspaces.front().normal.size();
                auto hs = nlohmann::json::array();
                for (const auto& h : s.halfspaces) hs.push_back({{"normal", detail::to_array(h.normal)}, {"offset", h.offset}});
                j["halfspaces"] = hs;
                j["radius"] = s.radius;
            }
        },
        spec);
    return j;
}

inline BodySpec parse_body_spec(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("body spec: malformed JSON: ") + e.what());
    }
    return body_spec_from_json(j);
}

inline BodySpec load_body_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open body file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_body_spec(buf.str());
}

}  // namespace billiard
