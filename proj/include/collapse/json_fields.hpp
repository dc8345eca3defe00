#pragma once

// Small typed accessors for hand-written JSON schemas. Failures throw
// ParseError naming the field.

#include "collapse/error.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace collapse {

inline void require_object(const nlohmann::json& node, const std::string& what) {
    if (!node.is_object()) throw ParseError("'" + what + "' must be a JSON object");
}

inline const nlohmann::json& field_node(const nlohmann::json& node, const std::string& name) {
    auto it = node.find(name);
    if (it == node.end()) throw ParseError("missing field '" + name + "'");
    return *it;
}

template <typename T>
T field(const nlohmann::json& node, const std::string& name) {
    const auto& value = field_node(node, name);
    if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) throw ParseError("field '" + name + "' must be a string");
    } else if constexpr (std::is_same_v<T, bool>) {
        if (!value.is_boolean()) throw ParseError("field '" + name + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
        if (!value.is_number_integer()) throw ParseError("field '" + name + "' must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!value.is_number()) throw ParseError("field '" + name + "' must be a number");
    }
    return value.get<T>();
}

template <typename T>
T field_or(const nlohmann::json& node, const std::string& name, T fallback) {
    if (!node.contains(name)) return fallback;
    return field<T>(node, name);
}

}  // namespace collapse
