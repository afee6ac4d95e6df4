#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace pathflow::app {

// Subset of TOML: [tables], dotted keys, strings, numbers, booleans, single-line arrays, comments.
nlohmann::ordered_json parse_toml(const std::string& text);

class toml_error : public std::runtime_error {
public:
    toml_error(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what) {}
};

}  // namespace pathflow::app
