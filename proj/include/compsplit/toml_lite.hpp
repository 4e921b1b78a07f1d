#ifndef COMPSPLIT_TOML_LITE_HPP
#define COMPSPLIT_TOML_LITE_HPP

#include <string>

#include <json.hpp>

namespace compsplit {

// Minimal TOML reader covering the subset used by synth config files:
// comments, bare/quoted keys, [table] and [[array-of-tables]] headers,
// dotted header paths, strings, integers, floats, booleans, single-line
// arrays, and inline tables. Parsed into the same JSON shape the .json
// config loader consumes. Throws Error with a line number on anything
// outside the subset.
nlohmann::json parse_toml_lite(const std::string& text);

}  // namespace compsplit

#endif
