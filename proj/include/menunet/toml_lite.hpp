#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace menunet {

// The TOML subset used by experiment configs, parsed into JSON: tables and
// dotted table headers, bare/quoted/dotted keys, basic and literal strings,
// integers, floats (including inf/nan), booleans, arrays and inline tables.
// Dates and multi-line strings are not supported.

class TomlError : public std::runtime_error {
 public:
  TomlError(const std::string& what, int line);
  int line() const { return line_; }

 private:
  int line_;
};

nlohmann::json parse_toml(const std::string& text);

}  // namespace menunet
