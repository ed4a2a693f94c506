#include "menunet/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/core.h>

namespace menunet {

TomlError::TomlError(const std::string& what, int line)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '[') fail("arrays of tables are not supported");
        ++pos_;
        skip_ws();
        std::vector<std::string> path = parse_key();
        skip_ws();
        expect(']');
        table = &descend(root, path, true);
        end_of_line();
        continue;
      }
      std::vector<std::string> key = parse_key();
      skip_ws();
      expect('=');
      skip_ws();
      json value = parse_value();
      assign(*table, key, std::move(value));
      end_of_line();
    }
    return root;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::vector<const json*> defined_tables_;

  [[noreturn]] void fail(const std::string& msg) const { throw TomlError(msg, line_); }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }

  void expect(char c) {
    if (peek() != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_ws_comments_newlines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      break;
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    ++pos_;
    ++line_;
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::vector<std::string> parse_key() {
    std::vector<std::string> parts;
    while (true) {
      skip_ws();
      if (peek() == '"') {
        parts.push_back(parse_basic_string());
      } else if (peek() == '\'') {
        parts.push_back(parse_literal_string());
      } else {
        const std::size_t start = pos_;
        while (!eof() && bare_char(peek())) ++pos_;
        if (pos_ == start) fail("expected a key");
        parts.push_back(s_.substr(start, pos_ - start));
      }
      skip_ws();
      if (peek() != '.') break;
      ++pos_;
    }
    return parts;
  }

  json& descend(json& root, const std::vector<std::string>& path, bool header) {
    json* node = &root;
    for (const std::string& part : path) {
      json& child = (*node)[part];
      if (child.is_null()) child = json::object();
      if (!child.is_object()) fail(fmt::format("key '{}' is not a table", part));
      node = &child;
    }
    if (header) {
      for (const json* t : defined_tables_) {
        if (t == node) fail("table defined twice");
      }
      defined_tables_.push_back(node);
    }
    return *node;
  }

  void assign(json& table, const std::vector<std::string>& key, json value) {
    json* node = &table;
    for (std::size_t i = 0; i + 1 < key.size(); ++i) {
      json& child = (*node)[key[i]];
      if (child.is_null()) child = json::object();
      if (!child.is_object()) fail(fmt::format("key '{}' is not a table", key[i]));
      node = &child;
    }
    if (node->contains(key.back())) fail(fmt::format("duplicate key '{}'", key.back()));
    (*node)[key.back()] = std::move(value);
  }

  unsigned long parse_hex(std::size_t digits) {
    if (pos_ + digits > s_.size()) fail("truncated unicode escape");
    unsigned long cp = 0;
    const char* first = s_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, first + digits, cp, 16);
    if (ec != std::errc() || ptr != first + digits) fail("bad unicode escape");
    pos_ += digits;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("unicode escape is not a scalar value");
    return cp;
  }

  static void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  std::string parse_basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated string");
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'u': append_utf8(out, parse_hex(4)); break;
        case 'U': append_utf8(out, parse_hex(8)); break;
        default: fail(fmt::format("unsupported escape '\\{}'", e));
      }
    }
    return out;
  }

  std::string parse_literal_string() {
    expect('\'');
    const std::size_t start = pos_;
    while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
    if (peek() != '\'') fail("unterminated string");
    std::string out = s_.substr(start, pos_ - start);
    ++pos_;
    return out;
  }

  json parse_value() {
    const char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    return parse_scalar();
  }

  json parse_array() {
    expect('[');
    json arr = json::array();
    while (true) {
      skip_ws_comments_newlines();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(parse_value());
      skip_ws_comments_newlines();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }

  json parse_inline_table() {
    expect('{');
    json table = json::object();
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return table;
    }
    while (true) {
      std::vector<std::string> key = parse_key();
      skip_ws();
      expect('=');
      skip_ws();
      json value = parse_value();
      assign(table, key, std::move(value));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return table;
    }
  }

  json parse_scalar() {
    const std::size_t start = pos_;
    while (!eof() && (bare_char(peek()) || peek() == '.' || peek() == '+')) ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;

    std::string clean;
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (tok[i] == '_') {
        if (i == 0 || i + 1 == tok.size() || !std::isdigit(static_cast<unsigned char>(tok[i - 1])) ||
            !std::isdigit(static_cast<unsigned char>(tok[i + 1]))) {
          fail(fmt::format("bad number '{}'", tok));
        }
        continue;
      }
      clean += tok[i];
    }
    std::string body = clean;
    bool negative = false;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
      negative = body[0] == '-';
      body.erase(0, 1);
    }
    if (body == "inf") return negative ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();

    const bool is_float = body.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      std::int64_t v = 0;
      const char* first = clean.data() + (clean[0] == '+' ? 1 : 0);
      const auto [end, ec] = std::from_chars(first, clean.data() + clean.size(), v);
      if (ec != std::errc() || end != clean.data() + clean.size()) {
        fail(fmt::format("bad value '{}'", tok));
      }
      return v;
    }
    double v = 0.0;
    const char* first = clean.data() + (clean[0] == '+' ? 1 : 0);
    const auto [end, ec] = std::from_chars(first, clean.data() + clean.size(), v);
    if (ec != std::errc() || end != clean.data() + clean.size()) {
      fail(fmt::format("bad value '{}'", tok));
    }
    return v;
  }
};

}  // namespace

nlohmann::json parse_toml(const std::string& text) { return Parser(text).parse(); }

}  // namespace menunet
