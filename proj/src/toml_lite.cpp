#include "compsplit/toml_lite.hpp"

#include <cctype>
#include <vector>

#include "compsplit/util.hpp"

namespace compsplit {

namespace {

using nlohmann::json;

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("toml line " + std::to_string(line) + ": " + msg);
  }
  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
  void skip_ws_comment_to_eol() {
    skip_ws();
    if (!done() && peek() == '#') {
      while (!done() && peek() != '\n') ++pos;
    }
    if (!done()) {
      if (peek() != '\n' && peek() != '\r') fail("unexpected trailing characters");
      while (!done() && (peek() == '\n' || peek() == '\r')) take();
    }
  }
};

std::string parse_basic_string(Cursor& c) {
  if (c.take() != '"') c.fail("expected '\"'");
  std::string out;
  while (!c.done()) {
    char ch = c.take();
    if (ch == '"') return out;
    if (ch == '\n') c.fail("unterminated string");
    if (ch == '\\') {
      if (c.done()) c.fail("unterminated escape");
      char esc = c.take();
      switch (esc) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default: c.fail(std::string("unsupported escape '\\") + esc + "'");
      }
    } else {
      out += ch;
    }
  }
  c.fail("unterminated string");
}

std::string parse_key(Cursor& c) {
  c.skip_ws();
  if (c.done()) c.fail("expected key");
  if (c.peek() == '"') return parse_basic_string(c);
  std::string out;
  while (!c.done()) {
    char ch = c.peek();
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') {
      out += c.take();
    } else {
      break;
    }
  }
  if (out.empty()) c.fail("expected key");
  return out;
}

json parse_value(Cursor& c);

json parse_array(Cursor& c) {
  if (c.take() != '[') c.fail("expected '['");
  json arr = json::array();
  c.skip_ws();
  if (!c.done() && c.peek() == ']') {
    c.take();
    return arr;
  }
  for (;;) {
    c.skip_ws();
    arr.push_back(parse_value(c));
    c.skip_ws();
    if (c.done()) c.fail("unterminated array");
    char ch = c.take();
    if (ch == ']') return arr;
    if (ch != ',') c.fail("expected ',' or ']' in array");
  }
}

json parse_inline_table(Cursor& c) {
  if (c.take() != '{') c.fail("expected '{'");
  json obj = json::object();
  c.skip_ws();
  if (!c.done() && c.peek() == '}') {
    c.take();
    return obj;
  }
  for (;;) {
    std::string key = parse_key(c);
    c.skip_ws();
    if (c.done() || c.take() != '=') c.fail("expected '=' in inline table");
    c.skip_ws();
    obj[key] = parse_value(c);
    c.skip_ws();
    if (c.done()) c.fail("unterminated inline table");
    char ch = c.take();
    if (ch == '}') return obj;
    if (ch != ',') c.fail("expected ',' or '}' in inline table");
  }
}

json parse_scalar(Cursor& c) {
  std::string tok;
  while (!c.done()) {
    char ch = c.peek();
    if (ch == ',' || ch == ']' || ch == '}' || ch == '#' || ch == '\n' || ch == '\r' ||
        ch == ' ' || ch == '\t') {
      break;
    }
    tok += c.take();
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (tok.empty()) c.fail("expected value");
  bool is_float = tok.find('.') != std::string::npos || tok.find('e') != std::string::npos ||
                  tok.find('E') != std::string::npos;
  try {
    std::size_t used = 0;
    if (is_float) {
      double v = std::stod(tok, &used);
      if (used != tok.size()) c.fail("bad number '" + tok + "'");
      return v;
    }
    std::int64_t v = std::stoll(tok, &used);
    if (used != tok.size()) c.fail("bad number '" + tok + "'");
    return v;
  } catch (const std::exception&) {
    c.fail("bad value '" + tok + "'");
  }
}

json parse_value(Cursor& c) {
  if (c.done()) c.fail("expected value");
  char ch = c.peek();
  if (ch == '"') return parse_basic_string(c);
  if (ch == '[') return parse_array(c);
  if (ch == '{') return parse_inline_table(c);
  return parse_scalar(c);
}

std::vector<std::string> parse_header_path(Cursor& c) {
  std::vector<std::string> path;
  for (;;) {
    path.push_back(parse_key(c));
    c.skip_ws();
    if (c.done()) c.fail("unterminated table header");
    if (c.peek() == '.') {
      c.take();
      continue;
    }
    return path;
  }
}

json* descend(json& root, const std::vector<std::string>& path) {
  json* node = &root;
  for (const std::string& part : path) {
    node = &(*node)[part];
    if (node->is_array()) {
      if (node->empty()) node->push_back(json::object());
      node = &node->back();
    }
  }
  return node;
}

}  // namespace

json parse_toml_lite(const std::string& text) {
  json root = json::object();
  Cursor c{text};
  json* current = &root;

  while (!c.done()) {
    c.skip_ws();
    if (c.done()) break;
    char ch = c.peek();
    if (ch == '\n' || ch == '\r') {
      c.take();
      continue;
    }
    if (ch == '#') {
      while (!c.done() && c.peek() != '\n') c.take();
      continue;
    }
    if (ch == '[') {
      c.take();
      bool array_of_tables = !c.done() && c.peek() == '[';
      if (array_of_tables) c.take();
      std::vector<std::string> path = parse_header_path(c);
      if (c.done() || c.take() != ']') c.fail("expected ']'");
      if (array_of_tables && (c.done() || c.take() != ']')) c.fail("expected ']]'");

      json* parent = &root;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        parent = descend(*parent, {path[i]});
      }
      json& slot = (*parent)[path.back()];
      if (array_of_tables) {
        if (!slot.is_array()) slot = json::array();
        slot.push_back(json::object());
        current = &slot.back();
      } else {
        if (!slot.is_object()) slot = json::object();
        current = &slot;
      }
      c.skip_ws_comment_to_eol();
      continue;
    }
    std::string key = parse_key(c);
    c.skip_ws();
    if (c.done() || c.take() != '=') c.fail("expected '=' after key '" + key + "'");
    c.skip_ws();
    (*current)[key] = parse_value(c);
    c.skip_ws_comment_to_eol();
  }
  return root;
}

}  // namespace compsplit
