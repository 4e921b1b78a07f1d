#include "compsplit/util.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace compsplit {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string Fnv1a::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  std::uint64_t v = state_;
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string fnv1a_hex(std::string_view data) {
  Fnv1a h;
  h.update(data);
  return h.hex();
}

std::string hash_file(const std::string& path) {
  return fnv1a_hex(read_text_file(path));
}

std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
  if (n == 0) throw Error("uniform_below: n must be positive");
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % n;
}

double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

Fraction Fraction::parse(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw UsageError("fraction: empty value");
  Fraction f;
  std::size_t slash = t.find('/');
  if (slash != std::string::npos) {
    try {
      f.num = std::stoll(t.substr(0, slash));
      f.den = std::stoll(t.substr(slash + 1));
    } catch (const std::exception&) {
      throw UsageError("fraction: cannot parse '" + t + "'");
    }
  } else {
    std::size_t dot = t.find('.');
    std::string digits = t;
    std::int64_t scale = 1;
    if (dot != std::string::npos) {
      digits = t.substr(0, dot) + t.substr(dot + 1);
      std::size_t places = t.size() - dot - 1;
      if (places > 15) throw UsageError("fraction: too many decimal places in '" + t + "'");
      for (std::size_t i = 0; i < places; ++i) scale *= 10;
    }
    if (digits.empty()) throw UsageError("fraction: cannot parse '" + t + "'");
    try {
      f.num = std::stoll(digits);
    } catch (const std::exception&) {
      throw UsageError("fraction: cannot parse '" + t + "'");
    }
    f.den = scale;
  }
  if (!f.proper()) throw UsageError("fraction must be in (0,1), got '" + t + "'");
  return f;
}

std::int64_t Fraction::ceil_mul(std::int64_t n) const {
  return (num * n + den - 1) / den;
}

std::string csv_escape(const std::string& field) {
  bool needs_quote = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace compsplit
