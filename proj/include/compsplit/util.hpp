#ifndef COMPSPLIT_UTIL_HPP
#define COMPSPLIT_UTIL_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace compsplit {

// Data/runtime failure (CLI exit 1).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller misuse: bad flag values, unknown preset, ... (CLI exit 2).
struct UsageError : Error {
  using Error::Error;
};

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// FNV-1a, used for manifest digests and input-content hashes.
class Fnv1a {
 public:
  void update(std::string_view data) {
    for (unsigned char c : data) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
  }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string fnv1a_hex(std::string_view data);
std::string hash_file(const std::string& path);

// Uniform integer in [0, n) via rejection sampling on mt19937_64.
// mt19937_64 output is pinned by the standard, and this avoids the
// implementation-defined behavior of std::uniform_int_distribution,
// so sequences are reproducible across toolchains.
std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n);

// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(std::mt19937_64& gen);

template <typename T>
void fisher_yates(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(gen, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Exact test-quota arithmetic. Parsed from "a/b" or a decimal literal
// (0.3333 -> 3333/10000), both exact.
struct Fraction {
  std::int64_t num = 1;
  std::int64_t den = 3;

  static Fraction parse(const std::string& text);
  // value in (0,1)?
  bool proper() const { return num > 0 && den > 0 && num < den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  // ceil(num * n / den)
  std::int64_t ceil_mul(std::int64_t n) const;
};

std::string csv_escape(const std::string& field);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace compsplit

#endif
