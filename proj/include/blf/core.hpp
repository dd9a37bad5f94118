#pragma once
// Shared vocabulary for the belief-landscape pipeline: error types, stance
// labels, diagnostics and small string helpers.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blf {

/// Bad parameters or configuration. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that cannot be processed. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Stance : std::uint8_t { Believer = 0, Skeptic = 1, Unclustered = 2 };

inline std::string_view to_string(Stance s) {
  switch (s) {
    case Stance::Believer: return "believer";
    case Stance::Skeptic: return "skeptic";
    case Stance::Unclustered: return "unclustered";
  }
  return "unclustered";
}

inline std::optional<Stance> parse_stance(std::string_view s) {
  if (s == "believer" || s == "B") return Stance::Believer;
  if (s == "skeptic" || s == "S") return Stance::Skeptic;
  if (s == "unclustered") return Stance::Unclustered;
  return std::nullopt;
}

/// Cluster id used for points a density clustering leaves unassigned.
inline constexpr int kNoise = -1;

/// Accumulates non-fatal warnings so library code never writes to stderr.
struct Warnings {
  std::vector<std::string> messages;
  void add(std::string msg) { messages.push_back(std::move(msg)); }
  bool empty() const { return messages.empty(); }
  void append(const Warnings& other) {
    messages.insert(messages.end(), other.messages.begin(), other.messages.end());
  }
};

using UserStances = std::map<std::string, Stance>;

namespace text {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace text

/// Derives an independent, reproducible seed for a sub-task from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace blf
