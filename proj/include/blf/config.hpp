#pragma once
// Run configuration: a key = value file with [section] headers. Keys are
// addressed as "section.key". A [fixtures] section holds full keys that
// override the rest when the fixtures profile is active.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace blf {

class Config {
 public:
  /// Every recognised key with its default. Empty string = unset.
  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"input.tweets", ""},
        {"input.parses", ""},
        {"input.bot_scores", ""},
        {"input.gold_labels", ""},
        {"input.embeddings", ""},
        {"input.user_clusters", ""},
        {"input.statement_coordinates", ""},
        {"input.landscape_coordinates", ""},
        {"input.aliases", ""},
        {"input.believer_seeds", ""},
        {"input.skeptic_seeds", ""},
        {"ingest.lang", "en"},
        {"ingest.terms", "climate,climate change,global warming"},
        {"ingest.begin", ""},
        {"ingest.end", ""},
        {"bots.threshold", "0.5"},
        {"bots.unscored_is_human", "true"},
        {"stance.min_tweets", "100"},
        {"stance.min_retweets", "1"},
        {"stance.binary", "false"},
        {"stance.min_samples", "5"},
        {"stance.min_cluster_size", "10"},
        {"stance.eps", "0"},
        {"stance.eps_fraction", "0.15"},
        {"stance.naming", "seeds"},
        {"catalog.top_k", "100"},
        {"pairs.strategy", "random"},
        {"pairs.cutoff", "0"},
        {"pairs.homogeneous_per_stance", "500000"},
        {"pairs.heterogeneous", "1500000"},
        {"pairs.similarity", "invert"},
        {"pairs.knn_k", "10"},
        {"pairs.purity_cutoff", "0.9"},
        {"pairs.fraction", "0.001"},
        {"cluster.min_samples", "100"},
        {"cluster.min_cluster_size", "200"},
        {"cluster.eps", "0"},
        {"cluster.eps_fraction", "0.05"},
        {"cluster.neighbors", "20"},
        {"cluster.min_dist", "0.1"},
        {"trajectories.window_days", "7"},
        {"trajectories.min_history_days", "7"},
        {"trajectories.halflives", "1,2,3,4,5,6"},
        {"trajectories.origin", ""},
        {"landscape.train_fraction", "0.3"},
        {"landscape.n_grid", "100"},
        {"landscape.margin", "1"},
        {"landscape.neighbors", "500"},
        {"landscape.min_dist", "0.3"},
        {"evaluate.magnitude_cutoff", "0.2"},
        {"evaluate.min_periods", "10"},
        {"evaluate.fixed_k", "20"},
        {"evaluate.k_neighbors", "20"},
        {"evaluate.include_gaps", "true"},
        {"render.sample_fraction", "0.001"},
        {"render.width", "800"},
        {"render.height", "800"},
        {"render.levels", "8"},
        {"run.seed", "1"},
    };
    return d;
  }

  Config() : values_(defaults()) {}

  static Config parse(std::istream& in, const std::string& profile = "", const std::string& origin = "config") {
    Config c;
    std::map<std::string, std::string> fixtures;
    std::string section, line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
      auto body = std::string(text::trim(line));
      if (body.empty() || body[0] == '#' || body[0] == ';') continue;
      if (body.front() == '[') {
        if (body.back() != ']') throw ConfigError(where() + "unterminated section header");
        section = std::string(text::trim(std::string_view(body).substr(1, body.size() - 2)));
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ConfigError(where() + "expected key = value");
      const auto key = std::string(text::trim(std::string_view(body).substr(0, eq)));
      const auto value = std::string(text::trim(std::string_view(body).substr(eq + 1)));
      if (section == "fixtures") {
        if (!defaults().count(key)) throw ConfigError(where() + "unknown key '" + key + "' in [fixtures]");
        fixtures[key] = value;
        continue;
      }
      const auto full = section.empty() ? key : section + "." + key;
      if (!defaults().count(full)) throw ConfigError(where() + "unknown key '" + full + "'");
      c.values_[full] = value;
    }
    if (profile == "fixtures") {
      for (const auto& [k, v] : fixture_defaults()) c.values_[k] = v;
      for (const auto& [k, v] : fixtures) c.values_[k] = v;
    } else if (!profile.empty()) {
      throw ConfigError("unknown profile '" + profile + "'");
    }
    return c;
  }

  static Config load(const std::filesystem::path& path, const std::string& profile = "") {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    auto c = parse(in, profile, path.string());
    c.base_dir_ = path.parent_path();
    return c;
  }

  /// Scale-sensitive defaults for small fixtures, applied before the file's
  /// own [fixtures] section.
  static const std::map<std::string, std::string>& fixture_defaults() {
    static const std::map<std::string, std::string> d = {
        {"stance.min_tweets", "5"},
        {"cluster.min_samples", "5"},
        {"cluster.min_cluster_size", "10"},
        {"evaluate.min_periods", "3"},
        {"render.sample_fraction", "1"},
    };
    return d;
  }

  void set(const std::string& key, const std::string& value) {
    if (!defaults().count(key)) throw ConfigError("unknown key '" + key + "'");
    values_[key] = value;
  }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
    return it->second;
  }

  bool has(const std::string& key) const { return !str(key).empty(); }

  /// Input paths resolve relative to the config file's directory.
  std::string path(const std::string& key) const {
    const auto& v = str(key);
    if (v.empty()) return v;
    const std::filesystem::path p(v);
    return p.is_absolute() || base_dir_.empty() ? v : (base_dir_ / p).string();
  }

  std::string require_path(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required setting '" + key + "'");
    return path(key);
  }

  double real(const std::string& key) const {
    const auto& v = str(key);
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
  }

  long integer(const std::string& key) const {
    const auto& v = str(key);
    long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
      throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
  }

  bool boolean(const std::string& key) const {
    const auto v = text::lower(str(key));
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + str(key) + "'");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& part : text::split(str(key), ',')) {
      const auto t = std::string(text::trim(part));
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : list(key)) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": bad number '" + s + "'");
      out.push_back(v);
    }
    return out;
  }

  /// Canonical text of every setting, the input of the config hash.
  std::string canonical() const {
    std::ostringstream s;
    for (const auto& [k, v] : values_) s << k << '=' << v << '\n';
    return s.str();
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

}  // namespace blf
