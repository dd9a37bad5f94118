#pragma once
// Loaders and validators for every external input: the JSON-lines tweet
// corpus, CoNLL-U dependency parses, two-column CSV side tables (bot scores,
// gold stance labels) and the embedding exchange file.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace blf {

struct Tweet {
  std::string tweet_id;
  std::string user_id;
  std::int64_t timestamp = 0;
  std::string text;
  std::optional<std::string> retweeted_user;
  std::string lang;
};

struct TimeInterval {
  std::int64_t begin = INT64_MIN;  // inclusive
  std::int64_t end = INT64_MAX;    // exclusive
  bool contains(std::int64_t t) const { return t >= begin && t < end; }
};

struct CorpusFilter {
  std::string lang = "en";  // empty accepts every language
  std::vector<std::string> terms{"climate", "climate change", "global warming"};
  TimeInterval interval;
};

struct IngestCounts {
  std::size_t total = 0;
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t wrong_lang = 0;
  std::size_t no_term = 0;
  std::size_t out_of_interval = 0;
  std::size_t duplicate_id = 0;
  std::size_t rejected() const {
    return malformed + wrong_lang + no_term + out_of_interval + duplicate_id;
  }
};

namespace detail {

inline std::optional<Tweet> parse_tweet_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto str_field = [&](const char* key) -> std::optional<std::string> {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };
  Tweet t;
  auto id = str_field("id");
  if (!id) {
    // numeric ids are common in exported corpora
    const auto it = j.find("id");
    if (it == j.end() || !it->is_number_integer()) return std::nullopt;
    id = std::to_string(it->get<std::int64_t>());
  }
  auto user = str_field("user");
  auto text = str_field("text");
  auto lang = str_field("lang");
  const auto ts = j.find("ts");
  if (!user || !text || !lang || ts == j.end() || !ts->is_number()) return std::nullopt;
  if (id->empty() || user->empty() || text->empty()) return std::nullopt;
  t.tweet_id = std::move(*id);
  t.user_id = std::move(*user);
  t.text = std::move(*text);
  t.lang = std::move(*lang);
  t.timestamp = ts->is_number_integer() ? ts->get<std::int64_t>()
                                        : static_cast<std::int64_t>(ts->get<double>());
  if (const auto rt = j.find("rt_user"); rt != j.end() && !rt->is_null()) {
    if (!rt->is_string()) return std::nullopt;
    if (!rt->get<std::string>().empty()) t.retweeted_user = rt->get<std::string>();
  }
  return t;
}

}  // namespace detail

inline bool matches_terms(std::string_view text, const std::vector<std::string>& terms) {
  if (terms.empty()) return true;
  const auto folded = text::lower(text);
  for (const auto& term : terms)
    if (folded.find(text::lower(term)) != std::string::npos) return true;
  return false;
}

/// Streams accepted tweets to `sink` in input order.
inline IngestCounts load_corpus(std::istream& in, const CorpusFilter& filter,
                                const std::function<void(Tweet&&)>& sink) {
  IngestCounts counts;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    ++counts.total;
    auto tweet = detail::parse_tweet_record(line);
    if (!tweet) { ++counts.malformed; continue; }
    if (!filter.lang.empty() && tweet->lang != filter.lang) { ++counts.wrong_lang; continue; }
    if (!matches_terms(tweet->text, filter.terms)) { ++counts.no_term; continue; }
    if (!filter.interval.contains(tweet->timestamp)) { ++counts.out_of_interval; continue; }
    if (!seen.insert(tweet->tweet_id).second) { ++counts.duplicate_id; continue; }
    ++counts.accepted;
    sink(std::move(*tweet));
  }
  return counts;
}

struct CorpusLoad {
  std::vector<Tweet> tweets;
  IngestCounts counts;
};

inline CorpusLoad load_corpus(const std::string& path, const CorpusFilter& filter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read corpus file: " + path);
  CorpusLoad out;
  out.counts = load_corpus(in, filter, [&](Tweet&& t) { out.tweets.push_back(std::move(t)); });
  return out;
}

inline std::string to_json_line(const Tweet& t) {
  nlohmann::json j{{"id", t.tweet_id}, {"user", t.user_id}, {"ts", t.timestamp},
                   {"text", t.text}, {"lang", t.lang}};
  j["rt_user"] = t.retweeted_user ? nlohmann::json(*t.retweeted_user) : nlohmann::json(nullptr);
  return j.dump();
}

// ---------------------------------------------------------------------------
// CoNLL-U

struct DepToken {
  int index = 0;  // 1-based
  std::string form;
  std::string lemma;
  std::string upos;
  int head = 0;   // 0 = root
  std::string deprel;
  std::string feats;       // raw FEATS column, "_" when absent
  bool space_after = true;
};

struct DepSentence {
  std::string tweet_id;
  std::vector<DepToken> tokens;

  const DepToken& at(int index) const { return tokens.at(static_cast<std::size_t>(index - 1)); }
  DepToken& at(int index) { return tokens.at(static_cast<std::size_t>(index - 1)); }
  int size() const { return static_cast<int>(tokens.size()); }
};

/// Returns the name of the first violated sentence invariant, or nullopt.
inline std::optional<std::string> validate_sentence(const DepSentence& s) {
  if (s.tokens.empty()) return "empty-sentence";
  int roots = 0;
  for (int i = 0; i < s.size(); ++i) {
    const auto& t = s.tokens[static_cast<std::size_t>(i)];
    if (t.index != i + 1) return "indices-not-contiguous";
    if (t.head < 0 || t.head > s.size()) return "head-out-of-range";
    if (t.head == t.index) return "self-head";
    if (t.head == 0) ++roots;
  }
  if (roots != 1) return roots == 0 ? "no-root" : "multiple-roots";
  // every chain must reach the root within n steps
  for (const auto& t : s.tokens) {
    int cur = t.index;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > s.size()) return "cyclic-heads";
      cur = s.at(cur).head;
    }
  }
  return std::nullopt;
}

struct ParseRejection {
  std::size_t line = 0;  // first line of the offending block
  std::string rule;
};

struct ParseLoad {
  std::vector<DepSentence> sentences;
  std::vector<ParseRejection> rejected;
  std::size_t total_blocks = 0;
};

namespace detail {

inline std::optional<int> to_int(std::string_view s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

inline ParseLoad load_parses(std::istream& in) {
  ParseLoad out;
  DepSentence cur;
  std::optional<std::string> error;
  bool have_id = false;
  bool in_block = false;
  std::size_t block_line = 0;
  std::size_t line_no = 0;

  const auto flush = [&] {
    if (!in_block) return;
    ++out.total_blocks;
    if (!error && !have_id) error = "missing-tweet-id";
    if (!error) error = validate_sentence(cur);
    if (error) out.rejected.push_back({block_line, *error});
    else out.sentences.push_back(std::move(cur));
    cur = DepSentence{};
    error.reset();
    have_id = false;
    in_block = false;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) { flush(); continue; }
    if (!in_block) { in_block = true; block_line = line_no; }
    if (line[0] == '#') {
      const auto body = text::trim(std::string_view(line).substr(1));
      if (body.rfind("tweet_id", 0) == 0) {
        const auto eq = body.find('=');
        if (eq != std::string_view::npos) {
          cur.tweet_id = std::string(text::trim(body.substr(eq + 1)));
          have_id = !cur.tweet_id.empty();
        }
      }
      continue;
    }
    if (error) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 10) { error = "wrong-column-count"; continue; }
    // multiword ranges and empty nodes carry no syntactic head of their own
    if (cols[0].find_first_of("-.") != std::string::npos) continue;
    const auto idx = detail::to_int(cols[0]);
    const auto head = detail::to_int(cols[6]);
    if (!idx || !head) { error = "non-numeric-index"; continue; }
    DepToken t;
    t.index = *idx;
    t.form = cols[1];
    t.lemma = cols[2] == "_" ? cols[1] : cols[2];
    t.upos = cols[3];
    t.feats = cols[5];
    t.head = *head;
    t.deprel = cols[7];
    t.space_after = cols[9].find("SpaceAfter=No") == std::string::npos;
    cur.tokens.push_back(std::move(t));
  }
  flush();
  return out;
}

inline ParseLoad load_parses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read parse file: " + path);
  return load_parses(in);
}

inline void write_conllu(std::ostream& out, const DepSentence& s) {
  out << "# tweet_id = " << s.tweet_id << '\n';
  for (const auto& t : s.tokens) {
    out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << "\t_\t"
        << (t.feats.empty() ? "_" : t.feats) << '\t' << t.head << '\t' << t.deprel << "\t_\t"
        << (t.space_after ? "_" : "SpaceAfter=No") << '\n';
  }
  out << '\n';
}

// ---------------------------------------------------------------------------
// two-column CSV side tables

struct TwoColumnLoad {
  std::vector<std::pair<std::string, std::string>> rows;
  std::size_t total = 0;
  std::size_t malformed = 0;
};

inline TwoColumnLoad load_two_column_csv(std::istream& in) {
  TwoColumnLoad out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, ',');
    if (first && !cols.empty() && text::trim(cols[0]) == "user_id") { first = false; continue; }
    first = false;
    ++out.total;
    if (cols.size() != 2 || text::trim(cols[0]).empty()) { ++out.malformed; continue; }
    out.rows.emplace_back(std::string(text::trim(cols[0])), std::string(text::trim(cols[1])));
  }
  return out;
}

inline TwoColumnLoad load_two_column_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read CSV file: " + path);
  return load_two_column_csv(in);
}

struct BotScore {
  std::string user_id;
  double score = 0.0;
};

inline std::vector<BotScore> parse_bot_scores(const TwoColumnLoad& table, std::size_t* malformed) {
  std::vector<BotScore> out;
  for (const auto& [user, value] : table.rows) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size() || !(v >= 0.0 && v <= 1.0)) {
      if (malformed) ++*malformed;
      continue;
    }
    out.push_back({user, v});
  }
  return out;
}

inline UserStances parse_gold_labels(const TwoColumnLoad& table, std::size_t* malformed) {
  UserStances out;
  for (const auto& [user, value] : table.rows) {
    const auto s = parse_stance(value);
    if (!s || *s == Stance::Unclustered) {
      if (malformed) ++*malformed;
      continue;
    }
    out[user] = *s;
  }
  return out;
}

struct BotPartition {
  std::set<std::string> humans;
  std::set<std::string> bots;
  std::set<std::string> unscored;
  bool unscored_is_human = true;
  Warnings warnings;

  bool is_human(const std::string& user) const {
    return humans.count(user) || (unscored_is_human && unscored.count(user));
  }
};

/// Users scoring strictly above `threshold` are bots.
inline BotPartition partition_bots(const std::set<std::string>& users,
                                   const std::vector<BotScore>& scores, double threshold,
                                   bool unscored_is_human = true) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ConfigError("bot threshold must lie in [0,1]");
  BotPartition out;
  out.unscored_is_human = unscored_is_human;
  std::map<std::string, double> best;
  for (const auto& s : scores) {
    auto [it, fresh] = best.emplace(s.user_id, s.score);
    if (!fresh) {
      out.warnings.add("duplicate bot score for user " + s.user_id + "; keeping maximum");
      it->second = std::max(it->second, s.score);
    }
  }
  for (const auto& u : users) {
    const auto it = best.find(u);
    if (it == best.end()) out.unscored.insert(u);
    else if (it->second > threshold) out.bots.insert(u);
    else out.humans.insert(u);
  }
  if (!out.unscored.empty())
    out.warnings.add(std::to_string(out.unscored.size()) + " users have no bot score; treated as " +
                     (unscored_is_human ? "human" : "excluded"));
  return out;
}

// ---------------------------------------------------------------------------
// embedding exchange file

struct EmbeddingFile {
  int dim = 0;
  std::vector<std::string> ids;                 // file order
  std::vector<std::vector<double>> vectors;     // parallel to ids

  std::map<std::string, std::size_t> index() const {
    std::map<std::string, std::size_t> m;
    for (std::size_t i = 0; i < ids.size(); ++i) m.emplace(ids[i], i);
    return m;
  }
};

inline EmbeddingFile read_embeddings(std::istream& in) {
  EmbeddingFile out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("embedding file is empty (missing dim header)");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("dim=", 0) != 0) throw DataError("embedding file must start with dim=<D>");
  const auto dim = detail::to_int(std::string_view(line).substr(4));
  if (!dim || *dim < 1) throw DataError("invalid embedding dimension header: " + line);
  out.dim = *dim;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("embedding line " + std::to_string(line_no) + ": missing tab");
    std::string id = line.substr(0, tab);
    if (!seen.insert(id).second)
      throw DataError("embedding line " + std::to_string(line_no) + ": duplicate id " + id);
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(out.dim));
    const std::string_view rest = std::string_view(line).substr(tab + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto comma = rest.find(',', start);
      if (comma == std::string_view::npos) comma = rest.size();
      double x = 0.0;
      const auto tok = rest.substr(start, comma - start);
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || p != tok.data() + tok.size())
        throw DataError("embedding line " + std::to_string(line_no) + ": bad number '" +
                        std::string(tok) + "'");
      v.push_back(x);
      start = comma + 1;
    }
    if (static_cast<int>(v.size()) != out.dim)
      throw DataError("embedding line " + std::to_string(line_no) + ": expected " +
                      std::to_string(out.dim) + " values, got " + std::to_string(v.size()));
    out.ids.push_back(std::move(id));
    out.vectors.push_back(std::move(v));
  }
  return out;
}

inline EmbeddingFile read_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read embedding file: " + path);
  return read_embeddings(in);
}

inline void write_embeddings(std::ostream& out, const EmbeddingFile& e) {
  out << "dim=" << e.dim << '\n';
  for (std::size_t i = 0; i < e.ids.size(); ++i) {
    out << e.ids[i] << '\t';
    for (std::size_t k = 0; k < e.vectors[i].size(); ++k) {
      if (k) out << ',';
      out << format_double(e.vectors[i][k]);
    }
    out << '\n';
  }
}

}  // namespace blf
