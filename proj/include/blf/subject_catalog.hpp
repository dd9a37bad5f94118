#pragma once
// Subject normalization, surface-variant merging, per-stance ranking and
// focal-set selection.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "svo.hpp"

namespace blf {

inline constexpr std::string_view kDeicticSubject = "<DEICTIC>";
inline constexpr std::string_view kEmptySubject = "<EMPTY>";

namespace catalog_detail {

inline bool is_article(std::string_view w) { return w == "the" || w == "a" || w == "an"; }

inline bool is_deictic(std::string_view w) {
  static const std::set<std::string, std::less<>> words{"he",   "she", "it",  "this",
                                                         "that", "they", "you", "i"};
  return words.count(w) > 0;
}

inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

inline std::string strip_outer_punct(std::string s) {
  const auto is_p = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_p(s.front())) s.erase(s.begin());
  while (!s.empty() && is_p(s.back())) s.pop_back();
  return s;
}

}  // namespace catalog_detail

/// Case-folds, strips outer punctuation and leading articles, collapses
/// whitespace, and maps deictic pronouns (all but "we") to a sentinel.
/// Idempotent.
inline std::string normalize_subject(std::string_view raw) {
  using namespace catalog_detail;
  if (raw == kDeicticSubject || raw == kEmptySubject) return std::string(raw);
  std::string cur = text::lower(raw);
  while (true) {
    std::string next = strip_outer_punct(text::join(words(cur), " "));
    auto ws = words(next);
    std::size_t skip = 0;
    while (skip < ws.size() && is_article(ws[skip])) ++skip;
    if (skip) {
      ws.erase(ws.begin(), ws.begin() + static_cast<std::ptrdiff_t>(skip));
      next = text::join(ws, " ");
    }
    if (next == cur) break;
    cur = std::move(next);
  }
  if (cur.empty()) return std::string(kEmptySubject);
  if (is_deictic(cur)) return std::string(kDeicticSubject);
  return cur;
}

/// Merge key for a normalized subject: short phrases (up to three words)
/// drop their spaces so "climate change" and "climatechange" coincide.
inline std::string merge_key(std::string_view normalized) {
  const auto ws = catalog_detail::words(normalized);
  if (ws.size() > 3) return text::join(ws, " ");
  std::string out;
  for (const auto& w : ws) out += w;
  return out;
}

/// Config-supplied alias table: normalized variant -> preferred form.
using AliasTable = std::map<std::string, std::string>;

/// Full subject key: normalization, alias lookup, merge key. Sentinel
/// subjects (deictic, empty) have no key and are excluded from the catalog.
inline std::optional<std::string> subject_key(std::string_view raw, const AliasTable& aliases) {
  auto norm = normalize_subject(raw);
  if (norm == kDeicticSubject || norm == kEmptySubject) return std::nullopt;
  for (const auto& probe : {norm, merge_key(norm)}) {
    if (const auto it = aliases.find(probe); it != aliases.end()) {
      norm = normalize_subject(it->second);
      break;
    }
  }
  return merge_key(norm);
}

struct SubjectEntry {
  std::string key;        // merge key
  std::string canonical;  // most frequent normalized variant
  std::set<std::string> variants;
  long count_believer = 0;
  long count_skeptic = 0;
  int rank_believer = 0;
  int rank_skeptic = 0;
  double mean_rank = 0.0;

  long total() const { return count_believer + count_skeptic; }
};

struct CatalogBuild {
  std::vector<SubjectEntry> entries;  // unranked, sorted by key
  std::size_t excluded_sentinel = 0;  // deictic / empty subjects
  std::size_t excluded_unclustered = 0;
};

inline CatalogBuild build_catalog(const std::vector<BeliefStatement>& statements,
                                  const UserStances& stances, const AliasTable& aliases = {}) {
  CatalogBuild out;
  std::map<std::string, SubjectEntry> by_key;
  std::map<std::string, std::map<std::string, long>> norm_counts;
  for (const auto& s : statements) {
    const auto key = subject_key(s.subject, aliases);
    if (!key) { ++out.excluded_sentinel; continue; }
    const auto st = stances.find(s.user_id);
    if (st == stances.end() || st->second == Stance::Unclustered) {
      ++out.excluded_unclustered;
      continue;
    }
    auto& e = by_key[*key];
    e.key = *key;
    e.variants.insert(s.subject);
    (st->second == Stance::Believer ? e.count_believer : e.count_skeptic) += 1;
    ++norm_counts[*key][normalize_subject(s.subject)];
  }
  for (auto& [key, e] : by_key) {
    const auto& nc = norm_counts[key];
    // ties fall to the lexicographically smallest variant (map order)
    e.canonical = std::max_element(nc.begin(), nc.end(), [](const auto& a, const auto& b) {
                    return a.second < b.second;
                  })->first;
    out.entries.push_back(std::move(e));
  }
  return out;
}

/// Ranks subjects within each stance (descending count, lexicographic
/// ties), averages the two ranks and sorts ascending by mean rank. A subject
/// unused by a stance gets rank = (number of subjects that stance uses) + 1.
inline std::vector<SubjectEntry> rank_subjects(std::vector<SubjectEntry> entries) {
  const auto rank_by = [&](long SubjectEntry::*count, int SubjectEntry::*rank) {
    std::vector<SubjectEntry*> used;
    for (auto& e : entries)
      if (e.*count > 0) used.push_back(&e);
    std::sort(used.begin(), used.end(), [&](const SubjectEntry* a, const SubjectEntry* b) {
      if (a->*count != b->*count) return a->*count > b->*count;
      return a->canonical < b->canonical;
    });
    for (std::size_t i = 0; i < used.size(); ++i) used[i]->*rank = static_cast<int>(i) + 1;
    const int missing = static_cast<int>(used.size()) + 1;
    for (auto& e : entries)
      if (e.*count <= 0) e.*rank = missing;
  };
  rank_by(&SubjectEntry::count_believer, &SubjectEntry::rank_believer);
  rank_by(&SubjectEntry::count_skeptic, &SubjectEntry::rank_skeptic);
  for (auto& e : entries) e.mean_rank = (e.rank_believer + e.rank_skeptic) / 2.0;
  std::sort(entries.begin(), entries.end(), [](const SubjectEntry& a, const SubjectEntry& b) {
    if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
    return a.canonical < b.canonical;
  });
  return entries;
}

struct FocalSet {
  std::vector<BeliefStatement> statements;
  std::size_t coverage = 0;
  double coverage_fraction = 0.0;
  std::vector<std::string> subjects;  // keys of the selected subjects, rank order
  Warnings warnings;
};

inline FocalSet focal_set(const std::vector<BeliefStatement>& statements,
                          const std::vector<SubjectEntry>& ranked, std::size_t top_k = 100,
                          const AliasTable& aliases = {}) {
  if (top_k < 1) throw ConfigError("focal_set: top_k must be >= 1");
  FocalSet out;
  if (ranked.size() < top_k)
    out.warnings.add("catalog has " + std::to_string(ranked.size()) + " subjects, fewer than top_k=" +
                     std::to_string(top_k) + "; using all");
  std::set<std::string> keep;
  for (std::size_t i = 0; i < std::min(top_k, ranked.size()); ++i) {
    keep.insert(ranked[i].key);
    out.subjects.push_back(ranked[i].key);
  }
  for (const auto& s : statements) {
    const auto key = subject_key(s.subject, aliases);
    if (key && keep.count(*key)) out.statements.push_back(s);
  }
  out.coverage = out.statements.size();
  out.coverage_fraction =
      statements.empty() ? 0.0 : static_cast<double>(out.coverage) / statements.size();
  return out;
}

/// Count-vs-rank table over total subject frequency, for inspecting the
/// shape of the subject distribution.
inline std::vector<std::pair<int, long>> frequency_by_rank(const std::vector<SubjectEntry>& entries) {
  std::vector<long> totals;
  for (const auto& e : entries) totals.push_back(e.total());
  std::sort(totals.rbegin(), totals.rend());
  std::vector<std::pair<int, long>> out;
  for (std::size_t i = 0; i < totals.size(); ++i) out.emplace_back(static_cast<int>(i) + 1, totals[i]);
  return out;
}

}  // namespace blf
