#pragma once
// Pattern matching over Universal Dependencies trees to pull declarative
// subject-verb-object belief statements out of tweets. spaCy-style labels
// (dobj, attr, acomp, neg, nsubjpass) are accepted alongside UD v2 labels.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "corpus.hpp"

namespace blf {

struct BeliefStatement {
  std::string statement_id;
  std::string tweet_id;
  std::string user_id;
  std::int64_t timestamp = 0;
  std::string subject;
  std::string verb;
  std::string object;
  bool negated = false;
  bool attribute = false;
  // token indices (1-based) of the input sentence each span was read from
  std::vector<int> subject_tokens;
  int verb_token = 0;
  std::vector<int> object_tokens;
};

enum class ExtractFailure { NoSubject, NoObject, Interrogative, Fragment };

inline std::string_view to_string(ExtractFailure f) {
  switch (f) {
    case ExtractFailure::NoSubject: return "no-subject";
    case ExtractFailure::NoObject: return "no-object";
    case ExtractFailure::Interrogative: return "interrogative";
    case ExtractFailure::Fragment: return "fragment";
  }
  return "fragment";
}

struct ExtractDiagnostics {
  std::map<std::string, std::size_t> counts;  // category -> clauses
  void add(ExtractFailure f) { ++counts[std::string(to_string(f))]; }
  void merge(const ExtractDiagnostics& o) {
    for (const auto& [k, v] : o.counts) counts[k] += v;
  }
};

namespace svo_detail {

inline bool rel_is(std::string_view deprel, std::string_view base) {
  return deprel == base || (deprel.size() > base.size() && deprel.substr(0, base.size()) == base &&
                            deprel[base.size()] == ':');
}

inline bool is_punct(const DepToken& t) { return t.upos == "PUNCT" || t.deprel == "punct"; }

inline bool is_subject_rel(std::string_view r) {
  return rel_is(r, "nsubj") || rel_is(r, "csubj") || r == "nsubjpass" || r == "csubjpass";
}

inline bool is_negation(const DepToken& t) {
  if (t.deprel == "neg" || t.deprel == "advmod:neg") return true;
  if (!rel_is(t.deprel, "advmod") && !rel_is(t.deprel, "aux")) return false;
  const auto l = text::lower(t.lemma);
  const auto f = text::lower(t.form);
  return l == "not" || l == "never" || l == "n't" || f == "not" || f == "n't" || f == "never";
}

class Tree {
 public:
  explicit Tree(const DepSentence& s) : s_(s), children_(static_cast<std::size_t>(s.size()) + 1) {
    for (const auto& t : s.tokens) children_[static_cast<std::size_t>(t.head)].push_back(t.index);
  }

  const DepToken& tok(int i) const { return s_.at(i); }
  const std::vector<int>& children(int i) const { return children_[static_cast<std::size_t>(i)]; }
  int root() const { return children_[0].front(); }

  std::optional<int> child(int i, std::string_view base) const {
    for (int c : children(i))
      if (rel_is(tok(c).deprel, base)) return c;
    return std::nullopt;
  }

  template <class Pred>
  std::optional<int> child_if(int i, Pred p) const {
    for (int c : children(i))
      if (p(tok(c))) return c;
    return std::nullopt;
  }

  /// Subtree of `i` in index order, skipping any child subtree for which
  /// `prune(child)` holds (applied recursively below `i`).
  template <class Prune>
  std::vector<int> subtree(int i, Prune prune) const {
    std::vector<int> out;
    collect(i, prune, out);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<int> subtree(int i) const {
    return subtree(i, [](int) { return false; });
  }

  std::string render(const std::vector<int>& idx) const {
    std::string out;
    bool pending_space = false;
    for (int i : idx) {
      const auto& t = tok(i);
      if (is_punct(t)) continue;
      std::string_view form = t.form;
      if (!form.empty() && form[0] == '@' && form.size() > 1) form.remove_prefix(1);
      if (form.empty()) continue;
      if (pending_space && !out.empty()) out += ' ';
      out += form;
      pending_space = t.space_after;
    }
    return out;
  }

 private:
  template <class Prune>
  void collect(int i, Prune& prune, std::vector<int>& out) const {
    out.push_back(i);
    for (int c : children(i))
      if (!prune(c)) collect(c, prune, out);
  }

  const DepSentence& s_;
  std::vector<std::vector<int>> children_;
};

}  // namespace svo_detail

struct ExtractResult {
  std::vector<BeliefStatement> statements;
  ExtractDiagnostics diagnostics;
};

/// Extracts zero or more SVO statements from one parsed sentence.
/// `sentence_index` distinguishes sentences of the same tweet in statement ids.
inline ExtractResult extract_svo(const DepSentence& sentence, const Tweet& tweet,
                                 int sentence_index = 0) {
  using namespace svo_detail;
  ExtractResult out;
  const Tree tree(sentence);
  const int n = sentence.size();

  const auto has_cop = [&](int h) {
    return tree.child_if(h, [](const DepToken& t) { return t.deprel == "cop"; }).has_value();
  };
  const auto subject_of = [&](int h) {
    return tree.child_if(h, [](const DepToken& t) { return is_subject_rel(t.deprel); });
  };

  // clause heads: the root, verbal or copular conjuncts, and complement /
  // paratactic clauses. Relative and adverbial clauses are not beliefs.
  std::vector<bool> is_clause(static_cast<std::size_t>(n) + 1, false);
  std::vector<int> clause_parent(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> order;
  const auto mark = [&](auto&& self, int h, int parent) -> void {
    is_clause[static_cast<std::size_t>(h)] = true;
    clause_parent[static_cast<std::size_t>(h)] = parent;
    order.push_back(h);
    for (int c : tree.children(h)) {
      const auto& t = tree.tok(c);
      const bool verbal = t.upos == "VERB" || t.upos == "AUX" || has_cop(c) || subject_of(c);
      if ((rel_is(t.deprel, "conj") && verbal) || rel_is(t.deprel, "ccomp") ||
          rel_is(t.deprel, "parataxis"))
        self(self, c, h);
    }
  };
  mark(mark, tree.root(), 0);  // pre-order: parents before their clauses

  // a question mark closes the clause holding the token right before it
  std::set<int> question_marked;
  for (const auto& t : sentence.tokens) {
    if (t.form.find('?') == std::string::npos || t.index == 1) continue;
    int cur = t.index - 1;
    while (cur > 1 && is_punct(tree.tok(cur))) --cur;
    while (cur != 0 && !is_clause[static_cast<std::size_t>(cur)]) cur = tree.tok(cur).head;
    if (cur != 0) question_marked.insert(cur);
  }

  // interrogative: a closing '?' or an auxiliary / copula ahead of the
  // nominal subject; propagates into complement clauses
  std::map<int, bool> interrogative;
  const auto own_question = [&](int h, std::optional<int> subj) {
    if (question_marked.count(h)) return true;
    if (!subj) return false;
    for (int c : tree.children(h)) {
      const auto& t = tree.tok(c);
      if ((rel_is(t.deprel, "aux") || t.deprel == "cop") && c < *subj && !is_negation(t)) return true;
    }
    // spaCy-style copular root: the auxiliary itself heads the clause
    if ((tree.tok(h).upos == "AUX") && h < *subj) return true;
    return false;
  };

  struct Clause {
    int head = 0;
    std::optional<BeliefStatement> stmt;
    std::optional<ExtractFailure> failure;
  };
  std::map<int, Clause> clauses;

  for (int h : order) {
    Clause cl;
    cl.head = h;
    const auto& ht = tree.tok(h);
    auto subj = subject_of(h);
    const int parent = clause_parent[static_cast<std::size_t>(h)];
    if (!subj && parent != 0 && rel_is(ht.deprel, "conj")) subj = subject_of(parent);

    bool q = own_question(h, subject_of(h));
    if (parent != 0 && !rel_is(ht.deprel, "conj") && interrogative[parent]) q = true;
    interrogative[h] = q;
    if (q) {
      cl.failure = ExtractFailure::Interrogative;
      clauses[h] = std::move(cl);
      continue;
    }

    const bool copular = has_cop(h);
    const bool predicate_ok = copular || ht.upos == "VERB" || ht.upos == "AUX";
    if (!predicate_ok) {
      cl.failure = ExtractFailure::Fragment;
      clauses[h] = std::move(cl);
      continue;
    }
    if (!subj) {
      cl.failure = ExtractFailure::NoSubject;
      clauses[h] = std::move(cl);
      continue;
    }

    BeliefStatement st;
    st.subject_tokens = tree.subtree(*subj);
    st.subject = tree.render(st.subject_tokens);
    int negations = 0;
    for (int c : tree.children(h))
      if (is_negation(tree.tok(c))) ++negations;
    st.negated = negations % 2 == 1;

    if (copular) {
      const int cop = *tree.child_if(h, [](const DepToken& t) { return t.deprel == "cop"; });
      st.verb = text::lower(tree.tok(cop).lemma);
      st.verb_token = cop;
      st.attribute = true;
      st.object_tokens = tree.subtree(h, [&](int c) {
        const auto& t = tree.tok(c);
        if (is_clause[static_cast<std::size_t>(c)] || is_punct(t)) return true;
        if (t.head != h) return false;
        return is_subject_rel(t.deprel) || t.deprel == "cop" || rel_is(t.deprel, "aux") ||
               is_negation(t) || rel_is(t.deprel, "mark") || rel_is(t.deprel, "advcl") ||
               t.deprel == "discourse" || t.deprel == "vocative" || t.deprel == "expl";
      });
    } else {
      st.verb = text::lower(ht.lemma);
      st.verb_token = h;
      auto obj = tree.child_if(h, [](const DepToken& t) {
        return rel_is(t.deprel, "obj") || t.deprel == "dobj" || t.deprel == "attr" ||
               t.deprel == "acomp" || t.deprel == "oprd";
      });
      if (obj) {
        const auto& rel = tree.tok(*obj).deprel;
        st.attribute = rel == "attr" || rel == "acomp" || rel == "oprd";
        st.object_tokens = tree.subtree(*obj);
      } else if (auto x = tree.child(h, "xcomp")) {
        // "we need to cut emissions": the open complement is the object
        st.object_tokens = tree.subtree(*x, [&](int c) {
          const auto& t = tree.tok(c);
          return rel_is(t.deprel, "mark") || is_punct(t) || is_subject_rel(t.deprel);
        });
        st.attribute = tree.tok(*x).upos == "ADJ";
      }
    }
    st.object = tree.render(st.object_tokens);
    if (st.subject.empty()) {
      cl.failure = ExtractFailure::NoSubject;
    } else if (st.object.empty()) {
      cl.failure = ExtractFailure::NoObject;
    } else {
      cl.stmt = std::move(st);
    }
    clauses[h] = std::move(cl);
  }

  // a clause whose complement clause already yields a statement is reported
  // through that innermost statement only
  std::set<int> suppressed;
  for (const auto& [h, cl] : clauses) {
    if (!cl.stmt) continue;
    for (int p = clause_parent[static_cast<std::size_t>(h)], cur = h; p != 0;
         cur = p, p = clause_parent[static_cast<std::size_t>(p)]) {
      if (rel_is(tree.tok(cur).deprel, "conj")) break;
      suppressed.insert(p);
    }
  }

  int clause_no = 0;
  for (auto& [h, cl] : clauses) {
    if (cl.stmt && !suppressed.count(h)) {
      auto& st = *cl.stmt;
      st.tweet_id = tweet.tweet_id;
      st.user_id = tweet.user_id;
      st.timestamp = tweet.timestamp;
      st.statement_id =
          tweet.tweet_id + ":" + std::to_string(sentence_index) + ":" + std::to_string(clause_no++);
      out.statements.push_back(std::move(st));
    } else if (cl.failure) {
      out.diagnostics.add(*cl.failure);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// pronoun resolution

namespace svo_detail {

enum class GramNumber { Sing, Plur, Unknown };

inline GramNumber pronoun_number(std::string_view lower_form) {
  static constexpr std::array<std::string_view, 3> sing{"he", "she", "it"};
  static constexpr std::array<std::string_view, 1> plur{"they"};
  if (std::find(sing.begin(), sing.end(), lower_form) != sing.end()) return GramNumber::Sing;
  if (std::find(plur.begin(), plur.end(), lower_form) != plur.end()) return GramNumber::Plur;
  return GramNumber::Unknown;
}

inline GramNumber noun_number(const DepToken& t) {
  if (t.feats.find("Number=Plur") != std::string::npos) return GramNumber::Plur;
  if (t.feats.find("Number=Sing") != std::string::npos) return GramNumber::Sing;
  if (t.upos == "PROPN") return GramNumber::Sing;
  const auto f = text::lower(t.form);
  if (f.size() > 2 && f.back() == 's' && f[f.size() - 2] != 's') return GramNumber::Plur;
  return GramNumber::Sing;
}

inline bool is_np_head(const DepToken& t) {
  if (t.upos != "NOUN" && t.upos != "PROPN") return false;
  return !(rel_is(t.deprel, "compound") || rel_is(t.deprel, "flat") || t.deprel == "fixed" ||
           t.deprel == "goeswith");
}

/// Head plus its compound / flat name parts, rendered.
inline std::string np_core(const DepSentence& s, int head) {
  const Tree tree(s);
  std::vector<int> idx;
  const auto walk = [&](auto&& self, int i) -> void {
    idx.push_back(i);
    for (int c : tree.children(i)) {
      const auto& r = tree.tok(c).deprel;
      if (rel_is(r, "compound") || rel_is(r, "flat") || r == "amod" || r == "fixed") self(self, c);
    }
  };
  walk(walk, head);
  std::sort(idx.begin(), idx.end());
  return tree.render(idx);
}

}  // namespace svo_detail

/// Replaces third-person pronoun subjects with the nearest preceding
/// number-agreeing noun-phrase head from the same tweet.
inline DepSentence resolve_pronouns(const DepSentence& sentence,
                                    const std::vector<DepSentence>& context) {
  using namespace svo_detail;
  DepSentence out = sentence;
  for (auto& tok : out.tokens) {
    if (!is_subject_rel(tok.deprel)) continue;
    const auto number = pronoun_number(text::lower(tok.form));
    if (number == GramNumber::Unknown) continue;

    std::optional<std::string> antecedent;
    GramNumber found_number = GramNumber::Unknown;
    std::string found_upos;
    const auto scan = [&](const DepSentence& s, int before) {
      for (int i = std::min(before, s.size() + 1) - 1; i >= 1; --i) {
        const auto& c = s.at(i);
        if (!is_np_head(c) || noun_number(c) != number) continue;
        antecedent = np_core(s, i);
        found_number = noun_number(c);
        found_upos = c.upos;
        return true;
      }
      return false;
    };
    if (!scan(sentence, tok.index)) {
      for (auto it = context.rbegin(); it != context.rend(); ++it) {
        if (it->tweet_id != sentence.tweet_id) continue;
        if (scan(*it, it->size() + 1)) break;
      }
    }
    if (!antecedent || antecedent->empty()) continue;
    tok.form = *antecedent;
    tok.lemma = *antecedent;
    tok.upos = found_upos;
    tok.feats = found_number == GramNumber::Plur ? "Number=Plur" : "Number=Sing";
  }
  return out;
}

/// Runs pronoun resolution and extraction over every sentence of the corpus.
/// Sentences are grouped by tweet in input order; sentences whose tweet is
/// not in `tweets` are skipped.
struct CorpusExtraction {
  std::vector<BeliefStatement> statements;
  ExtractDiagnostics diagnostics;
  std::size_t sentences = 0;
  std::size_t orphan_sentences = 0;
};

inline CorpusExtraction extract_corpus(const std::vector<DepSentence>& sentences,
                                       const std::map<std::string, const Tweet*>& tweets) {
  CorpusExtraction out;
  std::map<std::string, std::vector<DepSentence>> seen;  // resolved prior sentences per tweet
  for (const auto& s : sentences) {
    const auto it = tweets.find(s.tweet_id);
    if (it == tweets.end()) { ++out.orphan_sentences; continue; }
    ++out.sentences;
    auto& prior = seen[s.tweet_id];
    auto resolved = resolve_pronouns(s, prior);
    auto r = extract_svo(resolved, *it->second, static_cast<int>(prior.size()));
    prior.push_back(std::move(resolved));
    out.diagnostics.merge(r.diagnostics);
    for (auto& st : r.statements) out.statements.push_back(std::move(st));
  }
  return out;
}

inline nlohmann::json to_json(const BeliefStatement& s) {
  return {{"statement_id", s.statement_id}, {"tweet_id", s.tweet_id}, {"user_id", s.user_id},
          {"timestamp", s.timestamp},       {"subject", s.subject},   {"verb", s.verb},
          {"object", s.object},             {"negated", s.negated},   {"attribute", s.attribute}};
}

inline BeliefStatement statement_from_json(const nlohmann::json& j) {
  BeliefStatement s;
  s.statement_id = j.at("statement_id").get<std::string>();
  s.tweet_id = j.at("tweet_id").get<std::string>();
  s.user_id = j.at("user_id").get<std::string>();
  s.timestamp = j.at("timestamp").get<std::int64_t>();
  s.subject = j.at("subject").get<std::string>();
  s.verb = j.at("verb").get<std::string>();
  s.object = j.at("object").get<std::string>();
  s.negated = j.at("negated").get<bool>();
  s.attribute = j.at("attribute").get<bool>();
  return s;
}

}  // namespace blf
