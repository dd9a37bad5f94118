#pragma once
// User stance from retweet affiliation: eligibility filter, affiliation
// matrix, density clustering of users, and the cluster label / purity
// measures.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core.hpp"
#include "corpus.hpp"
#include "density.hpp"

namespace blf {

struct AffiliationMatrix {
  std::vector<std::string> users;     // rows, sorted
  std::vector<std::string> accounts;  // columns, sorted
  Matrix counts;                      // users x accounts
};

struct AffiliationParams {
  long min_tweets = 100;  // at least this many tweets
  long min_retweets = 1;  // strictly more retweets than this
  bool binary = false;
};

inline AffiliationMatrix build_affiliation(const std::vector<Tweet>& tweets,
                                           const AffiliationParams& p = {}) {
  std::map<std::string, long> n_tweets, n_retweets;
  for (const auto& t : tweets) {
    ++n_tweets[t.user_id];
    if (t.retweeted_user) ++n_retweets[t.user_id];
  }
  AffiliationMatrix m;
  for (const auto& [user, n] : n_tweets) {
    const auto rt = n_retweets.find(user);
    if (n >= p.min_tweets && rt != n_retweets.end() && rt->second > p.min_retweets)
      m.users.push_back(user);
  }
  if (m.users.empty())
    throw DataError("no eligible users for affiliation clustering (need >= " +
                    std::to_string(p.min_tweets) + " tweets and > " +
                    std::to_string(p.min_retweets) + " retweets)");
  std::map<std::string, Eigen::Index> row;
  for (std::size_t i = 0; i < m.users.size(); ++i) row[m.users[i]] = static_cast<Eigen::Index>(i);
  std::set<std::string> accounts;
  for (const auto& t : tweets)
    if (t.retweeted_user && row.count(t.user_id)) accounts.insert(*t.retweeted_user);
  m.accounts.assign(accounts.begin(), accounts.end());
  std::map<std::string, Eigen::Index> col;
  for (std::size_t j = 0; j < m.accounts.size(); ++j) col[m.accounts[j]] = static_cast<Eigen::Index>(j);
  m.counts = Matrix::Zero(static_cast<Eigen::Index>(m.users.size()),
                          static_cast<Eigen::Index>(m.accounts.size()));
  for (const auto& t : tweets) {
    if (!t.retweeted_user) continue;
    const auto r = row.find(t.user_id);
    if (r == row.end()) continue;
    auto& cell = m.counts(r->second, col.at(*t.retweeted_user));
    cell = p.binary ? 1.0 : cell + 1.0;
  }
  return m;
}

struct UserClustering {
  std::map<std::string, int> cluster_of;  // user -> cluster id or kNoise
  int num_clusters = 0;
  Warnings warnings;
};

struct AffiliationClusterParams {
  int projection_dims = 2;
  DensityParams density{5, 10, 0.0, 0.15};
};

/// Built-in baseline: unit-normalized (cosine) rows, principal-component
/// projection, then density clustering.
inline UserClustering cluster_affiliation(const AffiliationMatrix& m,
                                          const AffiliationClusterParams& p = {}) {
  UserClustering out;
  if (m.users.empty()) throw DataError("affiliation matrix is empty");
  const bool all_zero = m.counts.size() == 0 || m.counts.cwiseAbs().maxCoeff() == 0.0;
  if (m.users.size() < 2 || all_zero) {
    out.warnings.add("degenerate affiliation matrix; every user is noise");
    for (const auto& u : m.users) out.cluster_of[u] = kNoise;
    return out;
  }
  const Matrix rows = unit_rows(m.counts);
  Matrix coords;
  if (rows.cols() < p.projection_dims) {
    coords = rows;  // already low-dimensional
  } else {
    coords = PcaModel::fit(rows, p.projection_dims).transform(rows);
  }
  const auto dc = density_cluster(coords, p.density);
  out.num_clusters = dc.num_clusters;
  for (std::size_t i = 0; i < m.users.size(); ++i) out.cluster_of[m.users[i]] = dc.labels[i];
  if (dc.num_clusters == 0) out.warnings.add("affiliation clustering found no clusters");
  return out;
}

/// Externally computed user clusters: rows of (user_id, cluster_id|NOISE).
inline UserClustering import_user_clusters(const TwoColumnLoad& table) {
  UserClustering out;
  std::set<int> ids;
  for (const auto& [user, value] : table.rows) {
    if (value == "NOISE" || value == "-1") {
      out.cluster_of[user] = kNoise;
      continue;
    }
    const auto id = detail::to_int(value);
    if (!id || *id < 0) throw DataError("bad cluster id '" + value + "' for user " + user);
    out.cluster_of[user] = *id;
    ids.insert(*id);
  }
  out.num_clusters = static_cast<int>(ids.size());
  return out;
}

/// Modal gold class among labeled members; believer wins ties. nullopt when
/// no member is labeled.
inline std::optional<Stance> cluster_label(const std::vector<std::string>& members,
                                           const UserStances& gold) {
  long believers = 0, skeptics = 0;
  for (const auto& u : members) {
    const auto it = gold.find(u);
    if (it == gold.end()) continue;
    if (it->second == Stance::Believer) ++believers;
    else if (it->second == Stance::Skeptic) ++skeptics;
  }
  if (believers + skeptics == 0) return std::nullopt;
  return believers >= skeptics ? Stance::Believer : Stance::Skeptic;
}

/// Fraction of labeled members carrying the cluster label.
inline std::optional<double> cluster_purity(const std::vector<std::string>& members,
                                            const UserStances& gold) {
  const auto label = cluster_label(members, gold);
  if (!label) return std::nullopt;
  long labeled = 0, agree = 0;
  for (const auto& u : members) {
    const auto it = gold.find(u);
    if (it == gold.end() || it->second == Stance::Unclustered) continue;
    ++labeled;
    if (it->second == *label) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(labeled);
}

struct StanceAssignment {
  std::string user_id;
  Stance stance = Stance::Unclustered;
  int cluster_id = kNoise;
};

struct NamingRule {
  enum class Kind { Seeds, Gold } kind = Kind::Seeds;
  std::set<std::string> believer_seeds;
  std::set<std::string> skeptic_seeds;
  UserStances gold;
};

struct StanceResult {
  std::vector<StanceAssignment> assignments;  // sorted by user
  std::map<int, Stance> cluster_names;
  Warnings warnings;

  UserStances as_map() const {
    UserStances m;
    for (const auto& a : assignments) m[a.user_id] = a.stance;
    return m;
  }
};

inline std::map<int, std::vector<std::string>> members_by_cluster(const UserClustering& c) {
  std::map<int, std::vector<std::string>> out;
  for (const auto& [u, id] : c.cluster_of)
    if (id != kNoise) out[id].push_back(u);
  return out;
}

/// Names each cluster believer or skeptic. With seed lists, a cluster takes
/// the side whose seed accounts its members retweet more (requires the
/// affiliation matrix); with gold labels, the cluster label. Clusters
/// matching neither side, and noise users, are unclustered.
inline StanceResult assign_stances(const UserClustering& clusters, const NamingRule& rule,
                                   const AffiliationMatrix* matrix = nullptr) {
  StanceResult out;
  const auto members = members_by_cluster(clusters);
  std::map<std::string, Eigen::Index> row;
  if (matrix)
    for (std::size_t i = 0; i < matrix->users.size(); ++i)
      row[matrix->users[i]] = static_cast<Eigen::Index>(i);
  if (rule.kind == NamingRule::Kind::Seeds && !matrix)
    throw ConfigError("seed-based stance naming needs the affiliation matrix");

  for (const auto& [id, users] : members) {
    std::optional<Stance> name;
    if (rule.kind == NamingRule::Kind::Gold) {
      name = cluster_label(users, rule.gold);
    } else {
      double b = 0, s = 0;
      for (std::size_t j = 0; j < matrix->accounts.size(); ++j) {
        const bool is_b = rule.believer_seeds.count(matrix->accounts[j]) > 0;
        const bool is_s = rule.skeptic_seeds.count(matrix->accounts[j]) > 0;
        if (!is_b && !is_s) continue;
        for (const auto& u : users) {
          const auto r = row.find(u);
          if (r == row.end()) continue;
          const double v = matrix->counts(r->second, static_cast<Eigen::Index>(j));
          if (is_b) b += v;
          if (is_s) s += v;
        }
      }
      if (b > s) name = Stance::Believer;
      else if (s > b) name = Stance::Skeptic;
    }
    if (!name) {
      out.warnings.add("cluster " + std::to_string(id) + " matches no naming rule; unclustered");
      out.cluster_names[id] = Stance::Unclustered;
    } else {
      out.cluster_names[id] = *name;
    }
  }
  for (const auto& [u, id] : clusters.cluster_of) {
    StanceAssignment a{u, Stance::Unclustered, id};
    if (id != kNoise) a.stance = out.cluster_names.at(id);
    out.assignments.push_back(std::move(a));
  }
  return out;
}

}  // namespace blf
