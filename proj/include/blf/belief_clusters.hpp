#pragma once
// Clustering embedded focal statements into belief propositions, and the
// per-stance cluster count / coverage / purity measures.

#include <array>
#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "corpus.hpp"
#include "density.hpp"
#include "stance.hpp"

namespace blf {

struct Coordinates2D {
  std::vector<std::string> ids;
  Matrix xy;  // ids.size() x 2
};

enum class ProjectionMethod { Pca, Imported };

/// Projection settings. `neighbors` / `min_dist` are the reference
/// manifold-learning parameters; they are recorded for imported projections
/// and do not affect the principal-component baseline.
struct ProjectionParams {
  ProjectionMethod method = ProjectionMethod::Pca;
  int neighbors = 20;
  double min_dist = 0.1;
  std::uint64_t seed = 1;
};

inline Coordinates2D project_embeddings(const EmbeddingFile& emb, const ProjectionParams& = {}) {
  if (emb.dim < 2) throw ConfigError("embedding dimension must be >= 2 to project to the plane");
  Coordinates2D out;
  out.ids = emb.ids;
  if (emb.ids.empty()) {
    out.xy = Matrix(0, 2);
    return out;
  }
  const Matrix rows = to_matrix(emb.vectors);
  out.xy = PcaModel::fit(rows, 2).transform(rows);
  return out;
}

/// Externally computed coordinates: CSV rows id,x,y (header optional).
inline Coordinates2D read_coordinates(std::istream& in) {
  Coordinates2D out;
  std::vector<std::array<double, 2>> pts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, ',');
    if (cols.size() != 3) throw DataError("coordinates line " + std::to_string(line_no) + ": expected id,x,y");
    if (line_no == 1 && cols[1] == "x") continue;
    std::array<double, 2> v{};
    for (int k = 0; k < 2; ++k) {
      const auto& c = cols[static_cast<std::size_t>(k) + 1];
      const auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v[static_cast<std::size_t>(k)]);
      if (ec != std::errc() || p != c.data() + c.size())
        throw DataError("coordinates line " + std::to_string(line_no) + ": bad number");
    }
    out.ids.push_back(cols[0]);
    pts.push_back(v);
  }
  out.xy.resize(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.xy(static_cast<Eigen::Index>(i), 0) = pts[i][0];
    out.xy(static_cast<Eigen::Index>(i), 1) = pts[i][1];
  }
  return out;
}

struct BeliefClusterSet {
  std::vector<std::string> ids;
  std::vector<int> labels;  // parallel to ids; kNoise for unclustered statements
  int num_clusters = 0;
  double coverage = 0.0;  // clustered / total

  std::map<int, std::vector<std::string>> members() const {
    std::map<int, std::vector<std::string>> m;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (labels[i] != kNoise) m[labels[i]].push_back(ids[i]);
    return m;
  }
  std::map<std::string, int> as_map() const {
    std::map<std::string, int> m;
    for (std::size_t i = 0; i < ids.size(); ++i) m[ids[i]] = labels[i];
    return m;
  }
};

struct BeliefClusterParams {
  DensityParams density{100, 200, 0.0, 0.05};
};

inline BeliefClusterSet cluster_projection(const Coordinates2D& coords,
                                           const BeliefClusterParams& p, Warnings* warnings = nullptr) {
  BeliefClusterSet out;
  out.ids = coords.ids;
  const auto dc = density_cluster(coords.xy, p.density);
  out.labels = dc.labels;
  out.num_clusters = dc.num_clusters;
  out.coverage = coords.ids.empty()
                     ? 0.0
                     : 1.0 - static_cast<double>(dc.noise()) / static_cast<double>(coords.ids.size());
  if (out.num_clusters == 0 && warnings) warnings->add("belief clustering: every statement is noise");
  return out;
}

struct StanceClusterMetrics {
  int num_clusters = 0;
  double coverage = 0.0;          // clustered statements of this stance / all of its statements
  std::optional<double> purity;   // mean purity over this stance's clusters
};

struct ClusterMetrics {
  StanceClusterMetrics believer;
  StanceClusterMetrics skeptic;
};

/// `statement_stance` maps statement ids to their author's stance. A cluster
/// belongs to the stance of its label; a stance with no clusters reports no
/// purity.
inline ClusterMetrics cluster_metrics(const BeliefClusterSet& set, const UserStances& statement_stance) {
  ClusterMetrics out;
  std::map<Stance, std::pair<long, long>> cov;  // stance -> (clustered, total)
  for (std::size_t i = 0; i < set.ids.size(); ++i) {
    const auto it = statement_stance.find(set.ids[i]);
    if (it == statement_stance.end() || it->second == Stance::Unclustered) continue;
    auto& c = cov[it->second];
    ++c.second;
    if (set.labels[i] != kNoise) ++c.first;
  }
  std::map<Stance, std::pair<int, double>> pur;  // stance -> (clusters, purity sum)
  for (const auto& [id, members] : set.members()) {
    const auto label = cluster_label(members, statement_stance);
    if (!label) continue;
    auto& p = pur[*label];
    ++p.first;
    p.second += *cluster_purity(members, statement_stance);
  }
  for (auto stance : {Stance::Believer, Stance::Skeptic}) {
    auto& m = stance == Stance::Believer ? out.believer : out.skeptic;
    const auto c = cov[stance];
    m.coverage = c.second ? static_cast<double>(c.first) / static_cast<double>(c.second) : 0.0;
    const auto p = pur[stance];
    m.num_clusters = p.first;
    if (p.first > 0) m.purity = p.second / p.first;
  }
  return out;
}

}  // namespace blf
