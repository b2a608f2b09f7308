#pragma once

// The recurrent clustering pipeline. Definitions are processed in ingestion
// order; each one is featurized against the values assigned so far (its own
// occurrences contribute the reserved self-call constant), all definitions
// seen so far are re-clustered, and every user function gets the value
// [f] = 10 + 2*c + d/(1+d), where c is its cluster's rank by ascending
// centroid norm and d its distance to the centroid. Theorem statements are
// clustered once against the final values. Reliability is estimated by
// voting across reruns at shifted seeds; only pairs co-clustered in enough
// runs stay together.
//
// Performance adaptation, visible only on corpora above kExactKmeansLimit
// definitions: instead of a full multi-restart k-means per prefix, later
// steps continue Lloyd iterations from the previous step's centroids
// (seeding any new cluster with the point farthest from the existing
// centroids). Small corpora, and every corpus in the test suite, use the
// exact multi-restart procedure at every step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lemmamill/corpus.hpp"
#include "lemmamill/errors.hpp"
#include "lemmamill/features.hpp"
#include "lemmamill/kmeans.hpp"

namespace lemmamill {

inline constexpr double kValueEpsilon = 1e-6;
inline constexpr std::size_t kExactKmeansLimit = 64;

struct RecurrentResult {
  ValueMap values;
  Clustering clusters;
  std::map<Symbol, FeatureVector> vectors;
};

namespace detail {

// [f] assignment for every clustered function, with the epsilon nudge that
// keeps the map injective when identical definitions collide.
inline void assignValues(const Clustering& cl,
                         const std::map<Symbol, FeatureVector>& vectors,
                         ValueMap& values) {
  for (std::size_t c = 0; c < cl.clusters.size(); ++c) {
    for (const Symbol& m : cl.clusters[c].members) {
      double d = std::sqrt(dist2(vectors.at(m), cl.clusters[c].centroid));
      values.entries[m] = 10.0 + 2.0 * double(c) + d / (1.0 + d);
    }
  }
  while (true) {
    std::map<double, std::vector<Symbol>> byValue;
    for (const auto& [name, v] : values.entries) byValue[v].push_back(name);
    bool collided = false;
    for (auto& [v, names] : byValue) {
      if (names.size() < 2) continue;
      collided = true;
      std::sort(names.begin(), names.end());
      for (std::size_t r = 0; r < names.size(); ++r)
        values.entries[names[r]] = v + kValueEpsilon * double(r);
    }
    if (!collided) return;
  }
}

// Warm continuation for large prefixes: previous centroids, plus
// farthest-point seeds for any newly needed cluster.
inline Clustering warmStep(const std::map<Symbol, FeatureVector>& vectors,
                           std::size_t k, std::vector<FeatureVector> centroids) {
  std::vector<Symbol> names;
  std::vector<FeatureVector> pts;
  for (const auto& [name, v] : vectors) {
    names.push_back(name);
    pts.push_back(v);
  }
  while (centroids.size() < k) {
    std::size_t far = 0;
    double farD = -1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, dist2(pts[i], c));
      if (best > farD) {
        farD = best;
        far = i;
      }
    }
    centroids.push_back(pts[far]);
  }
  return packageClustering(names, lloyd(pts, std::move(centroids)));
}

}  // namespace detail

inline RecurrentResult recurrentClusterDefinitions(const Corpus& corpus,
                                                   const ClusterConfig& cfg) {
  cfg.validate();
  RecurrentResult res;
  std::vector<Symbol> defs = corpus.definitionsInOrder();
  std::vector<FeatureVector> prevCentroids;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    const Event& e = corpus.at(defs[i]);
    try {
      res.vectors[defs[i]] =
          flatten(featureTable(e.body, res.values, corpus.sccMembers(defs[i])));
    } catch (const MissingValueError&) {
      throw CorpusOrderError("definition " + defs[i].display() +
                             " uses a function defined later in the corpus");
    }
    std::size_t k = clusterCount(i + 1, cfg);
    Clustering cl;
    if (i + 1 <= kExactKmeansLimit) {
      cl = kmeans(res.vectors, k, cfg);
    } else {
      cl = detail::warmStep(res.vectors, k, std::move(prevCentroids));
    }
    detail::assignValues(cl, res.vectors, res.values);
    prevCentroids.clear();
    for (const Cluster& c : cl.clusters) prevCentroids.push_back(c.centroid);
    res.clusters = std::move(cl);
  }
  return res;
}

// Feature vectors of every theorem statement under the given values.
inline std::map<Symbol, FeatureVector> theoremVectors(const Corpus& corpus,
                                                      const ValueMap& values) {
  std::map<Symbol, FeatureVector> out;
  for (const Symbol& name : corpus.theoremsInOrder())
    out[name] = flatten(featureTable(corpus.at(name).body, values));
  return out;
}

inline Clustering clusterTheorems(const Corpus& corpus, const ValueMap& values,
                                  const ClusterConfig& cfg) {
  cfg.validate();
  std::map<Symbol, FeatureVector> vectors = theoremVectors(corpus, values);
  if (vectors.empty()) return {};
  return kmeans(vectors, clusterCount(vectors.size(), cfg), cfg);
}

namespace detail {

// Union-find over co-cluster votes; components become the reliable clusters
// (size-1 components are kept as singleton clusters, reported by callers as
// having no reliable pattern). Centroids are the means of base vectors.
template <typename RunFn>
Clustering reliableFromVotes(const std::map<Symbol, FeatureVector>& baseVectors,
                             const ClusterConfig& cfg, RunFn makeRun) {
  std::vector<Symbol> names;
  for (const auto& [name, v] : baseVectors) names.push_back(name);
  std::map<Symbol, std::size_t> idx;
  for (std::size_t i = 0; i < names.size(); ++i) idx[names[i]] = i;

  std::map<std::pair<std::size_t, std::size_t>, int> votes;
  for (int v = 1; v <= cfg.votingRuns; ++v) {
    Clustering run = makeRun(cfg.seed + std::uint64_t(v));
    for (const Cluster& c : run.clusters)
      for (std::size_t a = 0; a < c.members.size(); ++a)
        for (std::size_t b = a + 1; b < c.members.size(); ++b) {
          std::size_t ia = idx.at(c.members[a]), ib = idx.at(c.members[b]);
          ++votes[{std::min(ia, ib), std::max(ia, ib)}];
        }
  }

  std::vector<std::size_t> parent(names.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const double needed = cfg.coClusterThreshold * double(cfg.votingRuns) - 1e-9;
  for (const auto& [pair, count] : votes)
    if (double(count) >= needed) parent[find(pair.first)] = find(pair.second);

  std::map<std::size_t, Cluster> comps;
  for (std::size_t i = 0; i < names.size(); ++i) {
    Cluster& c = comps[find(i)];
    c.members.push_back(names[i]);
    const FeatureVector& v = baseVectors.at(names[i]);
    for (std::size_t d = 0; d < v.size(); ++d) c.centroid[d] += v[d];
  }
  Clustering out;
  for (auto& [root, c] : comps) {
    for (double& x : c.centroid) x /= double(c.members.size());
    std::sort(c.members.begin(), c.members.end());
    out.clusters.push_back(std::move(c));
  }
  std::stable_sort(out.clusters.begin(), out.clusters.end(),
                   [](const Cluster& a, const Cluster& b) {
                     double na = norm2(a.centroid), nb = norm2(b.centroid);
                     if (na != nb) return na < nb;
                     return a.members[0] < b.members[0];
                   });
  return out;
}

}  // namespace detail

inline Clustering reliableDefinitionClusters(const Corpus& corpus,
                                             const ClusterConfig& cfg) {
  cfg.validate();
  RecurrentResult base = recurrentClusterDefinitions(corpus, cfg);
  return detail::reliableFromVotes(base.vectors, cfg, [&](std::uint64_t seed) {
    ClusterConfig run = cfg;
    run.seed = seed;
    return recurrentClusterDefinitions(corpus, run).clusters;
  });
}

inline Clustering reliableTheoremClusters(const Corpus& corpus,
                                          const ValueMap& values,
                                          const ClusterConfig& cfg) {
  cfg.validate();
  std::map<Symbol, FeatureVector> vectors = theoremVectors(corpus, values);
  if (vectors.empty()) return {};
  std::size_t k = clusterCount(vectors.size(), cfg);
  return detail::reliableFromVotes(vectors, cfg, [&](std::uint64_t seed) {
    ClusterConfig run = cfg;
    run.seed = seed;
    return kmeans(vectors, k, run);
  });
}

// Names reliably clustered with the given one (empty for singletons).
inline std::vector<Symbol> siblingsIn(const Clustering& reliable, const Symbol& name) {
  int i = reliable.indexOf(name);
  std::vector<Symbol> out;
  if (i < 0) return out;
  for (const Symbol& m : reliable.clusters[std::size_t(i)].members)
    if (!(m == name)) out.push_back(m);
  return out;
}

inline std::vector<Symbol> similarTo(const Symbol& name, EventKind kind,
                                     const Corpus& corpus, const ValueMap& values,
                                     const ClusterConfig& cfg) {
  const Event& e = corpus.at(name);
  if (e.kind != kind)
    throw UnknownNameError(name.display() + " is not a " +
                           (kind == EventKind::Definition ? "definition" : "theorem"));
  Clustering rel = kind == EventKind::Definition
                       ? reliableDefinitionClusters(corpus, cfg)
                       : reliableTheoremClusters(corpus, values, cfg);
  return siblingsIn(rel, name);
}

}  // namespace lemmamill
