#pragma once

// Lloyd's k-means with k-means++ seeding over 49-dimensional feature
// vectors. Fully deterministic: restarts draw from a splitmix64 stream
// derived from the configured seed, distance ties resolve to the lowest
// cluster index, and the returned clusters are ordered by ascending
// centroid norm (the order the value-assignment step needs).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lemmamill/errors.hpp"
#include "lemmamill/features.hpp"
#include "lemmamill/rng.hpp"
#include "lemmamill/symbol.hpp"

namespace lemmamill {

struct ClusterConfig {
  int granularity = 3;              // 1..5, higher means more clusters
  int restarts = 20;                // independent k-means++ restarts
  int votingRuns = 10;              // reliability votes
  double coClusterThreshold = 0.7;  // fraction of votes a pair needs
  std::uint64_t seed = 0;

  void validate() const {
    if (granularity < 1 || granularity > 5)
      throw Error("ConfigError", "granularity must be in 1..5");
    if (restarts < 1) throw Error("ConfigError", "restarts must be positive");
    if (votingRuns < 1) throw Error("ConfigError", "voting runs must be positive");
    if (!(coClusterThreshold > 0.5) || coClusterThreshold > 1.0)
      throw Error("ConfigError", "co-cluster threshold must be in (0.5, 1.0]");
  }
};

struct Cluster {
  std::vector<Symbol> members;  // sorted
  FeatureVector centroid{};
};

struct Clustering {
  std::vector<Cluster> clusters;  // ordered by ascending centroid norm

  int indexOf(const Symbol& name) const {
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (const Symbol& m : clusters[i].members)
        if (m == name) return int(i);
    return -1;
  }
  bool coClustered(const Symbol& a, const Symbol& b) const {
    int ia = indexOf(a);
    return ia >= 0 && ia == indexOf(b);
  }
};

// Number of clusters for a given object count: finer granularity divides by
// a smaller constant; never below 2 (unless fewer objects), never above the
// object count.
inline std::size_t clusterCount(std::size_t objectCount, const ClusterConfig& cfg) {
  std::size_t n = std::max<std::size_t>(2, objectCount / std::size_t(10 - cfg.granularity));
  return std::min(n, objectCount);
}

namespace detail {

inline double dist2(const FeatureVector& a, const FeatureVector& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double norm2(const FeatureVector& a) {
  double s = 0;
  for (double x : a) s += x * x;
  return s;
}

struct LloydResult {
  std::vector<int> assign;
  std::vector<FeatureVector> centroids;
  double wcss = 0;
};

inline int nearestCentroid(const FeatureVector& p,
                           const std::vector<FeatureVector>& cs) {
  int best = 0;
  double bestD = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cs.size(); ++c) {
    double d = dist2(p, cs[c]);
    if (d < bestD) {
      bestD = d;
      best = int(c);
    }
  }
  return best;
}

// Lloyd iterations from given initial centroids to convergence (or the
// iteration cap), with empty clusters repaired by stealing the point
// farthest from its current centroid.
inline LloydResult lloyd(const std::vector<FeatureVector>& pts,
                         std::vector<FeatureVector> centroids) {
  const std::size_t n = pts.size(), k = centroids.size();
  LloydResult res;
  res.assign.assign(n, -1);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int c = nearestCentroid(pts[i], centroids);
      if (c != res.assign[i]) {
        res.assign[i] = c;
        changed = true;
      }
    }
    // Repair empties: move the globally farthest point into each.
    std::vector<std::size_t> count(k, 0);
    for (int a : res.assign) ++count[std::size_t(a)];
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      std::size_t worst = 0;
      double worstD = -1;
      for (std::size_t i = 0; i < n; ++i) {
        if (count[std::size_t(res.assign[i])] <= 1) continue;
        double d = dist2(pts[i], centroids[std::size_t(res.assign[i])]);
        if (d > worstD) {
          worstD = d;
          worst = i;
        }
      }
      --count[std::size_t(res.assign[worst])];
      res.assign[worst] = int(c);
      ++count[c];
      changed = true;
    }
    if (!changed && iter > 0) break;
    // Recompute centroids as member means.
    for (auto& c : centroids) c.fill(0.0);
    std::vector<std::size_t> sz(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& c = centroids[std::size_t(res.assign[i])];
      for (std::size_t d = 0; d < c.size(); ++d) c[d] += pts[i][d];
      ++sz[std::size_t(res.assign[i])];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (sz[c] > 0)
        for (double& x : centroids[c]) x /= double(sz[c]);
  }
  res.centroids = std::move(centroids);
  res.wcss = 0;
  for (std::size_t i = 0; i < n; ++i)
    res.wcss += dist2(pts[i], res.centroids[std::size_t(res.assign[i])]);
  return res;
}

// k-means++ seeding: D^2-weighted sampling of k initial centroids.
inline std::vector<FeatureVector> seedPlusPlus(const std::vector<FeatureVector>& pts,
                                               std::size_t k, Rng& rng) {
  std::vector<FeatureVector> centroids;
  centroids.push_back(pts[rng.below(pts.size())]);
  std::vector<double> d2(pts.size());
  while (centroids.size() < k) {
    double total = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, dist2(pts[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total <= 0) {
      pick = rng.below(pts.size());
    } else {
      double threshold = rng.unitDouble() * total;
      double acc = 0;
      pick = pts.size() - 1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += d2[i];
        if (acc > threshold) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(pts[pick]);
  }
  return centroids;
}

// Packages a Lloyd result as a Clustering ordered by centroid norm.
inline Clustering packageClustering(const std::vector<Symbol>& names,
                                    const LloydResult& res) {
  std::size_t k = res.centroids.size();
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double na = norm2(res.centroids[a]), nb = norm2(res.centroids[b]);
    if (na != nb) return na < nb;
    return a < b;
  });
  Clustering out;
  out.clusters.resize(k);
  std::vector<std::size_t> rank(k);
  for (std::size_t i = 0; i < k; ++i) rank[order[i]] = i;
  for (std::size_t i = 0; i < k; ++i)
    out.clusters[rank[i]].centroid = res.centroids[i];
  for (std::size_t i = 0; i < names.size(); ++i)
    out.clusters[rank[std::size_t(res.assign[i])]].members.push_back(names[i]);
  for (Cluster& c : out.clusters) std::sort(c.members.begin(), c.members.end());
  return out;
}

inline std::uint64_t restartSeed(std::uint64_t seed, int restart) {
  return Rng::mix(Rng::mix(seed, 0x6b6d65616e73ULL), std::uint64_t(restart));
}

}  // namespace detail

// Full k-means: `restarts` independent k-means++ seedings derived from
// cfg.seed, best within-cluster sum of squares wins, first winner kept on
// ties.
inline Clustering kmeans(const std::map<Symbol, FeatureVector>& vectors,
                         std::size_t n, const ClusterConfig& cfg) {
  if (n < 1) throw TooFewObjectsError("cluster count must be positive");
  if (n > vectors.size())
    throw TooFewObjectsError("asked for " + std::to_string(n) + " clusters from " +
                             std::to_string(vectors.size()) + " objects");
  std::vector<Symbol> names;
  std::vector<FeatureVector> pts;
  names.reserve(vectors.size());
  pts.reserve(vectors.size());
  for (const auto& [name, v] : vectors) {
    names.push_back(name);
    pts.push_back(v);
  }
  detail::LloydResult best;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(detail::restartSeed(cfg.seed, r));
    auto res = detail::lloyd(pts, detail::seedPlusPlus(pts, n, rng));
    if (!have || res.wcss < best.wcss) {
      best = std::move(res);
      have = true;
    }
  }
  return detail::packageClustering(names, best);
}

}  // namespace lemmamill
