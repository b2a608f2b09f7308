#include <catch2/catch_amalgamated.hpp>

#include "lemmamill/clustering.hpp"

using namespace lemmamill;

namespace {

Corpus& fig2() {
  static Corpus c =
      parseCorpus({std::string(LM_DATA_DIR) + "/tail_recursion.lisp"});
  return c;
}

RecurrentResult& fig2Run() {
  static RecurrentResult r = recurrentClusterDefinitions(fig2(), ClusterConfig{});
  return r;
}

}  // namespace

TEST_CASE("values are assigned to every definition, injectively, >= 10") {
  const RecurrentResult& r = fig2Run();
  CHECK(r.values.entries.size() == 12);
  std::set<double> distinct;
  for (const auto& [name, v] : r.values.entries) {
    CHECK(v >= 10.0);
    distinct.insert(v);
  }
  CHECK(distinct.size() == 12);
}

TEST_CASE("single definition gets a value in the first band") {
  Corpus c = parseCorpusText({{"book", "(defun id (x) x)"}});
  RecurrentResult r = recurrentClusterDefinitions(c, ClusterConfig{});
  REQUIRE(r.values.entries.size() == 1);
  double v = r.values.entries.begin()->second;
  CHECK(v >= 10.0);
  CHECK(v < 13.0);
}

TEST_CASE("structurally similar definitions co-cluster") {
  const RecurrentResult& r = fig2Run();
  const Clustering& cl = r.clusters;
  CHECK(cl.coClustered(Symbol("mult"), Symbol("expt")));
  CHECK(cl.coClustered(Symbol("fact"), Symbol("fib")));
  CHECK(cl.coClustered(Symbol("helper-mult"), Symbol("helper-expt")));
  CHECK(cl.coClustered(Symbol("helper-fact"), Symbol("helper-fib")));
}

TEST_CASE("identical definitions under two names differ only by epsilon") {
  Corpus c = parseCorpusText(
      {{"book",
        "(defun twice (x) (+ x x))"
        "(defun double (x) (+ x x))"
        "(defun noise (a b) (cons a b))"
        "(defun more (a) (car a))"}});
  RecurrentResult r = recurrentClusterDefinitions(c, ClusterConfig{});
  double d1 = r.values.entries.at(Symbol("twice"));
  double d2 = r.values.entries.at(Symbol("double"));
  CHECK(d1 != d2);
  CHECK(std::abs(d1 - d2) <= kValueEpsilon + 1e-12);
}

TEST_CASE("forward use outside the recursion group is a corpus-order error") {
  Corpus c = parseCorpusText({{"book", "(defun f (x) (g x))(defun g (x) x)"}});
  CHECK_THROWS_AS(recurrentClusterDefinitions(c, ClusterConfig{}),
                  CorpusOrderError);
}

TEST_CASE("recurrent clustering is deterministic") {
  RecurrentResult a = recurrentClusterDefinitions(fig2(), ClusterConfig{});
  RecurrentResult b = recurrentClusterDefinitions(fig2(), ClusterConfig{});
  CHECK(a.values.entries == b.values.entries);
  REQUIRE(a.clusters.clusters.size() == b.clusters.clusters.size());
  for (std::size_t i = 0; i < a.clusters.clusters.size(); ++i)
    CHECK(a.clusters.clusters[i].members == b.clusters.clusters[i].members);
}

TEST_CASE("theorem statements cluster by family") {
  const RecurrentResult& r = fig2Run();
  Clustering cl = clusterTheorems(fig2(), r.values, ClusterConfig{});
  CHECK(cl.coClustered(Symbol("mult-mult-tail"), Symbol("expt-expt-tail")));
  CHECK(cl.coClustered(Symbol("fact-fact-tail"), Symbol("fib-fib-tail")));
  CHECK_FALSE(cl.coClustered(Symbol("mult-mult-tail"), Symbol("fib-fib-tail")));
}

TEST_CASE("a single theorem clusters alone") {
  Corpus c = parseCorpusText(
      {{"book", "(defun f (x) x)(defthm f-id (equal (f x) x))"}});
  RecurrentResult r = recurrentClusterDefinitions(c, ClusterConfig{});
  Clustering cl = clusterTheorems(c, r.values, ClusterConfig{});
  REQUIRE(cl.clusters.size() == 1);
  CHECK(cl.clusters[0].members == std::vector<Symbol>{Symbol("f-id")});
}

TEST_CASE("duplicated theorem statements co-cluster") {
  Corpus c = parseCorpusText(
      {{"book",
        "(defun f (x) x)(defun g (x) (cons x x))"
        "(defthm f-id (equal (f x) x))"
        "(defthm f-id-again (equal (f y) y))"
        "(defthm g-grows (consp (g x)))"
        "(defthm g-grows2 (consp (g (cons x 1))))"}});
  RecurrentResult r = recurrentClusterDefinitions(c, ClusterConfig{});
  Clustering cl = clusterTheorems(c, r.values, ClusterConfig{});
  CHECK(cl.coClustered(Symbol("f-id"), Symbol("f-id-again")));
}

TEST_CASE("reliable theorem clusters keep the family pairs") {
  const RecurrentResult& r = fig2Run();
  Clustering rel = reliableTheoremClusters(fig2(), r.values, ClusterConfig{});
  CHECK(rel.coClustered(Symbol("mult-mult-tail"), Symbol("expt-expt-tail")));
  CHECK(rel.coClustered(Symbol("fact-fact-tail"), Symbol("fib-fib-tail")));
  auto sib = siblingsIn(rel, Symbol("expt-expt-tail"));
  CHECK(std::find(sib.begin(), sib.end(), Symbol("mult-mult-tail")) != sib.end());
}

TEST_CASE("similarTo answers goal-directed queries") {
  const RecurrentResult& r = fig2Run();
  auto thmSibs = similarTo(Symbol("expt-expt-tail"), EventKind::Theorem, fig2(),
                           r.values, ClusterConfig{});
  CHECK(thmSibs == std::vector<Symbol>{Symbol("mult-mult-tail")});

  auto defSibs = similarTo(Symbol("fib"), EventKind::Definition, fig2(),
                           r.values, ClusterConfig{});
  CHECK(std::find(defSibs.begin(), defSibs.end(), Symbol("fact")) != defSibs.end());

  CHECK_THROWS_AS(similarTo(Symbol("nope"), EventKind::Definition, fig2(),
                            r.values, ClusterConfig{}),
                  UnknownNameError);
  CHECK_THROWS_AS(similarTo(Symbol("fib"), EventKind::Theorem, fig2(), r.values,
                            ClusterConfig{}),
                  UnknownNameError);
}

TEST_CASE("reliable clusters partition the object set") {
  Clustering rel = reliableDefinitionClusters(fig2(), ClusterConfig{});
  std::set<Symbol> seen;
  std::size_t total = 0;
  for (const Cluster& c : rel.clusters) {
    CHECK_FALSE(c.members.empty());
    total += c.members.size();
    for (const Symbol& m : c.members) CHECK(seen.insert(m).second);
  }
  CHECK(total == 12);
}
