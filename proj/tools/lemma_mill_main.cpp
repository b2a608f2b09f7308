// lemma-mill: statistical clustering, analogy-driven lemma suggestion, and
// guard/precondition queries over s-expression corpora.
//
// One command per process. All output is deterministic for a fixed corpus,
// flags, and seed. A JSON sidecar cache next to the first corpus file
// persists the recurrent function-numbering map and memoised guards across
// invocations; it is invalidated by content hash and tool version and never
// changes any output.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lemmamill/analogy.hpp"
#include "lemmamill/clustering.hpp"
#include "lemmamill/corpus.hpp"
#include "lemmamill/errors.hpp"
#include "lemmamill/guards.hpp"
#include "lemmamill/sexpr.hpp"
#include "lemmamill/term.hpp"
#include "lemmamill/testing.hpp"
#include "lemmamill/version.hpp"

using nlohmann::ordered_json;
using namespace lemmamill;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitUsage = 64;

// ---------------------------------------------------------------------------
// Sidecar cache
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

// Content digest over the corpus files, order-sensitive, path-independent.
std::string corpusDigest(const std::vector<std::string>& paths) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const std::string& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("IoError", "cannot read corpus file: " + p);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    h = fnv1a64(std::to_string(content.size()) + ":", h);
    h = fnv1a64(content, h);
  }
  return "fnv1a64:" + hex64(h);
}

struct Cache {
  bool enabled = false;
  std::string path;
  std::string hash;
  std::string config;  // fingerprint of the flags the value map depends on

  std::optional<ValueMap> values;  // loaded values valid under `config`
  GuardTable guards;               // memo preloaded from the cache
  std::set<Symbol> loadedGuards;   // keys that came from the file

  ordered_json storedValues = ordered_json::object();
  std::string storedConfig;
  bool computedValues = false;
};

Cache openCache(const std::vector<std::string>& paths, const std::string& at,
                int granularity, std::uint64_t seed) {
  Cache c;
  const char* off = std::getenv("LEMMA_MILL_NO_CACHE");
  c.enabled = !(off && std::string(off) == "1");
  c.path = at.empty() ? paths.front() + ".lmcache.json" : at;
  c.hash = corpusDigest(paths);
  c.config = "granularity=" + std::to_string(granularity) +
             ";seed=" + std::to_string(seed);
  if (!c.enabled) return c;

  std::ifstream in(c.path, std::ios::binary);
  if (!in) return c;
  ordered_json j;
  try {
    j = ordered_json::parse(in);
    if (j.value("tool", "") != kToolVersion) return c;
    if (j.value("corpusHash", "") != c.hash) return c;
    c.storedConfig = j.value("config", "");
    if (j.contains("values") && j["values"].is_object())
      c.storedValues = j["values"];
    if (c.storedConfig == c.config && !c.storedValues.empty()) {
      ValueMap vm;
      for (const auto& [name, hexstr] : c.storedValues.items())
        vm.entries[Symbol(name)] = std::bit_cast<double>(
            std::stoull(hexstr.get<std::string>(), nullptr, 16));
      c.values = std::move(vm);
    }
    if (j.contains("guardMemo") && j["guardMemo"].is_object())
      for (const auto& [name, text] : j["guardMemo"].items()) {
        Symbol f(name);
        c.guards.memo[f] = parseTermString(text.get<std::string>());
        c.loadedGuards.insert(f);
      }
  } catch (...) {
    // Unreadable or stale cache: ignore it entirely and start fresh.
    c.storedConfig.clear();
    c.storedValues = ordered_json::object();
    c.guards = GuardTable{};
    c.loadedGuards.clear();
    c.values.reset();
  }
  return c;
}

void saveCache(Cache& c, const ValueMap* freshValues) {
  if (!c.enabled) return;
  bool newGuards = false;
  for (const auto& [f, g] : c.guards.memo)
    if (!c.loadedGuards.count(f)) newGuards = true;
  if (!c.computedValues && !newGuards) return;

  ordered_json j;
  j["tool"] = kToolVersion;
  j["corpusHash"] = c.hash;
  if (c.computedValues && freshValues) {
    j["config"] = c.config;
    ordered_json vals = ordered_json::object();
    for (const auto& [name, v] : freshValues->entries)
      vals[name.display()] = hex64(std::bit_cast<std::uint64_t>(v));
    j["values"] = std::move(vals);
  } else {
    j["config"] = c.storedConfig;
    j["values"] = c.storedValues;
  }
  ordered_json memo = ordered_json::object();
  for (const auto& [f, g] : c.guards.memo)
    memo[f.display()] = printCanonical(g);
  j["guardMemo"] = std::move(memo);

  const std::string tmp = c.path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return;  // cache is best-effort; never fail the command
    out << j.dump(2) << "\n";
  }
  std::rename(tmp.c_str(), c.path.c_str());
}

// ---------------------------------------------------------------------------
// Shared command plumbing
// ---------------------------------------------------------------------------

struct CommonOpts {
  std::vector<std::string> paths;
  int granularity = 3;
  std::uint64_t seed = 0;
  bool json = false;
  std::string cachePath;
};

ClusterConfig clusterConfig(const CommonOpts& o) {
  ClusterConfig cfg;
  cfg.granularity = o.granularity;
  cfg.seed = o.seed;
  return cfg;
}

// The function-numbering map, from the cache when valid, recomputed (and
// marked for persisting) otherwise.
ValueMap obtainValues(const Corpus& corpus, const CommonOpts& o, Cache& cache) {
  if (cache.values) return *cache.values;
  ValueMap v = recurrentClusterDefinitions(corpus, clusterConfig(o)).values;
  cache.computedValues = true;
  return v;
}

std::string joinNames(const std::vector<Symbol>& names) {
  std::string out;
  for (const Symbol& s : names) {
    if (!out.empty()) out += ", ";
    out += s.display();
  }
  return out;
}

// Presentation form of a statement: hypothesis chains regrouped into a
// structural conjunction, arithmetic cores sugared back to + * -.
std::string displayStatement(const Term& stmt) {
  auto [hyps, concl] = detail::splitImplies(stmt);
  return displaySurface(
      detail::makeImplication(detail::conjunctionForm(hyps), concl));
}

void printJson(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------------------
// cluster-defs / cluster-thms
// ---------------------------------------------------------------------------

int runClusters(EventKind kind, const CommonOpts& o, const std::string& about) {
  Corpus corpus = parseCorpus(o.paths);
  Cache cache = openCache(o.paths, o.cachePath, o.granularity, o.seed);
  const bool defs = kind == EventKind::Definition;
  const char* kindWord = defs ? "definition" : "theorem";

  const std::vector<Symbol> population =
      defs ? corpus.definitionsInOrder() : corpus.theoremsInOrder();
  if (population.empty()) {
    if (o.json) {
      ordered_json j;
      j["kind"] = kindWord;
      j["clusters"] = ordered_json::array();
      j["noReliablePattern"] = ordered_json::array();
      printJson(j);
    } else {
      std::cout << "no " << kindWord << "s\n";
    }
    return kExitOk;
  }

  if (!about.empty()) {
    ValueMap values = obtainValues(corpus, o, cache);
    std::vector<Symbol> sims =
        similarTo(Symbol(about), kind, corpus, values, clusterConfig(o));
    saveCache(cache, &values);
    if (o.json) {
      ordered_json j;
      j["kind"] = kindWord;
      j["about"] = Symbol(about).display();
      ordered_json arr = ordered_json::array();
      for (const Symbol& s : sims) arr.push_back(s.display());
      j["similar"] = std::move(arr);
      printJson(j);
    } else if (sims.empty()) {
      std::cout << "no similar " << kindWord << "s for "
                << Symbol(about).display() << "\n";
    } else {
      std::cout << "similar to " << Symbol(about).display() << ": "
                << joinNames(sims) << "\n";
    }
    return kExitOk;
  }

  Clustering rel;
  if (defs) {
    rel = reliableDefinitionClusters(corpus, clusterConfig(o));
    saveCache(cache, nullptr);
  } else {
    ValueMap values = obtainValues(corpus, o, cache);
    rel = reliableTheoremClusters(corpus, values, clusterConfig(o));
    saveCache(cache, &values);
  }

  std::vector<std::vector<Symbol>> groups;
  std::vector<Symbol> singletons;
  for (const Cluster& c : rel.clusters) {
    if (c.members.size() > 1)
      groups.push_back(c.members);
    else
      singletons.push_back(c.members[0]);
  }
  std::sort(singletons.begin(), singletons.end());

  if (o.json) {
    ordered_json j;
    j["kind"] = kindWord;
    j["granularity"] = o.granularity;
    j["seed"] = o.seed;
    ordered_json arr = ordered_json::array();
    for (const auto& g : groups) {
      ordered_json one = ordered_json::array();
      for (const Symbol& s : g) one.push_back(s.display());
      arr.push_back(std::move(one));
    }
    j["clusters"] = std::move(arr);
    ordered_json singles = ordered_json::array();
    for (const Symbol& s : singletons) singles.push_back(s.display());
    j["noReliablePattern"] = std::move(singles);
    printJson(j);
    return kExitOk;
  }

  std::cout << kindWord << " clusters (granularity " << o.granularity
            << ", seed " << o.seed << "):\n";
  for (const auto& g : groups) std::cout << "  " << joinNames(g) << "\n";
  if (!singletons.empty())
    std::cout << "no reliable pattern: " << joinNames(singletons) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// suggest
// ---------------------------------------------------------------------------

struct SuggestOpts {
  CommonOpts common;
  std::string theorem;
  int budgetL1 = 50;
  int budgetL2 = 500;
  int budgetL3 = 2000;
};

ordered_json candidateJson(const CandidateLemma& c) {
  ordered_json j;
  j["conclusion"] = displaySurface(c.conclusion);
  j["preconditions"] = displaySurface(c.preconditions);
  j["level"] = c.provenance.level;
  j["sourceLemma"] = c.provenance.sourceLemma.display();
  j["verdict"] = "survived";
  return j;
}

int runSuggest(const SuggestOpts& so) {
  const CommonOpts& o = so.common;
  Corpus corpus = parseCorpus(o.paths);
  Cache cache = openCache(o.paths, o.cachePath, o.granularity, o.seed);

  const Symbol tt(so.theorem);
  const Event* e = corpus.find(tt);
  if (!e || e->kind != EventKind::Theorem) {
    std::cerr << "error: unknown theorem: " << tt.display() << "\n";
    return kExitDomain;
  }

  ValueMap values = obtainValues(corpus, o, cache);
  std::optional<Symbol> st =
      chooseSourceTheorem(tt, corpus, values, clusterConfig(o));
  saveCache(cache, &values);
  if (!st) {
    if (o.json) {
      ordered_json j;
      j["target"] = tt.display();
      j["source"] = nullptr;
      j["sourceLemmas"] = ordered_json::array();
      j["suggestions"] = ordered_json::array();
      j["falsified"] = ordered_json::array();
      printJson(j);
    } else {
      std::cout << "no similar theorems for " << tt.display() << "\n";
    }
    return kExitOk;
  }

  Clustering defClusters = reliableDefinitionClusters(corpus, clusterConfig(o));
  std::vector<Symbol> sls = discoverSourceLemmas(*st, tt, corpus, defClusters);

  TestConfig tcfg;
  tcfg.seed = o.seed;
  LevelBudgets budgets;
  budgets.l1 = so.budgetL1;
  budgets.l2 = so.budgetL2;
  budgets.l3 = so.budgetL3;

  AnalogyProblem problem{tt, *st, sls};
  std::vector<CandidateLemma> survivors =
      sls.empty() ? std::vector<CandidateLemma>{}
                  : suggestLemmas(problem, corpus, defClusters, tcfg, budgets);

  // Diagnostics when nothing survives: the level-1 rewrites that testing
  // killed, each with its counterexample witness.
  struct Falsified {
    Term stmt;
    Symbol source;
    Witness witness;
  };
  std::vector<Falsified> falsified;
  if (survivors.empty() && !sls.empty()) {
    std::vector<AnalogyMap> maps =
        buildAnalogyMap(tt, *st, corpus, defClusters);
    std::set<std::string> seen;
    for (const Symbol& slName : sls) {
      if (falsified.size() >= 3) break;
      const Event& sl = corpus.at(slName);
      for (const AnalogyMap& map : maps) {
        if (falsified.size() >= 3) break;
        for (Term& stmt : mutateLevel1(sl, map, corpus, budgets.l1)) {
          if (falsified.size() >= 3) break;
          if (!seen.insert(printCanonical(alphaCanonical(stmt))).second)
            continue;
          auto [rawHyps, concl] = detail::splitImplies(stmt);
          TestVerdict v = testConjecture(detail::conjunctionForm(rawHyps),
                                         concl, corpus, tcfg);
          if (v.kind == VerdictKind::Falsified)
            falsified.push_back({stmt, slName, v.witness});
        }
      }
    }
  }

  if (o.json) {
    ordered_json j;
    j["target"] = tt.display();
    j["source"] = st->display();
    ordered_json slArr = ordered_json::array();
    for (const Symbol& s : sls) slArr.push_back(s.display());
    j["sourceLemmas"] = std::move(slArr);
    ordered_json sugg = ordered_json::array();
    for (const CandidateLemma& c : survivors) sugg.push_back(candidateJson(c));
    j["suggestions"] = std::move(sugg);
    ordered_json fals = ordered_json::array();
    for (const Falsified& f : falsified) {
      ordered_json one;
      one["statement"] = displayStatement(f.stmt);
      one["sourceLemma"] = f.source.display();
      one["verdict"] = "falsified";
      one["witness"] = printWitness(f.witness);
      fals.push_back(std::move(one));
    }
    j["falsified"] = std::move(fals);
    printJson(j);
    return kExitOk;
  }

  std::cout << "target theorem: " << tt.display() << "\n";
  std::cout << "source theorem: " << st->display() << "\n";
  std::cout << "source lemmas: "
            << (sls.empty() ? std::string("none") : joinNames(sls)) << "\n";
  if (survivors.empty()) {
    std::cout << "no suggestion survived testing\n";
    for (const Falsified& f : falsified) {
      std::cout << "falsified (from " << f.source.display()
                << "): " << displayStatement(f.stmt) << "\n";
      std::cout << "  witness: " << printWitness(f.witness) << "\n";
    }
    return kExitOk;
  }
  int i = 0;
  for (const CandidateLemma& c : survivors) {
    ++i;
    std::cout << "suggestion " << i << " (level " << c.provenance.level
              << ", from " << c.provenance.sourceLemma.display()
              << ", survived " << c.verdict.satisfyingCount
              << " satisfying tests):\n";
    std::cout << "  " << displaySurface(c.statement()) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// preconditions / guard
// ---------------------------------------------------------------------------

int runPreconditions(const CommonOpts& o, const std::string& conjText) {
  Term conjecture;
  try {
    conjecture = parseTermString(conjText);
  } catch (const Error& e) {
    std::cerr << "error: cannot parse conjecture: " << e.what() << "\n";
    return kExitUsage;
  }
  Corpus corpus = parseCorpus(o.paths);
  Cache cache = openCache(o.paths, o.cachePath, o.granularity, o.seed);

  ContradictionInfo why;
  Term result =
      generatePreconditions(conjecture, corpus, cache.guards, &why);
  saveCache(cache, nullptr);

  const bool contradictory = result.kind == TermKind::Nil;
  if (o.json) {
    ordered_json j;
    j["input"] = displaySurface(conjecture);
    j["result"] = displaySurface(result);
    if (contradictory) {
      ordered_json c;
      c["first"] = displaySurface(why.first);
      c["second"] = displaySurface(why.second);
      j["contradiction"] = std::move(c);
    }
    printJson(j);
    return kExitOk;
  }
  std::cout << "preconditions: " << displaySurface(result) << "\n";
  if (contradictory)
    std::cout << "contradiction: " << displaySurface(why.first)
              << " conflicts with " << displaySurface(why.second) << "\n";
  return kExitOk;
}

int runGuard(const CommonOpts& o, const std::string& fnName) {
  Corpus corpus = parseCorpus(o.paths);
  Cache cache = openCache(o.paths, o.cachePath, o.granularity, o.seed);
  const Symbol f(fnName);
  Term g = guardOf(f, corpus, cache.guards);
  saveCache(cache, nullptr);
  if (o.json) {
    ordered_json j;
    j["function"] = f.display();
    j["guard"] = displaySurface(g);
    printJson(j);
    return kExitOk;
  }
  std::cout << "guard of " << f.display() << ": " << displaySurface(g) << "\n";
  return kExitOk;
}

void addCommonFlags(CLI::App* cmd, CommonOpts& o, bool clusterFlags) {
  cmd->add_option("paths", o.paths, "corpus files, processed in order")
      ->required()
      ->expected(-1);
  cmd->add_flag("--json", o.json, "machine-readable JSON output");
  cmd->add_option("--cache", o.cachePath,
                  "cache file (default: sidecar next to the first path)");
  if (clusterFlags) {
    cmd->add_option("--granularity", o.granularity,
                    "clustering granularity, 1 (coarse) to 5 (fine)")
        ->check(CLI::Range(1, 5));
    cmd->add_option("--seed", o.seed, "random seed");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statistical lemma discovery over s-expression corpora"};
  app.name("lemma-mill");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonOpts defsOpts, thmsOpts;
  std::string defsAbout, thmsAbout;
  CLI::App* cdefs = app.add_subcommand(
      "cluster-defs", "reliable clusters of similar function definitions");
  addCommonFlags(cdefs, defsOpts, true);
  cdefs->add_option("--about", defsAbout,
                    "only definitions similar to this one");

  CLI::App* cthms = app.add_subcommand(
      "cluster-thms", "reliable clusters of similar theorem statements");
  addCommonFlags(cthms, thmsOpts, true);
  cthms->add_option("--about", thmsAbout, "only theorems similar to this one");

  SuggestOpts sugOpts;
  CLI::App* csug = app.add_subcommand(
      "suggest", "generate tested lemma candidates for a theorem");
  csug->add_option("theorem", sugOpts.theorem, "target theorem name")
      ->required();
  addCommonFlags(csug, sugOpts.common, true);
  csug->add_option("--budget-l1", sugOpts.budgetL1,
                   "mutation budget for tree reconstruction")
      ->check(CLI::PositiveNumber);
  csug->add_option("--budget-l2", sugOpts.budgetL2,
                   "mutation budget for node expansion")
      ->check(CLI::PositiveNumber);
  csug->add_option("--budget-l3", sugOpts.budgetL3,
                   "mutation budget for term-tree expansion")
      ->check(CLI::PositiveNumber);

  CommonOpts preOpts;
  std::string conjecture;
  CLI::App* cpre = app.add_subcommand(
      "preconditions", "guard-derived preconditions of a conjecture");
  cpre->add_option("conjecture", conjecture, "conjecture s-expression")
      ->required();
  addCommonFlags(cpre, preOpts, false);

  CommonOpts guardOpts;
  std::string guardFn;
  CLI::App* cguard =
      app.add_subcommand("guard", "inferred guard of a defined function");
  cguard->add_option("function", guardFn, "function name")->required();
  addCommonFlags(cguard, guardOpts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(cdefs))
      return runClusters(EventKind::Definition, defsOpts, defsAbout);
    if (app.got_subcommand(cthms))
      return runClusters(EventKind::Theorem, thmsOpts, thmsAbout);
    if (app.got_subcommand(csug)) return runSuggest(sugOpts);
    if (app.got_subcommand(cpre)) return runPreconditions(preOpts, conjecture);
    if (app.got_subcommand(cguard)) return runGuard(guardOpts, guardFn);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}
