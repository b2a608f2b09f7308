// End-to-end tests for the command-line tool. Each test runs the built
// binary as a subprocess and pins exact output text, JSON payloads,
// exit-code conventions, determinism across runs, and the sidecar-cache
// lifecycle (creation, reuse, invalidation, opt-out, relocation).
#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string dataFile(const std::string& name) {
    return std::string(LM_DATA_DIR) + "/" + name;
}

const fs::path& tempDir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("lemma_mill_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path tempPath(const std::string& stem) {
    static int counter = 0;
    return tempDir() / (stem + "_" + std::to_string(counter++));
}

std::string readFile(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeFile(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct RunResult {
    int exitCode = -1;
    std::string out;
    std::string err;
};

// Runs the CLI via /bin/sh, capturing stdout, stderr, and the exit code.
// By default the cache is disabled so tests never leave sidecar files
// behind; cache-lifecycle tests opt back in with noCache = false.
RunResult runCli(const std::string& args, bool noCache = true) {
    const fs::path outPath = tempPath("stdout");
    const fs::path errPath = tempPath("stderr");
    std::string cmd;
    if (noCache) cmd += "LEMMA_MILL_NO_CACHE=1 ";
    cmd += '"';
    cmd += LM_CLI_PATH;
    cmd += "\" ";
    cmd += args;
    cmd += " > \"" + outPath.string() + "\" 2> \"" + errPath.string() + "\"";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exitCode = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = readFile(outPath);
    r.err = readFile(errPath);
    fs::remove(outPath);
    fs::remove(errPath);
    return r;
}

}  // namespace

TEST_CASE("version flag reports the tool identity") {
    const RunResult r = runCli("--version");
    CHECK(r.exitCode == 0);
    CHECK(r.out == "lemma-mill 0.1.0\n");
}

TEST_CASE("theorem clustering pairs each tail-recursion theorem with its kin") {
    const RunResult r = runCli("cluster-thms " + dataFile("tail_recursion.lisp"));
    CHECK(r.exitCode == 0);
    CHECK(r.out ==
          "theorem clusters (granularity 3, seed 0):\n"
          "  fact-fact-tail, fib-fib-tail\n"
          "  expt-expt-tail, mult-mult-tail\n");
}

TEST_CASE("definition clustering separates accumulator wrappers from workers") {
    const RunResult r = runCli("cluster-defs " + dataFile("tail_recursion.lisp"));
    CHECK(r.exitCode == 0);
    CHECK(r.out ==
          "definition clusters (granularity 3, seed 0):\n"
          "  expt-tail, fact-tail, fib-tail, mult-tail\n"
          "  expt, fact, fib, helper-expt, helper-fact, helper-fib, "
          "helper-mult, mult\n");
}

TEST_CASE("similarity queries list co-clustered names") {
    const RunResult defs = runCli("cluster-defs " + dataFile("tail_recursion.lisp") +
                                  " --about expt");
    CHECK(defs.exitCode == 0);
    CHECK(defs.out ==
          "similar to expt: fact, fib, helper-expt, helper-fact, helper-fib, "
          "helper-mult, mult\n");

    const RunResult thms = runCli("cluster-thms " + dataFile("tail_recursion.lisp") +
                                  " --about expt-expt-tail");
    CHECK(thms.exitCode == 0);
    CHECK(thms.out == "similar to expt-expt-tail: mult-mult-tail\n");
}

TEST_CASE("suggest prints the surviving helper generalization with provenance") {
    const RunResult r =
        runCli("suggest expt-expt-tail " + dataFile("tail_recursion_lemmas.lisp"));
    CHECK(r.exitCode == 0);
    CHECK(r.out ==
          "target theorem: expt-expt-tail\n"
          "source theorem: mult-mult-tail\n"
          "source lemmas: mult-helper-mult, fact-fact-tail, fact-helper-fact, "
          "fib-fib-tail\n"
          "suggestion 1 (level 1, from mult-helper-mult, survived 100 "
          "satisfying tests):\n"
          "  (implies (and (natp n) (natp m) (natp a)) "
          "(equal (helper-expt n m a) (* a (expt n m))))\n");
}

TEST_CASE("suggest reports falsified candidates when nothing survives") {
    const RunResult r = runCli("suggest fib-fib-tail " +
                               dataFile("tail_recursion_lemmas.lisp") +
                               " --budget-l1 10 --budget-l2 1 --budget-l3 1");
    CHECK(r.exitCode == 0);
    CHECK(r.out.find("target theorem: fib-fib-tail\n") != std::string::npos);
    CHECK(r.out.find("source theorem: fact-fact-tail\n") != std::string::npos);
    CHECK(r.out.find("no suggestion survived testing\n") != std::string::npos);
    CHECK(r.out.find("falsified (from fact-helper-fact): "
                     "(implies (and (natp n) (natp j)) "
                     "(equal (helper-fib v1 n j) (* j (fib n))))\n") !=
          std::string::npos);
    CHECK(r.out.find("falsified (from fact-helper-fact): "
                     "(implies (and (natp n) (natp j)) "
                     "(equal (helper-fib n v1 j) (* j (fib n))))\n") !=
          std::string::npos);
    CHECK(r.out.find("  witness: ((") != std::string::npos);
}

TEST_CASE("guard command prints computed guards") {
    const RunResult helper =
        runCli("guard helper-fib " + dataFile("tail_recursion.lisp"));
    CHECK(helper.exitCode == 0);
    CHECK(helper.out ==
          "guard of helper-fib: (and (integerp n) (not (< n 0)) "
          "(acl2-numberp j) (acl2-numberp k))\n");

    const RunResult builtin = runCli("guard equal " + dataFile("tail_recursion.lisp"));
    CHECK(builtin.exitCode == 0);
    CHECK(builtin.out == "guard of equal: t\n");

    // Multi-file corpora concatenate in argument order.
    const RunResult multi = runCli("guard mult " + dataFile("list_length.lisp") +
                                   " " + dataFile("tail_recursion.lisp"));
    CHECK(multi.exitCode == 0);
    CHECK(multi.out ==
          "guard of mult: (and (integerp m) (not (< m 0)) (acl2-numberp n))\n");
}

TEST_CASE("preconditions command prints simplified guards and contradictions") {
    const RunResult fib = runCli(
        "preconditions \"(equal (helper-fib n j k) "
        "(+ (* (fib (- n 1)) j) (* (fib n) k)))\" " +
        dataFile("tail_recursion_lemmas.lisp"));
    CHECK(fib.exitCode == 0);
    CHECK(fib.out ==
          "preconditions: (and (integerp n) (not (< n 0)) (acl2-numberp j) "
          "(acl2-numberp k) (not (< (+ -1 n) 0)))\n");

    const RunResult ok = runCli(
        "preconditions \"(equal (+ res (length lst)) (lengthTail lst res))\" " +
        dataFile("list_length.lisp"));
    CHECK(ok.exitCode == 0);
    CHECK(ok.out == "preconditions: (acl2-numberp res)\n");

    const RunResult swapped = runCli(
        "preconditions \"(equal (+ res (length lst)) (lengthTail res lst))\" " +
        dataFile("list_length.lisp"));
    CHECK(swapped.exitCode == 0);
    CHECK(swapped.out ==
          "preconditions: nil\n"
          "contradiction: (acl2-numberp lst) conflicts with "
          "(or (consp lst) (equal lst nil))\n");
}

TEST_CASE("json mode emits machine-readable cluster reports") {
    const RunResult thms =
        runCli("cluster-thms " + dataFile("tail_recursion.lisp") + " --json");
    CHECK(thms.exitCode == 0);
    CHECK(json::parse(thms.out) == json::parse(R"json({
        "kind": "theorem",
        "granularity": 3,
        "seed": 0,
        "clusters": [["fact-fact-tail", "fib-fib-tail"],
                     ["expt-expt-tail", "mult-mult-tail"]],
        "noReliablePattern": []
    })json"));

    const RunResult about = runCli("cluster-defs " + dataFile("tail_recursion.lisp") +
                                   " --about expt --json");
    CHECK(about.exitCode == 0);
    CHECK(json::parse(about.out) == json::parse(R"json({
        "kind": "definition",
        "about": "expt",
        "similar": ["fact", "fib", "helper-expt", "helper-fact",
                    "helper-fib", "helper-mult", "mult"]
    })json"));
}

TEST_CASE("json mode emits guard, precondition, and suggestion payloads") {
    const RunResult guard =
        runCli("guard helper-fib " + dataFile("tail_recursion.lisp") + " --json");
    CHECK(guard.exitCode == 0);
    CHECK(json::parse(guard.out) == json::parse(R"json({
        "function": "helper-fib",
        "guard": "(and (integerp n) (not (< n 0)) (acl2-numberp j) (acl2-numberp k))"
    })json"));

    const RunResult contra = runCli(
        "preconditions \"(equal (+ res (length lst)) (lengthTail res lst))\" " +
        dataFile("list_length.lisp") + " --json");
    CHECK(contra.exitCode == 0);
    CHECK(json::parse(contra.out) == json::parse(R"json({
        "input": "(equal (+ res (length lst)) (lengthtail res lst))",
        "result": "nil",
        "contradiction": {
            "first": "(acl2-numberp lst)",
            "second": "(or (consp lst) (equal lst nil))"
        }
    })json"));

    const RunResult suggest = runCli(
        "suggest expt-expt-tail " + dataFile("tail_recursion_lemmas.lisp") + " --json");
    CHECK(suggest.exitCode == 0);
    CHECK(json::parse(suggest.out) == json::parse(R"json({
        "target": "expt-expt-tail",
        "source": "mult-mult-tail",
        "sourceLemmas": ["mult-helper-mult", "fact-fact-tail",
                         "fact-helper-fact", "fib-fib-tail"],
        "suggestions": [{
            "conclusion": "(equal (helper-expt n m a) (* a (expt n m)))",
            "preconditions": "(and (natp n) (natp m) (natp a))",
            "level": 1,
            "sourceLemma": "mult-helper-mult",
            "verdict": "survived"
        }],
        "falsified": []
    })json"));
}

TEST_CASE("empty populations produce notices instead of errors") {
    const RunResult noThms = runCli("cluster-thms " + dataFile("list_length.lisp"));
    CHECK(noThms.exitCode == 0);
    CHECK(noThms.out == "no theorems\n");

    const fs::path empty = tempPath("empty_corpus");
    writeFile(empty, "");
    const RunResult noDefs = runCli("cluster-defs " + empty.string());
    CHECK(noDefs.exitCode == 0);
    CHECK(noDefs.out == "no definitions\n");

    const RunResult jsonForm =
        runCli("cluster-thms " + dataFile("list_length.lisp") + " --json");
    CHECK(jsonForm.exitCode == 0);
    CHECK(json::parse(jsonForm.out) == json::parse(R"json({
        "kind": "theorem",
        "clusters": [],
        "noReliablePattern": []
    })json"));
}

TEST_CASE("exit codes distinguish usage errors from domain errors") {
    // Usage problems: bad invocation shape or unparsable input. Exit 64.
    CHECK(runCli("").exitCode == 64);
    CHECK(runCli("frobnicate " + dataFile("tail_recursion.lisp")).exitCode == 64);
    CHECK(runCli("cluster-defs").exitCode == 64);
    CHECK(runCli("cluster-defs " + dataFile("tail_recursion.lisp") +
                 " --granularity 9").exitCode == 64);
    const RunResult badTerm = runCli("preconditions \"(equal x\" " +
                                     dataFile("list_length.lisp"));
    CHECK(badTerm.exitCode == 64);
    CHECK(badTerm.err.find("error:") != std::string::npos);

    // Domain problems: well-formed requests the corpus cannot answer. Exit 2.
    const RunResult unknownThm =
        runCli("suggest nosuch " + dataFile("tail_recursion_lemmas.lisp"));
    CHECK(unknownThm.exitCode == 2);
    CHECK(unknownThm.err.find("error:") != std::string::npos);
    CHECK(runCli("guard nosuch " + dataFile("tail_recursion.lisp")).exitCode == 2);
    CHECK(runCli("cluster-defs " + dataFile("tail_recursion.lisp") +
                 " --about nosuch").exitCode == 2);

    const RunResult missing = runCli("cluster-defs " +
                                     (tempDir() / "no_such_file.lisp").string());
    CHECK(missing.exitCode == 2);
    CHECK(missing.err.find("cannot open") != std::string::npos);
}

TEST_CASE("outputs are byte-deterministic across repeat runs") {
    const std::string cmd =
        "suggest expt-expt-tail " + dataFile("tail_recursion_lemmas.lisp") + " --json";
    const RunResult first = runCli(cmd);
    const RunResult second = runCli(cmd);
    CHECK(first.exitCode == 0);
    CHECK(first.out == second.out);
}

TEST_CASE("cache sidecar is created, reused, and kept bit-stable") {
    // Work on a private copy so the shared fixtures stay pristine.
    const fs::path corpus = tempPath("corpus_copy");
    fs::copy_file(dataFile("tail_recursion.lisp"), corpus);
    const fs::path sidecar = corpus.string() + ".lmcache.json";

    // Definition clustering is recomputed from scratch on every run (its
    // feature vectors depend on corpus prefixes, not just the final value
    // table), so it stores nothing and writes no sidecar.
    const RunResult defs = runCli("cluster-defs " + corpus.string(),
                                  /*noCache=*/false);
    CHECK(defs.exitCode == 0);
    CHECK_FALSE(fs::exists(sidecar));

    // Theorem clustering consumes the final value table and caches it.
    const RunResult cold = runCli("cluster-thms " + corpus.string(),
                                  /*noCache=*/false);
    CHECK(cold.exitCode == 0);
    REQUIRE(fs::exists(sidecar));

    const json stored = json::parse(readFile(sidecar));
    CHECK(stored.at("tool") == "lemma-mill 0.1.0");
    CHECK(stored.at("config") == "granularity=3;seed=0");
    CHECK(stored.at("corpusHash").get<std::string>().rfind("fnv1a64:", 0) == 0);
    CHECK(stored.at("values").size() == 12);

    const std::string sidecarBytes = readFile(sidecar);
    const RunResult warm = runCli("cluster-thms " + corpus.string(),
                                  /*noCache=*/false);
    CHECK(warm.exitCode == 0);
    CHECK(warm.out == cold.out);
    CHECK(readFile(sidecar) == sidecarBytes);

    fs::remove(sidecar);
    fs::remove(corpus);
}

TEST_CASE("cache can be disabled or redirected") {
    const fs::path corpus = tempPath("corpus_nocache");
    fs::copy_file(dataFile("tail_recursion.lisp"), corpus);
    const fs::path sidecar = corpus.string() + ".lmcache.json";

    const RunResult off = runCli("cluster-thms " + corpus.string(),
                                 /*noCache=*/true);
    CHECK(off.exitCode == 0);
    CHECK_FALSE(fs::exists(sidecar));

    const fs::path redirected = tempPath("redirected_cache");
    const RunResult moved = runCli("guard helper-fib " + corpus.string() +
                                       " --cache " + redirected.string(),
                                   /*noCache=*/false);
    CHECK(moved.exitCode == 0);
    CHECK_FALSE(fs::exists(sidecar));
    REQUIRE(fs::exists(redirected));
    const json stored = json::parse(readFile(redirected));
    CHECK(stored.at("guardMemo").at("helper-fib") ==
          "(and (integerp n) (not (< n 0)) (acl2-numberp j) (acl2-numberp k))");

    fs::remove(redirected);
    fs::remove(corpus);
}

TEST_CASE("stale or corrupt caches are ignored and rebuilt") {
    const fs::path corpus = tempPath("corpus_stale");
    fs::copy_file(dataFile("tail_recursion.lisp"), corpus);
    const std::string expected =
        "theorem clusters (granularity 3, seed 0):\n"
        "  fact-fact-tail, fib-fib-tail\n"
        "  expt-expt-tail, mult-mult-tail\n";

    const fs::path cachePath = tempPath("broken_cache");
    writeFile(cachePath, "this is not json {{{");
    const RunResult corrupt = runCli("cluster-thms " + corpus.string() +
                                         " --cache " + cachePath.string(),
                                     /*noCache=*/false);
    CHECK(corrupt.exitCode == 0);
    CHECK(corrupt.out == expected);
    CHECK(json::parse(readFile(cachePath)).at("tool") == "lemma-mill 0.1.0");

    writeFile(cachePath, R"({"tool": "someone-else 9.9", "corpusHash": "x",
                             "config": "", "values": {}, "guardMemo": {}})");
    const RunResult stale = runCli("cluster-thms " + corpus.string() +
                                       " --cache " + cachePath.string(),
                                   /*noCache=*/false);
    CHECK(stale.exitCode == 0);
    CHECK(stale.out == expected);
    CHECK(json::parse(readFile(cachePath)).at("tool") == "lemma-mill 0.1.0");

    fs::remove(cachePath);
    fs::remove(corpus);
}

TEST_CASE("warm cache reproduces cold-run output byte for byte") {
    const fs::path cachePath = tempPath("suggest_cache");
    const std::string cmd = "suggest expt-expt-tail " +
                            dataFile("tail_recursion_lemmas.lisp") + " --cache " +
                            cachePath.string();
    const RunResult cold = runCli(cmd, /*noCache=*/false);
    REQUIRE(fs::exists(cachePath));
    const RunResult warm = runCli(cmd, /*noCache=*/false);
    CHECK(cold.exitCode == 0);
    CHECK(warm.exitCode == 0);
    CHECK(cold.out == warm.out);

    // The warm run must reuse the stored value summaries, not recompute
    // and rewrite them: the cache file itself stays unchanged.
    const std::string bytes = readFile(cachePath);
    const RunResult third = runCli(cmd, /*noCache=*/false);
    CHECK(third.out == cold.out);
    CHECK(readFile(cachePath) == bytes);

    fs::remove(cachePath);
}
