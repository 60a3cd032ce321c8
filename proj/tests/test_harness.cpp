#include "doctest.h"

#include "mvlab/config.hpp"
#include "mvlab/outputs.hpp"
#include "mvlab/studies.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mvlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mvlab_test_" + name);
    fs::remove_all(p);
    return p;
}

const char* kSmall = R"(
# cheap settings for unit tests
seed = 3
[semigroup-bounds]
functions = 3
times = 4
[resolvent-decay]
rho_ladder = 1, 4, 16
[ou-toy]
replicas = 50
variance_samples = 500
)";

}  // namespace

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_AS(Config::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[a]\njust words\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[a b]\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[open\n"), ConfigError);
    try {
        Config::parse("[a]\n\nbad line\n");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    const Config c = Config::parse("[ou-toy]\nreplicas = 10\ntypo = 1\n");
    CHECK_THROWS_AS(read_section<OuToyParams>(c, "ou-toy"), ConfigError);
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    CHECK_THROWS_AS(validate_config(Config::parse("[not-a-study]\n")), ConfigError);
    CHECK_THROWS_AS(read_section<OuToyParams>(Config::parse("[ou-toy]\na = fast\n"), "ou-toy"), ConfigError);
    CHECK_THROWS_AS(read_section<OuToyParams>(Config::parse("[ou-toy]\nreplicas = -3\n"), "ou-toy"), ConfigError);
}

TEST_CASE("typed sections round-trip through canonical text") {
    const Config c = Config::parse(kSmall);
    CHECK(c.get("run", "seed") == "3");
    const auto p = read_section<OuToyParams>(c, "ou-toy");
    CHECK(p.replicas == 50);
    CHECK(p.ladder == std::vector<std::size_t>{64, 256, 1024});
    Config out;
    write_section(out, "ou-toy", p);
    const Config back = Config::parse(out.dump());
    CHECK(back == out);
    const auto q = read_section<OuToyParams>(back, "ou-toy");
    CHECK(q.a == p.a);
    CHECK(q.variance_samples == p.variance_samples);
    const LlnParams l = read_section<LlnParams>(Config::parse("[lln]\ntracks = gaussian, cauchy\n"), "lln");
    CHECK(l.tracks == std::vector<std::string>{"gaussian", "cauchy"});
}

TEST_CASE("manifest JSON round-trips through the config parser") {
    const Config c = Config::parse(kSmall);
    const StudyResult r = run_study("semigroup-bounds", c, RunSettings{3, 1, false, "x"});
    const auto j = manifest_json(r, {});
    const Config back = config_from_manifest(nlohmann::json::parse(j.dump()));
    CHECK(back == r.config);
    CHECK(Config::parse(back.dump()) == r.config);
    CHECK(back.get("run", "kind") == "semigroup-bounds");
    CHECK(back.get("semigroup-bounds", "functions") == "3");
}

TEST_CASE("outputs: files, fit block and byte-identical reruns") {
    const Config c = Config::parse(kSmall);
    const RunSettings run{3, 1, false, "x"};
    const fs::path a = scratch("a"), b = scratch("b");
    const auto fa = emit_outputs(run_study("resolvent-decay", c, run), a.string());
    const auto fb = emit_outputs(run_study("resolvent-decay", c, run), b.string());
    REQUIRE(fa.size() == fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i) {
        if (fa[i].ends_with(".json")) continue;  // carries wall time
        CHECK(slurp(fa[i]) == slurp(fb[i]));
    }
    const std::string fits = slurp(a / "resolvent-decay_fits.csv");
    CHECK(fits.rfind("series,slope,intercept,slope_se,ci_low,ci_high,r2,points\n", 0) == 0);
    const auto manifest = nlohmann::json::parse(slurp(a / "resolvent-decay_manifest.json"));
    CHECK(manifest["kind"] == "resolvent-decay");
    CHECK(manifest["verdicts"].size() == 2);
    CHECK(manifest["fits"].contains("eps_0.1"));
    std::ifstream dat(a / "resolvent-decay_eps_0.1.dat");
    std::string header;
    std::getline(dat, header);
    CHECK(header == "# x y yerr");
    double x, y, e;
    CHECK(static_cast<bool>(dat >> x >> y >> e));
    CHECK(x == 1.0);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("pre-flight rejects an unwritable directory") {
    CHECK_THROWS(preflight_writable("/proc/mvlab/out"));
    const fs::path file = scratch("file");
    std::ofstream(file) << "x";
    CHECK_THROWS(preflight_writable((file / "sub").string()));
    fs::remove(file);
}

TEST_CASE("suite runner") {
    const Config c = Config::parse(kSmall);
    const RunSettings run{3, 1, false, "x"};
    SUBCASE("empty manifest is an empty success") {
        const SuiteReport r = run_all({}, c, run, {});
        CHECK(r.results.empty());
        CHECK(r.pass());
    }
    SUBCASE("single kind equals direct invocation") {
        const SuiteReport r = run_all({"ou-toy"}, c, run, {});
        const StudyResult d = run_study("ou-toy", c, run);
        REQUIRE(r.results.size() == 1);
        CHECK(r.results[0].tables[0].rows == d.tables[0].rows);
        CHECK(r.results[0].verdicts.size() == d.verdicts.size());
        for (std::size_t i = 0; i < d.verdicts.size(); ++i) CHECK(r.results[0].verdicts[i].value == d.verdicts[i].value);
    }
    SUBCASE("failures are collected, not short-circuited") {
        Config bad = c;
        bad.set("stability", "eps_ladder", "0.1, oops");
        std::vector<std::string> seen;
        const SuiteReport r = run_all({"stability", "semigroup-bounds"}, bad, run,
                                      [&](const StudyResult& s) { seen.push_back(s.kind); });
        CHECK(seen == std::vector<std::string>{"stability", "semigroup-bounds"});
        CHECK_FALSE(r.pass());
        CHECK(r.results[1].pass());
        CHECK(r.failures.size() == 1);
    }
    CHECK_THROWS_AS(run_study("nope", c, run), ConfigError);
}

TEST_CASE("registry covers every kind and the default manifest") {
    CHECK(study_kinds().size() == 11);
    for (const auto& k : study_kinds()) CHECK(is_study_kind(k));
    for (const auto& k : default_manifest()) CHECK(is_study_kind(k));
    CHECK(default_manifest().size() == 9);
}

TEST_CASE("simulate study writes one row per particle and save time") {
    const Config c = Config::parse("[simulate]\nn = 7\nsave_times = 0.5, 1\n");
    const StudyResult r = run_study("simulate", c, RunSettings{});
    CHECK(r.tables[0].rows.size() == 14);
    CHECK(r.pass());
    CHECK_THROWS_AS(run_study("simulate", Config::parse("[simulate]\ninitial = lognormal\n"), RunSettings{}), ConfigError);
}
