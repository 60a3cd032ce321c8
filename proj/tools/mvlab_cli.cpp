// Command-line front end: one subcommand per study plus `all`.

#include "mvlab/config.hpp"
#include "mvlab/outputs.hpp"
#include "mvlab/studies.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

using namespace mvlab;

namespace {

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
    bool quick = false;
};

void print_result(const StudyResult& r) {
    for (const auto& v : r.verdicts)
        std::printf("%-18s %-28s %s  value=%.6g  (%s)%s%s\n", r.kind.c_str(), v.name.c_str(),
                    r.exploratory ? "INFO" : (v.pass ? "PASS" : "FAIL"), v.value, v.criterion.c_str(),
                    v.detail.empty() ? "" : "  ", v.detail.c_str());
    for (const auto& n : r.notes) std::printf("%-18s note: %s\n", r.kind.c_str(), n.c_str());
    std::printf("%-18s wall %.1f s\n", r.kind.c_str(), r.wall_seconds);
    std::fflush(stdout);
}

int execute(const std::string& kind, const Flags& f, CLI::App& app) {
    Config cfg = f.config.empty() ? Config{} : Config::load(f.config);
    validate_config(cfg);
    RunSection rs = read_section<RunSection>(cfg, "run");
    RunSettings run{rs.seed, rs.threads, rs.quick, rs.out};
    if (app.count("--seed")) run.seed = f.seed;
    if (app.count("--out")) run.out = f.out;
    if (app.count("--threads")) run.threads = f.threads;
    if (f.quick) run.quick = true;
    if (run.threads < 1) throw ConfigError("--threads must be at least 1");
    preflight_writable(run.out);

    const std::vector<std::string> manifest = kind == "all" ? default_manifest() : std::vector<std::string>{kind};
    const SuiteReport rep = run_all(manifest, cfg, run, [&](const StudyResult& r) {
        print_result(r);
        emit_outputs(r, run.out);
    });
    if (!rep.pass()) {
        std::printf("FAILED verdicts:\n");
        for (const auto& s : rep.failures) std::printf("  %s\n", s.c_str());
        return 1;
    }
    std::printf("all verdicts pass\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-field particle systems: simulation, PDE reference and convergence studies"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", f.seed, "master seed");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--threads", f.threads, "worker threads");
    app.add_flag("--quick", f.quick, "reduced ladders and replica counts");
    app.fallthrough();

    std::vector<std::string> kinds = study_kinds();
    kinds.push_back("all");
    for (const auto& k : kinds) app.add_subcommand(k, k == "all" ? "run every study in the default manifest" : "run " + k);

    CLI11_PARSE(app, argc, argv);
    const std::string kind = app.get_subcommands().front()->get_name();
    try {
        return execute(kind, f, app);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
