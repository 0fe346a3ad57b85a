#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "dlpp/dlpp.hpp"

namespace {

dlpp::ShardSpec parse_shard(const std::string& s) {
    dlpp::ShardSpec spec;
    std::size_t slash = s.find('/');
    if (slash == std::string::npos)
        throw dlpp::ConfigError("--shard expects K/M, e.g. 0/4");
    try {
        spec.index = std::stoi(s.substr(0, slash));
        spec.total = std::stoi(s.substr(slash + 1));
    } catch (const std::exception&) {
        throw dlpp::ConfigError("--shard expects K/M, e.g. 0/4");
    }
    if (spec.total < 1 || spec.index < 0 || spec.index >= spec.total)
        throw dlpp::ConfigError("--shard out of range: need 0 <= K < M");
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dlpp: directed last-passage percolation simulation runner"};
    app.require_subcommand(1);

    std::string config_path, shard_str = "0/1", out_dir = "out", format = "json";
    std::uint64_t seed = 0;
    bool seed_set = false, trace = false;
    unsigned threads = 0;

    std::string chosen;
    for (const dlpp::Scenario* sc : dlpp::all_scenarios()) {
        CLI::App* sub = app.add_subcommand(sc->name(), sc->summary());
        sub->fallthrough();
        sub->callback([&chosen, sc] { chosen = sc->name(); });
    }
    app.add_option("--config", config_path, "experiment config file (key = value lines)");
    app.add_option("--seed", seed, "master seed (overrides the config)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--shard", shard_str, "shard spec K/M over sample indices");
    app.add_option("--out", out_dir, "output directory (reports, partials, manifests)");
    app.add_option("--format", format, "report format: json or csv (csv adds a .csv file)")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--trace", trace, "export coupling traces / grids for inspection");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        dlpp::Config cfg;
        if (!config_path.empty()) cfg = dlpp::parse_config(dlpp::read_file(config_path));
        if (cfg.scenario.empty())
            cfg.scenario = chosen;
        else if (cfg.scenario != chosen)
            throw dlpp::ConfigError("config scenario '" + cfg.scenario +
                                    "' does not match subcommand '" + chosen + "'");
        if (seed_set) {
            cfg.seed = seed;
            cfg.mark("seed");
        }

        dlpp::RunOptions opt;
        opt.out = out_dir;
        opt.shard = parse_shard(shard_str);
        opt.format = format;
        opt.trace = trace;
        opt.threads = threads;

        auto t0 = std::chrono::steady_clock::now();
        dlpp::RunResult res = dlpp::run_scenario(cfg, opt);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        if (!res.complete) {
            std::fprintf(stderr, "[dlpp] shard %s stored; waiting for remaining shards (%.1fs)\n",
                         shard_str.c_str(), secs);
            return 0;
        }
        std::fprintf(stderr, "[dlpp] %s -> %s (%.1fs)\n", chosen.c_str(),
                     res.report_path.string().c_str(), secs);
        bool all = true;
        for (const auto& v : res.report.verdicts) {
            std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(),
                        v.detail.c_str());
            all = all && v.pass;
        }
        return all ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
