#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dlpp/config.hpp"
#include "dlpp/report.hpp"

namespace dlpp {

struct ShardSpec {
    int index = 0;
    int total = 1;
};

struct RunOptions {
    std::filesystem::path out = "out";
    ShardSpec shard;
    std::string format = "json";  // "json" | "csv" (csv is written in addition)
    bool trace = false;
    unsigned threads = 0;  // 0 = hardware default
};

struct TableDecl {
    std::string name;
    std::uint64_t count = 0;
};

using TableSet = std::map<std::string, std::vector<json>>;

/// One named experiment. Sample generation is split into per-index rows, which
/// makes sharded and parallel execution reproducible by construction: a row is
/// a pure function of (config, table, index), and reduction always sees rows
/// in index order.
class Scenario {
public:
    virtual ~Scenario() = default;
    virtual std::string name() const = 0;
    virtual std::string summary() const = 0;
    virtual std::set<std::string> allowed_keys() const = 0;
    virtual void set_defaults(Config&) const = 0;
    virtual void validate(const Config&) const {}
    virtual std::vector<TableDecl> tables(const Config&) const = 0;
    virtual json row(const Config&, const std::string& table, std::uint64_t index) const = 0;
    virtual ReportRecord reduce(const Config&, const TableSet&, const RunOptions&) const = 0;
};

const std::vector<const Scenario*>& all_scenarios();  // defined in scenarios.hpp

inline const Scenario* find_scenario(const std::string& name) {
    for (const Scenario* s : all_scenarios())
        if (s->name() == name) return s;
    return nullptr;
}

namespace detail {

inline void default_key(Config& c, const std::string& key, const std::function<void(Config&)>& f) {
    if (!c.has(key)) {
        f(c);
        c.mark(key);
    }
}

}  // namespace detail

struct RunResult {
    bool complete = false;
    bool reused_partials = false;  // completed ranges were loaded, not recomputed
    ReportRecord report;
    std::filesystem::path report_path;
    std::filesystem::path csv_path;
};

namespace detail {

inline std::filesystem::path partial_path(const RunOptions& opt, const std::string& scenario,
                                          const std::string& hash, int k, int M) {
    return opt.out / (scenario + "-" + hash + ".part" + std::to_string(k) + "of" +
                      std::to_string(M) + ".json");
}

inline std::filesystem::path manifest_path(const RunOptions& opt, const std::string& scenario,
                                           const std::string& hash, int M) {
    return opt.out / (scenario + "-" + hash + ".manifest" + std::to_string(M) + ".json");
}

inline json load_manifest(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) return json();
    return json::parse(read_file(p));
}

}  // namespace detail

/// Runs (or resumes) a scenario. With shard k/M only the k-th range of each
/// sample table is computed and persisted; the merged report is produced once
/// all ranges are present and is byte-identical for every shard layout.
inline RunResult run_scenario(Config cfg, const RunOptions& opt) {
    const Scenario* sc = find_scenario(cfg.scenario);
    if (!sc) throw ConfigError("unknown scenario '" + cfg.scenario + "'");

    // reject config fields the scenario does not read
    std::set<std::string> allowed = sc->allowed_keys();
    allowed.insert("scenario");
    allowed.insert("seed");
    for (const auto& k : cfg.keys)
        if (!allowed.count(k))
            throw ConfigError("field '" + k + "' is not used by scenario '" + cfg.scenario + "'");

    sc->set_defaults(cfg);
    sc->validate(cfg);
    std::string hash = config_hash(cfg);

    int M = opt.shard.total;
    int K = opt.shard.index;
    if (M < 1 || K < 0 || K >= M) throw ConfigError("invalid shard spec");

    std::filesystem::create_directories(opt.out);
    auto decls = sc->tables(cfg);

    RunResult res;
    std::filesystem::path man_path = detail::manifest_path(opt, cfg.scenario, hash, M);
    json manifest = detail::load_manifest(man_path);
    if (manifest.is_null()) {
        manifest = json{{"scenario", cfg.scenario},
                        {"config_hash", hash},
                        {"shards_total", M},
                        {"completed", json::array()},
                        {"status", "pending"}};
    }

    auto shard_done = [&](int k) {
        for (const auto& e : manifest["completed"])
            if (e.get<int>() == k) return true;
        return false;
    };

    // compute (or skip) this shard's ranges
    std::filesystem::path part = detail::partial_path(opt, cfg.scenario, hash, K, M);
    if (shard_done(K) && std::filesystem::exists(part)) {
        res.reused_partials = true;
    } else {
        json tables_json;
        for (const auto& decl : decls) {
            std::uint64_t start = decl.count * static_cast<std::uint64_t>(K) / M;
            std::uint64_t end = decl.count * static_cast<std::uint64_t>(K + 1) / M;
            std::vector<json> rows(end - start);
            unsigned threads = opt.threads ? opt.threads : default_threads();
            parallel_for_index(end - start, threads, [&](std::uint64_t i) {
                rows[i] = sc->row(cfg, decl.name, start + i);
            });
            json jr = json::array();
            for (auto& r : rows) jr.push_back(std::move(r));
            tables_json[decl.name] = json{{"start", start}, {"rows", std::move(jr)}};
        }
        json pj{{"scenario", cfg.scenario},
                {"config_hash", hash},
                {"shard", K},
                {"total", M},
                {"tables", std::move(tables_json)}};
        write_file(part, pj.dump());
        if (!shard_done(K)) manifest["completed"].push_back(K);
        write_file(man_path, manifest.dump(2));
    }

    // merge when every range is present
    for (int k = 0; k < M; ++k) {
        if (!shard_done(k) || !std::filesystem::exists(
                                  detail::partial_path(opt, cfg.scenario, hash, k, M))) {
            res.complete = false;
            return res;
        }
    }

    TableSet tables;
    for (const auto& decl : decls) tables[decl.name] = {};
    for (int k = 0; k < M; ++k) {
        json pj = json::parse(read_file(detail::partial_path(opt, cfg.scenario, hash, k, M)));
        if (pj.at("config_hash").get<std::string>() != hash)
            throw Error("partial file hash mismatch for shard " + std::to_string(k));
        for (const auto& decl : decls) {
            const json& t = pj.at("tables").at(decl.name);
            auto& dst = tables[decl.name];
            if (t.at("start").get<std::uint64_t>() != dst.size())
                throw Error("partial ranges out of order for table " + decl.name);
            for (const auto& r : t.at("rows")) dst.push_back(r);
        }
    }
    for (const auto& decl : decls)
        if (tables[decl.name].size() != decl.count)
            throw Error("table " + decl.name + " incomplete after merge");

    res.report = sc->reduce(cfg, tables, opt);
    res.report.scenario = cfg.scenario;
    res.report.config_echo = cfg.to_json();
    res.complete = true;

    res.report_path = opt.out / (cfg.scenario + "-" + hash + ".report.json");
    write_file(res.report_path, emit_json(res.report));
    if (opt.format == "csv") {
        res.csv_path = opt.out / (cfg.scenario + "-" + hash + ".report.csv");
        write_file(res.csv_path, emit_csv(res.report));
    }
    manifest["status"] = "complete";
    write_file(man_path, manifest.dump(2));
    return res;
}

}  // namespace dlpp
