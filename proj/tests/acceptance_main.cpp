// Acceptance suite: runs every scenario at its acceptance-grade configuration
// and prints one PASS/FAIL line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlpp/dlpp.hpp"

namespace fs = std::filesystem;
using namespace dlpp;

namespace {

fs::path g_out;
unsigned g_threads = 0;

ReportRecord run(const std::string& config_text, const std::string& tag) {
    Config cfg = parse_config(config_text);
    RunOptions opt;
    opt.out = g_out / tag;
    opt.threads = g_threads;
    RunResult res = run_scenario(cfg, opt);
    if (!res.complete) throw Error("acceptance run did not complete: " + tag);
    return res.report;
}

const Verdict* find_verdict(const ReportRecord& rep, const std::string& name) {
    for (const auto& v : rep.verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

bool check_verdicts(const ReportRecord& rep, const std::vector<std::string>& names,
                    std::string& detail) {
    bool ok = true;
    for (const auto& name : names) {
        const Verdict* v = find_verdict(rep, name);
        if (!v) {
            detail += name + ": missing; ";
            ok = false;
            continue;
        }
        detail += name + ": " + v->detail + "; ";
        ok = ok && v->pass;
    }
    return ok;
}

struct Criterion {
    int id;
    std::string desc;
    std::function<bool(std::string&)> fn;
};

std::optional<ReportRecord> g_oracle_report;

const ReportRecord& oracle_report() {
    if (!g_oracle_report) g_oracle_report = run("scenario = oracle-check\n", "oracle-check");
    return *g_oracle_report;
}

}  // namespace

int main(int argc, char** argv) {
    g_out = fs::temp_directory_path() / "dlpp-acceptance";
    std::string only;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--out" && i + 1 < argc) g_out = argv[++i];
        if (arg == "--criterion" && i + 1 < argc) only = argv[++i];
        if (arg == "--threads" && i + 1 < argc) g_threads = std::stoul(argv[++i]);
    }
    fs::remove_all(g_out);
    fs::create_directories(g_out);

    std::vector<Criterion> criteria;

    criteria.push_back({1, "oracle equivalence of the DP on five laws, d in {2,3}",
                        [](std::string& d) {
                            return check_verdicts(oracle_report(), {"dp-equals-oracle"}, d);
                        }});

    criteria.push_back({2, "influence sum identity and corner symmetry at x=(8,8)",
                        [](std::string& d) {
                            ReportRecord rep = run("scenario = influence-map\n", "crit2");
                            return check_verdicts(rep, {"sum-identity", "corner-symmetry"}, d);
                        }});

    criteria.push_back(
        {3, "strict concavity: N=1 oracle mean and N=64 gap CI", [](std::string& d) {
             ReportRecord rep = run("scenario = concavity\n", "crit3");
             return check_verdicts(rep, {"n1-mean-in-band", "gap-positive-ci"}, d);
         }});

    criteria.push_back({4, "geometric d=2 variance exponent chi in [0.55, 0.80]",
                        [](std::string& d) {
                            ReportRecord rep = run("scenario = variance-scan\n", "crit4");
                            return check_verdicts(rep, {"chi-in-band"}, d);
                        }});

    criteria.push_back(
        {5, "gaussian sublinearity trend: var/N falls from N=32 to N=512", [](std::string& d) {
             ReportRecord rep = run(
                 "scenario = variance-scan\ndist = gaussian\nNs = 32,512\nn = 4000\n"
                 "check_trend = true\n",
                 "crit5");
             return check_verdicts(rep, {"var-over-n-decreasing"}, d);
         }});

    criteria.push_back(
        {6, "randomized start: exhaustive m=4 and sampled m=16 properties", [](std::string& d) {
             ReportRecord rep = run("scenario = z-start-check\n", "crit6");
             return check_verdicts(rep,
                                   {"exhaustive-flip-l1", "exhaustive-max-mass",
                                    "sampled-max-mass", "sampled-flip-l1"},
                                   d);
         }});

    criteria.push_back(
        {7, "influence spreading: max Ihat at m=8 below m=1, paired", [](std::string& d) {
             ReportRecord rep = run(
                 "scenario = influence-map\nx = 32,32\nn = 10000\nm_pair = 1,8\n", "crit7");
             return check_verdicts(rep, {"sum-identity", "influence-spreading"}, d);
         }});

    criteria.push_back({8, "phi-coupling domination, d in {2,3}, N=32, zero violations",
                        [](std::string& d) {
                            ReportRecord rep = run("scenario = phi-check\n", "crit8");
                            return check_verdicts(rep, {"phi-domination", "x-on-segment"}, d);
                        }});

    criteria.push_back(
        {9, "reflection: domination at the crossing, involution, multiset", [](std::string& d) {
             ReportRecord rep = run("scenario = reflect-check\n", "crit9");
             return check_verdicts(rep,
                                   {"reflection-domination", "reflection-involution",
                                    "weight-multiset-preserved"},
                                   d);
         }});

    criteria.push_back(
        {10, "embedding transport: pathwise equality, domination, ground states",
         [](std::string& d) {
             return check_verdicts(oracle_report(),
                                   {"embed-pathwise-exact", "embed-dominates",
                                    "transport-groundstate-equal"},
                                   d);
         }});

    criteria.push_back({11, "clamp-ratio constants: c_U <= 1/2, gaussian cases, c_Gamma finite",
                        [](std::string& d) {
                            ReportRecord rep = run("scenario = ratio-scan\n", "crit11");
                            return check_verdicts(rep,
                                                  {"uniform-sup-half", "gaussian-cases-bound",
                                                   "gamma-sup-finite"},
                                                  d);
                        }});

    criteria.push_back({12, "clamped-variance inequality at u=1/8, x=(64,64)",
                        [](std::string& d) {
                            ReportRecord rep = run("scenario = clamp-check\n", "crit12");
                            return check_verdicts(
                                rep, {"clamped-variance-bound", "clamp-contraction"}, d);
                        }});

    criteria.push_back(
        {13, "tail shape: d=1 exact law; d=2 monotone within the fitted envelope",
         [](std::string& d) {
             ReportRecord d1 = run("scenario = tail\nd = 1\nx = 100\nn = 100000\n", "crit13a");
             bool ok = check_verdicts(d1, {"tail-matches-normal-law", "tails-monotone"}, d);
             ReportRecord d2 = run("scenario = tail\n", "crit13b");
             ok = check_verdicts(d2, {"tails-monotone", "tail-envelope"}, d) && ok;
             return ok;
         }});

    criteria.push_back(
        {14, "shift-difference scaling: exponent < 0.5 and geodesic monotonicity",
         [](std::string& d) {
             ReportRecord rep = run("scenario = shift-scan\n", "crit14");
             return check_verdicts(rep, {"exponent-below-half", "h-monotone-on-geodesic"}, d);
         }});

    criteria.push_back(
        {15, "polymer ground states: var/N trend and centered reflection D1", [](std::string& d) {
             ReportRecord rep = run("scenario = polymer\n", "crit15");
             return check_verdicts(rep, {"var-over-n-decreasing", "groundstate-d1-centered"},
                                   d);
         }});

    criteria.push_back({16, "bernoulli(0.95) plateau: ghat((1/2,1/2)) >= 0.98 at N=512",
                        [](std::string& d) {
                            ReportRecord rep = run("scenario = plateau\n", "crit16");
                            return check_verdicts(rep, {"plateau-ghat-threshold"}, d);
                        }});

    criteria.push_back({17, "wandering exponent xi in [0.5, 0.85] for geometric weights",
                        [](std::string& d) {
                            ReportRecord rep = run("scenario = wandering\n", "crit17");
                            return check_verdicts(rep, {"xi-in-band"}, d);
                        }});

    criteria.push_back(
        {18, "determinism: byte-identical merged reports across shard layouts 1/2/4",
         [](std::string& d) {
             auto run_sharded = [&](const std::string& text, const std::string& tag, int M) {
                 Config cfg = parse_config(text);
                 RunOptions opt;
                 opt.out = g_out / tag;
                 opt.threads = g_threads;
                 RunResult res;
                 for (int k = 0; k < M; ++k) {
                     opt.shard = {k, M};
                     res = run_scenario(cfg, opt);
                 }
                 if (!res.complete) throw Error("sharded run incomplete: " + tag);
                 return read_file(res.report_path);
             };
             bool ok = true;
             for (const std::string& text :
                  {std::string("scenario = variance-scan\ndist = gaussian\nNs = 8,16\n"
                               "n = 41\nseed = 4242\n"),
                   std::string("scenario = influence-map\nx = 6,6\nn = 53\nseed = 4242\n")}) {
                 std::string name = parse_config(text).scenario;
                 std::string r1 = run_sharded(text, name + "-m1", 1);
                 std::string r2 = run_sharded(text, name + "-m2", 2);
                 std::string r4 = run_sharded(text, name + "-m4", 4);
                 bool same = r1 == r2 && r2 == r4;
                 d += name + (same ? ": byte-identical; " : ": DIFFERS; ");
                 ok = ok && same;
             }
             return ok;
         }});

    int failures = 0;
    double total = 0;
    for (auto& crit : criteria) {
        if (!only.empty() && only != std::to_string(crit.id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        bool pass = false;
        std::string detail;
        try {
            pass = crit.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        total += secs;
        std::printf("[%s] criterion %2d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", crit.id,
                    crit.desc.c_str(), secs);
        if (!detail.empty()) std::printf("            %s\n", detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    std::printf("%s: %d criterion(s) failed (%.1fs total)\n", failures ? "RESULT" : "RESULT",
                failures, total);
    return failures == 0 ? 0 : 1;
}
