#pragma once

#include <cstdio>
#include <set>

#include "dlpp/couplings.hpp"
#include "dlpp/estimators.hpp"
#include "dlpp/runner.hpp"

namespace dlpp {
namespace scenarios {

inline std::string fmtg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::vector<double> scalars(const TableSet& ts, const std::string& name) {
    const auto& rows = ts.at(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.get<double>());
    return out;
}

inline Verdict verdict(const std::string& name, bool pass, const std::string& rule,
                       const std::string& detail) {
    return Verdict{name, pass, rule, detail};
}

inline Point as_point(const std::vector<Coord>& v) { return Point{std::vector<Coord>(v)}; }

inline std::vector<int> dims_of(const Config& cfg) {
    if (cfg.has("d")) return {cfg.d};
    return {2, 3};
}

inline void require_increasing_pow2(const std::vector<Coord>& Ns, const std::string& field) {
    Coord prev = 0;
    for (Coord N : Ns) {
        if (N < 8 || (N & (N - 1)) != 0)
            throw ConfigError("field '" + field + "': entries must be dyadic and >= 8");
        if (N <= prev) throw ConfigError("field '" + field + "': entries must increase");
        prev = N;
    }
}

// ---------------------------------------------------------------------------
// oracle-check: DP vs. enumeration on small boxes, plus the E> -> E^ embedding
// transport identities.
// ---------------------------------------------------------------------------

class OracleCheck final : public Scenario {
public:
    std::string name() const override { return "oracle-check"; }
    std::string summary() const override {
        return "last_passage_time vs brute-force enumeration; embedding transport checks";
    }
    std::set<std::string> allowed_keys() const override { return {"n", "max_norm", "d"}; }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "n", [](Config& x) { x.n = 100; });
        detail::default_key(c, "max_norm", [](Config& x) { x.max_norm = 10; });
    }

    void validate(const Config& c) const override {
        if (c.has("d") && c.d != 2 && c.d != 3)
            throw ConfigError("oracle-check: d must be 2 or 3");
        if (c.max_norm < 1 || c.max_norm > 14)
            throw ConfigError("oracle-check: max_norm must lie in [1, 14]");
    }

    static const std::vector<Distribution>& laws() {
        static const std::vector<Distribution> v = {
            Distribution::gaussian(), Distribution::uniform01(), Distribution::gamma(2.0, 1.0),
            Distribution::geometric(0.5), Distribution::bernoulli(0.5)};
        return v;
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        std::vector<TableDecl> t;
        for (int d : dims_of(c)) {
            for (const auto& law : laws())
                t.push_back({"oracle-" + law.name() + "-d" + std::to_string(d), c.n});
            t.push_back({"embed-d" + std::to_string(d), c.n});
        }
        for (int d : dims_of(c))
            if (d == 2) t.push_back({"transport-d2", c.n});
        return t;
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        if (table.rfind("oracle-", 0) == 0) {
            int d = table.back() - '0';
            std::size_t law_idx = laws().size();
            for (std::size_t k = 0; k < laws().size(); ++k)
                if (table == "oracle-" + laws()[k].name() + "-d" + std::to_string(d)) law_idx = k;
            if (law_idx == laws().size()) throw Error("unknown table " + table);
            SeedContext ctx{c.seed, 100 + law_idx * 10 + static_cast<std::uint64_t>(d), i};
            Point y = random_target(ctx, d, c.max_norm);
            WeightField f(laws()[law_idx], ctx, Box(Point::zero(d), y));
            double t = last_passage_time(f, Point::zero(d), y);
            double o = brute_force_oracle(f, Point::zero(d), y, Graph::Ordered, 1 << 20);
            return json{{"diff", std::abs(t - o)}, {"norm", l1(y)}};
        }
        if (table.rfind("embed-", 0) == 0) {
            int d = table.back() - '0';
            SeedContext ctx{c.seed, 200 + static_cast<std::uint64_t>(d), i};
            Point a = random_target(ctx, d, 12);
            return embed_row(c, ctx, a);
        }
        // transport-d2
        SeedContext ctx{c.seed, 300, i};
        return transport_row(c, ctx);
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        ReportRecord rep;
        double worst = 0;
        bool pathwise = true, restricted = true, dominates = true, transport = true;
        for (const auto& [name, rows] : ts) {
            if (name.rfind("oracle-", 0) == 0) {
                double mx = 0;
                for (const auto& r : rows) mx = std::max(mx, r.at("diff").get<double>());
                worst = std::max(worst, mx);
                rep.csv_rows.push_back(json{{"table", name}, {"max_abs_diff", mx}});
            } else if (name.rfind("embed-", 0) == 0) {
                for (const auto& r : rows) {
                    pathwise = pathwise && r.at("pathwise_ok").get<bool>();
                    restricted = restricted && r.at("restricted_equal").get<bool>();
                    dominates = dominates && r.at("dominates").get<bool>();
                }
            } else if (name == "transport-d2") {
                for (const auto& r : rows) transport = transport && r.at("ok").get<bool>();
            }
        }
        double tol = 1e-12 * static_cast<double>(c.max_norm);
        rep.metrics = json{{"max_abs_diff", worst}, {"tolerance", tol}};
        rep.verdicts.push_back(verdict("dp-equals-oracle", worst <= tol,
                                       "max |T - oracle| <= 1e-12 * |y|",
                                       "max diff " + fmtg(worst)));
        rep.verdicts.push_back(verdict("embed-pathwise-exact", pathwise && restricted,
                                       "path weights transport exactly; restricted max equals T",
                                       pathwise && restricted ? "exact" : "violated"));
        rep.verdicts.push_back(verdict("embed-dominates", dominates, "That(0, a^) >= T(0, a)",
                                       dominates ? "exact" : "violated"));
        if (ts.count("transport-d2"))
            rep.verdicts.push_back(verdict("transport-groundstate-equal", transport,
                                           "d=2 ground states equal under weight transport",
                                           transport ? "exact" : "violated"));
        return rep;
    }

private:
    static Point random_target(const SeedContext& ctx, int d, Coord max_norm) {
        Stream s(ctx, StreamClass::Scratch);
        for (;;) {
            Point y(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i)
                y[static_cast<std::size_t>(i)] =
                    static_cast<Coord>(s.next_below(static_cast<std::uint64_t>(max_norm) + 1));
            if (l1(y) >= 1 && l1(y) <= max_norm) return y;
        }
    }

    static json embed_row(const Config& c, const SeedContext& ctx, const Point& a) {
        std::size_t d = a.dim();
        WeightField omega(Distribution::gaussian(), ctx, Box(Point::zero(d), a));
        Point ahat = embed_point(a);
        Box st_box = interval_box(Point::zero(d), ahat, Graph::SpaceTime);
        WeightField that(Distribution::gaussian(), ctx, st_box, StreamClass::TransportAux);
        // transport the weights of the interval [0, a]
        Point p = Point::zero(d);
        for (bool done = false; !done;) {
            that.set_override(embed_point(p), omega.weight(p));
            done = true;
            for (std::size_t ax = d; ax-- > 0;) {
                if (++p[ax] <= a[ax]) {
                    done = false;
                    break;
                }
                p[ax] = 0;
            }
        }
        auto paths = enumerate_paths(Point::zero(d), a, 1 << 20);
        bool pathwise_ok = true;
        double best = kNegInf;
        for (const Path& path : paths) {
            double sw = 0, shat = 0;
            Point pos = path.start;
            Path epath = embed_path(path);
            Point epos = epath.start;
            for (std::size_t k = 0; k < path.steps.size(); ++k) {
                path.advance(pos, path.steps[k]);
                epath.advance(epos, epath.steps[k]);
                sw += omega.weight(pos);
                shat += that.weight(epos);
            }
            pathwise_ok = pathwise_ok && sw == shat;
            best = std::max(best, sw);
        }
        double t = last_passage_time(omega, Point::zero(d), a);
        double t_hat = last_passage_time(that, Point::zero(d), ahat, Graph::SpaceTime);
        return json{{"pathwise_ok", pathwise_ok},
                    {"restricted_equal", best == t},
                    {"dominates", t_hat >= t}};
    }

    static json transport_row(const Config& c, const SeedContext& ctx) {
        (void)c;
        Coord N = 8;
        WeightField omega(Distribution::gaussian(), ctx, Box(Point::zero(2), Point{N, N}));
        WeightField that(Distribution::gaussian(), ctx, Box(Point{-N, 0}, Point{N, N}),
                         StreamClass::TransportAux);
        for (Coord i = 0; i <= N; ++i)
            for (Coord j = 0; j + i <= N; ++j)
                that.set_override(embed_point(Point{i, j}), omega.weight(Point{i, j}));
        GroundState ord = ground_state(omega, N, Graph::Ordered);
        GroundState st = ground_state(that, N, Graph::SpaceTime);
        bool ok = ord.value == st.value && embed_point(ord.argmax) == st.argmax;
        return json{{"ok", ok}};
    }
};

// ---------------------------------------------------------------------------
// variance-scan: var[T(0, N dir)] over dyadic N, fitted growth exponent chi,
// optional var/N trend check.
// ---------------------------------------------------------------------------

class VarianceScan final : public Scenario {
public:
    std::string name() const override { return "variance-scan"; }
    std::string summary() const override {
        return "variance scaling of T(0, N dir) with fitted exponent";
    }
    std::set<std::string> allowed_keys() const override {
        return {"dist", "d", "Ns", "n", "direction", "band", "check_trend"};
    }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::geometric(0.5); });
        detail::default_key(c, "d", [](Config& x) { x.d = 2; });
        detail::default_key(c, "Ns", [](Config& x) { x.Ns = {64, 128, 256, 512, 1024}; });
        detail::default_key(c, "n", [](Config& x) { x.n = 2000; });
        detail::default_key(c, "direction", [](Config& x) {
            x.direction.assign(static_cast<std::size_t>(x.d), 1.0);
        });
        if (!c.has("band") && !c.check_trend && c.dist.kind() == DistKind::Geometric) {
            c.band = {0.55, 0.80};
            c.mark("band");
        }
    }

    void validate(const Config& c) const override {
        require_increasing_pow2(c.Ns, "Ns");
        if (c.direction.size() != static_cast<std::size_t>(c.d))
            throw ConfigError("variance-scan: direction length must equal d");
        if (c.n < 2) throw ConfigError("variance-scan: n must be >= 2");
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        std::vector<TableDecl> t;
        for (Coord N : c.Ns) t.push_back({"T-N" + std::to_string(N), c.n});
        return t;
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        std::size_t k = table_index(c, table);
        Coord N = c.Ns[k];
        Point x(static_cast<std::size_t>(c.d));
        for (std::size_t j = 0; j < x.dim(); ++j)
            x[j] = static_cast<Coord>(std::floor(c.direction[j] * static_cast<double>(N)));
        SeedContext ctx{c.seed, k, i};
        WeightField f(c.dist, ctx, Box(Point::zero(x.dim()), x));
        return last_passage_time(f, Point::zero(x.dim()), x);
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        std::vector<ScalingPoint> pts;
        for (std::size_t k = 0; k < c.Ns.size(); ++k) {
            auto vals = scalars(ts, "T-N" + std::to_string(c.Ns[k]));
            pts.push_back({c.Ns[k], compute_stats(vals, SeedContext{c.seed, k, 0})});
        }
        ScalingReport rep = detail_fit(pts);
        ReportRecord out;
        out.metrics["points"] = json::array();
        for (const auto& p : rep.points) {
            out.metrics["points"].push_back(json{{"N", p.N}, {"stats", to_json(p.stats)}});
            out.csv_rows.push_back(json{{"N", p.N},
                                        {"mean", p.stats.mean},
                                        {"variance", p.stats.variance},
                                        {"var_lo", p.stats.var_ci.lo},
                                        {"var_hi", p.stats.var_ci.hi}});
        }
        if (rep.exponent) {
            out.metrics["chi"] = rep.exponent->slope;
            out.metrics["chi_se"] = rep.exponent->slope_se;
        } else {
            out.metrics["chi"] = nullptr;
            out.metrics["fit_refused"] = true;
        }
        if (c.has("band")) {
            bool pass = rep.exponent && rep.exponent->slope >= c.band[0] &&
                        rep.exponent->slope <= c.band[1];
            out.verdicts.push_back(verdict(
                "chi-in-band", pass,
                "fitted chi in [" + fmtg(c.band[0]) + ", " + fmtg(c.band[1]) + "]",
                rep.exponent ? "chi = " + fmtg(rep.exponent->slope) : "fit refused"));
        }
        if (c.check_trend) {
            const auto& first = rep.points.front();
            const auto& last = rep.points.back();
            double f_lo = first.stats.var_ci.lo / static_cast<double>(first.N);
            double l_hi = last.stats.var_ci.hi / static_cast<double>(last.N);
            bool pass = l_hi < f_lo;
            out.verdicts.push_back(
                verdict("var-over-n-decreasing", pass,
                        "var/N at the largest N below var/N at the smallest, CIs disjoint",
                        "var/N " + fmtg(first.stats.variance / first.N) + " -> " +
                            fmtg(last.stats.variance / last.N)));
        }
        return out;
    }

private:
    static std::size_t table_index(const Config& c, const std::string& table) {
        for (std::size_t k = 0; k < c.Ns.size(); ++k)
            if (table == "T-N" + std::to_string(c.Ns[k])) return k;
        throw Error("unknown table " + table);
    }
    static ScalingReport detail_fit(std::vector<ScalingPoint> pts) {
        return dlpp::detail::fit_scaling(std::move(pts));
    }
};

// ---------------------------------------------------------------------------
// influence-map: empirical vertex influences, the exact sum identity, corner
// symmetry, and the randomized-start spreading comparison.
// ---------------------------------------------------------------------------

class InfluenceScan final : public Scenario {
public:
    std::string name() const override { return "influence-map"; }
    std::string summary() const override {
        return "empirical geodesic influences I_v, optional randomized-start spreading";
    }
    std::set<std::string> allowed_keys() const override {
        return {"dist", "d", "x", "n", "m", "m_pair", "sym_tol"};
    }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "d", [](Config& x) { x.d = 2; });
        detail::default_key(c, "x", [](Config& x) { x.x = {8, 8}; });
        detail::default_key(c, "n", [](Config& x) { x.n = 10000; });
        detail::default_key(c, "m", [](Config& x) { x.m = 0; });
        detail::default_key(c, "sym_tol", [](Config&) {});
    }

    void validate(const Config& c) const override {
        if (c.x.size() != static_cast<std::size_t>(c.d))
            throw ConfigError("influence-map: x length must equal d");
        if (!c.dist.is_continuous() && c.dist.kind() != DistKind::Geometric &&
            c.dist.kind() != DistKind::Bernoulli)
            throw ConfigError("influence-map: unsupported law");
    }

    std::vector<int> arms(const Config& c) const {
        if (c.has("m_pair")) return {c.m_pair[0], c.m_pair[1]};
        return {c.m};
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        std::vector<TableDecl> t;
        for (int m : arms(c)) t.push_back({"geo-m" + std::to_string(m), c.n});
        return t;
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        int m = std::stoi(table.substr(5));
        std::size_t d = static_cast<std::size_t>(c.d);
        Point x = as_point(c.x);
        SeedContext ctx{c.seed, 0, i};  // arms share vertex fields (paired design)
        Point start = Point::zero(d);
        if (m > 0) start = sample_randomized_start(ctx, m, c.d).z;
        Box support(Point::zero(d), x + Point::diagonal(d, std::max(m, 0)));
        WeightField f(c.dist, ctx, support);
        Geodesic g = geodesic(f, start, x + start, Graph::Ordered);
        std::string steps;
        for (std::uint8_t s : g.path.steps) steps += static_cast<char>('0' + s);
        return json{{"z", to_json(start)}, {"s", steps}};
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        ReportRecord out;
        Point x = as_point(c.x);
        Coord pathlen = l1(x);
        std::map<int, double> max_ihat;
        std::map<int, CI> max_ci;
        bool sum_ok = true;

        for (int m : arms(c)) {
            std::string tname = "geo-m" + std::to_string(m);
            const auto& rows = ts.at(tname);
            Box support(Point::zero(x.dim()),
                        x + Point::diagonal(x.dim(), std::max(m, 0)));
            InfluenceMap map;
            map.x = x;
            map.n = rows.size();
            map.m = m;
            map.support = support;
            map.counts.assign(support.cell_count(), 0);
            std::vector<std::vector<std::uint32_t>> per_sample;
            per_sample.reserve(rows.size());
            for (const auto& r : rows) {
                Point pos(x.dim());
                const json& z = r.at("z");
                for (std::size_t j = 0; j < pos.dim(); ++j) pos[j] = z[j].get<Coord>();
                const std::string steps = r.at("s").get<std::string>();
                if (static_cast<Coord>(steps.size()) != pathlen) sum_ok = false;
                std::vector<std::uint32_t> flat;
                flat.reserve(steps.size());
                for (char sc : steps) {
                    pos[static_cast<std::size_t>(sc - '0')] += 1;
                    flat.push_back(static_cast<std::uint32_t>(map.flat(pos)));
                }
                for (auto fidx : flat) map.counts[fidx] += 1;
                per_sample.push_back(std::move(flat));
            }
            map.per_sample = std::move(per_sample);
            max_ihat[m] = map.max_ihat();
            max_ci[m] = bootstrap_max_ihat(map, SeedContext{c.seed, 900 + static_cast<std::uint64_t>(m), 0});
            if (map.total_count() != map.n * static_cast<std::uint64_t>(pathlen)) sum_ok = false;

            out.metrics[tname] = json{{"max_ihat", max_ihat[m]},
                                      {"max_ihat_ci", to_json(max_ci[m])},
                                      {"sum_ihat", static_cast<double>(map.total_count()) /
                                                       static_cast<double>(map.n)}};
            for (std::uint64_t fi = 0; fi < map.counts.size(); ++fi) {
                if (map.counts[fi] == 0) continue;
                Point v = map.unflat(fi);
                json row{{"arm_m", m}, {"count", map.counts[fi]},
                         {"ihat", static_cast<double>(map.counts[fi]) /
                                      static_cast<double>(map.n)}};
                for (std::size_t j = 0; j < v.dim(); ++j)
                    row["x" + std::to_string(j + 1)] = v[j];
                out.csv_rows.push_back(std::move(row));
            }

            // corner symmetry for the deterministic-start diagonal case
            if (m == 0 && c.d == 2 && c.x[0] == c.x[1]) {
                double i10 = map.ihat(Point{1, 0});
                bool pass = std::abs(i10 - 0.5) <= c.sym_tol;
                out.verdicts.push_back(verdict(
                    "corner-symmetry", pass,
                    "Ihat(1,0) in 0.5 +/- " + fmtg(c.sym_tol), "Ihat(1,0) = " + fmtg(i10)));
            }
        }

        out.verdicts.insert(out.verdicts.begin(),
                            verdict("sum-identity", sum_ok,
                                    "sum_v Ihat_v = |x| exactly on every sample",
                                    sum_ok ? "exact" : "violated"));

        if (c.has("m_pair")) {
            int m1 = c.m_pair[0], m2 = c.m_pair[1];
            bool pass = max_ihat[m2] < max_ihat[m1] && max_ci[m2].hi < max_ci[m1].lo;
            out.verdicts.push_back(
                verdict("influence-spreading", pass,
                        "max Ihat at m=" + std::to_string(m2) + " strictly below m=" +
                            std::to_string(m1) + " with disjoint bootstrap CIs",
                        fmtg(max_ihat[m1]) + " -> " + fmtg(max_ihat[m2])));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// tail: concentration tails with binomial CIs; exact-law agreement in d=1.
// ---------------------------------------------------------------------------

class TailScan final : public Scenario {
public:
    std::string name() const override { return "tail"; }
    std::string summary() const override {
        return "tail probabilities P(|T - mean| >= t sqrt(|x|))";
    }
    std::set<std::string> allowed_keys() const override { return {"dist", "d", "x", "ts", "n"}; }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "d", [](Config& x) { x.d = 2; });
        detail::default_key(c, "x", [](Config& x) {
            x.x = x.d == 1 ? std::vector<Coord>{100} : std::vector<Coord>{128, 128};
        });
        detail::default_key(c, "ts", [](Config& x) { x.ts = {1, 2, 3}; });
        detail::default_key(c, "n", [](Config& x) { x.n = x.d == 1 ? 100000 : 20000; });
    }

    void validate(const Config& c) const override {
        if (c.x.size() != static_cast<std::size_t>(c.d))
            throw ConfigError("tail: x length must equal d");
        if (c.n < 1000) throw ConfigError("tail: n must be at least 1000");
        double prev = 0;
        for (double t : c.ts) {
            if (t <= prev) throw ConfigError("tail: ts must be positive and increasing");
            prev = t;
        }
    }

    std::vector<TableDecl> tables(const Config& c) const override { return {{"T", c.n}}; }

    json row(const Config& c, const std::string&, std::uint64_t i) const override {
        Point x = as_point(c.x);
        SeedContext ctx{c.seed, 0, i};
        WeightField f(c.dist, ctx, Box(Point::zero(x.dim()), x));
        return last_passage_time(f, Point::zero(x.dim()), x);
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        Point x = as_point(c.x);
        auto vals = scalars(ts, "T");
        TailReport rep = tail_reduce(x, vals, c.ts);
        ReportRecord out;
        out.metrics["mean"] = rep.mean;
        out.metrics["points"] = json::array();
        bool monotone = true;
        for (std::size_t i = 0; i < rep.points.size(); ++i) {
            const auto& pt = rep.points[i];
            out.metrics["points"].push_back(json{{"t", pt.t},
                                                 {"p", pt.p},
                                                 {"exceed", pt.exceed},
                                                 {"ci", to_json(pt.ci)}});
            out.csv_rows.push_back(
                json{{"t", pt.t}, {"p", pt.p}, {"p_lo", pt.ci.lo}, {"p_hi", pt.ci.hi}});
            if (i > 0 && pt.p > rep.points[i - 1].p + 1e-15) monotone = false;
        }
        out.verdicts.push_back(verdict("tails-monotone", monotone,
                                       "tail probabilities weakly decreasing in t",
                                       monotone ? "ok" : "violated"));
        if (c.d == 1 && c.dist.kind() == DistKind::Gaussian) {
            // T(0, N e1) is an exact Normal(0, N) sum: p(t) = 2(1 - Phi(t))
            bool pass = true;
            std::string detail_s;
            for (const auto& pt : rep.points) {
                double p_true = 2.0 * (1.0 - normal_cdf(pt.t));
                pass = pass && pt.ci.lo <= p_true && p_true <= pt.ci.hi;
                detail_s += "t=" + fmtg(pt.t) + ": " + fmtg(pt.p) + " vs " + fmtg(p_true) + "; ";
            }
            out.verdicts.push_back(verdict("tail-matches-normal-law", pass,
                                           "2(1 - Phi(t)) inside the Wilson CI at every t",
                                           detail_s));
        } else {
            if (rep.c_fit) out.metrics["c_fit"] = *rep.c_fit;
            out.verdicts.push_back(verdict(
                "tail-envelope", rep.envelope_ok,
                "p(t) <= 1.5 exp(-t^2/c) with c fitted at t = 1",
                rep.c_fit ? "c = " + fmtg(*rep.c_fit) : "no exceedances at t = 1 (vacuous)"));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// quantiles: empirical quantile function of T(0, x).
// ---------------------------------------------------------------------------

class QuantileScan final : public Scenario {
public:
    std::string name() const override { return "quantiles"; }
    std::string summary() const override { return "empirical quantile function of T(0, x)"; }
    std::set<std::string> allowed_keys() const override { return {"dist", "d", "x", "us", "n"}; }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "d", [](Config& x) { x.d = 2; });
        detail::default_key(c, "x", [](Config& x) { x.x = {32, 32}; });
        detail::default_key(c, "us", [](Config& x) {
            x.us = {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99};
        });
        detail::default_key(c, "n", [](Config& x) { x.n = 5000; });
    }

    void validate(const Config& c) const override {
        if (c.x.size() != static_cast<std::size_t>(c.d))
            throw ConfigError("quantiles: x length must equal d");
        for (double u : c.us)
            if (!(u > 0 && u < 1)) throw ConfigError("quantiles: us entries must lie in (0,1)");
    }

    std::vector<TableDecl> tables(const Config& c) const override { return {{"T", c.n}}; }

    json row(const Config& c, const std::string&, std::uint64_t i) const override {
        Point x = as_point(c.x);
        WeightField f(c.dist, SeedContext{c.seed, 0, i}, Box(Point::zero(x.dim()), x));
        return last_passage_time(f, Point::zero(x.dim()), x);
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        QuantileFn h(scalars(ts, "T"));
        ReportRecord out;
        out.metrics["h"] = json::array();
        bool monotone = true;
        double prev = -std::numeric_limits<double>::infinity();
        std::vector<double> us = c.us;
        std::sort(us.begin(), us.end());
        for (double u : us) {
            double q = h(u);
            out.metrics["h"].push_back(json{{"u", u}, {"value", q}});
            out.csv_rows.push_back(json{{"u", u}, {"h", q}});
            if (q < prev) monotone = false;
            prev = q;
        }
        out.verdicts.push_back(verdict("quantile-monotone", monotone,
                                       "h(u) nondecreasing in u", monotone ? "ok" : "violated"));
        return out;
    }
};

// ---------------------------------------------------------------------------
// g-estimate: shape function along a direction with a dyadic superadditivity
// diagnostic.
// ---------------------------------------------------------------------------

class ShapeScan final : public Scenario {
public:
    std::string name() const override { return "g-estimate"; }
    std::string summary() const override {
        return "ghat(x) = mean T(0, floor(N x))/N with dyadic superadditivity diagnostic";
    }
    std::set<std::string> allowed_keys() const override {
        return {"dist", "d", "direction", "N", "n", "kind"};
    }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "d", [](Config& x) { x.d = 2; });
        detail::default_key(c, "direction", [](Config& x) {
            x.direction.assign(static_cast<std::size_t>(x.d), 1.0);
        });
        detail::default_key(c, "N", [](Config& x) { x.N = 128; });
        detail::default_key(c, "n", [](Config& x) { x.n = 500; });
        detail::default_key(c, "kind", [](Config&) {});
    }

    void validate(const Config& c) const override {
        if (c.direction.size() != static_cast<std::size_t>(c.d))
            throw ConfigError("g-estimate: direction length must equal d");
        if (c.N < 8) throw ConfigError("g-estimate: N must be >= 8");
        if (c.n < 2) throw ConfigError("g-estimate: n must be >= 2");
    }

    static std::vector<Coord> dyadic_list(Coord N) {
        std::vector<Coord> out;
        for (Coord m = N; m >= 8 && out.size() < 4; m /= 2) out.push_back(m);
        std::reverse(out.begin(), out.end());
        return out;
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        std::vector<TableDecl> t;
        for (Coord m : dyadic_list(c.N)) t.push_back({"T-N" + std::to_string(m), c.n});
        return t;
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        auto list = dyadic_list(c.N);
        std::size_t k = 0;
        for (std::size_t j = 0; j < list.size(); ++j)
            if (table == "T-N" + std::to_string(list[j])) k = j;
        Point x = direction_endpoint(c.direction, list[k], c.kind);
        SeedContext ctx{c.seed, k, i};
        Box box = interval_box(Point::zero(x.dim()), x, c.kind);
        WeightField f(c.dist, ctx, box);
        return last_passage_time(f, Point::zero(x.dim()), x, c.kind);
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions& opt) const override {
        auto list = dyadic_list(c.N);
        ReportRecord out;
        out.metrics["dyadic"] = json::array();
        std::vector<std::pair<double, CI>> ghats;
        for (std::size_t k = 0; k < list.size(); ++k) {
            auto vals = scalars(ts, "T-N" + std::to_string(list[k]));
            SampleStats st = compute_stats(vals, SeedContext{c.seed, k, 0});
            double scale = static_cast<double>(list[k]);
            double ghat = st.mean / scale;
            CI ci{st.mean_ci.lo / scale, st.mean_ci.hi / scale};
            ghats.push_back({ghat, ci});
            out.metrics["dyadic"].push_back(
                json{{"N", list[k]}, {"ghat", ghat}, {"ci", to_json(ci)}});
            out.csv_rows.push_back(
                json{{"N", list[k]}, {"ghat", ghat}, {"ghat_lo", ci.lo}, {"ghat_hi", ci.hi}});
        }
        out.metrics["ghat"] = ghats.back().first;
        out.metrics["ghat_ci"] = to_json(ghats.back().second);
        bool super = true;
        for (std::size_t k = 1; k < ghats.size(); ++k)
            if (ghats[k].second.hi < ghats[k - 1].second.lo) super = false;
        out.verdicts.push_back(verdict("superadditive-within-ci", super,
                                       "mean T(0,2Nu) >= 2 mean T(0,Nu) within CI overlap",
                                       super ? "ok" : "violated"));
        if (opt.trace) {
            Point x = direction_endpoint(c.direction, c.N, c.kind);
            WeightField f(c.dist, SeedContext{c.seed, list.size() - 1, 0},
                          interval_box(Point::zero(x.dim()), x, c.kind));
            PassageGrid grid(f, Point::zero(x.dim()),
                             interval_box(Point::zero(x.dim()), x, c.kind), c.kind, true);
            export_grid_csv(grid, opt.out / ("grid-" + config_hash(c) + ".csv"));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// concavity: the strict concavity gap between the diagonal and axis directions.
// ---------------------------------------------------------------------------

class ConcavityScan final : public Scenario {
public:
    std::string name() const override { return "concavity"; }
    std::string summary() const override {
        return "paired gap mean T(0,N(e1+e2))/2N - mean T(0,2N e2)/2N";
    }
    std::set<std::string> allowed_keys() const override {
        return {"dist", "N", "n", "n_exact", "offset"};
    }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "N", [](Config& x) { x.N = 64; });
        detail::default_key(c, "n", [](Config& x) { x.n = 2000; });
        detail::default_key(c, "n_exact", [](Config& x) {
            x.n_exact = x.dist.kind() == DistKind::Gaussian ? 1000000 : 0;
        });
    }

    void validate(const Config& c) const override {
        if (c.N < 1) throw ConfigError("concavity: N must be >= 1");
        if (c.n < 2) throw ConfigError("concavity: n must be >= 2");
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        std::vector<TableDecl> t{{"pair", c.n}};
        if (c.n_exact > 0) t.push_back({"pair1", c.n_exact});
        return t;
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        Coord N = table == "pair1" ? 1 : c.N;
        SeedContext ctx{c.seed, table == "pair1" ? std::uint64_t(10) : std::uint64_t(0), i};
        std::size_t d = 2 + c.offset.size();
        Point p_diag(d), p_axis(d), hi(d);
        p_diag[0] = N;
        p_diag[1] = N;
        p_axis[1] = 2 * N;
        for (std::size_t j = 0; j < c.offset.size(); ++j) {
            Coord o = static_cast<Coord>(std::floor(2.0 * static_cast<double>(N) * c.offset[j]));
            p_diag[2 + j] = o;
            p_axis[2 + j] = o;
        }
        for (std::size_t j = 0; j < d; ++j) hi[j] = std::max(p_diag[j], p_axis[j]);
        WeightField f(c.dist, ctx, Box(Point::zero(d), hi));
        double t1 = last_passage_time(f, Point::zero(d), p_diag);
        double t2 = last_passage_time(f, Point::zero(d), p_axis);
        return json::array({t1, t2});
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        ReportRecord out;
        auto gap_stats = [&](const std::string& table, Coord N, std::uint64_t eid) {
            const auto& rows = ts.at(table);
            std::vector<double> diag(rows.size()), gap(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                diag[i] = rows[i][0].get<double>();
                gap[i] = (rows[i][0].get<double>() - rows[i][1].get<double>()) /
                         (2.0 * static_cast<double>(N));
            }
            return std::pair{compute_stats(diag, SeedContext{c.seed, eid, 0}),
                             compute_stats(gap, SeedContext{c.seed, eid + 1, 0})};
        };

        auto [diag_st, gap_st] = gap_stats("pair", c.N, 0);
        out.metrics["N"] = c.N;
        out.metrics["diag"] = to_json(diag_st);
        out.metrics["gap"] = to_json(gap_st);
        out.csv_rows.push_back(json{{"N", c.N},
                                    {"gap_mean", gap_st.mean},
                                    {"gap_lo", gap_st.mean_ci.lo},
                                    {"gap_hi", gap_st.mean_ci.hi}});
        bool strict = gap_st.mean_ci.lo > 0;
        out.verdicts.push_back(verdict("gap-positive-ci", strict,
                                       "gap mean 95% CI separated from 0",
                                       "gap = " + fmtg(gap_st.mean) + " CI [" +
                                           fmtg(gap_st.mean_ci.lo) + ", " +
                                           fmtg(gap_st.mean_ci.hi) + "]"));

        if (c.n_exact > 0) {
            auto [d1, g1] = gap_stats("pair1", 1, 10);
            out.metrics["n1_mean"] = d1.mean;
            out.metrics["n1_gap"] = to_json(g1);
            if (c.dist.kind() == DistKind::Gaussian) {
                double target = 0.5641895835477563;  // E max of two standard normals
                bool pass = std::abs(d1.mean - target) <= 0.005;
                out.verdicts.push_back(verdict("n1-mean-in-band", pass,
                                               "mean T(0,(1,1)) within 1/sqrt(pi) +/- 0.005",
                                               fmtg(d1.mean) + " vs " + fmtg(target)));
            }
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// plateau: Bernoulli supercritical shape plateau.
// ---------------------------------------------------------------------------

class PlateauScan final : public Scenario {
public:
    std::string name() const override { return "plateau"; }
    std::string summary() const override {
        return "Bernoulli plateau: ghat((1/2,1/2)) at supercritical density";
    }
    std::set<std::string> allowed_keys() const override {
        return {"dist", "N", "n", "direction", "threshold"};
    }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::bernoulli(0.95); });
        detail::default_key(c, "N", [](Config& x) { x.N = 512; });
        detail::default_key(c, "n", [](Config& x) { x.n = 200; });
        detail::default_key(c, "direction", [](Config& x) { x.direction = {0.5, 0.5}; });
        detail::default_key(c, "threshold", [](Config& x) { x.threshold = 0.98; });
    }

    void validate(const Config& c) const override {
        if (c.dist.kind() != DistKind::Bernoulli)
            throw ConfigError("plateau: dist must be a bernoulli law");
        if (c.n < 2) throw ConfigError("plateau: n must be >= 2");
    }

    std::vector<TableDecl> tables(const Config& c) const override { return {{"T", c.n}}; }

    json row(const Config& c, const std::string&, std::uint64_t i) const override {
        Point x = direction_endpoint(c.direction, c.N, Graph::Ordered);
        WeightField f(c.dist, SeedContext{c.seed, 0, i}, Box(Point::zero(x.dim()), x));
        return last_passage_time(f, Point::zero(x.dim()), x);
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        auto vals = scalars(ts, "T");
        SampleStats st = compute_stats(vals, SeedContext{c.seed, 0, 0});
        double ghat = st.mean / static_cast<double>(c.N);
        ReportRecord out;
        out.metrics["ghat"] = ghat;
        out.metrics["stats"] = to_json(st);
        out.csv_rows.push_back(json{{"N", c.N}, {"ghat", ghat}});
        out.verdicts.push_back(verdict("plateau-ghat-threshold", ghat >= c.threshold,
                                       "ghat >= " + fmtg(c.threshold), "ghat = " + fmtg(ghat)));
        return out;
    }
};

// ---------------------------------------------------------------------------
// wandering: transversal geodesic displacement and the fitted exponent xi.
// ---------------------------------------------------------------------------

class WanderingScan final : public Scenario {
public:
    std::string name() const override { return "wandering"; }
    std::string summary() const override {
        return "geodesic transversal displacement |v1 - v2|/2 and fitted exponent";
    }
    std::set<std::string> allowed_keys() const override { return {"dist", "Ns", "n", "band"}; }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::geometric(0.5); });
        detail::default_key(c, "Ns", [](Config& x) { x.Ns = {32, 64, 128, 256, 512}; });
        detail::default_key(c, "n", [](Config& x) { x.n = 2000; });
        detail::default_key(c, "band", [](Config& x) { x.band = {0.5, 0.85}; });
    }

    void validate(const Config& c) const override {
        require_increasing_pow2(c.Ns, "Ns");
        if (c.n < 2) throw ConfigError("wandering: n must be >= 2");
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        std::vector<TableDecl> t;
        for (Coord N : c.Ns) t.push_back({"disp-N" + std::to_string(N), c.n});
        return t;
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        std::size_t k = 0;
        for (std::size_t j = 0; j < c.Ns.size(); ++j)
            if (table == "disp-N" + std::to_string(c.Ns[j])) k = j;
        Coord N = c.Ns[k];
        Point target{N, N};
        WeightField f(c.dist, SeedContext{c.seed, k, i}, Box(Point::zero(2), target));
        Geodesic g = geodesic(f, Point::zero(2), target);
        double mid = 0, best = 0;
        for (const Point& v : g.path.vertices()) {
            double disp = std::abs(static_cast<double>(v[0] - v[1])) / 2.0;
            best = std::max(best, disp);
            if (v[0] + v[1] == N) mid = disp;
        }
        return json::array({mid, best});
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        ReportRecord out;
        out.metrics["points"] = json::array();
        std::vector<double> lx, ly;
        for (std::size_t k = 0; k < c.Ns.size(); ++k) {
            const auto& rows = ts.at("disp-N" + std::to_string(c.Ns[k]));
            std::vector<double> mid(rows.size()), mx(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                mid[i] = rows[i][0].get<double>();
                mx[i] = rows[i][1].get<double>();
            }
            SampleStats mst = compute_stats(mid, SeedContext{c.seed, k, 0});
            SampleStats xst = compute_stats(mx, SeedContext{c.seed, k + 100, 0});
            out.metrics["points"].push_back(json{{"N", c.Ns[k]},
                                                 {"mid", to_json(mst)},
                                                 {"max", to_json(xst)}});
            out.csv_rows.push_back(json{{"N", c.Ns[k]},
                                        {"mid_mean", mst.mean},
                                        {"max_mean", xst.mean}});
            if (mst.mean > 0) {
                lx.push_back(std::log(static_cast<double>(c.Ns[k])));
                ly.push_back(std::log(mst.mean));
            }
        }
        if (lx.size() >= 2) {
            LineFit fit = fit_line(lx, ly);
            out.metrics["xi"] = fit.slope;
            out.metrics["xi_se"] = fit.slope_se;
            bool pass = fit.slope >= c.band[0] && fit.slope <= c.band[1];
            out.verdicts.push_back(verdict(
                "xi-in-band", pass,
                "fitted xi in [" + fmtg(c.band[0]) + ", " + fmtg(c.band[1]) + "]",
                "xi = " + fmtg(fit.slope)));
        } else {
            out.metrics["xi"] = nullptr;
            out.verdicts.push_back(
                verdict("xi-in-band", false, "fit requires >= 2 positive means", "fit refused"));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// polymer: ground-state variance scaling plus the level-set reflection D1.
// ---------------------------------------------------------------------------

class PolymerScan final : public Scenario {
public:
    std::string name() const override { return "polymer"; }
    std::string summary() const override {
        return "polymer ground-state variance scaling and the level-set reflection gap";
    }
    std::set<std::string> allowed_keys() const override {
        return {"dist", "Ns", "n", "kind", "N", "a", "n_reflect"};
    }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "Ns", [](Config& x) { x.Ns = {32, 64, 128, 256, 512}; });
        detail::default_key(c, "n", [](Config& x) { x.n = 2000; });
        detail::default_key(c, "kind", [](Config& x) { x.kind = Graph::SpaceTime; });
        detail::default_key(c, "N", [](Config& x) { x.N = 64; });
        detail::default_key(c, "a", [](Config& x) { x.a = {0, 32}; });
        detail::default_key(c, "n_reflect", [](Config& x) { x.n_reflect = 2000; });
    }

    void validate(const Config& c) const override {
        require_increasing_pow2(c.Ns, "Ns");
        if (c.a.size() != 2 || c.a[0] != 0)
            throw ConfigError("polymer: a must be a d=2 point on the x1 = 0 hyperplane");
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        std::vector<TableDecl> t;
        for (Coord N : c.Ns) t.push_back({"gs-N" + std::to_string(N), c.n});
        if (c.n_reflect > 0) t.push_back({"reflect", c.n_reflect});
        return t;
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        if (table == "reflect") {
            GapSample gs = reflection_gap_one(c.dist, SeedContext{c.seed, 500, i}, as_point(c.a),
                                              c.N, GapTarget::LevelSet);
            return json::array({gs.d1, gs.d2});
        }
        std::size_t k = 0;
        for (std::size_t j = 0; j < c.Ns.size(); ++j)
            if (table == "gs-N" + std::to_string(c.Ns[j])) k = j;
        Coord N = c.Ns[k];
        Box box = c.kind == Graph::Ordered ? Box(Point::zero(2), Point{N, N})
                                           : Box(Point{-N, 0}, Point{N, N});
        WeightField f(c.dist, SeedContext{c.seed, k, i}, box);
        return ground_state(f, N, c.kind).value;
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        ReportRecord out;
        std::vector<ScalingPoint> pts;
        for (std::size_t k = 0; k < c.Ns.size(); ++k) {
            auto vals = scalars(ts, "gs-N" + std::to_string(c.Ns[k]));
            pts.push_back({c.Ns[k], compute_stats(vals, SeedContext{c.seed, k, 0})});
        }
        out.metrics["points"] = json::array();
        for (const auto& p : pts) {
            out.metrics["points"].push_back(json{{"N", p.N}, {"stats", to_json(p.stats)}});
            out.csv_rows.push_back(json{{"N", p.N},
                                        {"variance", p.stats.variance},
                                        {"var_over_n", p.stats.variance /
                                                           static_cast<double>(p.N)}});
        }
        const auto& first = pts.front();
        const auto& last = pts.back();
        bool trend = last.stats.var_ci.hi / static_cast<double>(last.N) <
                     first.stats.var_ci.lo / static_cast<double>(first.N);
        out.verdicts.push_back(
            verdict("var-over-n-decreasing", trend,
                    "ground-state var/N decreasing with CI separation",
                    "var/N " + fmtg(first.stats.variance / first.N) + " -> " +
                        fmtg(last.stats.variance / last.N)));

        if (ts.count("reflect")) {
            const auto& rows = ts.at("reflect");
            std::vector<double> d1(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) d1[i] = rows[i][0].get<double>();
            SampleStats st = compute_stats(d1, SeedContext{c.seed, 500, 0});
            out.metrics["reflect_d1"] = to_json(st);
            bool centered = st.mean_ci.contains(0.0);
            out.verdicts.push_back(verdict("groundstate-d1-centered", centered,
                                           "mean D1 95% CI contains 0 (translation invariance)",
                                           "mean = " + fmtg(st.mean) + " CI [" +
                                               fmtg(st.mean_ci.lo) + ", " +
                                               fmtg(st.mean_ci.hi) + "]"));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// shift-scan: ||h(Nu)||_2 growth and the geodesic monotonicity of h.
// ---------------------------------------------------------------------------

class ShiftScan final : public Scenario {
public:
    std::string name() const override { return "shift-scan"; }
    std::string summary() const override {
        return "L2 scaling of h(Nu) = T(-e1,Nu) - T(0,Nu) and per-sample monotonicity";
    }
    std::set<std::string> allowed_keys() const override { return {"dist", "Ns", "n"}; }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "Ns", [](Config& x) { x.Ns = {32, 64, 128, 256, 512}; });
        detail::default_key(c, "n", [](Config& x) { x.n = 2000; });
    }

    void validate(const Config& c) const override {
        require_increasing_pow2(c.Ns, "Ns");
        if (c.n < 2) throw ConfigError("shift-scan: n must be >= 2");
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        std::vector<TableDecl> t;
        for (Coord N : c.Ns) t.push_back({"h-N" + std::to_string(N), c.n});
        return t;
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        std::size_t k = 0;
        for (std::size_t j = 0; j < c.Ns.size(); ++j)
            if (table == "h-N" + std::to_string(c.Ns[j])) k = j;
        ShiftSample s = shift_sample_one(c.dist, SeedContext{c.seed, k, i}, c.Ns[k]);
        return json::array({s.h, s.violations});
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        ReportRecord out;
        out.metrics["points"] = json::array();
        std::vector<double> lx, ly;
        std::uint64_t violations = 0;
        for (std::size_t k = 0; k < c.Ns.size(); ++k) {
            const auto& rows = ts.at("h-N" + std::to_string(c.Ns[k]));
            std::vector<double> hs(rows.size());
            std::uint64_t v = 0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                hs[i] = rows[i][0].get<double>();
                v += rows[i][1].get<std::uint64_t>();
            }
            violations += v;
            double sq = 0;
            for (double h : hs) sq += h * h;
            double l2 = std::sqrt(sq / static_cast<double>(hs.size()));
            SeedContext ctx{c.seed, k, 0};
            CI l2ci = bootstrap_ci(
                hs,
                [](std::span<const double> xs) {
                    double s = 0;
                    for (double x : xs) s += x * x;
                    return std::sqrt(s / static_cast<double>(xs.size()));
                },
                ctx);
            out.metrics["points"].push_back(json{{"N", c.Ns[k]},
                                                 {"l2", l2},
                                                 {"l2_ci", to_json(l2ci)},
                                                 {"violations", v}});
            out.csv_rows.push_back(
                json{{"N", c.Ns[k]}, {"l2", l2}, {"l2_lo", l2ci.lo}, {"l2_hi", l2ci.hi}});
            if (l2 > 0) {
                lx.push_back(std::log(static_cast<double>(c.Ns[k])));
                ly.push_back(std::log(l2));
            }
        }
        if (lx.size() >= 2) {
            LineFit fit = fit_line(lx, ly);
            double z = 1.959963984540054;
            CI ci{fit.slope - z * fit.slope_se, fit.slope + z * fit.slope_se};
            out.metrics["exponent"] = fit.slope;
            out.metrics["exponent_ci"] = to_json(ci);
            out.verdicts.push_back(verdict("exponent-below-half", ci.hi < 0.5,
                                           "fitted growth exponent of ||h(Nu)||_2 < 0.5 with CI",
                                           "slope = " + fmtg(fit.slope) + " CI hi = " +
                                               fmtg(ci.hi)));
        }
        out.metrics["monotonicity_violations"] = violations;
        out.verdicts.push_back(verdict("h-monotone-on-geodesic", violations == 0,
                                       "h(Nu) <= h(a) for every a on the realized geodesic",
                                       std::to_string(violations) + " violations"));
        return out;
    }
};

// ---------------------------------------------------------------------------
// clamp-check: the clamped-variance inequality with pilot quantile windows.
// ---------------------------------------------------------------------------

class ClampCheck final : public Scenario {
public:
    std::string name() const override { return "clamp-check"; }
    std::string summary() const override {
        return "var[T ^ h(2u) v h(u)] against 4u|x|/log(2 c_G^-2 u^-1)";
    }
    std::set<std::string> allowed_keys() const override {
        return {"dist", "d", "x", "u", "n", "n_pilot"};
    }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "d", [](Config& x) { x.d = 2; });
        detail::default_key(c, "x", [](Config& x) { x.x = {64, 64}; });
        detail::default_key(c, "u", [](Config& x) { x.u = 0.125; });
        detail::default_key(c, "n", [](Config& x) { x.n = 10000; });
        detail::default_key(c, "n_pilot", [](Config& x) { x.n_pilot = x.n; });
    }

    void validate(const Config& c) const override {
        if (c.dist.kind() != DistKind::Gaussian)
            throw ConfigError("clamp-check: stated for gaussian vertex weights");
        if (!(c.u > 0 && c.u <= 0.25)) throw ConfigError("clamp-check: u must lie in (0, 1/4]");
        if (static_cast<double>(c.n_pilot) * c.u < 50)
            throw ConfigError("clamp-check: u too small for the pilot sample size");
        if (c.x.size() != static_cast<std::size_t>(c.d))
            throw ConfigError("clamp-check: x length must equal d");
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        return {{"pilot", c.n_pilot}, {"fresh", c.n}};
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        Point x = as_point(c.x);
        SeedContext ctx{c.seed, table == "pilot" ? std::uint64_t(1) : std::uint64_t(2), i};
        WeightField f(c.dist, ctx, Box(Point::zero(x.dim()), x));
        return last_passage_time(f, Point::zero(x.dim()), x);
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions&) const override {
        Point x = as_point(c.x);
        QuantileFn h(scalars(ts, "pilot"));
        double A = h(c.u), B = h(2 * c.u);
        auto fresh = scalars(ts, "fresh");
        std::vector<double> clamped(fresh.size());
        ClampWindow w(A, B);
        for (std::size_t i = 0; i < fresh.size(); ++i) clamped[i] = clamp(fresh[i], w);
        SampleStats raw = compute_stats(fresh, SeedContext{c.seed, 2, 0});
        SampleStats cl = compute_stats(clamped, SeedContext{c.seed, 3, 0});

        double c_g = scan_ratio_sup(Distribution::gaussian()).sup_observed;
        double bound = 4.0 * c.u * static_cast<double>(l1(x)) / std::log(2.0 / (c_g * c_g) / c.u);

        ReportRecord out;
        out.metrics = json{{"A", A},
                           {"B", B},
                           {"c_g", c_g},
                           {"clamped_variance", cl.variance},
                           {"clamped_var_ci", to_json(cl.var_ci)},
                           {"raw_variance", raw.variance},
                           {"bound", bound}};
        out.csv_rows.push_back(json{{"u", c.u},
                                    {"A", A},
                                    {"B", B},
                                    {"clamped_variance", cl.variance},
                                    {"bound", bound}});
        out.verdicts.push_back(verdict("clamped-variance-bound", cl.var_ci.hi <= bound,
                                       "var[clamp(T, h(u), h(2u))] <= 4u|x|/log(2 c_G^-2 u^-1)",
                                       fmtg(cl.variance) + " (CI hi " + fmtg(cl.var_ci.hi) +
                                           ") vs bound " + fmtg(bound)));
        out.verdicts.push_back(verdict("clamp-contraction", cl.variance <= raw.variance,
                                       "clamping never increases variance",
                                       fmtg(cl.variance) + " <= " + fmtg(raw.variance)));
        return out;
    }
};

// ---------------------------------------------------------------------------
// ratio-scan: clamp-ratio suprema for the three continuous families.
// ---------------------------------------------------------------------------

class RatioScan final : public Scenario {
public:
    std::string name() const override { return "ratio-scan"; }
    std::string summary() const override {
        return "clamp-ratio constants c_U, c_G, c_Gamma over window grids";
    }
    std::set<std::string> allowed_keys() const override { return {"family", "dist"}; }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "family", [](Config&) {});
    }

    std::vector<TableDecl> tables(const Config&) const override { return {}; }

    json row(const Config&, const std::string&, std::uint64_t) const override {
        throw Error("ratio-scan has no sample tables");
    }

    ReportRecord reduce(const Config& c, const TableSet&, const RunOptions&) const override {
        ReportRecord out;
        auto run_family = [&](const Distribution& dist) {
            RatioReport rep = scan_ratio_sup(dist);
            json jr{{"dist", dist.label()},
                    {"sup_observed", rep.sup_observed},
                    {"windows", rep.windows.size()},
                    {"skipped_degenerate", rep.skipped_degenerate}};
            if (rep.sup_case_windows) jr["sup_case_windows"] = *rep.sup_case_windows;
            out.metrics[dist.name()] = jr;
            for (const auto& w : rep.windows)
                out.csv_rows.push_back(json{{"dist", dist.name()},
                                            {"a", w.a},
                                            {"b", w.b},
                                            {"ratio", w.ratio},
                                            {"case_window", w.case_window ? 1 : 0}});
            return rep;
        };

        if (c.family == "all" || c.family == "uniform01") {
            RatioReport rep = run_family(Distribution::uniform01());
            out.verdicts.push_back(verdict("uniform-sup-half",
                                           rep.sup_observed <= 0.5 + 1e-6,
                                           "uniform01 observed sup <= 1/2 + 1e-6",
                                           "sup = " + fmtg(rep.sup_observed)));
        }
        if (c.family == "all" || c.family == "gaussian") {
            RatioReport rep = run_family(Distribution::gaussian());
            double cap = 2.0 * std::exp(1.5);
            double sup_cases = rep.sup_case_windows.value_or(0.0);
            out.verdicts.push_back(verdict("gaussian-cases-bound", sup_cases <= cap + 1e-9,
                                           "case (i)/(ii) window ratios <= 2 e^{3/2}",
                                           "sup = " + fmtg(sup_cases) + " vs " + fmtg(cap)));
        }
        if (c.family == "all" || c.family == "gamma") {
            Distribution g = c.has("dist") && c.dist.kind() == DistKind::Gamma
                                 ? c.dist
                                 : Distribution::gamma(2.0, 1.0);
            RatioReport rep = run_family(g);
            out.verdicts.push_back(verdict("gamma-sup-finite", rep.sup_observed < 1e3,
                                           "gamma observed sup finite (< 10^3)",
                                           "sup = " + fmtg(rep.sup_observed)));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// z-start-check: randomized-start properties, exhaustive and sampled.
// ---------------------------------------------------------------------------

class ZStartCheck final : public Scenario {
public:
    std::string name() const override { return "z-start-check"; }
    std::string summary() const override {
        return "randomized start: single-flip L1 moves and point-mass bounds";
    }
    std::set<std::string> allowed_keys() const override { return {"m", "n"}; }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "m", [](Config& x) { x.m = 16; });
        detail::default_key(c, "n", [](Config& x) { x.n = 100000; });
    }

    void validate(const Config& c) const override {
        if (c.m < 2 || c.m > 256) throw ConfigError("z-start-check: m must lie in [2, 256]");
    }

    std::vector<TableDecl> tables(const Config& c) const override { return {{"zflip", c.n}}; }

    json row(const Config& c, const std::string&, std::uint64_t i) const override {
        int m = c.m;
        SeedContext ctx{c.seed, 0, i};
        auto bits = sample_start_bits(ctx, m, 1);
        RandomizedStart z = build_randomized_start(bits, m, 1);
        bool flips_ok = true;
        for (std::size_t b = 0; b < bits.size(); ++b) {
            auto flipped = bits;
            flipped[b] ^= 1;
            RandomizedStart z2 = build_randomized_start(std::move(flipped), m, 1);
            if (std::abs(z2.z[0] - z.z[0]) > 1) flips_ok = false;
        }
        return json{{"z", z.z[0]}, {"flips_ok", flips_ok}};
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions& opt) const override {
        ReportRecord out;

        // exhaustive certification at m = 4, d = 1 over all 2^16 bit vectors
        const int me = 4;
        const int nbits = me * me;
        std::vector<std::uint64_t> hist(static_cast<std::size_t>(me), 0);
        bool ex_flips_ok = true;
        auto z_of = [&](int popcount) {
            int t = popcount % (2 * me);
            return 1 + (t < me ? t : 2 * me - 1 - t);
        };
        for (std::uint32_t mask = 0; mask < (1u << nbits); ++mask) {
            int pc = __builtin_popcount(mask);
            int z = z_of(pc);
            hist[static_cast<std::size_t>(z - 1)] += 1;
            for (int b = 0; b < nbits; ++b) {
                int pc2 = pc + (((mask >> b) & 1u) ? -1 : 1);
                if (std::abs(z_of(pc2) - z) > 1) ex_flips_ok = false;
            }
        }
        double ex_max_mass = 0;
        for (auto h : hist)
            ex_max_mass = std::max(ex_max_mass, static_cast<double>(h) / double(1u << nbits));
        out.metrics["exhaustive"] = json{{"m", me},
                                         {"max_mass", ex_max_mass},
                                         {"bound", 4.0 / me},
                                         {"flips_ok", ex_flips_ok}};
        out.verdicts.push_back(verdict("exhaustive-flip-l1", ex_flips_ok,
                                       "all single-bit flips move Z by L1 <= 1 (m=4, 2^16 cases)",
                                       ex_flips_ok ? "ok" : "violated"));
        out.verdicts.push_back(verdict("exhaustive-max-mass", ex_max_mass <= 4.0 / me,
                                       "max_z P(Z=z) <= 4/m exactly (m=4)",
                                       "max mass = " + fmtg(ex_max_mass)));

        // sampled certification at the configured m
        const auto& rows = ts.at("zflip");
        std::vector<std::uint64_t> shist(static_cast<std::size_t>(c.m), 0);
        bool s_flips_ok = true;
        for (const auto& r : rows) {
            shist[static_cast<std::size_t>(r.at("z").get<Coord>() - 1)] += 1;
            s_flips_ok = s_flips_ok && r.at("flips_ok").get<bool>();
        }
        double s_max_mass = 0;
        for (auto h : shist)
            s_max_mass = std::max(s_max_mass, static_cast<double>(h) /
                                                  static_cast<double>(rows.size()));
        out.metrics["sampled"] = json{{"m", c.m},
                                      {"n", rows.size()},
                                      {"max_mass", s_max_mass},
                                      {"bound", 4.0 / c.m},
                                      {"flips_ok", s_flips_ok}};
        for (std::size_t z = 0; z < shist.size(); ++z)
            out.csv_rows.push_back(json{{"z", z + 1}, {"count", shist[z]}});
        out.verdicts.push_back(verdict("sampled-max-mass", s_max_mass <= 4.0 / c.m,
                                       "empirical max_z P(Z=z) <= 4/m",
                                       "max mass = " + fmtg(s_max_mass)));
        out.verdicts.push_back(verdict("sampled-flip-l1", s_flips_ok,
                                       "all single-bit flips move Z by L1 <= 1 on samples",
                                       s_flips_ok ? "ok" : "violated"));
        if (opt.trace) {
            json tr{{"m", c.m}, {"histogram", shist}};
            write_file(opt.out / ("zstart-trace-" + config_hash(c) + ".json"), stable_dump(tr));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// phi-check: the Lemma-4 coupling inequality, exhaustively over levels.
// ---------------------------------------------------------------------------

class PhiCheck final : public Scenario {
public:
    std::string name() const override { return "phi-check"; }
    std::string summary() const override {
        return "phi-coupling construction with T_phi(0, x(v)) >= T(0, v) for all v";
    }
    std::set<std::string> allowed_keys() const override { return {"dist", "N", "n", "d"}; }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "N", [](Config& x) { x.N = 32; });
        detail::default_key(c, "n", [](Config& x) { x.n = 100; });
    }

    void validate(const Config& c) const override {
        if (c.has("d") && (c.d < 2 || c.d > 4)) throw ConfigError("phi-check: d must be 2..4");
        if (c.N < 1 || c.N > 128) throw ConfigError("phi-check: N must lie in [1, 128]");
    }

    std::vector<TableDecl> tables(const Config& c) const override {
        std::vector<TableDecl> t;
        for (int d : dims_of(c)) t.push_back({"phi-d" + std::to_string(d), c.n});
        return t;
    }

    json row(const Config& c, const std::string& table, std::uint64_t i) const override {
        int d = table.back() - '0';
        SeedContext ctx{c.seed, static_cast<std::uint64_t>(d), i};
        WeightField omega(c.dist, ctx,
                          Box(Point::zero(static_cast<std::size_t>(d)),
                              Point::diagonal(static_cast<std::size_t>(d), c.N)));
        PhiCoupling cp = build_phi(omega, c.N);
        PhiCheckResultRow r = check(cp);
        return json{{"violations", r.violations},
                    {"off_segment", r.off_segment},
                    {"checked", r.checked},
                    {"worst_margin", r.worst_margin}};
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions& opt) const override {
        ReportRecord out;
        std::uint64_t viol = 0, offseg = 0, checked = 0;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& [name, rows] : ts) {
            std::uint64_t tv = 0;
            for (const auto& r : rows) {
                tv += r.at("violations").get<std::uint64_t>();
                offseg += r.at("off_segment").get<std::uint64_t>();
                checked += r.at("checked").get<std::uint64_t>();
                worst = std::min(worst, r.at("worst_margin").get<double>());
            }
            viol += tv;
            out.csv_rows.push_back(json{{"table", name}, {"violations", tv}});
        }
        out.metrics = json{{"violations", viol},
                           {"off_segment", offseg},
                           {"checked", checked},
                           {"worst_margin", worst}};
        out.verdicts.push_back(verdict("phi-domination", viol == 0,
                                       "T_phi(0, x(v)) >= T(0, v) for every constructed v",
                                       std::to_string(viol) + " violations over " +
                                           std::to_string(checked) + " checks"));
        out.verdicts.push_back(verdict("x-on-segment", offseg == 0,
                                       "x(v) on {v + alpha(e1 - e2) : 0 <= alpha <= v2}",
                                       std::to_string(offseg) + " off-segment"));
        if (opt.trace) {
            int d = dims_of(c).front();
            SeedContext ctx{c.seed, static_cast<std::uint64_t>(d), 0};
            WeightField omega(c.dist, ctx,
                              Box(Point::zero(static_cast<std::size_t>(d)),
                                  Point::diagonal(static_cast<std::size_t>(d), c.N)));
            PhiCoupling cp = build_phi(omega, c.N);
            json table = json::array();
            for (const auto& [v, xv] : cp.x_map) {
                json e{{"v", to_json(v)}, {"x", to_json(xv)}};
                if (cp.j_map.count(v)) e["j"] = cp.j_map.at(v);
                if (cp.xhat_map.count(v)) e["xhat"] = to_json(cp.xhat_map.at(v));
                table.push_back(std::move(e));
            }
            write_file(opt.out / ("phi-trace-" + config_hash(c) + ".json"),
                       stable_dump(json{{"d", d}, {"entries", table}}));
        }
        return out;
    }

private:
    struct PhiCheckResultRow {
        std::uint64_t violations = 0, off_segment = 0, checked = 0;
        double worst_margin = std::numeric_limits<double>::infinity();
    };
    static PhiCheckResultRow check(const PhiCoupling& cp) {
        dlpp::PhiCheck chk = verify_phi(cp);
        return {chk.violations, chk.off_segment, chk.checked, chk.worst_margin};
    }
};

// ---------------------------------------------------------------------------
// reflect-check: the reflection bijection, per-sample domination, involution
// and weight-multiset preservation.
// ---------------------------------------------------------------------------

class ReflectCheck final : public Scenario {
public:
    std::string name() const override { return "reflect-check"; }
    std::string summary() const override {
        return "reflection coupling: T_omega'(b, Nu) >= T(a, Nu) at the realized crossing";
    }
    std::set<std::string> allowed_keys() const override { return {"dist", "N", "a", "n"}; }

    void set_defaults(Config& c) const override {
        detail::default_key(c, "dist", [](Config& x) { x.dist = Distribution::gaussian(); });
        detail::default_key(c, "N", [](Config& x) { x.N = 64; });
        detail::default_key(c, "a", [](Config& x) { x.a = {0, x.N / 2}; });
        detail::default_key(c, "n", [](Config& x) { x.n = 100; });
    }

    void validate(const Config& c) const override {
        if (c.a.size() != 2 || c.a[0] != 0)
            throw ConfigError("reflect-check: a must be a d=2 point with a1 = 0");
        if (c.a[1] < 1 || c.a[1] > c.N)
            throw ConfigError("reflect-check: need 1 <= a2 <= N");
    }

    std::vector<TableDecl> tables(const Config& c) const override { return {{"trial", c.n}}; }

    json row(const Config& c, const std::string&, std::uint64_t i) const override {
        Point a = as_point(c.a);
        Point nu = Point::diagonal(2, c.N);
        SeedContext ctx{c.seed, 0, i};
        WeightField f(c.dist, ctx, Box(Point::zero(2), nu));
        ReflectTrial tr = reflect_trial(f, a, c.N);

        // involution and multiset preservation, exact
        ReflectionSpec spec = make_reflection(a, c.N);
        spec.q = tr.q;
        spec.q_set = true;
        WeightField once = reflect_configuration(f, spec);
        WeightField twice = reflect_configuration(once, spec);
        bool inv_ok = true, multiset_ok = true;
        std::vector<double> w0, w1;
        Point p = Point::zero(2);
        const Box& box = f.box();
        for (;;) {
            double a0 = f.weight(p), a1 = once.weight(p);
            inv_ok = inv_ok && twice.weight(p) == a0;
            w0.push_back(a0);
            w1.push_back(a1);
            std::size_t ax = 2;
            bool done = true;
            while (ax-- > 0) {
                if (++p[ax] <= box.hi[ax]) {
                    done = false;
                    break;
                }
                p[ax] = box.lo[ax];
            }
            if (done) break;
        }
        std::sort(w0.begin(), w0.end());
        std::sort(w1.begin(), w1.end());
        multiset_ok = w0 == w1;

        return json{{"ok", tr.ok},
                    {"inv_ok", inv_ok},
                    {"multiset_ok", multiset_ok},
                    {"t_a", tr.t_a},
                    {"t_b", tr.t_b_reflected},
                    {"q", to_json(tr.q)}};
    }

    ReportRecord reduce(const Config& c, const TableSet& ts, const RunOptions& opt) const override {
        const auto& rows = ts.at("trial");
        std::uint64_t bad = 0, bad_inv = 0, bad_ms = 0;
        for (const auto& r : rows) {
            if (!r.at("ok").get<bool>()) ++bad;
            if (!r.at("inv_ok").get<bool>()) ++bad_inv;
            if (!r.at("multiset_ok").get<bool>()) ++bad_ms;
        }
        ReportRecord out;
        out.metrics = json{{"trials", rows.size()},
                           {"domination_violations", bad},
                           {"involution_violations", bad_inv},
                           {"multiset_violations", bad_ms}};
        for (const auto& r : rows)
            out.csv_rows.push_back(json{{"t_a", r.at("t_a").get<double>()},
                                        {"t_b_reflected", r.at("t_b").get<double>()},
                                        {"ok", r.at("ok").get<bool>() ? 1 : 0}});
        out.verdicts.push_back(verdict("reflection-domination", bad == 0,
                                       "T_omega'(b, Nu) >= T(a, Nu) whenever the geodesic "
                                       "crosses q; zero violations",
                                       std::to_string(bad) + " violations"));
        out.verdicts.push_back(verdict("reflection-involution", bad_inv == 0,
                                       "reflect(reflect(omega)) = omega exactly",
                                       std::to_string(bad_inv) + " violations"));
        out.verdicts.push_back(verdict("weight-multiset-preserved", bad_ms == 0,
                                       "reflection permutes the weight multiset exactly",
                                       std::to_string(bad_ms) + " violations"));
        if (opt.trace) {
            ReflectionSpec spec = make_reflection(as_point(c.a), c.N);
            json tr{{"a", to_json(spec.a)},
                    {"b", to_json(spec.b)},
                    {"hyperplane_offset", spec.L.k},
                    {"N", c.N}};
            write_file(opt.out / ("reflect-trace-" + config_hash(c) + ".json"),
                       stable_dump(tr));
        }
        return out;
    }
};

}  // namespace scenarios

inline const std::vector<const Scenario*>& all_scenarios() {
    static const scenarios::OracleCheck oracle_check;
    static const scenarios::VarianceScan variance_scan;
    static const scenarios::InfluenceScan influence_scan;
    static const scenarios::TailScan tail_scan;
    static const scenarios::QuantileScan quantile_scan;
    static const scenarios::ShapeScan shape_scan;
    static const scenarios::ConcavityScan concavity_scan;
    static const scenarios::PlateauScan plateau_scan;
    static const scenarios::WanderingScan wandering_scan;
    static const scenarios::PolymerScan polymer_scan;
    static const scenarios::ShiftScan shift_scan;
    static const scenarios::ClampCheck clamp_check;
    static const scenarios::RatioScan ratio_scan;
    static const scenarios::ZStartCheck z_start_check;
    static const scenarios::PhiCheck phi_check;
    static const scenarios::ReflectCheck reflect_check;
    static const std::vector<const Scenario*> all = {
        &oracle_check, &variance_scan, &influence_scan, &tail_scan,
        &quantile_scan, &shape_scan,   &concavity_scan, &plateau_scan,
        &wandering_scan, &polymer_scan, &shift_scan,    &clamp_check,
        &ratio_scan,   &z_start_check, &phi_check,      &reflect_check};
    return all;
}

}  // namespace dlpp
