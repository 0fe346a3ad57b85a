#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dlpp/clamp.hpp"
#include "dlpp/couplings.hpp"
#include "dlpp/field.hpp"
#include "dlpp/passage.hpp"
#include "dlpp/stats.hpp"

namespace dlpp {

template <class Fn>
std::vector<double> mc_values(std::uint64_t n, unsigned threads, Fn&& fn) {
    std::vector<double> out(n);
    parallel_for_index(n, threads, [&](std::uint64_t i) { out[i] = fn(i); });
    return out;
}

/// Monte Carlo statistics of T(0, x) over n independent fields.
inline SampleStats mc_passage_stats(const Distribution& dist, const Point& x, std::uint64_t n,
                                    const SeedContext& base, Graph kind = Graph::Ordered,
                                    unsigned threads = 1) {
    if (n < 2) throw Error("mc_passage_stats: n must be at least 2");
    Point zero = Point::zero(x.dim());
    Box box = interval_box(zero, x, kind);
    auto vals = mc_values(n, threads, [&](std::uint64_t i) {
        WeightField f(dist, base.with_sample(i), box);
        return last_passage_time(f, zero, x, kind);
    });
    return compute_stats(vals, base);
}

// ---------------------------------------------------------------------------
// Variance scaling over dyadic N.
// ---------------------------------------------------------------------------

struct ScalingPoint {
    Coord N = 0;
    SampleStats stats;
};

struct ScalingReport {
    std::vector<ScalingPoint> points;
    std::vector<Coord> fitted_Ns;     // var CI excluding 0
    std::optional<LineFit> exponent;  // slope of log var vs log N
};

namespace detail {

inline ScalingReport fit_scaling(std::vector<ScalingPoint> points) {
    ScalingReport rep;
    rep.points = std::move(points);
    std::vector<double> lx, ly;
    for (const auto& p : rep.points) {
        if (p.stats.var_ci.lo > 0) {
            rep.fitted_Ns.push_back(p.N);
            lx.push_back(std::log(static_cast<double>(p.N)));
            ly.push_back(std::log(p.stats.variance));
        }
    }
    if (lx.size() >= 2) rep.exponent = fit_line(lx, ly);
    return rep;
}

}  // namespace detail

/// Per-N statistics of T(0, floor(N dir)) plus the fitted variance growth
/// exponent chi. The fit refuses Ns whose variance CI touches 0.
inline ScalingReport variance_scaling(const Distribution& dist, const std::vector<double>& dir,
                                      const std::vector<Coord>& Ns, std::uint64_t n,
                                      const SeedContext& base, Graph kind = Graph::Ordered,
                                      unsigned threads = 1) {
    std::vector<ScalingPoint> pts;
    for (std::size_t k = 0; k < Ns.size(); ++k) {
        Coord N = Ns[k];
        Point x(dir.size());
        for (std::size_t i = 0; i < dir.size(); ++i)
            x[i] = static_cast<Coord>(std::floor(dir[i] * static_cast<double>(N)));
        SeedContext ctx = base.with_experiment(base.experiment_id + k);
        pts.push_back({N, mc_passage_stats(dist, x, n, ctx, kind, threads)});
    }
    return detail::fit_scaling(std::move(pts));
}

/// Ground-state variant: statistics of T(0, S_N) (Ordered) or T(0, S^_N).
inline ScalingReport polymer_variance(const Distribution& dist, const std::vector<Coord>& Ns,
                                      std::uint64_t n, const SeedContext& base, Graph kind,
                                      unsigned threads = 1) {
    std::size_t d = 2;
    std::vector<ScalingPoint> pts;
    for (std::size_t k = 0; k < Ns.size(); ++k) {
        Coord N = Ns[k];
        Box box = kind == Graph::Ordered
                      ? Box(Point::zero(d), Point::diagonal(d, N))
                      : Box(Point{-N, 0}, Point{N, N});
        SeedContext ctx = base.with_experiment(base.experiment_id + k);
        auto vals = mc_values(n, threads, [&](std::uint64_t i) {
            WeightField f(dist, ctx.with_sample(i), box);
            return ground_state(f, N, kind).value;
        });
        pts.push_back({N, compute_stats(vals, ctx)});
    }
    return detail::fit_scaling(std::move(pts));
}

// ---------------------------------------------------------------------------
// Influence maps: empirical I_v = P(v on the geodesic), optionally with the
// gamma-weighted J_v accumulator, optionally under a randomized start.
// ---------------------------------------------------------------------------

struct InfluenceMap {
    Point x;
    std::uint64_t n = 0;
    int m = 0;  // randomized-start scale; 0 = deterministic start at 0
    Box support;
    std::vector<std::uint64_t> counts;  // row-major over support
    std::vector<double> weighted;       // gamma J_v accumulator (empty if unused)
    std::vector<std::vector<std::uint32_t>> per_sample;  // flat vertex indices
    double max_weighted_identity_error = 0;  // |sum(1+w) - (|x| + T)| over samples

    std::uint64_t flat(const Point& p) const {
        std::uint64_t idx = 0, stride = 1;
        for (std::size_t i = p.dim(); i-- > 0;) {
            idx += static_cast<std::uint64_t>(p[i] - support.lo[i]) * stride;
            stride *= static_cast<std::uint64_t>(support.extent(i));
        }
        return idx;
    }

    Point unflat(std::uint64_t idx) const {
        Point p(support.dim());
        for (std::size_t i = support.dim(); i-- > 0;) {
            auto e = static_cast<std::uint64_t>(support.extent(i));
            p[i] = support.lo[i] + static_cast<Coord>(idx % e);
            idx /= e;
        }
        return p;
    }

    double ihat(const Point& p) const {
        if (!support.contains(p)) return 0.0;
        return static_cast<double>(counts[flat(p)]) / static_cast<double>(n);
    }

    double jhat(const Point& p) const {
        if (weighted.empty() || !support.contains(p)) return 0.0;
        return weighted[flat(p)] / static_cast<double>(n);
    }

    double max_ihat() const {
        std::uint64_t mx = 0;
        for (auto c : counts) mx = std::max(mx, c);
        return static_cast<double>(mx) / static_cast<double>(n);
    }

    std::uint64_t total_count() const {
        std::uint64_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }
};

inline InfluenceMap influence_map(const Distribution& dist, const Point& x, std::uint64_t n,
                                  const SeedContext& base, int m = 0, bool weighted = false,
                                  unsigned threads = 1, bool keep_per_sample = false) {
    if (weighted && dist.kind() != DistKind::Gamma)
        throw Error("weighted influence map requires a gamma law (got " + dist.name() + ")");
    std::size_t d = x.dim();
    Point zero = Point::zero(d);
    Box support(zero, x + Point::diagonal(d, std::max(m, 0)));
    InfluenceMap map;
    map.x = x;
    map.n = n;
    map.m = m;
    map.support = support;
    map.counts.assign(support.cell_count(), 0);
    if (weighted) map.weighted.assign(support.cell_count(), 0.0);

    std::vector<std::vector<std::uint32_t>> rows(n);
    std::vector<std::vector<double>> wrows(weighted ? n : 0);
    std::vector<double> identity_err(weighted ? n : 0, 0.0);
    Coord pathlen = l1(x);

    parallel_for_index(n, threads, [&](std::uint64_t i) {
        SeedContext ctx = base.with_sample(i);
        Point start = zero;
        if (m > 0) start = sample_randomized_start(ctx, m, static_cast<int>(d)).z;
        WeightField f(dist, ctx, support);
        Geodesic g = geodesic(f, start, x + start, Graph::Ordered);
        auto verts = g.path.vertices();
        if (static_cast<Coord>(verts.size()) != pathlen)
            throw Error("influence_map: geodesic vertex count mismatch");
        auto& row = rows[i];
        row.reserve(verts.size());
        double wsum = 0;
        for (const Point& v : verts) {
            row.push_back(static_cast<std::uint32_t>(map.flat(v)));
            if (weighted) {
                double iw = 1.0 + f.weight(v);
                wrows[i].push_back(iw);
                wsum += iw;
            }
        }
        if (weighted)
            identity_err[i] = std::abs(wsum - (static_cast<double>(pathlen) + g.value));
    });

    // fixed-order reduction: aggregate by sample index
    for (std::uint64_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            map.counts[rows[i][j]] += 1;
            if (weighted) map.weighted[rows[i][j]] += wrows[i][j];
        }
    }
    if (weighted)
        for (double e : identity_err)
            map.max_weighted_identity_error = std::max(map.max_weighted_identity_error, e);
    if (keep_per_sample) map.per_sample = std::move(rows);
    return map;
}

inline InfluenceMap weighted_influence_map(const Distribution& dist, const Point& x,
                                           std::uint64_t n, const SeedContext& base,
                                           unsigned threads = 1) {
    return influence_map(dist, x, n, base, 0, true, threads);
}

/// Bootstrap CI of max_v Ihat_v, resampling whole geodesics.
inline CI bootstrap_max_ihat(const InfluenceMap& map, const SeedContext& provenance,
                             int B = kBootstrapResamples, double level = 0.95) {
    if (map.per_sample.empty()) throw Error("bootstrap_max_ihat: per-sample rows not kept");
    std::uint64_t n = map.per_sample.size();
    std::vector<double> vals(B);
    std::vector<std::uint64_t> counts(map.counts.size());
    for (int b = 0; b < B; ++b) {
        Stream s({provenance.master_seed, provenance.experiment_id, static_cast<std::uint64_t>(b)},
                 StreamClass::Bootstrap);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::uint64_t i = 0; i < n; ++i)
            for (std::uint32_t fidx : map.per_sample[s.next_below(n)]) counts[fidx] += 1;
        std::uint64_t mx = 0;
        for (auto c : counts) mx = std::max(mx, c);
        vals[b] = static_cast<double>(mx) / static_cast<double>(n);
    }
    return detail::percentile_ci(vals, level);
}

// ---------------------------------------------------------------------------
// Concentration tails.
// ---------------------------------------------------------------------------

struct TailPoint {
    double t = 0;
    std::uint64_t exceed = 0;
    double p = 0;
    CI ci;  // Wilson
};

struct TailReport {
    Point x;
    std::uint64_t n = 0;
    double mean = 0;
    std::vector<TailPoint> points;
    std::optional<double> c_fit;  // p(1) = exp(-1/c)
    double envelope_factor = 1.5;
    bool envelope_ok = true;  // p(t) <= factor * exp(-t^2/c) for t > 1
};

/// Tail summary from already-sampled passage values.
inline TailReport tail_reduce(const Point& x, std::span<const double> vals,
                              const std::vector<double>& ts) {
    TailReport rep;
    rep.x = x;
    std::uint64_t n = vals.size();
    rep.n = n;
    double m = 0;
    for (double v : vals) m += v;
    m /= static_cast<double>(n);
    rep.mean = m;
    double scale = std::sqrt(static_cast<double>(l1(x)));
    for (double t : ts) {
        TailPoint pt;
        pt.t = t;
        for (double v : vals)
            if (std::abs(v - m) >= t * scale) ++pt.exceed;
        pt.p = static_cast<double>(pt.exceed) / static_cast<double>(n);
        pt.ci = wilson_ci(pt.exceed, n);
        rep.points.push_back(pt);
    }
    // self-consistency envelope fitted from the first t >= 1 grid point
    for (const auto& pt : rep.points) {
        if (pt.t == 1.0 && pt.p > 0 && pt.p < 1) {
            rep.c_fit = -1.0 / std::log(pt.p);
            break;
        }
    }
    if (rep.c_fit) {
        for (const auto& pt : rep.points) {
            if (pt.t <= 1.0) continue;
            double envelope = rep.envelope_factor * std::exp(-pt.t * pt.t / *rep.c_fit);
            if (pt.p > envelope) rep.envelope_ok = false;
        }
    }
    return rep;
}

/// Empirical exceedance P(|T - mean| >= t sqrt(|x|)) with binomial CIs and the
/// Gaussian-shape self-consistency score fitted at t = 1.
inline TailReport tail_report(const Distribution& dist, const Point& x,
                              const std::vector<double>& ts, std::uint64_t n,
                              const SeedContext& base, unsigned threads = 1) {
    if (n < 1000) throw Error("tail_report: n must be at least 10^3");
    Point zero = Point::zero(x.dim());
    Box box = interval_box(zero, x, Graph::Ordered);
    auto vals = mc_values(n, threads, [&](std::uint64_t i) {
        WeightField f(dist, base.with_sample(i), box);
        return last_passage_time(f, zero, x);
    });
    return tail_reduce(x, vals, ts);
}

// ---------------------------------------------------------------------------
// Clamped-variance inequality (the quantile-window step of the concentration
// proof): var[T ^ h(2u) v h(u)] <= 4 u |x| / log(2 c_G^-2 u^-1).
// ---------------------------------------------------------------------------

struct ClampedVarianceReport {
    Point x;
    double u = 0;
    std::uint64_t n_pilot = 0, n = 0;
    double A = 0, B = 0;  // pilot quantiles h(u), h(2u)
    double c_g = 0;
    double clamped_variance = 0;
    CI var_ci;
    double raw_variance = 0;
    double bound = 0;
    bool pass = false;
};

inline ClampedVarianceReport clamped_variance_check(const Distribution& dist, const Point& x,
                                                    double u, std::uint64_t n,
                                                    std::uint64_t n_pilot, double c_g,
                                                    const SeedContext& base,
                                                    unsigned threads = 1) {
    if (dist.kind() != DistKind::Gaussian)
        throw Error("clamped_variance_check: stated for gaussian vertex weights");
    if (!(u > 0 && u <= 0.25)) throw Error("clamped_variance_check: need 0 < u <= 1/4");
    if (static_cast<double>(n_pilot) * u < 50)
        throw Error("clamped_variance_check: u too small for the pilot sample size");

    Point zero = Point::zero(x.dim());
    Box box = interval_box(zero, x, Graph::Ordered);
    SeedContext pilot_ctx = base.with_experiment(base.experiment_id + 1);
    auto pilot = mc_values(n_pilot, threads, [&](std::uint64_t i) {
        WeightField f(dist, pilot_ctx.with_sample(i), box);
        return last_passage_time(f, zero, x);
    });
    QuantileFn h(std::move(pilot));

    ClampedVarianceReport rep;
    rep.x = x;
    rep.u = u;
    rep.n_pilot = n_pilot;
    rep.n = n;
    rep.A = h(u);
    rep.B = h(2 * u);
    rep.c_g = c_g;
    if (!(rep.A < rep.B))
        throw Error("clamped_variance_check: pilot quantiles produced an empty window");

    SeedContext fresh_ctx = base.with_experiment(base.experiment_id + 2);
    auto vals = mc_values(n, threads, [&](std::uint64_t i) {
        WeightField f(dist, fresh_ctx.with_sample(i), box);
        return last_passage_time(f, zero, x);
    });
    std::vector<double> clamped(vals.size());
    ClampWindow w(rep.A, rep.B);
    for (std::size_t i = 0; i < vals.size(); ++i) clamped[i] = clamp(vals[i], w);

    SampleStats raw = compute_stats(vals, fresh_ctx);
    SampleStats cl = compute_stats(clamped, fresh_ctx);
    rep.raw_variance = raw.variance;
    rep.clamped_variance = cl.variance;
    rep.var_ci = cl.var_ci;
    rep.bound = 4.0 * u * static_cast<double>(l1(x)) / std::log(2.0 / (c_g * c_g) / u);
    rep.pass = rep.var_ci.hi <= rep.bound;
    return rep;
}

// ---------------------------------------------------------------------------
// Shape function estimation.
// ---------------------------------------------------------------------------

struct ShapeEstimate {
    std::vector<double> direction;
    Coord N = 0;
    Graph kind = Graph::Ordered;
    Point endpoint;
    double ghat = 0;
    CI ghat_ci;
    SampleStats stats;  // raw T(0, endpoint)
    struct DyadicPoint {
        Coord N;
        double ghat;
        CI ci;
    };
    std::vector<DyadicPoint> dyadic;
    bool superadditive_ok = true;
};

inline Point direction_endpoint(const std::vector<double>& dir, Coord N, Graph kind) {
    Point x(dir.size());
    for (std::size_t i = 0; i < dir.size(); ++i)
        x[i] = static_cast<Coord>(std::floor(dir[i] * static_cast<double>(N)));
    if (kind == Graph::SpaceTime) {
        // repair parity so the endpoint is reachable at time floor(N x_d)
        std::size_t d = dir.size();
        Coord ds = 0;
        for (std::size_t i = 0; i + 1 < d; ++i) ds += std::abs(x[i]);
        if ((x[d - 1] - ds) % 2 != 0) x[d - 1] += 1;
    }
    return x;
}

inline ShapeEstimate shape_estimate(const Distribution& dist, const std::vector<double>& dir,
                                    Coord N, std::uint64_t n, const SeedContext& base,
                                    Graph kind = Graph::Ordered, unsigned threads = 1) {
    std::size_t d = dir.size();
    if (d < 1) throw Error("shape_estimate: empty direction");
    if (kind == Graph::Ordered) {
        bool some = false;
        for (double v : dir) {
            if (v < 0) throw Error("shape_estimate: direction outside R+^d");
            some = some || v > 0;
        }
        if (!some) throw Error("shape_estimate: zero direction");
    } else {
        double s = 0;
        for (std::size_t i = 0; i + 1 < d; ++i) s += std::abs(dir[i]);
        if (!(dir[d - 1] >= s) || dir[d - 1] <= 0)
            throw Error("shape_estimate: direction outside the space-time cone");
    }

    ShapeEstimate est;
    est.direction = dir;
    est.N = N;
    est.kind = kind;
    est.endpoint = direction_endpoint(dir, N, kind);

    std::vector<Coord> dyadic_Ns;
    for (Coord m = N; m >= 8 && dyadic_Ns.size() < 4; m /= 2) dyadic_Ns.push_back(m);
    std::reverse(dyadic_Ns.begin(), dyadic_Ns.end());
    if (dyadic_Ns.empty() || dyadic_Ns.back() != N) dyadic_Ns.push_back(N);

    std::vector<ShapeEstimate::DyadicPoint> dy;
    for (std::size_t k = 0; k < dyadic_Ns.size(); ++k) {
        Coord m = dyadic_Ns[k];
        Point xm = direction_endpoint(dir, m, kind);
        SeedContext ctx = base.with_experiment(base.experiment_id + k);
        SampleStats st = mc_passage_stats(dist, xm, n, ctx, kind, threads);
        ShapeEstimate::DyadicPoint p;
        p.N = m;
        p.ghat = st.mean / static_cast<double>(m);
        p.ci = {st.mean_ci.lo / static_cast<double>(m), st.mean_ci.hi / static_cast<double>(m)};
        dy.push_back(p);
        if (m == N) {
            est.stats = st;
            est.ghat = p.ghat;
            est.ghat_ci = p.ci;
        }
    }
    est.dyadic = dy;
    for (std::size_t k = 1; k < dy.size(); ++k)
        if (dy[k].ci.hi < dy[k - 1].ci.lo) est.superadditive_ok = false;
    return est;
}

// ---------------------------------------------------------------------------
// Strict concavity gap.
// ---------------------------------------------------------------------------

struct ConcavityReport {
    Coord N = 0;
    std::uint64_t n = 0;
    SampleStats diag;  // raw T(0, N(e1+e2) + off)
    SampleStats gap;   // per-sample (T_diag - T_axis) / (2N), common random numbers
    bool gap_positive = false;
};

/// Paired estimates of T(0, N(e1+e2)+off)/2N versus T(0, 2N e2+off)/2N on a
/// shared field; the gap is strictly positive for random weights.
inline ConcavityReport concavity_gap(const Distribution& dist, Coord N, std::uint64_t n,
                                     const SeedContext& base,
                                     const std::vector<double>& offset = {},
                                     unsigned threads = 1) {
    std::size_t d = offset.empty() ? 2 : 2 + offset.size();
    Point p_diag(d), p_axis(d), hi(d);
    p_diag[0] = N;
    p_diag[1] = N;
    p_axis[1] = 2 * N;
    for (std::size_t i = 0; i < offset.size(); ++i) {
        if (offset[i] < 0 || offset[i] > 1)
            throw Error("concavity_gap: offset entries must lie in [0,1]");
        Coord o = static_cast<Coord>(std::floor(2.0 * static_cast<double>(N) * offset[i]));
        p_diag[2 + i] = o;
        p_axis[2 + i] = o;
    }
    for (std::size_t i = 0; i < d; ++i) hi[i] = std::max(p_diag[i], p_axis[i]);
    Box box(Point::zero(d), hi);

    std::vector<double> diag(n), gap(n);
    parallel_for_index(n, threads, [&](std::uint64_t i) {
        WeightField f(dist, base.with_sample(i), box);
        double t1 = last_passage_time(f, Point::zero(d), p_diag);
        double t2 = last_passage_time(f, Point::zero(d), p_axis);
        diag[i] = t1;
        gap[i] = (t1 - t2) / (2.0 * static_cast<double>(N));
    });
    ConcavityReport rep;
    rep.N = N;
    rep.n = n;
    rep.diag = compute_stats(diag, base);
    rep.gap = compute_stats(gap, base.with_experiment(base.experiment_id + 1));
    rep.gap_positive = rep.gap.mean_ci.lo > 0;
    return rep;
}

// ---------------------------------------------------------------------------
// Geodesic wandering.
// ---------------------------------------------------------------------------

struct WanderingPoint {
    Coord N = 0;
    SampleStats mid;      // midpoint-level displacement |v1 - v2| / 2
    SampleStats maxdisp;  // path maximum of the same functional
};

struct WanderingReport {
    std::vector<WanderingPoint> points;
    std::optional<LineFit> xi;  // slope of log mean-mid vs log N
};

inline WanderingReport wandering_stats(const Distribution& dist, const std::vector<Coord>& Ns,
                                       std::uint64_t n, const SeedContext& base,
                                       unsigned threads = 1) {
    WanderingReport rep;
    for (std::size_t k = 0; k < Ns.size(); ++k) {
        Coord N = Ns[k];
        Point target{N, N};
        Box box(Point::zero(2), target);
        SeedContext ctx = base.with_experiment(base.experiment_id + k);
        std::vector<double> mid(n), mx(n);
        parallel_for_index(n, threads, [&](std::uint64_t i) {
            WeightField f(dist, ctx.with_sample(i), box);
            Geodesic g = geodesic(f, Point::zero(2), target);
            double m = 0, best = 0;
            for (const Point& v : g.path.vertices()) {
                double disp = std::abs(static_cast<double>(v[0] - v[1])) / 2.0;
                best = std::max(best, disp);
                if (v[0] + v[1] == N) m = disp;
            }
            mid[i] = m;
            mx[i] = best;
        });
        rep.points.push_back({N, compute_stats(mid, ctx),
                              compute_stats(mx, ctx.with_experiment(ctx.experiment_id + 100))});
    }
    std::vector<double> lx, ly;
    for (const auto& p : rep.points) {
        if (p.mid.mean <= 0) continue;
        lx.push_back(std::log(static_cast<double>(p.N)));
        ly.push_back(std::log(p.mid.mean));
    }
    if (lx.size() >= 2) rep.xi = fit_line(lx, ly);
    return rep;
}

// ---------------------------------------------------------------------------
// Shift-difference scaling ||h(Nu)||_2 and the geodesic monotonicity of h.
// ---------------------------------------------------------------------------

struct ShiftScalingPoint {
    Coord N = 0;
    double l2 = 0;
    CI l2_ci;
    SampleStats h_stats;
    std::uint64_t mono_violations = 0;
};

struct ShiftScalingReport {
    std::vector<ShiftScalingPoint> points;
    std::optional<LineFit> exponent;  // log l2 vs log N
    CI exponent_ci;
    std::uint64_t total_violations = 0;
    bool exponent_below_half = false;
};

struct ShiftSample {
    double h = 0;                    // h(Nu)
    std::uint64_t violations = 0;    // counts of h(Nu) > h(a) + 1e-9 along the geodesic
};

/// One coupled sample of h(Nu) = T(-e1, Nu) - T(0, Nu) together with the
/// monotonicity check h(Nu) <= h(a) for every a with a_1 = 0 on the realized
/// geodesic from -e1 (tolerance 1e-9 for float accumulation).
inline ShiftSample shift_sample_one(const Distribution& dist, const SeedContext& ctx, Coord N) {
    Point nu = Point::diagonal(2, N);
    Point me1{-1, 0};
    Box box_shift(me1, nu);
    Box box_origin(Point::zero(2), nu);
    WeightField f(dist, ctx, box_shift);
    PassageGrid from_shift(f, me1, box_shift, Graph::Ordered, true);
    PassageGrid from_origin(f, Point::zero(2), box_origin, Graph::Ordered, false);
    ShiftSample s;
    s.h = from_shift.value(nu) - from_origin.value(nu);
    for (const Point& v : from_shift.backtrack(nu).vertices()) {
        if (v[0] != 0) continue;
        double h_a = from_shift.value(v) - from_origin.value(v);
        if (s.h > h_a + 1e-9) s.violations += 1;
    }
    return s;
}

/// L2 norm of h(Nu) per N, its fitted growth exponent, and the per-sample
/// geodesic monotonicity violations.
inline ShiftScalingReport shift_difference_scaling(const Distribution& dist,
                                                   const std::vector<Coord>& Ns, std::uint64_t n,
                                                   const SeedContext& base,
                                                   unsigned threads = 1) {
    ShiftScalingReport rep;
    for (std::size_t k = 0; k < Ns.size(); ++k) {
        Coord N = Ns[k];
        SeedContext ctx = base.with_experiment(base.experiment_id + k);
        std::vector<double> hs(n);
        std::vector<std::uint64_t> viol(n, 0);
        parallel_for_index(n, threads, [&](std::uint64_t i) {
            ShiftSample s = shift_sample_one(dist, ctx.with_sample(i), N);
            hs[i] = s.h;
            viol[i] = s.violations;
        });
        ShiftScalingPoint pt;
        pt.N = N;
        pt.h_stats = compute_stats(hs, ctx);
        double sq = 0;
        for (double h : hs) sq += h * h;
        pt.l2 = std::sqrt(sq / static_cast<double>(n));
        pt.l2_ci = bootstrap_ci(
            hs,
            [](std::span<const double> xs) {
                double s = 0;
                for (double v : xs) s += v * v;
                return std::sqrt(s / static_cast<double>(xs.size()));
            },
            ctx);
        for (auto v : viol) pt.mono_violations += v;
        rep.total_violations += pt.mono_violations;
        rep.points.push_back(std::move(pt));
    }
    std::vector<double> lx, ly;
    for (const auto& p : rep.points) {
        if (p.l2 <= 0) continue;
        lx.push_back(std::log(static_cast<double>(p.N)));
        ly.push_back(std::log(p.l2));
    }
    if (lx.size() >= 2) {
        rep.exponent = fit_line(lx, ly);
        double z = 1.959963984540054;
        rep.exponent_ci = {rep.exponent->slope - z * rep.exponent->slope_se,
                           rep.exponent->slope + z * rep.exponent->slope_se};
        rep.exponent_below_half = rep.exponent_ci.hi < 0.5;
    }
    return rep;
}

}  // namespace dlpp
