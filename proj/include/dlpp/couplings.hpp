#pragma once

#include <cmath>
#include <functional>
#include <unordered_map>
#include <vector>

#include "dlpp/clamp.hpp"
#include "dlpp/field.hpp"
#include "dlpp/passage.hpp"
#include "dlpp/stats.hpp"

namespace dlpp {

// ---------------------------------------------------------------------------
// Randomized start: a start point Z in {1..m}^d built from d*m^2 auxiliary
// Bernoulli(1/2) bits, so that (i) Z is independent of all vertex weights,
// (ii) flipping one bit moves Z by L1 distance at most 1, and (iii) no value
// carries more than (c/m)^d mass. The folded (tent) binomial sum keeps the
// single-flip property across the mod-2m wraparound.
// ---------------------------------------------------------------------------

struct RandomizedStart {
    int m = 1;
    int d = 1;
    std::vector<std::uint8_t> bits;  // d * m^2 values in {0,1}
    Point z;                         // in {1..m}^d
};

inline RandomizedStart build_randomized_start(std::vector<std::uint8_t> bits, int m, int d) {
    if (m < 1 || d < 1) throw Error("build_randomized_start: m and d must be positive");
    std::size_t want = static_cast<std::size_t>(d) * m * m;
    if (bits.size() != want)
        throw Error("build_randomized_start: expected " + std::to_string(want) + " bits, got " +
                    std::to_string(bits.size()));
    Point z(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        Coord s = 0;
        for (int j = 0; j < m * m; ++j) s += bits[static_cast<std::size_t>(i) * m * m + j] ? 1 : 0;
        Coord t = s % (2 * m);
        Coord tent = t < m ? t : 2 * m - 1 - t;
        z[static_cast<std::size_t>(i)] = 1 + tent;
    }
    return RandomizedStart{m, d, std::move(bits), std::move(z)};
}

/// Fresh auxiliary bits for one sample, drawn from the AuxBits stream.
inline std::vector<std::uint8_t> sample_start_bits(const SeedContext& ctx, int m, int d) {
    Stream s(ctx, StreamClass::AuxBits);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(d) * m * m);
    for (auto& b : bits) b = s.next_bit() ? 1 : 0;
    return bits;
}

inline RandomizedStart sample_randomized_start(const SeedContext& ctx, int m, int d) {
    return build_randomized_start(sample_start_bits(ctx, m, d), m, d);
}

/// f(omega) = T(Z, x+Z) ^ B v A on the shared field.
inline double shifted_passage(const WeightField& f, const RandomizedStart& z, const Point& x,
                              const ClampWindow& w = {}) {
    return clamp(last_passage_time(f, z.z, x + z.z, Graph::Ordered), w);
}

/// Samples of |f(omega) - f(omega with bit s flipped)|, vertex weights held
/// fixed within each pair; estimates 2 ||Delta_s f|| in L2 up to the
/// flip-vs-refresh convention (factor <= 2 for Bernoulli(1/2) bits).
struct DiscrepancyStat {
    std::size_t bit = 0;
    int samples = 0;
    double l2_estimate = 0;  // sqrt(mean |diff|^2)
    double max_abs = 0;
    double zero_fraction = 0;
    int triangle_violations = 0;
    std::string convention =
        "bit flip; independent refresh coincides up to a factor <= 2 for Bernoulli(1/2)";
};

inline DiscrepancyStat bit_flip_discrepancy(const Distribution& dist, const SeedContext& base,
                                            const Point& x, int m, std::size_t bit, int n,
                                            const ClampWindow& w = {}) {
    std::size_t d = x.dim();
    if (bit >= static_cast<std::size_t>(m) * m * d)
        throw Error("bit_flip_discrepancy: bit index out of range");
    Point lo = Point::diagonal(d, 1);
    Point hi = x + Point::diagonal(d, m);
    Box box(lo, hi);

    DiscrepancyStat st;
    st.bit = bit;
    st.samples = n;
    double sumsq = 0;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        SeedContext ctx = base.with_sample(static_cast<std::uint64_t>(i));
        auto bits = sample_start_bits(ctx, m, static_cast<int>(d));
        RandomizedStart z1 = build_randomized_start(bits, m, static_cast<int>(d));
        bits[bit] ^= 1;
        RandomizedStart z2 = build_randomized_start(std::move(bits), m, static_cast<int>(d));

        WeightField field(dist, ctx, box);
        double f1 = shifted_passage(field, z1, x, w);
        double f2 = shifted_passage(field, z2, x, w);
        double diff = std::abs(f1 - f2);
        sumsq += diff * diff;
        st.max_abs = std::max(st.max_abs, diff);
        if (diff == 0) ++zeros;

        if (z1.z != z2.z) {
            // the two unit-shift terms of the triangle inequality, per sample
            double t_mixed = last_passage_time(field, z2.z, x + z1.z);
            double t_start = std::abs(last_passage_time(field, z1.z, x + z1.z) - t_mixed);
            double t_end = std::abs(t_mixed - last_passage_time(field, z2.z, x + z2.z));
            if (diff > t_start + t_end + 1e-9) ++st.triangle_violations;
        }
    }
    st.l2_estimate = std::sqrt(sumsq / std::max(1, n));
    st.zero_fraction = static_cast<double>(zeros) / std::max(1, n);
    return st;
}

// ---------------------------------------------------------------------------
// The phi-coupling: inductive reconstruction of an environment phi in which the
// tilted endpoint x(v) dominates the original passage time, T_phi(0, x(v)) >=
// T(0, v) for every v in the x1 = 0 plane up to level N.
// ---------------------------------------------------------------------------

struct PhiCoupling {
    WeightField phi;
    std::unordered_map<Point, Point, PointHash> x_map;     // v -> x(v)
    std::unordered_map<Point, Point, PointHash> xhat_map;  // v -> xhat(v)
    std::unordered_map<Point, int, PointHash> j_map;       // v -> j_v (1-based axis)
    std::unordered_map<Point, double, PointHash> t_plane;  // v -> T_omega(0, v)
    Coord N = 0;
};

namespace detail {

/// Points v >= 0 with v_1 = 0 and |v| = k.
inline std::vector<Point> plane_level(std::size_t d, Coord k) {
    std::vector<Point> out;
    Point p(d);
    std::function<void(std::size_t, Coord)> rec = [&](std::size_t axis, Coord rest) {
        if (axis + 1 == d) {
            p[axis] = rest;
            out.push_back(p);
            return;
        }
        for (Coord v = 0; v <= rest; ++v) {
            p[axis] = v;
            rec(axis + 1, rest - v);
        }
    };
    if (d == 1) throw Error("plane_level: d must be at least 2");
    rec(1, k);  // axis 0 pinned to zero
    return out;
}

}  // namespace detail

/// Runs the three-stage induction over the levels I_k of the x1 = 0 plane.
/// Auxiliary weights come from the PhiAux sub-stream of the same seed context
/// unless an explicit aux field is supplied (hand-built fixtures).
inline PhiCoupling build_phi(const WeightField& omega, Coord N,
                             const WeightField* aux = nullptr) {
    std::size_t d = omega.box().dim();
    if (d < 2) throw Error("build_phi: d must be at least 2");
    if (N < 0) throw Error("build_phi: N must be nonnegative");

    Box box(Point::zero(d), Point::diagonal(d, N));
    WeightField phi = aux ? aux->with_box(box)
                          : WeightField(omega.dist(), omega.ctx(), box, StreamClass::PhiAux);

    PhiCoupling cp{std::move(phi), {}, {}, {}, {}, N};
    Point zero = Point::zero(d);
    cp.x_map[zero] = zero;
    cp.t_plane[zero] = 0.0;
    cp.phi.set_override(zero, omega.weight(zero));
    std::unordered_map<Point, bool, PointHash> constructed;
    constructed[zero] = true;

    for (Coord k = 1; k <= N; ++k) {
        auto level_pts = detail::plane_level(d, k);
        // stage 1: pick j_v maximizing T(0, v - e_j), then transplant omega(v)
        for (const Point& v : level_pts) {
            int jv = -1;
            double best = kNegInf;
            for (std::size_t j = 1; j < d; ++j) {  // axes e_2 .. e_d
                if (v[j] == 0) continue;
                Point u = v;
                u[j] -= 1;
                double t = cp.t_plane.at(u);
                if (t > best) {
                    best = t;
                    jv = static_cast<int>(j);
                }
            }
            if (jv < 0) throw Error("build_phi: no admissible j for " + v.str());
            cp.t_plane[v] = omega.weight(v) + best;
            cp.j_map[v] = jv + 1;  // 1-based, in {2..d}
            Point u = v;
            u[static_cast<std::size_t>(jv)] -= 1;
            Point xhat = cp.x_map.at(u);
            xhat[static_cast<std::size_t>(jv)] += 1;
            if (constructed.count(xhat))
                throw Error("build_phi: xhat collision at " + xhat.str());
            constructed[xhat] = true;
            cp.phi.set_override(xhat, omega.weight(v));
            cp.xhat_map[v] = std::move(xhat);
        }
        // stage 2 is implicit: phi at undefined points reads the auxiliary stream
        // stage 3: for j_v = 2, shift toward e1 when the auxiliary weight wins
        for (const Point& v : level_pts) {
            const Point& xhat = cp.xhat_map.at(v);
            if (cp.j_map.at(v) != 2) {
                cp.x_map[v] = xhat;
                continue;
            }
            Point alt = xhat;
            alt[1] -= 1;
            alt[0] += 1;
            if (constructed.count(alt))
                throw Error("build_phi: alternative already constructed at " + alt.str());
            cp.x_map[v] = cp.phi.weight(xhat) >= cp.phi.weight(alt) ? xhat : alt;
        }
    }
    return cp;
}

struct PhiCheck {
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::size_t off_segment = 0;
    double worst_margin = std::numeric_limits<double>::infinity();  // min over v
};

/// Verifies T_phi(0, x(v)) >= T(0, v) and the segment constraint on x(v) for
/// every constructed v. The inequality is exact in floating point: both sides
/// accumulate the same weight chain in the same order.
inline PhiCheck verify_phi(const PhiCoupling& cp) {
    std::size_t d = cp.phi.box().dim();
    PassageGrid grid(cp.phi, Point::zero(d), cp.phi.box(), Graph::Ordered, false);
    PhiCheck chk;
    for (const auto& [v, xv] : cp.x_map) {
        double t_omega = cp.t_plane.at(v);
        double t_phi = grid.value(xv);
        double margin = t_phi - t_omega;
        chk.worst_margin = std::min(chk.worst_margin, margin);
        if (t_phi < t_omega) ++chk.violations;
        // x(v) must lie on {v + alpha(e1 - e2) : 0 <= alpha <= v_2}
        Coord alpha = xv[0] - v[0];
        bool on_segment = alpha >= 0 && alpha <= v[1] && xv[1] == v[1] - alpha;
        for (std::size_t i = 2; i < d; ++i) on_segment = on_segment && xv[i] == v[i];
        if (!on_segment) ++chk.off_segment;
        ++chk.checked;
    }
    return chk;
}

// ---------------------------------------------------------------------------
// Reflection coupling: exchange the weights of R and its mirror R' across the
// hyperplane L = {x2 = x1 + ceil(a2/2)}. When the maximal path from a crosses
// L at q, the reflected configuration dominates: T_omega'(b, Nu) >= T(a, Nu).
// ---------------------------------------------------------------------------

struct ReflectionSpec {
    Point a, b;
    HyperplaneL L;
    Coord N = 0;
    Point q;  // crossing point on L; must be set before reflecting
    bool q_set = false;
};

inline ReflectionSpec make_reflection(const Point& a, Coord N) {
    std::size_t d = a.dim();
    if (d < 2) throw Error("make_reflection: d must be at least 2");
    if (a[0] != 0) throw Error("make_reflection: a must lie on the x1 = 0 hyperplane");
    for (std::size_t i = 0; i < d; ++i)
        if (a[i] < 0 || a[i] > N)
            throw Error("make_reflection: need 0 <= a <= N(e2+...+ed)");
    ReflectionSpec spec;
    spec.a = a;
    spec.N = N;
    spec.L = HyperplaneL{(a[1] + 1) / 2};  // ceil(a2 / 2)
    spec.b = a;
    spec.b[0] += a[1] / 2;  // b = a + floor(a2/2) (e1 - e2)
    spec.b[1] -= a[1] / 2;
    return spec;
}

/// New field with the weights of R and R' exchanged by reflection in L;
/// all other weights identical. Applying it twice returns the original field.
inline WeightField reflect_configuration(const WeightField& f, const ReflectionSpec& spec) {
    if (!spec.q_set) throw Error("reflect_configuration: crossing point q not set");
    if (!spec.L.contains(spec.q)) throw Error("reflect_configuration: q not on L");
    if (!f.box().contains(spec.q)) throw Error("reflect_configuration: q outside field box");

    WeightField out = f;
    // R = {p <= q on the far side of L}; iterate the sub-box below q
    Box sub(f.box().lo, spec.q);
    Point p = sub.lo;
    std::uint64_t cells = sub.cell_count();
    for (std::uint64_t i = 0; i < cells; ++i) {
        if (spec.L.side(p) > 0) {
            Point r = spec.L.reflect(p);
            if (!f.box().contains(r))
                throw Error("reflect_configuration: mirror of " + p.str() + " outside box");
            out.set_override(p, f.weight(r));
            out.set_override(r, f.weight(p));
        }
        for (std::size_t ax = sub.dim(); ax-- > 0;) {
            if (++p[ax] <= sub.hi[ax]) break;
            p[ax] = sub.lo[ax];
        }
    }
    return out;
}

struct ReflectTrial {
    Point q;
    double t_a = 0;           // T_omega(a, Nu)
    double t_b_reflected = 0; // T_omega'(b, Nu)
    bool ok = false;          // t_b_reflected >= t_a
};

/// One sample of the Lemma-style reflection check. q is taken from the
/// realized geodesic: its first vertex on L (or a itself when a lies on L).
inline ReflectTrial reflect_trial(const WeightField& field, const Point& a, Coord N) {
    std::size_t d = a.dim();
    ReflectionSpec spec = make_reflection(a, N);
    Point nu = Point::diagonal(d, N);

    Geodesic g = geodesic(field, a, nu, Graph::Ordered);
    ReflectTrial out;
    if (spec.L.side(a) == 0) {
        out.q = a;
    } else {
        for (const Point& v : g.path.vertices()) {
            if (spec.L.side(v) == 0) {
                out.q = v;
                break;
            }
        }
        if (out.q.dim() == 0) throw Error("reflect_trial: geodesic never met L");
    }
    spec.q = out.q;
    spec.q_set = true;

    WeightField reflected = reflect_configuration(field, spec);
    out.t_a = g.value;
    out.t_b_reflected = last_passage_time(reflected, spec.b, nu, Graph::Ordered);
    out.ok = out.t_b_reflected >= out.t_a;
    return out;
}

struct GapSample {
    double d1 = 0;  // T(a, target) - T(b, target)
    double d2 = 0;  // T(-e1, a) - T(-e1, b)
};

enum class GapTarget { Endpoint, LevelSet };

/// One gap sample: D1, D2 on a single shared field.
inline GapSample reflection_gap_one(const Distribution& dist, const SeedContext& ctx,
                                    const Point& a, Coord N,
                                    GapTarget target = GapTarget::Endpoint) {
    std::size_t d = a.dim();
    ReflectionSpec spec = make_reflection(a, N);
    Point nu = Point::diagonal(d, N);
    Point me1 = Point::zero(d);
    me1[0] = -1;
    Box box(me1, nu);
    WeightField f(dist, ctx, box);
    GapSample gs;
    if (target == GapTarget::Endpoint) {
        gs.d1 = last_passage_time(f, a, nu) - last_passage_time(f, spec.b, nu);
    } else {
        gs.d1 = ground_state_from(f, a, N).value - ground_state_from(f, spec.b, N).value;
    }
    gs.d2 = last_passage_time(f, me1, a) - last_passage_time(f, me1, spec.b);
    return gs;
}

/// i.i.d. gap samples D1, D2 on independent fields; both differences are
/// evaluated on one shared field per sample.
inline std::vector<GapSample> reflection_gap_samples(const Distribution& dist, const Point& a,
                                                     Coord N, int n, const SeedContext& base,
                                                     GapTarget target = GapTarget::Endpoint,
                                                     unsigned threads = 1) {
    std::vector<GapSample> out(static_cast<std::size_t>(n));
    parallel_for_index(static_cast<std::uint64_t>(n), threads, [&](std::uint64_t i) {
        out[i] = reflection_gap_one(dist, base.with_sample(i), a, N, target);
    });
    return out;
}

}  // namespace dlpp
