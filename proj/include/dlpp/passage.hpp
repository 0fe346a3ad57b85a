#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "dlpp/core.hpp"
#include "dlpp/field.hpp"
#include "dlpp/lattice.hpp"

namespace dlpp {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Smallest box containing every directed path x -> y. Throws when y is not
/// reachable from x.
inline Box interval_box(const Point& x, const Point& y, Graph kind) {
    if (!reachable(x, y, kind))
        throw Error("unreachable endpoint: no directed path " + x.str() + " -> " + y.str());
    if (kind == Graph::Ordered) return Box(x, y);
    std::size_t d = x.dim();
    Coord dt = y[d - 1] - x[d - 1];
    Coord ds = 0;
    for (std::size_t i = 0; i + 1 < d; ++i) ds += std::abs(y[i] - x[i]);
    Coord slack = (dt - ds) / 2;
    Point lo(d), hi(d);
    for (std::size_t i = 0; i + 1 < d; ++i) {
        lo[i] = std::min(x[i], y[i]) - slack;
        hi[i] = std::max(x[i], y[i]) + slack;
    }
    lo[d - 1] = x[d - 1];
    hi[d - 1] = y[d - 1];
    return Box(lo, hi);
}

namespace detail {

struct InStep {
    std::int64_t flat_off;  // negative offset to the in-neighbor
    std::size_t axis;       // checked axis
    Coord delta;            // in-neighbor coordinate = pos[axis] - delta
    bool time_guard;        // additionally require pos[time] > lo[time]
};

struct SweepLayout {
    std::vector<std::size_t> order;        // axes, slowest first
    std::vector<std::uint64_t> stride;     // per original axis
    std::vector<InStep> steps;
    std::uint64_t cells = 1;
    std::uint64_t max_lookback = 0;
    std::size_t time_axis = 0;

    SweepLayout(const Box& box, Graph kind) {
        std::size_t d = box.dim();
        if (kind == Graph::SpaceTime && d < 2) throw Error("SpaceTime needs d >= 2");
        if (kind == Graph::Ordered) {
            for (std::size_t i = 0; i < d; ++i) order.push_back(i);
        } else {
            time_axis = d - 1;
            order.push_back(time_axis);
            for (std::size_t i = 0; i + 1 < d; ++i) order.push_back(i);
        }
        stride.assign(d, 0);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            stride[*it] = cells;
            cells *= static_cast<std::uint64_t>(box.extent(*it));
        }
        if (kind == Graph::Ordered) {
            for (std::size_t a = 0; a < d; ++a) {
                steps.push_back({-std::int64_t(stride[a]), a, 1, false});
                max_lookback = std::max(max_lookback, stride[a]);
            }
        } else {
            for (std::size_t dir = 0; dir < 2 * (d - 1); ++dir) {
                std::size_t a = dir / 2;
                Coord delta = (dir % 2 == 0) ? 1 : -1;
                std::int64_t off = -std::int64_t(stride[time_axis]) -
                                   delta * std::int64_t(stride[a]);
                steps.push_back({off, a, delta, true});
                max_lookback = std::max(max_lookback, static_cast<std::uint64_t>(-off));
            }
        }
    }
};

struct FullStore {
    std::vector<double> v;
    explicit FullStore(std::uint64_t n) : v(n, kNegInf) {}
    double get(std::uint64_t i) const { return v[i]; }
    void set(std::uint64_t i, double x) { v[i] = x; }
};

struct RingStore {
    std::vector<double> v;
    std::uint64_t mask;
    explicit RingStore(std::uint64_t lookback) {
        std::uint64_t n = 1;
        while (n < lookback + 1) n <<= 1;
        v.assign(n, kNegInf);
        mask = n - 1;
    }
    double get(std::uint64_t i) const { return v[i & mask]; }
    void set(std::uint64_t i, double x) { v[i & mask] = x; }
};

constexpr std::uint8_t kBpOrigin = 0xFE;
constexpr std::uint8_t kBpNone = 0xFF;

// Level-ordered max-plus sweep. visit(pos, flat, value) runs for every cell;
// value is -inf off the reachable set. skip(pos) marks cells to leave
// unreachable without sampling their weight. Ties in the argmax direction are
// resolved toward the smallest direction index (backtracking tie-break rule).
template <class Store, class Skip, class Visit>
void sweep(const WeightField& f, const Point& origin, const Box& box, Graph kind, Store& store,
           std::vector<std::uint8_t>* bp, Skip&& skip, Visit&& visit) {
    if (!box.contains(origin)) throw Error("passage sweep: origin outside box");
    if (!f.box().contains(box.lo) || !f.box().contains(box.hi))
        throw Error("box too small: weight field does not cover the DP box");
    std::size_t d = box.dim();
    SweepLayout ly(box, kind);
    if (bp) bp->assign(ly.cells, kBpNone);

    std::uint64_t oflat = 0;
    for (std::size_t i = 0; i < d; ++i)
        oflat += static_cast<std::uint64_t>(origin[i] - box.lo[i]) * ly.stride[i];

    std::vector<Coord> pos(box.lo.c);
    std::span<const Coord> pspan(pos.data(), pos.size());
    const std::size_t ndirs = ly.steps.size();
    const std::size_t tax = ly.time_axis;

    for (std::uint64_t flat = 0; flat < ly.cells; ++flat) {
        double value = kNegInf;
        std::uint8_t bdir = kBpNone;
        if (flat == oflat) {
            value = 0.0;  // start vertex excluded by convention
            bdir = kBpOrigin;
        } else if (!skip(pspan)) {
            double best = kNegInf;
            for (std::size_t dir = 0; dir < ndirs; ++dir) {
                const InStep& st = ly.steps[dir];
                if (st.time_guard && pos[tax] <= box.lo[tax]) break;
                Coord u = pos[st.axis] - st.delta;
                if (u < box.lo[st.axis] || u > box.hi[st.axis]) continue;
                double cand = store.get(flat + st.flat_off);
                if (cand > best) {
                    best = cand;
                    bdir = static_cast<std::uint8_t>(dir);
                }
            }
            if (best > kNegInf) value = f.weight_unchecked(pspan) + best;
        }
        store.set(flat, value);
        if (bp) (*bp)[flat] = value > kNegInf ? bdir : kBpNone;
        visit(pspan, flat, value);

        // odometer: advance fastest axis, carrying toward the slowest
        for (std::size_t oi = ly.order.size(); oi-- > 0;) {
            std::size_t ax = ly.order[oi];
            if (++pos[ax] <= box.hi[ax]) break;
            pos[ax] = box.lo[ax];
        }
    }
}

struct NoSkip {
    bool operator()(std::span<const Coord>) const { return false; }
};

}  // namespace detail

/// Memory-lean max-plus sweep over `box`; visit(pos, flat, value) fires for
/// every cell in level order. Only a rolling window of values stays resident.
template <class Visit, class Skip = detail::NoSkip>
void dp_sweep(const WeightField& f, const Point& origin, const Box& box, Graph kind,
              Visit&& visit, Skip&& skip = {}) {
    detail::SweepLayout ly(box, kind);
    detail::RingStore store(ly.max_lookback);
    detail::sweep(f, origin, box, kind, store, nullptr, skip, visit);
}

/// All last-passage values T(origin, .) on a box, with optional backpointers.
class PassageGrid {
public:
    PassageGrid(const WeightField& f, Point origin, Box box, Graph kind, bool want_backptr)
        : origin_(std::move(origin)), box_(std::move(box)), kind_(kind) {
        detail::SweepLayout ly(box_, kind_);
        stride_ = ly.stride;
        detail::FullStore store(ly.cells);
        detail::sweep(
            f, origin_, box_, kind_, store, want_backptr ? &bp_ : nullptr, detail::NoSkip{},
            [](std::span<const Coord>, std::uint64_t, double) {});
        vals_ = std::move(store.v);
    }

    const Box& box() const { return box_; }
    const Point& origin() const { return origin_; }
    Graph kind() const { return kind_; }
    bool has_backptr() const { return !bp_.empty(); }

    bool reachable(const Point& p) const {
        return box_.contains(p) && vals_[flat(p)] > kNegInf;
    }

    double value(const Point& p) const {
        if (!box_.contains(p)) throw Error("PassageGrid::value: " + p.str() + " outside box");
        double v = vals_[flat(p)];
        if (v == kNegInf)
            throw Error("PassageGrid::value: " + p.str() + " unreachable from " + origin_.str());
        return v;
    }

    /// Maximizing path origin -> y recovered from stored argmax directions.
    Path backtrack(const Point& y) const {
        if (bp_.empty()) throw Error("backtrack: grid built without backpointers");
        if (!reachable(y)) throw Error("backtrack: endpoint unreachable");
        Path path{origin_, {}, kind_};
        Point pos = y;
        std::size_t d = box_.dim();
        while (pos != origin_) {
            std::uint8_t dir = bp_[flat(pos)];
            if (dir == detail::kBpNone || dir == detail::kBpOrigin)
                throw Error("backtrack: broken backpointer chain");
            path.steps.push_back(dir);
            pos = pos - step_vector(kind_, d, dir);
        }
        std::reverse(path.steps.begin(), path.steps.end());
        return path;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {  // fn(point, value, backptr)
        Point p = box_.lo;
        std::uint64_t cells = vals_.size();
        for (std::uint64_t i = 0; i < cells; ++i) {
            fn(p, vals_[flat(p)], bp_.empty() ? detail::kBpNone : bp_[flat(p)]);
            for (std::size_t ax = box_.dim(); ax-- > 0;) {
                if (++p[ax] <= box_.hi[ax]) break;
                p[ax] = box_.lo[ax];
            }
        }
    }

private:
    std::uint64_t flat(const Point& p) const {
        std::uint64_t n = 0;
        for (std::size_t i = 0; i < p.dim(); ++i)
            n += static_cast<std::uint64_t>(p[i] - box_.lo[i]) * stride_[i];
        return n;
    }

    Point origin_;
    Box box_;
    Graph kind_;
    std::vector<std::uint64_t> stride_;
    std::vector<double> vals_;
    std::vector<std::uint8_t> bp_;
};

inline PassageGrid passage_grid(const WeightField& f, const Point& origin, const Box& box,
                                Graph kind, bool want_backptr = false) {
    return PassageGrid(f, origin, box, kind, want_backptr);
}

/// Last-passage time T(x, y): maximal path weight, start vertex excluded.
inline double last_passage_time(const WeightField& f, const Point& x, const Point& y,
                                Graph kind = Graph::Ordered) {
    Box box = interval_box(x, y, kind);
    double out = kNegInf;
    dp_sweep(f, x, box, kind, [&](std::span<const Coord> pos, std::uint64_t, double v) {
        if (std::equal(pos.begin(), pos.end(), y.c.begin(), y.c.end())) out = v;
    });
    if (out == kNegInf) throw Error("last_passage_time: endpoint unreachable");
    return out;
}

struct Geodesic {
    Path path;
    double value = 0;
};

/// A maximizing path x -> y. Unique a.s. for continuous laws; discrete ties are
/// broken by the smallest direction index at each backtrack step.
inline Geodesic geodesic(const WeightField& f, const Point& x, const Point& y,
                         Graph kind = Graph::Ordered) {
    Box box = interval_box(x, y, kind);
    PassageGrid grid(f, x, box, kind, true);
    return Geodesic{grid.backtrack(y), grid.value(y)};
}

struct GroundState {
    double value = 0;
    Point argmax;
};

/// Polymer ground state T(from, S_N) (Ordered) or T(0, S^_N) (SpaceTime):
/// maximum passage value over the level set at depth N, argmax ties broken
/// toward the lexicographically greatest endpoint.
inline GroundState ground_state_from(const WeightField& f, const Point& from, Coord N,
                                     Graph kind = Graph::Ordered) {
    std::size_t d = from.dim();
    if (N < 0) throw Error("ground_state: N must be nonnegative");
    GroundState gs{kNegInf, Point(d)};
    bool found = false;
    if (kind == Graph::Ordered) {
        Coord base = level(from);
        Point hi(d);
        for (std::size_t i = 0; i < d; ++i) hi[i] = N;
        Box box(from, hi);
        auto skip = [&](std::span<const Coord> pos) {
            Coord s = 0;
            for (Coord c : pos) s += c;
            return s > N;
        };
        dp_sweep(
            f, from, box, kind,
            [&](std::span<const Coord> pos, std::uint64_t, double v) {
                if (v == kNegInf) return;
                Coord s = 0;
                for (Coord c : pos) s += c;
                if (s != N) return;
                Point p{std::vector<Coord>(pos.begin(), pos.end())};
                if (!found || v > gs.value || (v == gs.value && lex_less(gs.argmax, p))) {
                    gs.value = v;
                    gs.argmax = p;
                    found = true;
                }
            },
            skip);
        (void)base;
    } else {
        Point lo(d), hi(d);
        for (std::size_t i = 0; i + 1 < d; ++i) {
            lo[i] = from[i] - N;
            hi[i] = from[i] + N;
        }
        lo[d - 1] = from[d - 1];
        hi[d - 1] = from[d - 1] + N;
        Box box(lo, hi);
        Coord tN = from[d - 1] + N;
        dp_sweep(f, from, box, kind,
                 [&](std::span<const Coord> pos, std::uint64_t, double v) {
                     if (v == kNegInf || pos[d - 1] != tN) return;
                     Point p{std::vector<Coord>(pos.begin(), pos.end())};
                     if (!found || v > gs.value ||
                         (v == gs.value && lex_less(gs.argmax, p))) {
                         gs.value = v;
                         gs.argmax = p;
                         found = true;
                     }
                 });
    }
    if (!found) throw Error("ground_state: empty level set");
    return gs;
}

inline GroundState ground_state(const WeightField& f, Coord N, Graph kind = Graph::Ordered) {
    std::size_t d = f.box().dim();
    return ground_state_from(f, Point::zero(d), N, kind);
}

/// Coupled shift difference h(x) = T(-e1, x) - T(0, x), both on the same field.
inline double shift_difference(const WeightField& f, const Point& x) {
    std::size_t d = x.dim();
    Point me1 = Point::zero(d);
    me1[0] = -1;
    double from_shift = last_passage_time(f, me1, x, Graph::Ordered);
    double from_origin = last_passage_time(f, Point::zero(d), x, Graph::Ordered);
    return from_shift - from_origin;
}

/// Reference semantics for last_passage_time: max over explicitly enumerated
/// paths. Refuses instances with more than `limit` paths.
inline double brute_force_oracle(const WeightField& f, const Point& x, const Point& y,
                                 Graph kind = Graph::Ordered, std::uint64_t limit = 1 << 20) {
    auto paths = enumerate_paths(x, y, limit, kind);
    if (paths.empty()) throw Error("brute_force_oracle: endpoint unreachable");
    double best = kNegInf;
    for (const Path& p : paths) {
        double s = 0;
        Point pos = x;
        for (std::uint8_t dir : p.steps) {
            p.advance(pos, dir);
            s += f.weight(pos);
        }
        best = std::max(best, s);
    }
    return best;
}

}  // namespace dlpp
