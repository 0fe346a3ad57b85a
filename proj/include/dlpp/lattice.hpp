#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

#include "dlpp/core.hpp"

namespace dlpp {

/// The two directed lattices. Ordered is (Z^d, E>) with steps +e_i.
/// SpaceTime is (Z^d, E^) with d-1 spatial axes stepped +-1 and the last
/// coordinate acting as time, advancing by +1 every step.
enum class Graph { Ordered, SpaceTime };

inline std::size_t num_dirs(Graph g, std::size_t d) {
    return g == Graph::Ordered ? d : 2 * (d - 1);
}

/// Coordinate displacement of one directed step.
/// Ordered: dir i is +e_i. SpaceTime: dir 2a is +e_a (spatial), dir 2a+1 is -e_a,
/// both with +1 on the time axis d-1.
inline Point step_vector(Graph g, std::size_t d, std::size_t dir) {
    Point s(d);
    if (g == Graph::Ordered) {
        s[dir] = 1;
    } else {
        s[dir / 2] = (dir % 2 == 0) ? 1 : -1;
        s[d - 1] = 1;
    }
    return s;
}

/// Directed lattice path stored as a step-direction sequence. By convention the
/// path is identified with its visited vertices, start excluded.
struct Path {
    Point start;
    std::vector<std::uint8_t> steps;
    Graph kind = Graph::Ordered;

    std::size_t length() const { return steps.size(); }

    Point end() const {
        Point p = start;
        for (std::uint8_t s : steps) advance(p, s);
        return p;
    }

    /// Visited vertices in order, start excluded.
    std::vector<Point> vertices() const {
        std::vector<Point> out;
        out.reserve(steps.size());
        Point p = start;
        for (std::uint8_t s : steps) {
            advance(p, s);
            out.push_back(p);
        }
        return out;
    }

    void advance(Point& p, std::uint8_t dir) const {
        std::size_t d = start.dim();
        if (kind == Graph::Ordered) {
            if (dir >= d) throw Error("path step out of range");
            p[dir] += 1;
        } else {
            if (dir >= 2 * (d - 1)) throw Error("path step out of range");
            p[dir / 2] += (dir % 2 == 0) ? 1 : -1;
            p[d - 1] += 1;
        }
    }
};

/// True iff a directed Ordered path x -> y exists, i.e. x <= y coordinate-wise.
inline bool ordered_reachable(const Point& x, const Point& y) { return leq(x, y); }

/// True iff a SpaceTime path x -> y exists: enough time steps and matching parity.
inline bool spacetime_reachable(const Point& x, const Point& y) {
    x.check_dim(y);
    std::size_t d = x.dim();
    Coord dt = y[d - 1] - x[d - 1];
    Coord ds = 0;
    for (std::size_t i = 0; i + 1 < d; ++i) ds += std::abs(y[i] - x[i]);
    return dt >= ds && (dt - ds) % 2 == 0;
}

inline bool reachable(const Point& x, const Point& y, Graph kind) {
    return kind == Graph::Ordered ? ordered_reachable(x, y) : spacetime_reachable(x, y);
}

namespace detail {

inline std::uint64_t checked_mul_div(std::uint64_t acc, std::uint64_t num, std::uint64_t den) {
    // acc * num / den where den always divides exactly (binomial recurrence);
    // divide first through gcd-free path by dividing acc when possible.
    std::uint64_t q = num / den, r = num % den;
    // acc*num = acc*q*den + acc*r; result = acc*q + acc*r/den
    std::uint64_t part = 0;
    if (r != 0) {
        unsigned __int128 wide = static_cast<unsigned __int128>(acc) * r;
        part = static_cast<std::uint64_t>(wide / den);
        if (wide % den != 0) throw Error("internal: binomial recurrence not exact");
    }
    unsigned __int128 main = static_cast<unsigned __int128>(acc) * q + part;
    if (main > std::numeric_limits<std::uint64_t>::max())
        throw Error("path_count overflow: count exceeds 64-bit range");
    return static_cast<std::uint64_t>(main);
}

}  // namespace detail

/// Number of directed Ordered paths x -> y: multinomial (sum d_i)! / prod d_i!
/// with d = y - x. Zero when y is not above x. Throws on 64-bit overflow.
inline std::uint64_t path_count(const Point& x, const Point& y) {
    x.check_dim(y);
    if (!leq(x, y)) return 0;
    // Product of binomials C(n_k, d_k) over prefix sums n_k.
    std::uint64_t count = 1;
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        std::uint64_t di = static_cast<std::uint64_t>(y[i] - x[i]);
        for (std::uint64_t j = 1; j <= di; ++j) {
            ++n;
            count = detail::checked_mul_div(count, n, j);
        }
    }
    return count;
}

/// Number of directed paths on either graph; SpaceTime counts use a slice DP.
inline std::uint64_t path_count(const Point& x, const Point& y, Graph kind) {
    if (kind == Graph::Ordered) return path_count(x, y);
    x.check_dim(y);
    if (!spacetime_reachable(x, y)) return 0;
    std::size_t d = x.dim();
    Coord dt = y[d - 1] - x[d - 1];
    // counts over spatial displacement, one time slice at a time
    std::vector<std::pair<Point, std::uint64_t>> cur{{x, 1}};
    std::unordered_map<Point, std::uint64_t, PointHash> nxt;
    for (Coord t = 0; t < dt; ++t) {
        nxt.clear();
        for (auto& [p, c] : cur) {
            for (std::size_t dir = 0; dir < num_dirs(Graph::SpaceTime, d); ++dir) {
                Point q = p + step_vector(Graph::SpaceTime, d, dir);
                // prune: must still be able to reach y
                if (!spacetime_reachable(q, y)) continue;
                std::uint64_t& slot = nxt[q];
                if (slot > std::numeric_limits<std::uint64_t>::max() - c)
                    throw Error("path_count overflow: count exceeds 64-bit range");
                slot += c;
            }
        }
        cur.assign(nxt.begin(), nxt.end());
    }
    for (auto& [p, c] : cur)
        if (p == y) return c;
    return 0;
}

/// All directed paths x -> y. Refuses when the count exceeds `limit`; this
/// exists as a testing oracle and must not do unbounded work.
inline std::vector<Path> enumerate_paths(const Point& x, const Point& y, std::uint64_t limit,
                                         Graph kind = Graph::Ordered) {
    std::uint64_t n = path_count(x, y, kind);
    if (n > limit)
        throw LimitExceeded("enumerate_paths: " + std::to_string(n) + " paths exceed limit " +
                            std::to_string(limit));
    std::vector<Path> out;
    if (n == 0) return out;
    out.reserve(static_cast<std::size_t>(n));
    Path cur{x, {}, kind};
    Point pos = x;
    std::function<void()> rec = [&] {
        if (pos == y) {
            out.push_back(cur);
            return;
        }
        for (std::size_t dir = 0; dir < num_dirs(kind, x.dim()); ++dir) {
            Point step = step_vector(kind, x.dim(), dir);
            Point nxt = pos + step;
            if (!reachable(nxt, y, kind)) continue;
            cur.steps.push_back(static_cast<std::uint8_t>(dir));
            pos = nxt;
            rec();
            pos = pos - step;
            cur.steps.pop_back();
        }
    };
    rec();
    return out;
}

/// Level set reachable from 0 in exactly N steps.
/// Ordered: S_N = {x >= 0 : |x| = N}. SpaceTime: last coordinate N, total
/// spatial L1 norm at most N and sharing N's parity.
inline std::vector<Point> level_set(Coord N, Graph kind, std::size_t d) {
    if (N < 0) throw Error("level_set: N must be nonnegative");
    if (d < 2) throw Error("level_set: d must be at least 2");
    std::vector<Point> out;
    if (kind == Graph::Ordered) {
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
        rec(0, N);
    } else {
        Point p(d);
        p[d - 1] = N;
        std::function<void(std::size_t, Coord)> rec = [&](std::size_t axis, Coord budget) {
            if (axis + 1 == d - 1 || d == 2) {
                // last spatial axis takes any value with |v| <= budget, parity of budget
                for (Coord v = -budget; v <= budget; v += 2) {
                    p[axis] = v;
                    out.push_back(p);
                }
                return;
            }
            for (Coord v = -budget; v <= budget; ++v) {
                p[axis] = v;
                rec(axis + 1, budget - std::abs(v));
            }
        };
        rec(0, N);
    }
    return out;
}

/// Linear embedding of (Z^d, E>) into (Z^d, E^): e_i -> e_i + e_d for i < d,
/// e_d -> -e_1 + e_d. Maps directed paths of length N to directed paths of length N.
inline Point embed_point(const Point& x) {
    std::size_t d = x.dim();
    if (d < 2) throw Error("embed_point: d must be at least 2");
    Point y(d);
    y[0] = x[0] - x[d - 1];
    for (std::size_t i = 1; i + 1 < d; ++i) y[i] = x[i];
    y[d - 1] = level(x);
    return y;
}

/// Step image under the embedding: Ordered dir i<d-1 -> spatial +e_i;
/// Ordered dir d-1 (the e_d step) -> spatial -e_1.
inline std::uint8_t embed_step(std::size_t d, std::uint8_t dir) {
    if (dir + 1 < d) return static_cast<std::uint8_t>(2 * dir);
    return 1;  // -e_1 spatial
}

inline Path embed_path(const Path& p) {
    if (p.kind != Graph::Ordered) throw Error("embed_path: expected an Ordered path");
    Path out{embed_point(p.start), {}, Graph::SpaceTime};
    out.steps.reserve(p.steps.size());
    for (std::uint8_t s : p.steps) out.steps.push_back(embed_step(p.start.dim(), s));
    return out;
}

/// Space-time cone C = {x : x_d >= |x_1| + ... + |x_{d-1}|}.
inline bool cone_contains(const Point& x) {
    Coord s = 0;
    for (std::size_t i = 0; i + 1 < x.dim(); ++i) s += std::abs(x[i]);
    return x[x.dim() - 1] >= s;
}

/// Hyperplane L = {x : x_2 = x_1 + k}.
struct HyperplaneL {
    Coord k = 0;

    bool contains(const Point& p) const {
        require_dim(p);
        return p[1] == p[0] + k;
    }

    /// Reflection across L, swapping the first two coordinates with offset:
    /// (x1, x2, rest) -> (x2 - k, x1 + k, rest). Involution; fixes points of L.
    Point reflect(const Point& p) const {
        require_dim(p);
        Point r = p;
        r[0] = p[1] - k;
        r[1] = p[0] + k;
        return r;
    }

    /// Signed side: positive on the far side from the origin when k > 0.
    Coord side(const Point& p) const {
        require_dim(p);
        return p[1] - p[0] - k;
    }

private:
    static void require_dim(const Point& p) {
        if (p.dim() < 2) throw Error("HyperplaneL: d must be at least 2");
    }
};

inline Point reflect_point(const Point& x, const HyperplaneL& L) { return L.reflect(x); }

}  // namespace dlpp
