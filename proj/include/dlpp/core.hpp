#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dlpp {

using Coord = std::int64_t;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an enumeration or oracle would exceed its work limit.
class LimitExceeded : public Error {
public:
    explicit LimitExceeded(const std::string& what) : Error(what) {}
};

/// Lattice point with 64-bit integer coordinates.
struct Point {
    std::vector<Coord> c;

    Point() = default;
    explicit Point(std::size_t d) : c(d, 0) {}
    Point(std::initializer_list<Coord> v) : c(v) {}
    explicit Point(std::vector<Coord> v) : c(std::move(v)) {}

    static Point zero(std::size_t d) { return Point(d); }
    static Point unit(std::size_t d, std::size_t axis) {
        Point p(d);
        p.c.at(axis) = 1;
        return p;
    }
    /// All-ones vector u = e1 + ... + ed, scaled by n.
    static Point diagonal(std::size_t d, Coord n) {
        Point p(d);
        for (auto& x : p.c) x = n;
        return p;
    }

    std::size_t dim() const { return c.size(); }
    Coord operator[](std::size_t i) const { return c[i]; }
    Coord& operator[](std::size_t i) { return c[i]; }

    bool operator==(const Point& o) const { return c == o.c; }
    bool operator!=(const Point& o) const { return c != o.c; }

    Point operator+(const Point& o) const {
        check_dim(o);
        Point r = *this;
        for (std::size_t i = 0; i < c.size(); ++i) r.c[i] += o.c[i];
        return r;
    }
    Point operator-(const Point& o) const {
        check_dim(o);
        Point r = *this;
        for (std::size_t i = 0; i < c.size(); ++i) r.c[i] -= o.c[i];
        return r;
    }

    void check_dim(const Point& o) const {
        if (c.size() != o.c.size())
            throw Error("dimension mismatch: " + std::to_string(c.size()) + " vs " +
                        std::to_string(o.c.size()));
    }

    std::string str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(c[i]);
        }
        return s + ")";
    }
};

/// L1 norm, sum of absolute coordinate values.
inline Coord l1(const Point& p) {
    Coord s = 0;
    for (Coord x : p.c) s += x >= 0 ? x : -x;
    return s;
}

/// Signed coordinate sum (the antidiagonal level for nonnegative points).
inline Coord level(const Point& p) {
    Coord s = 0;
    for (Coord x : p.c) s += x;
    return s;
}

/// Coordinate-wise partial order: x <= y iff x_i <= y_i for all i.
inline bool leq(const Point& x, const Point& y) {
    x.check_dim(y);
    for (std::size_t i = 0; i < x.dim(); ++i)
        if (x[i] > y[i]) return false;
    return true;
}

/// Strict lexicographic comparison, first coordinate most significant.
inline bool lex_less(const Point& x, const Point& y) {
    return std::lexicographical_compare(x.c.begin(), x.c.end(), y.c.begin(), y.c.end());
}

// -- 64-bit mixing (splitmix64 finalizer); used for hashing and stream keying.

constexpr std::uint64_t kGolden64 = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t absorb(std::uint64_t h, std::uint64_t w) {
    return mix64(h + kGolden64 + w);
}

struct PointHash {
    std::size_t operator()(const Point& p) const {
        std::uint64_t h = absorb(0x5ca1ab1e5ca1ab1eULL, p.dim());
        for (Coord x : p.c) h = absorb(h, static_cast<std::uint64_t>(x));
        return static_cast<std::size_t>(h);
    }
};

/// Axis-aligned box of lattice points, inclusive on both ends.
struct Box {
    Point lo, hi;

    Box() = default;
    Box(Point l, Point h) : lo(std::move(l)), hi(std::move(h)) {
        lo.check_dim(hi);
        for (std::size_t i = 0; i < lo.dim(); ++i) {
            if (lo[i] > hi[i]) throw Error("empty box: lo > hi on axis " + std::to_string(i));
            if (extent(i) > (Coord(1) << 31))
                throw Error("box exceeds 2^31 cells on axis " + std::to_string(i));
        }
        if (cell_count_unchecked() > (std::uint64_t(1) << 28))
            throw Error("box exceeds 2^28 total cells");
    }

    std::size_t dim() const { return lo.dim(); }
    Coord extent(std::size_t i) const { return hi[i] - lo[i] + 1; }

    bool contains(const Point& p) const {
        if (p.dim() != dim()) return false;
        for (std::size_t i = 0; i < dim(); ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }

    std::uint64_t cell_count() const { return cell_count_unchecked(); }

private:
    std::uint64_t cell_count_unchecked() const {
        std::uint64_t n = 1;
        for (std::size_t i = 0; i < dim(); ++i) {
            std::uint64_t e = static_cast<std::uint64_t>(extent(i));
            if (e != 0 && n > (std::uint64_t(1) << 62) / e) return std::uint64_t(1) << 63;
            n *= e;
        }
        return n;
    }
};

/// Smallest box containing both points.
inline Box hull(const Point& a, const Point& b) {
    a.check_dim(b);
    Point lo(a.dim()), hi(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        lo[i] = std::min(a[i], b[i]);
        hi[i] = std::max(a[i], b[i]);
    }
    return Box(lo, hi);
}

/// Runs fn(i) for i in [0, n); results must be written to index-keyed slots so
/// that aggregate output is independent of the thread count.
template <class Fn>
void parallel_for_index(std::uint64_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads <= 1 || n <= 1) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    unsigned k = static_cast<unsigned>(std::min<std::uint64_t>(threads, n));
    for (unsigned t = 0; t < k; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::uint64_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

inline unsigned default_threads() {
    if (const char* env = std::getenv("DLPP_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

}  // namespace dlpp
