#pragma once

#include <span>
#include <unordered_map>

#include "dlpp/core.hpp"
#include "dlpp/distributions.hpp"
#include "dlpp/lattice.hpp"
#include "dlpp/rng.hpp"

namespace dlpp {

/// The random environment: lazy, seed-deterministic i.i.d. weights on a box,
/// with a sparse override map for coupling constructions. weight(v) is a pure
/// function of (dist, ctx, stream class, v), so fields are regenerated on
/// demand and shared across workers without storage.
class WeightField {
public:
    WeightField(Distribution dist, SeedContext ctx, Box box,
                StreamClass cls = StreamClass::Vertex)
        : dist_(std::move(dist)), ctx_(ctx), box_(std::move(box)), cls_(cls) {}

    const Distribution& dist() const { return dist_; }
    const SeedContext& ctx() const { return ctx_; }
    const Box& box() const { return box_; }
    StreamClass stream_class() const { return cls_; }

    double weight(const Point& p) const {
        if (!box_.contains(p))
            throw Error("weight: point " + p.str() + " outside the configured box");
        if (!overrides_.empty()) {
            auto it = overrides_.find(p);
            if (it != overrides_.end()) return it->second;
        }
        return sample_at(std::span<const Coord>(p.c.data(), p.c.size()));
    }

    /// Hot-path variant: caller guarantees coords lie inside the box.
    double weight_unchecked(std::span<const Coord> coords) const {
        if (!overrides_.empty()) {
            Point p{std::vector<Coord>(coords.begin(), coords.end())};
            auto it = overrides_.find(p);
            if (it != overrides_.end()) return it->second;
        }
        return sample_at(coords);
    }

    void set_override(const Point& p, double w) {
        if (!box_.contains(p))
            throw Error("set_override: point " + p.str() + " outside the configured box");
        overrides_[p] = w;
    }

    bool has_override(const Point& p) const { return overrides_.count(p) != 0; }
    const std::unordered_map<Point, double, PointHash>& overrides() const { return overrides_; }

    /// Same environment viewed through a larger (or equal) box.
    WeightField with_box(Box box) const {
        WeightField f(dist_, ctx_, std::move(box), cls_);
        f.overrides_ = overrides_;
        return f;
    }

private:
    double sample_at(std::span<const Coord> coords) const {
        Stream s(ctx_, cls_, coords);
        return dist_.sample(s);
    }

    Distribution dist_;
    SeedContext ctx_;
    Box box_;
    StreamClass cls_;
    std::unordered_map<Point, double, PointHash> overrides_;
};

/// sample_weight(spec, ctx, v): deterministic i.i.d. weight at a lattice point.
inline double sample_weight(const Distribution& dist, const SeedContext& ctx, const Point& p,
                            StreamClass cls = StreamClass::Vertex) {
    Stream s(ctx, cls, p);
    return dist.sample(s);
}

}  // namespace dlpp
