#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "dlpp/core.hpp"

namespace dlpp {

/// Identifies one reproducible experiment draw. The triple fully determines
/// every weight in a sample; distinct triples give independent streams.
struct SeedContext {
    std::uint64_t master_seed = 0;
    std::uint64_t experiment_id = 0;
    std::uint64_t sample_index = 0;

    SeedContext with_sample(std::uint64_t i) const { return {master_seed, experiment_id, i}; }
    SeedContext with_experiment(std::uint64_t e) const { return {master_seed, e, sample_index}; }
};

/// Disjoint sub-streams of one SeedContext. Keeping vertex weights, auxiliary
/// Bernoulli bits, coupling fill-ins and bootstrap draws on separate classes
/// guarantees independence by construction.
enum class StreamClass : std::uint64_t {
    Vertex = 1,
    AuxBits = 2,
    PhiAux = 3,
    Bootstrap = 4,
    TransportAux = 5,
    Scratch = 6,
};

// Philox4x32-10 counter-based generator (Salmon et al. keyed block cipher).
namespace philox {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
        std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
        std::array<std::uint32_t, 4> nxt;
        nxt[0] = static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0];
        nxt[1] = static_cast<std::uint32_t>(p1);
        nxt[2] = static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1];
        nxt[3] = static_cast<std::uint32_t>(p0);
        ctr = nxt;
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

}  // namespace philox

/// Deterministic random stream keyed by (SeedContext, StreamClass, coords).
/// Each stream is a pure function of its construction arguments; draws are
/// counted blocks of a Philox4x32-10 cipher, so any vertex weight can be
/// regenerated lazily without storing the field.
class Stream {
public:
    Stream(const SeedContext& ctx, StreamClass cls, std::span<const Coord> coords = {}) {
        std::uint64_t k = absorb(0, ctx.master_seed);
        k = absorb(k, ctx.experiment_id);
        k = absorb(k, ctx.sample_index);
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};

        std::uint64_t h = absorb(0x0ddc0ffee0ddc0ffULL, static_cast<std::uint64_t>(cls));
        h = absorb(h, coords.size());
        for (Coord c : coords) h = absorb(h, static_cast<std::uint64_t>(c));
        std::uint64_t h2 = mix64(h ^ kGolden64);
        prefix_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                   static_cast<std::uint32_t>(h2)};
    }

    Stream(const SeedContext& ctx, StreamClass cls, const Point& p)
        : Stream(ctx, cls, std::span<const Coord>(p.c.data(), p.c.size())) {}

    std::uint64_t next_u64() {
        if (have_ != 2) {
            auto out = philox::block({prefix_[0], prefix_[1], prefix_[2], draw_++}, key_);
            buf_[0] = (std::uint64_t(out[1]) << 32) | out[0];
            buf_[1] = (std::uint64_t(out[3]) << 32) | out[2];
            have_ = 2;
        }
        return buf_[--have_];
    }

    /// Uniform double strictly inside (0,1): 53-bit mantissa offset by half an ulp.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Unbiased integer in [0, n) via 128-bit multiply-shift.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool next_bit() { return (next_u64() & 1) != 0; }

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 3> prefix_;
    std::uint32_t draw_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int have_ = 0;
};

}  // namespace dlpp
