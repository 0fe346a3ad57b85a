#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "dlpp/couplings.hpp"

using namespace dlpp;

namespace {

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double ks = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        ks = std::max(ks, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return ks;
}

}  // namespace

TEST_CASE("randomized start construction") {
    auto z0 = build_randomized_start(std::vector<std::uint8_t>(2 * 9, 0), 3, 2);
    CHECK(z0.z == Point{1, 1});  // all-zero bits

    auto bits = std::vector<std::uint8_t>(2 * 9, 0);
    bits[0] = 1;  // single flip from all-zero moves that coordinate to 2
    auto z1 = build_randomized_start(bits, 3, 2);
    CHECK(z1.z == Point{2, 1});
    CHECK(l1(z1.z - z0.z) == 1);

    CHECK_THROWS_AS(build_randomized_start(std::vector<std::uint8_t>(5, 0), 3, 2), Error);
}

TEST_CASE("randomized start: exhaustive flip and mass bounds at m = 4") {
    const int m = 4, nbits = m * m;
    std::vector<std::uint64_t> hist(m, 0);
    for (std::uint32_t mask = 0; mask < (1u << nbits); ++mask) {
        std::vector<std::uint8_t> bits(nbits);
        for (int b = 0; b < nbits; ++b) bits[b] = (mask >> b) & 1u;
        auto z = build_randomized_start(bits, m, 1);
        CHECK(z.z[0] >= 1);
        CHECK(z.z[0] <= m);
        hist[z.z[0] - 1] += 1;
        for (int b = 0; b < nbits; ++b) {
            auto flipped = bits;
            flipped[b] ^= 1;
            auto z2 = build_randomized_start(flipped, m, 1);
            REQUIRE(std::abs(z2.z[0] - z.z[0]) <= 1);
        }
    }
    for (auto h : hist) CHECK(double(h) / double(1u << nbits) <= 4.0 / m);
}

TEST_CASE("randomized start: sampled flips at a larger m") {
    const int m = 64;
    for (std::uint64_t s = 0; s < 2000; ++s) {
        SeedContext ctx{321, 0, s};
        auto bits = sample_start_bits(ctx, m, 1);
        auto z = build_randomized_start(bits, m, 1);
        Stream pick(ctx, StreamClass::Scratch);
        for (int rep = 0; rep < 8; ++rep) {
            std::size_t b = pick.next_below(bits.size());
            auto flipped = bits;
            flipped[b] ^= 1;
            auto z2 = build_randomized_start(flipped, m, 1);
            REQUIRE(std::abs(z2.z[0] - z.z[0]) <= 1);
        }
    }
}

TEST_CASE("shifted passage") {
    std::size_t d = 2;
    Point x{6, 6};
    Box box(Point::diagonal(d, 1), x + Point::diagonal(d, 4));

    // m = 1 forces Z = (1, 1)
    WeightField f(Distribution::gaussian(), SeedContext{11, 0, 0}, box);
    auto z1 = sample_randomized_start(SeedContext{11, 0, 0}, 1, 2);
    CHECK(z1.z == Point{1, 1});
    CHECK(shifted_passage(f, z1, x) ==
          last_passage_time(f, Point{1, 1}, Point{7, 7}));

    WeightField ones(Distribution::point_mass(1.0), SeedContext{11, 0, 0}, box);
    auto z4 = sample_randomized_start(SeedContext{11, 0, 7}, 4, 2);
    CHECK(shifted_passage(ones, z4, x) == 12.0);  // |x| vertices regardless of Z

    ClampWindow w(0.0, 3.0);
    CHECK(shifted_passage(f, z1, x, w) ==
          clamp(last_passage_time(f, Point{1, 1}, Point{7, 7}), w));
}

TEST_CASE("translation invariance of T(Z, x+Z) against T(0, x)") {
    const int n = 10000, m = 4;
    Point x{6, 6};
    std::vector<double> shifted(n), fixed(n);
    Box box_sh(Point{1, 1}, Point{10, 10});
    Box box_0(Point{0, 0}, x);
    for (int i = 0; i < n; ++i) {
        SeedContext ctx{7171, 0, static_cast<std::uint64_t>(i)};
        WeightField f(Distribution::gaussian(), ctx, box_sh);
        auto z = sample_randomized_start(ctx, m, 2);
        shifted[i] = shifted_passage(f, z, x);
        SeedContext ctx2{7172, 0, static_cast<std::uint64_t>(i)};
        WeightField g(Distribution::gaussian(), ctx2, box_0);
        fixed[i] = last_passage_time(g, Point{0, 0}, x);
    }
    CHECK(two_sample_ks(shifted, fixed) < 0.02);
}

TEST_CASE("bit flip discrepancy") {
    Point x{5, 5};
    auto stat_pm = bit_flip_discrepancy(Distribution::point_mass(1.0), SeedContext{31, 0, 0}, x,
                                        4, 3, 50);
    CHECK(stat_pm.l2_estimate == 0.0);  // f is constant in Z
    CHECK(stat_pm.zero_fraction == 1.0);

    auto stat_m1 = bit_flip_discrepancy(Distribution::gaussian(), SeedContext{32, 0, 0}, x,
                                        1, 0, 50);
    CHECK(stat_m1.l2_estimate == 0.0);  // Z cannot move at m = 1

    auto stat = bit_flip_discrepancy(Distribution::gaussian(), SeedContext{33, 0, 0}, x,
                                     4, 5, 400);
    CHECK(stat.l2_estimate >= 0.0);
    CHECK(stat.triangle_violations == 0);
    CHECK(stat.samples == 400);
    CHECK_THROWS_AS(
        bit_flip_discrepancy(Distribution::gaussian(), SeedContext{34, 0, 0}, x, 2, 8, 10),
        Error);
}

TEST_CASE("phi coupling: hand-traced fixture at d = 2, N = 2") {
    std::size_t d = 2;
    Box box(Point::zero(d), Point::diagonal(d, 2));
    WeightField omega(Distribution::point_mass(0.0), SeedContext{1, 0, 0}, box);
    omega.set_override(Point{0, 0}, 1.0);
    omega.set_override(Point{0, 1}, 0.5);
    omega.set_override(Point{0, 2}, 2.0);

    WeightField aux(Distribution::point_mass(0.0), SeedContext{1, 0, 0}, box,
                    StreamClass::PhiAux);
    aux.set_override(Point{1, 0}, 0.8);
    aux.set_override(Point{2, 0}, 1.5);

    PhiCoupling cp = build_phi(omega, 2, &aux);

    // base case
    CHECK(cp.x_map.at(Point{0, 0}) == Point{0, 0});
    CHECK(cp.phi.weight(Point{0, 0}) == 1.0);

    // level 1: j = 2, xhat = (0,1), phi(0,1) = omega(0,1) = 0.5; the auxiliary
    // draw at (1,0) is 0.8 > 0.5, so x((0,1)) shifts to (1,0)
    CHECK(cp.j_map.at(Point{0, 1}) == 2);
    CHECK(cp.xhat_map.at(Point{0, 1}) == Point{0, 1});
    CHECK(cp.phi.weight(Point{0, 1}) == 0.5);
    CHECK(cp.x_map.at(Point{0, 1}) == Point{1, 0});

    // level 2: xhat = x((0,1)) + e2 = (1,1), phi(1,1) = omega(0,2) = 2.0;
    // the alternative (2,0) holds 1.5 < 2.0, so x((0,2)) stays at (1,1)
    CHECK(cp.j_map.at(Point{0, 2}) == 2);
    CHECK(cp.xhat_map.at(Point{0, 2}) == Point{1, 1});
    CHECK(cp.phi.weight(Point{1, 1}) == 2.0);
    CHECK(cp.x_map.at(Point{0, 2}) == Point{1, 1});

    // the defining inequality, by hand: T_phi(0,(1,0)) = 0.8 >= 0.5 and
    // T_phi(0,(1,1)) = 0.8 + 2.0 >= 0.5 + 2.0
    CHECK(cp.t_plane.at(Point{0, 1}) == 0.5);
    CHECK(cp.t_plane.at(Point{0, 2}) == 2.5);
    PhiCheck chk = verify_phi(cp);
    CHECK(chk.violations == 0);
    CHECK(chk.off_segment == 0);
    CHECK(chk.checked == 3);
}

TEST_CASE("phi coupling: the domination inequality holds exactly") {
    for (int d : {2, 3}) {
        for (std::uint64_t s = 0; s < 20; ++s) {
            Coord N = 10;
            Box box(Point::zero(d), Point::diagonal(d, N));
            WeightField omega(Distribution::gaussian(), SeedContext{4000 + s, 0, s}, box);
            PhiCoupling cp = build_phi(omega, N);
            PhiCheck chk = verify_phi(cp);
            CHECK(chk.violations == 0);
            CHECK(chk.off_segment == 0);
            CHECK(chk.worst_margin >= 0.0);
        }
    }
}

TEST_CASE("phi coupling with a discrete law uses the documented tie-breaks") {
    Coord N = 6;
    Box box(Point::zero(3), Point::diagonal(3, N));
    WeightField omega(Distribution::point_mass(1.0), SeedContext{1, 0, 0}, box);
    PhiCoupling cp = build_phi(omega, N);
    PhiCheck chk = verify_phi(cp);
    CHECK(chk.violations == 0);
    // all T(0, v-e_j) tie, so j_v is the smallest admissible index
    CHECK(cp.j_map.at(Point{0, 1, 1}) == 2);
    CHECK(cp.j_map.at(Point{0, 0, 2}) == 3);
    // stage-3 ties prefer xhat(v)
    CHECK(cp.x_map.at(Point{0, 2, 0}) == cp.xhat_map.at(Point{0, 2, 0}));
}

TEST_CASE("reflection spec and configuration") {
    ReflectionSpec spec = make_reflection(Point{0, 4}, 8);
    CHECK(spec.L.k == 2);
    CHECK(spec.b == Point{2, 2});
    CHECK(l1(spec.a) == l1(spec.b));

    Box box(Point{0, 0}, Point{8, 8});
    WeightField f(Distribution::gaussian(), SeedContext{90, 0, 0}, box);
    spec.q = Point{3, 5};
    REQUIRE(spec.L.contains(spec.q));
    spec.q_set = true;

    WeightField r1 = reflect_configuration(f, spec);
    // a point on the far side below q moved to its mirror
    Point p{1, 4};
    REQUIRE(spec.L.side(p) > 0);
    REQUIRE(leq(p, spec.q));
    CHECK(r1.weight(p) == f.weight(spec.L.reflect(p)));
    CHECK(r1.weight(spec.L.reflect(p)) == f.weight(p));
    // a point outside R and R' keeps its weight
    CHECK(r1.weight(Point{6, 1}) == f.weight(Point{6, 1}));
    CHECK(r1.weight(Point{4, 6}) == f.weight(Point{4, 6}));  // not below q

    // involution, exact, everywhere
    WeightField r2 = reflect_configuration(r1, spec);
    for (Coord i = 0; i <= 8; ++i)
        for (Coord j = 0; j <= 8; ++j) CHECK(r2.weight(Point{i, j}) == f.weight(Point{i, j}));

    CHECK_THROWS_AS(reflect_configuration(f, make_reflection(Point{0, 4}, 8)), Error);
}

TEST_CASE("reflection trial: domination at the realized crossing, exactly") {
    Coord N = 16;
    Point a{0, 8};
    Box box(Point{0, 0}, Point{N, N});
    for (std::uint64_t s = 0; s < 50; ++s) {
        WeightField f(Distribution::gaussian(), SeedContext{5000 + s, 0, s}, box);
        ReflectTrial tr = reflect_trial(f, a, N);
        REQUIRE(tr.q.dim() == 2);
        CHECK(tr.ok);
        CHECK(tr.t_b_reflected >= tr.t_a);
    }
}

TEST_CASE("reflection leaves T unchanged at points not above the swapped region") {
    Coord N = 12;
    Point a{0, 6};
    Box box(Point{0, 0}, Point{N, N});
    WeightField f(Distribution::gaussian(), SeedContext{77, 0, 3}, box);
    ReflectTrial tr = reflect_trial(f, a, N);
    ReflectionSpec spec = make_reflection(a, N);
    spec.q = tr.q;
    spec.q_set = true;
    WeightField r = reflect_configuration(f, spec);
    // the e1 axis is dominated by no point of R or R' (both sit at x2 >= 1)
    for (Coord k = 1; k <= N; ++k) {
        CHECK(last_passage_time(r, Point{0, 0}, Point{k, 0}) ==
              last_passage_time(f, Point{0, 0}, Point{k, 0}));
    }
}

TEST_CASE("reflection gap samples") {
    Point a{0, 6};
    auto pm = reflection_gap_samples(Distribution::point_mass(1.0), a, 12, 20,
                                     SeedContext{60, 0, 0});
    for (const auto& gs : pm) {
        CHECK(gs.d1 == 0.0);
        CHECK(gs.d2 == 0.0);
    }
    auto pm_ls = reflection_gap_samples(Distribution::point_mass(1.0), a, 12, 5,
                                        SeedContext{61, 0, 0}, GapTarget::LevelSet);
    for (const auto& gs : pm_ls) CHECK(gs.d1 == 0.0);

    // d2 strictly negative on average: the balanced start point b reaches
    // further than the axis-hugging a
    auto gaps = reflection_gap_samples(Distribution::gaussian(), Point{0, 32}, 64, 200,
                                       SeedContext{62, 0, 0});
    std::vector<double> d2(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) d2[i] = gaps[i].d2;
    SampleStats st = compute_stats(d2, SeedContext{62, 9, 0});
    CHECK(st.mean_ci.hi < 0.0);
}
