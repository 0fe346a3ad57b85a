#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dlpp/estimators.hpp"
#include "helpers.hpp"

using namespace dlpp;

namespace {
const SeedContext kBase{20240801, 0, 0};

// E max(X, Y) for two independent standard normals, by quadrature:
// integral of x * 2 phi(x) Phi(x) dx.
double emax_two_normals() {
    return testutil::simpson(-10.0, 10.0, [](double x) {
        return x * 2.0 * normal_pdf(x) * normal_cdf(x);
    });
}
}  // namespace

TEST_CASE("mc passage stats") {
    SampleStats pm = mc_passage_stats(Distribution::point_mass(1.0), Point{5, 3}, 50, kBase);
    CHECK(pm.mean == 8.0);
    CHECK(pm.variance == 0.0);
    CHECK(pm.mean_ci.lo == 8.0);  // zero-width CI on a constant sample
    CHECK(pm.mean_ci.hi == 8.0);

    // d = 1: T is a sum of N standard normals
    const Coord N = 64;
    const std::uint64_t n = 2000;
    SampleStats d1 = mc_passage_stats(Distribution::gaussian(), Point{N}, n, kBase);
    CHECK(std::abs(d1.variance - N) < 5.0 * std::sqrt(2.0) * N / std::sqrt(double(n)));
    CHECK(d1.mean_ci.contains(d1.mean));

    // d = 2 diagonal neighbor: mean = E max(X,Y) = 1/sqrt(pi)
    double target = emax_two_normals();
    CHECK(target == Catch::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-9));
    SampleStats d2 = mc_passage_stats(Distribution::gaussian(), Point{1, 1}, 100000, kBase);
    CHECK(std::abs(d2.mean - target) < 0.015);

    CHECK_THROWS_AS(mc_passage_stats(Distribution::gaussian(), Point{2, 2}, 1, kBase), Error);
}

TEST_CASE("reproducibility: same seed gives identical stats") {
    SampleStats a = mc_passage_stats(Distribution::gamma(2, 1), Point{6, 6}, 200, kBase);
    SampleStats b = mc_passage_stats(Distribution::gamma(2, 1), Point{6, 6}, 200, kBase);
    CHECK(a.mean == b.mean);
    CHECK(a.variance == b.variance);
    CHECK(a.mean_ci.lo == b.mean_ci.lo);
    CHECK(a.var_ci.hi == b.var_ci.hi);
}

TEST_CASE("variance scaling") {
    // d = 1: var T(0, N) = N exactly, so chi fits 1
    ScalingReport d1 = variance_scaling(Distribution::gaussian(), {1.0}, {8, 16, 32, 64, 128},
                                        2000, kBase);
    REQUIRE(d1.exponent.has_value());
    CHECK(std::abs(d1.exponent->slope - 1.0) < 0.05);

    ScalingReport pm = variance_scaling(Distribution::point_mass(2.0), {1.0, 1.0}, {8, 16, 32},
                                        100, kBase);
    CHECK_FALSE(pm.exponent.has_value());  // fit refused: all variances zero
    CHECK(pm.fitted_Ns.empty());
}

TEST_CASE("influence map on the unit square") {
    InfluenceMap map = influence_map(Distribution::gaussian(), Point{1, 1}, 20000, kBase);
    CHECK(map.ihat(Point{1, 1}) == 1.0);
    CHECK(map.ihat(Point{1, 0}) + map.ihat(Point{0, 1}) == 1.0);
    CHECK(std::abs(map.ihat(Point{1, 0}) - 0.5) < 0.02);
    CHECK(map.total_count() == 2 * map.n);  // sum identity, exact
}

TEST_CASE("influence sum identity at x = (8,8)") {
    InfluenceMap map = influence_map(Distribution::gaussian(), Point{8, 8}, 2000, kBase);
    CHECK(map.total_count() == 16 * map.n);
}

TEST_CASE("weighted influences for gamma weights") {
    Point x{4, 4};
    InfluenceMap map = weighted_influence_map(Distribution::gamma(2, 1), x, 2000, kBase);
    REQUIRE_FALSE(map.weighted.empty());
    // J >= I pointwise (weights are nonnegative)
    for (std::size_t i = 0; i < map.counts.size(); ++i)
        CHECK(map.weighted[i] + 1e-12 >=
              static_cast<double>(map.counts[i]));
    // per-sample identity sum_{v in gamma}(1 + w(v)) = |x| + T(0,x)
    CHECK(map.max_weighted_identity_error <= 1e-10);

    CHECK_THROWS_AS(weighted_influence_map(Distribution::point_mass(1.0), x, 10, kBase), Error);
    CHECK_THROWS_AS(weighted_influence_map(Distribution::gaussian(), x, 10, kBase), Error);
}

TEST_CASE("influence spreading with a randomized start") {
    Point x{12, 12};
    const std::uint64_t n = 3000;
    InfluenceMap m1 = influence_map(Distribution::gaussian(), x, n, kBase, 1, false, 1, true);
    InfluenceMap m4 = influence_map(Distribution::gaussian(), x, n, kBase, 4, false, 1, true);
    CHECK(m1.max_ihat() == 1.0);  // deterministic endpoint
    CHECK(m4.max_ihat() < m1.max_ihat());
    CHECK(m1.total_count() == 24 * n);
    CHECK(m4.total_count() == 24 * n);
    CI c1 = bootstrap_max_ihat(m1, kBase);
    CI c4 = bootstrap_max_ihat(m4, kBase.with_experiment(1));
    CHECK(c4.hi < c1.lo);
}

TEST_CASE("monotone influence spreading over m = 1,2,4,8,16") {
    Point x{16, 16};
    const std::uint64_t n = 3000;
    double prev = 2.0;
    for (int m : {1, 2, 4, 8, 16}) {
        InfluenceMap map = influence_map(Distribution::gaussian(), x, n, kBase, m);
        double mx = map.max_ihat();
        CHECK(mx < prev);
        prev = mx;
    }
}

TEST_CASE("tail report") {
    TailReport pm = tail_report(Distribution::point_mass(1.0), Point{8, 8}, {1, 2, 3}, 1000,
                                kBase);
    for (const auto& pt : pm.points) CHECK(pt.p == 0.0);

    // d = 1 gaussian: T ~ Normal(0, N); p(t) = 2(1 - Phi(t))
    TailReport d1 = tail_report(Distribution::gaussian(), Point{100}, {1.0, 2.0}, 20000, kBase);
    for (const auto& pt : d1.points) {
        double want = 2.0 * (1.0 - normal_cdf(pt.t));
        CHECK(pt.ci.lo <= want);
        CHECK(want <= pt.ci.hi);
    }
    double prev = 1.0;
    for (const auto& pt : d1.points) {
        CHECK(pt.p <= prev);
        prev = pt.p;
    }
    CHECK_THROWS_AS(tail_report(Distribution::gaussian(), Point{4, 4}, {1.0}, 10, kBase), Error);
}

TEST_CASE("empirical quantiles") {
    std::vector<double> v{1, 2, 3, 4};
    CHECK(empirical_quantile(v, 0.5) == 2.0);
    CHECK(empirical_quantile(v, 1e-9) == 1.0);
    CHECK(empirical_quantile(v, 0.999) == 4.0);
    double prev = 0;
    for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        double q = empirical_quantile(v, u);
        CHECK(q >= prev);
        prev = q;
    }
    CHECK_THROWS_AS(empirical_quantile(std::span<const double>{}, 0.5), Error);
    CHECK_THROWS_AS(empirical_quantile(v, 0.0), Error);
}

TEST_CASE("shape estimate") {
    ShapeEstimate pm = shape_estimate(Distribution::point_mass(1.0), {1.0, 1.0}, 16, 20, kBase);
    CHECK(pm.ghat == 2.0);  // |x| per unit N, exact

    ShapeEstimate half = shape_estimate(Distribution::point_mass(1.0), {0.5, 0.5}, 16, 20, kBase);
    CHECK(half.ghat == 1.0);

    // dyadic superadditivity diagnostic for a random law
    ShapeEstimate g = shape_estimate(Distribution::gaussian(), {1.0, 1.0}, 64, 400, kBase);
    CHECK(g.superadditive_ok);
    CHECK(g.dyadic.size() >= 3);
    CHECK(g.ghat > 1.0);

    CHECK_THROWS_AS(shape_estimate(Distribution::gaussian(), {-1.0, 1.0}, 16, 10, kBase), Error);
    CHECK_THROWS_AS(shape_estimate(Distribution::gaussian(), {1.0, 0.5}, 16, 10, kBase,
                                   Graph::SpaceTime),
                    Error);
}

TEST_CASE("bernoulli plateau, quick variant") {
    ShapeEstimate g = shape_estimate(Distribution::bernoulli(0.95), {0.5, 0.5}, 128, 50, kBase);
    CHECK(g.ghat >= 0.9);
}

TEST_CASE("concavity gap") {
    ConcavityReport pm = concavity_gap(Distribution::point_mass(1.0), 8, 50, kBase);
    CHECK(pm.gap.mean == 0.0);
    CHECK(pm.gap.variance == 0.0);

    ConcavityReport n1 = concavity_gap(Distribution::gaussian(), 1, 100000, kBase);
    double target = emax_two_normals() / 2.0;
    CHECK(std::abs(n1.gap.mean - target) < 0.02);
    CHECK(n1.gap_positive);

    ConcavityReport g = concavity_gap(Distribution::gaussian(), 16, 500, kBase);
    CHECK(g.gap_positive);

    // the d >= 3 offset variant
    ConcavityReport off = concavity_gap(Distribution::gaussian(), 8, 300, kBase, {0.5});
    CHECK(off.gap_positive);
}

TEST_CASE("wandering statistics") {
    WanderingReport pm = wandering_stats(Distribution::point_mass(1.0), {8, 16}, 20, kBase);
    // canonical tie-break path hugs the axis: midpoint displacement N/2, variance 0
    CHECK(pm.points[0].mid.mean == 4.0);
    CHECK(pm.points[0].mid.variance == 0.0);
    CHECK(pm.points[1].mid.mean == 8.0);

    WanderingReport g = wandering_stats(Distribution::geometric(0.5), {8, 16, 32}, 300, kBase);
    REQUIRE(g.xi.has_value());
    CHECK(g.xi->slope > 0.2);
    CHECK(g.xi->slope < 1.1);
}

TEST_CASE("polymer variance and the d = 2 transport equality") {
    ScalingReport pm = polymer_variance(Distribution::point_mass(1.0), {8, 16}, 20, kBase,
                                        Graph::SpaceTime);
    CHECK(pm.points[0].stats.variance == 0.0);
    CHECK_FALSE(pm.exponent.has_value());

    // ordered and spacetime ground states agree sample by sample under transport
    const Coord N = 8;
    for (std::uint64_t s = 0; s < 20; ++s) {
        SeedContext ctx{8800 + s, 0, s};
        WeightField omega(Distribution::gaussian(), ctx, Box(Point{0, 0}, Point{N, N}));
        WeightField that(Distribution::gaussian(), ctx, Box(Point{-N, 0}, Point{N, N}),
                         StreamClass::TransportAux);
        for (Coord i = 0; i <= N; ++i)
            for (Coord j = 0; i + j <= N; ++j)
                that.set_override(embed_point(Point{i, j}), omega.weight(Point{i, j}));
        GroundState o = ground_state(omega, N, Graph::Ordered);
        GroundState st = ground_state(that, N, Graph::SpaceTime);
        CHECK(o.value == st.value);
        CHECK(embed_point(o.argmax) == st.argmax);
    }
}

TEST_CASE("clamped variance check") {
    double c_g = scan_ratio_sup(Distribution::gaussian()).sup_observed;
    ClampedVarianceReport rep = clamped_variance_check(Distribution::gaussian(), Point{16, 16},
                                                       0.125, 2000, 2000, c_g, kBase);
    CHECK(rep.A < rep.B);
    CHECK(rep.clamped_variance <= rep.raw_variance);
    CHECK(rep.bound > 0.0);
    CHECK(rep.pass);

    CHECK_THROWS_AS(clamped_variance_check(Distribution::gaussian(), Point{8, 8}, 1e-4, 100, 100,
                                           c_g, kBase),
                    Error);  // u too small for the pilot
    CHECK_THROWS_AS(clamped_variance_check(Distribution::uniform01(), Point{8, 8}, 0.125, 100,
                                           100, c_g, kBase),
                    Error);
}

TEST_CASE("clamping contracts the variance for wide pilot windows") {
    // u near 1/4 gives a wide central window; clamped variance still below raw
    double c_g = 1.24;
    ClampedVarianceReport rep = clamped_variance_check(Distribution::gaussian(), Point{12, 12},
                                                       0.25, 1500, 1500, c_g, kBase);
    CHECK(rep.clamped_variance <= rep.raw_variance);
}

TEST_CASE("shift difference scaling") {
    ShiftScalingReport pm = shift_difference_scaling(Distribution::point_mass(1.0), {8, 16, 32},
                                                     50, kBase);
    for (const auto& p : pm.points) {
        CHECK(p.l2 == 1.0);  // h identically 1
        CHECK(p.mono_violations == 0);
    }
    REQUIRE(pm.exponent.has_value());
    CHECK(std::abs(pm.exponent->slope) < 1e-12);

    ShiftScalingReport g = shift_difference_scaling(Distribution::gaussian(), {8, 16, 32}, 300,
                                                    kBase);
    CHECK(g.total_violations == 0);
    REQUIRE(g.exponent.has_value());
    CHECK(g.exponent->slope < 0.6);  // loose at tiny N; the acceptance run pins < 0.5
}

TEST_CASE("scaling report uses only Ns whose variance CI excludes zero") {
    ScalingReport rep = variance_scaling(Distribution::gaussian(), {1.0, 1.0}, {8, 16, 32}, 200,
                                         kBase);
    CHECK(rep.fitted_Ns.size() == rep.points.size());  // gaussian variances well separated
    for (const auto& p : rep.points) CHECK(p.stats.var_ci.lo > 0.0);
}
