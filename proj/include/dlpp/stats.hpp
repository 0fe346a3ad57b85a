#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dlpp/core.hpp"
#include "dlpp/rng.hpp"

namespace dlpp {

struct CI {
    double lo = 0, hi = 0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Moment summary with seeded bootstrap percentile intervals (level 0.95,
/// 1000 resamples). Fully determined by the data and the provenance seed.
struct SampleStats {
    std::uint64_t n = 0;
    double mean = 0;
    double variance = 0;  // unbiased
    CI mean_ci, var_ci;
    std::uint64_t master_seed = 0;
    std::uint64_t experiment_id = 0;
};

namespace detail {

inline std::pair<double, double> mean_var(std::span<const double> xs) {
    double m = 0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - m) * (x - m);
    double v = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
    return {m, v};
}

inline CI percentile_ci(std::vector<double>& stats, double level) {
    std::sort(stats.begin(), stats.end());
    double alpha = (1.0 - level) / 2.0;
    std::size_t B = stats.size();
    std::size_t lo = static_cast<std::size_t>(std::floor(alpha * (B - 1)));
    std::size_t hi = static_cast<std::size_t>(std::ceil((1.0 - alpha) * (B - 1)));
    return {stats[lo], stats[hi]};
}

}  // namespace detail

inline constexpr int kBootstrapResamples = 1000;

inline SampleStats compute_stats(std::span<const double> xs, const SeedContext& provenance,
                                 int B = kBootstrapResamples, double level = 0.95) {
    if (xs.empty()) throw Error("compute_stats: empty sample");
    SampleStats st;
    st.n = xs.size();
    st.master_seed = provenance.master_seed;
    st.experiment_id = provenance.experiment_id;
    auto [m, v] = detail::mean_var(xs);
    st.mean = m;
    st.variance = v;

    std::uint64_t n = xs.size();
    std::vector<double> bmeans(B), bvars(B);
    for (int b = 0; b < B; ++b) {
        Stream s({provenance.master_seed, provenance.experiment_id, static_cast<std::uint64_t>(b)},
                 StreamClass::Bootstrap);
        double sum = 0, sumsq = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            double x = xs[s.next_below(n)];
            sum += x;
            sumsq += x * x;
        }
        double bm = sum / static_cast<double>(n);
        bmeans[b] = bm;
        bvars[b] = n > 1 ? (sumsq - n * bm * bm) / static_cast<double>(n - 1) : 0.0;
    }
    st.mean_ci = detail::percentile_ci(bmeans, level);
    st.var_ci = detail::percentile_ci(bvars, level);
    return st;
}

/// Bootstrap percentile CI for an arbitrary statistic of the sample.
template <class Stat>
CI bootstrap_ci(std::span<const double> xs, Stat&& stat, const SeedContext& provenance,
                int B = kBootstrapResamples, double level = 0.95) {
    std::uint64_t n = xs.size();
    if (n == 0) throw Error("bootstrap_ci: empty sample");
    std::vector<double> vals(B);
    std::vector<double> resample(n);
    for (int b = 0; b < B; ++b) {
        Stream s({provenance.master_seed, provenance.experiment_id, static_cast<std::uint64_t>(b)},
                 StreamClass::Bootstrap);
        for (std::uint64_t i = 0; i < n; ++i) resample[i] = xs[s.next_below(n)];
        vals[b] = stat(std::span<const double>(resample));
    }
    return detail::percentile_ci(vals, level);
}

/// Wilson score interval for a binomial proportion.
inline CI wilson_ci(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054) {
    if (n == 0) throw Error("wilson_ci: n must be positive");
    double p = static_cast<double>(k) / static_cast<double>(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {center - half, center + half};
}

/// Unweighted least squares y = intercept + slope * x.
struct LineFit {
    double slope = 0, intercept = 0, slope_se = 0;
    std::size_t n = 0;
};

inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw Error("fit_line: need >= 2 points");
    std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0) throw Error("fit_line: degenerate abscissae");
    LineFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = ys[i] - f.intercept - f.slope * xs[i];
            rss += r * r;
        }
        f.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return f;
}

/// Lower empirical quantile: order statistic at 1-based index ceil(u*n).
inline double empirical_quantile(std::span<const double> sorted_values, double u) {
    if (sorted_values.empty()) throw Error("empirical_quantile: empty sample");
    if (!(u > 0.0 && u < 1.0)) throw Error("empirical_quantile: u must lie in (0,1)");
    std::size_t n = sorted_values.size();
    std::size_t idx = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n)));
    if (idx < 1) idx = 1;
    if (idx > n) idx = n;
    return sorted_values[idx - 1];
}

/// Empirical inverse CDF over a stored sorted sample.
class QuantileFn {
public:
    explicit QuantileFn(std::vector<double> values) : sorted_(std::move(values)) {
        if (sorted_.empty()) throw Error("QuantileFn: empty sample");
        std::sort(sorted_.begin(), sorted_.end());
    }
    double operator()(double u) const { return empirical_quantile(sorted_, u); }
    const std::vector<double>& sorted() const { return sorted_; }

private:
    std::vector<double> sorted_;
};

/// x log(x/a) <= b implies x <= 2b / log(b/a); requires b > a > 0.
inline double lambert_bound(double a, double b) {
    if (!(b > a && a > 0)) throw Error("lambert_bound: requires b > a > 0");
    return 2.0 * b / std::log(b / a);
}

}  // namespace dlpp
