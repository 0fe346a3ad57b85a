#pragma once

// Test-only oracles, independent of the library's computation paths.

#include <algorithm>
#include <cmath>
#include <vector>

#include "dlpp/distributions.hpp"

namespace testutil {

// Composite Simpson integration of an arbitrary integrand.
template <class F>
double simpson(double lo, double hi, F&& f, int n = 100001) {
    if (n % 2 == 0) ++n;
    double h = (hi - lo) / (n - 1), s = 0;
    for (int i = 0; i < n; ++i) {
        double x = lo + i * h;
        double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * f(x);
    }
    return s * h / 3.0;
}

// Quadrature oracle for the clamp ratio, integrating the density directly.
// Reliable for windows with mass >= ~1e-6 and |ends| <= ~8.
inline double clamp_ratio_oracle(const dlpp::Distribution& d, double a, double b) {
    bool fa = std::isfinite(a), fb = std::isfinite(b);
    double lo = fa ? a : d.inverse_cdf(1e-14);
    double hi = fb ? b : d.inverse_cdf(1.0 - 1e-14);
    // clip to the support so Simpson never straddles a density jump
    if (d.kind() == dlpp::DistKind::Uniform01) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, 1.0);
    } else if (d.kind() == dlpp::DistKind::Gamma) {
        lo = std::max(lo, 0.0);
    }
    if (!(lo < hi)) lo = std::nextafter(hi, -1e308);
    double atom_a = fa ? d.cdf(a) : 0.0;
    double atom_b = fb ? d.sf(b) : 0.0;
    double mass = simpson(lo, hi, [&](double x) { return d.pdf(x); });
    double m1 = simpson(lo, hi, [&](double x) { return x * d.pdf(x); });
    double mu = m1 + atom_a * (fa ? a : 0.0) + atom_b * (fb ? b : 0.0);
    if (!fa) mu += simpson(lo - 40.0, lo, [&](double x) { return x * d.pdf(x); });
    if (!fb) mu += simpson(hi, hi + 40.0, [&](double x) { return x * d.pdf(x); });
    double numer = simpson(lo, hi, [&](double x) { return std::abs(x - mu) * d.pdf(x); });
    if (fa) numer += atom_a * std::abs(a - mu);
    if (fb) numer += atom_b * std::abs(b - mu);
    if (!fa) numer += std::abs(lo - mu) * simpson(lo - 40.0, lo, [&](double x) { return d.pdf(x); });
    if (!fb) numer += std::abs(hi - mu) * simpson(hi, hi + 40.0, [&](double x) { return d.pdf(x); });
    double den = d.kind() == dlpp::DistKind::Gamma ? mass + m1 : mass;
    return numer / den;
}

// Kolmogorov-Smirnov distance between a sample and an analytic CDF.
inline double ks_distance(std::vector<double> sample, const dlpp::Distribution& d) {
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double ks = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double F = d.cdf(sample[i]);
        ks = std::max(ks, std::abs(F - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - F));
    }
    return ks;
}

}  // namespace testutil
