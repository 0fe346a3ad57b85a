#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "dlpp/core.hpp"
#include "dlpp/rng.hpp"

namespace dlpp {

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Standard normal quantile; exact 0 at u = 1/2, full tail accuracy via erfc_inv.
inline double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw Error("normal_quantile: u must lie in (0,1)");
    if (u == 0.5) return 0.0;
    if (u < 0.5) return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
    return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * (1.0 - u));
}

enum class DistKind { Gaussian, Uniform01, Gamma, Geometric, Bernoulli, PointMass };

/// Vertex weight law. Geometric has support {0,1,2,...} with
/// P(X=k) = (1-q) q^k; Gamma is parameterized by (shape, rate), mean shape/rate.
class Distribution {
public:
    static Distribution gaussian() { return Distribution(DistKind::Gaussian, 0, 0); }
    static Distribution uniform01() { return Distribution(DistKind::Uniform01, 0, 0); }
    static Distribution gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0))
            throw Error("gamma: shape and rate must be positive");
        return Distribution(DistKind::Gamma, shape, rate);
    }
    static Distribution geometric(double q) {
        if (!(q > 0.0 && q < 1.0)) throw Error("geometric: q must lie in (0,1)");
        return Distribution(DistKind::Geometric, q, 0);
    }
    static Distribution bernoulli(double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error("bernoulli: p must lie in [0,1]");
        return Distribution(DistKind::Bernoulli, p, 0);
    }
    static Distribution point_mass(double c) { return Distribution(DistKind::PointMass, c, 0); }

    DistKind kind() const { return kind_; }
    double shape() const { return a_; }
    double rate() const { return b_; }
    double q() const { return a_; }
    double p() const { return a_; }
    double value() const { return a_; }

    bool is_continuous() const {
        return kind_ == DistKind::Gaussian || kind_ == DistKind::Uniform01 ||
               kind_ == DistKind::Gamma;
    }
    bool is_degenerate() const { return kind_ == DistKind::PointMass; }

    double mean() const {
        switch (kind_) {
            case DistKind::Gaussian: return 0.0;
            case DistKind::Uniform01: return 0.5;
            case DistKind::Gamma: return a_ / b_;
            case DistKind::Geometric: return a_ / (1.0 - a_);
            case DistKind::Bernoulli: return a_;
            case DistKind::PointMass: return a_;
        }
        return 0.0;
    }

    double cdf(double x) const {
        switch (kind_) {
            case DistKind::Gaussian: return normal_cdf(x);
            case DistKind::Uniform01: return x <= 0 ? 0.0 : (x >= 1 ? 1.0 : x);
            case DistKind::Gamma: return x <= 0 ? 0.0 : boost::math::gamma_p(a_, b_ * x);
            case DistKind::Geometric: {
                if (x < 0) return 0.0;
                double k = std::floor(x);
                return 1.0 - std::pow(a_, k + 1.0);
            }
            case DistKind::Bernoulli: return x < 0 ? 0.0 : (x < 1 ? 1.0 - a_ : 1.0);
            case DistKind::PointMass: return x < a_ ? 0.0 : 1.0;
        }
        return 0.0;
    }

    /// Density for continuous laws.
    double pdf(double x) const {
        switch (kind_) {
            case DistKind::Gaussian: return normal_pdf(x);
            case DistKind::Uniform01: return (x >= 0 && x <= 1) ? 1.0 : 0.0;
            case DistKind::Gamma: {
                if (x <= 0) return 0.0;
                double lg = a_ * std::log(b_) + (a_ - 1.0) * std::log(x) - b_ * x -
                            std::lgamma(a_);
                return std::exp(lg);
            }
            default: throw Error("pdf: not a continuous distribution");
        }
    }

    /// Survival function P(X > x), evaluated with full relative accuracy in the
    /// upper tail (erfc / regularized upper incomplete gamma).
    double sf(double x) const {
        switch (kind_) {
            case DistKind::Gaussian: return 0.5 * std::erfc(x / std::sqrt(2.0));
            case DistKind::Uniform01: return x <= 0 ? 1.0 : (x >= 1 ? 0.0 : 1.0 - x);
            case DistKind::Gamma: return x <= 0 ? 1.0 : boost::math::gamma_q(a_, b_ * x);
            default: return 1.0 - cdf(x);
        }
    }

    /// Partial first moment: integral of t f(t) dt over (-inf, x].
    double partial_mean(double x) const {
        switch (kind_) {
            case DistKind::Gaussian: return -normal_pdf(x);
            case DistKind::Uniform01:
                return x <= 0 ? 0.0 : (x >= 1 ? 0.5 : 0.5 * x * x);
            case DistKind::Gamma:
                return x <= 0 ? 0.0 : (a_ / b_) * boost::math::gamma_p(a_ + 1.0, b_ * x);
            default: throw Error("partial_mean: not a continuous distribution");
        }
    }

    /// Upper partial first moment: integral of t f(t) dt over (x, inf);
    /// relatively accurate deep in the upper tail.
    double partial_mean_upper(double x) const {
        switch (kind_) {
            case DistKind::Gaussian: return normal_pdf(x);
            case DistKind::Uniform01:
                return x <= 0 ? 0.5 : (x >= 1 ? 0.0 : 0.5 * (1.0 - x) * (1.0 + x));
            case DistKind::Gamma:
                return x <= 0 ? mean() : (a_ / b_) * boost::math::gamma_q(a_ + 1.0, b_ * x);
            default: throw Error("partial_mean_upper: not a continuous distribution");
        }
    }

    /// Smallest x with F(x) >= u.
    double inverse_cdf(double u) const {
        if (!(u > 0.0 && u < 1.0)) throw Error("inverse_cdf: u must lie in (0,1)");
        switch (kind_) {
            case DistKind::Gaussian: return normal_quantile(u);
            case DistKind::Uniform01: return u;
            case DistKind::Gamma: return boost::math::gamma_p_inv(a_, u) / b_;
            case DistKind::Geometric: {
                // F(k) = 1 - q^(k+1) >= u  <=>  k >= log(1-u)/log(q) - 1.
                double r = std::log1p(-u) / std::log(a_) - 1.0;
                Coord k = static_cast<Coord>(std::ceil(r));
                if (k < 0) k = 0;
                while (k > 0 && cdf(double(k - 1)) >= u) --k;
                while (cdf(double(k)) < u) ++k;
                return static_cast<double>(k);
            }
            case DistKind::Bernoulli: return u <= 1.0 - a_ ? 0.0 : 1.0;
            case DistKind::PointMass: return a_;
        }
        return 0.0;
    }

    double sample(Stream& s) const {
        switch (kind_) {
            case DistKind::Gaussian: return normal_quantile(s.next_unit());
            case DistKind::Uniform01: return s.next_unit();
            case DistKind::Gamma: return sample_gamma(s, a_) / b_;
            case DistKind::Geometric: return inverse_cdf(s.next_unit());
            case DistKind::Bernoulli: return s.next_unit() <= 1.0 - a_ ? 0.0 : 1.0;
            case DistKind::PointMass: return a_;
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind_) {
            case DistKind::Gaussian: return "gaussian";
            case DistKind::Uniform01: return "uniform01";
            case DistKind::Gamma: return "gamma";
            case DistKind::Geometric: return "geometric";
            case DistKind::Bernoulli: return "bernoulli";
            case DistKind::PointMass: return "pointmass";
        }
        return "?";
    }

    /// Short label with parameters, for report rows.
    std::string label() const {
        switch (kind_) {
            case DistKind::Gamma:
                return "gamma(" + fmt(a_) + "," + fmt(b_) + ")";
            case DistKind::Geometric: return "geometric(" + fmt(a_) + ")";
            case DistKind::Bernoulli: return "bernoulli(" + fmt(a_) + ")";
            case DistKind::PointMass: return "pointmass(" + fmt(a_) + ")";
            default: return name();
        }
    }

    bool operator==(const Distribution& o) const {
        return kind_ == o.kind_ && a_ == o.a_ && b_ == o.b_;
    }

private:
    Distribution(DistKind k, double a, double b) : kind_(k), a_(a), b_(b) {}

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", v);
        return buf;
    }

    // Marsaglia-Tsang squeeze; alpha < 1 boosted through G(alpha+1) * U^(1/alpha).
    static double sample_gamma(Stream& s, double alpha) {
        if (alpha < 1.0) {
            double g = sample_gamma(s, alpha + 1.0);
            return g * std::pow(s.next_unit(), 1.0 / alpha);
        }
        double d = alpha - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal_quantile(s.next_unit());
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = s.next_unit();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d - d * v + d * std::log(v)) return d * v;
        }
    }

    DistKind kind_;
    double a_, b_;
};

}  // namespace dlpp
