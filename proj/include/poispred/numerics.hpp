// Foundation layer: log-gamma, regularized incomplete gamma, log-space
// Poisson pmf, truncated Poisson expectations with certified tails,
// adaptive Gauss-Kronrod quadrature, and a platform-stable seedable RNG
// with gamma/Dirichlet/Poisson samplers.

#ifndef POISPRED_NUMERICS_HPP
#define POISPRED_NUMERICS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace poispred {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

struct Tolerance {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double tail_mass = 1e-12;  // bound on discarded Poisson tail mass
};

class integration_error : public std::runtime_error {
public:
    integration_error(std::string msg, double best, double err)
        : std::runtime_error(std::move(msg)), best_estimate(best), error_estimate(err) {}
    double best_estimate;
    double error_estimate;
};

// ---------------------------------------------------------------------------
// log Gamma via the Lanczos approximation (g = 7, 9 coefficients).
// Relative error of the underlying Gamma approximation is ~1e-15.
// ---------------------------------------------------------------------------

inline double log_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_gamma: require x > 0, got " + std::to_string(x));
    static const double g = 7.0;
    static const double coef[9] = {
        0.99999999999980993,   676.5203681218851,     -1259.1392167224028,
        771.32342877765313,    -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,  9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // reflection keeps the rational part in its accurate range
        return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
    }
    double z = x - 1.0;
    double sum = coef[0];
    for (int i = 1; i < 9; ++i) sum += coef[i] / (z + i);
    double t = z + g + 0.5;
    return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

// ---------------------------------------------------------------------------
// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
// Series for x < s + 1, continued fraction for the complement otherwise.
// ---------------------------------------------------------------------------

namespace detail {

// log of the series sum S with P(s,x) = exp(s ln x - x - lgamma(s+1)) * S.
inline double lower_gamma_series_log_sum(double s, double x) {
    double term = 1.0, sum = 1.0;
    double ap = s;
    for (int n = 0; n < 1000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-17) return std::log(sum);
    }
    throw integration_error("regularized_lower_gamma: series failed to converge", sum, term);
}

// Q(s,x) by Lentz continued fraction, valid for x >= s + 1.
inline double upper_gamma_cf(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + s * std::log(x) - log_gamma(s)) * h;
}

}  // namespace detail

inline double regularized_lower_gamma(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("regularized_lower_gamma: require s > 0");
    if (x < 0.0) throw std::domain_error("regularized_lower_gamma: require x >= 0");
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) {
        double lp = s * std::log(x) - x - log_gamma(s + 1.0) + detail::lower_gamma_series_log_sum(s, x);
        return std::exp(lp);
    }
    return 1.0 - detail::upper_gamma_cf(s, x);
}

// log P(s, x); stays finite deep in the left tail where P underflows.
inline double log_regularized_lower_gamma(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("log_regularized_lower_gamma: require s > 0");
    if (x < 0.0) throw std::domain_error("log_regularized_lower_gamma: require x >= 0");
    if (x == 0.0) return kNegInf;
    if (x < s + 1.0)
        return s * std::log(x) - x - log_gamma(s + 1.0) + detail::lower_gamma_series_log_sum(s, x);
    return std::log1p(-detail::upper_gamma_cf(s, x));
}

// ---------------------------------------------------------------------------
// Poisson pmf in log space and truncated expectations.
// ---------------------------------------------------------------------------

inline double log_poisson_pmf(long k, double m) {
    if (k < 0) throw std::domain_error("log_poisson_pmf: require k >= 0");
    if (m < 0.0) throw std::domain_error("log_poisson_pmf: require m >= 0");
    if (m == 0.0) return k == 0 ? 0.0 : kNegInf;
    return static_cast<double>(k) * std::log(m) - m - log_gamma(static_cast<double>(k) + 1.0);
}

// Truncation window K(m) = ceil(m + 12 sqrt(m+1) + 30), grown until the
// Chernoff bound exp(-m)(e m / K)^K falls below tail_mass.
inline long poisson_truncation(double m, double tail_mass) {
    if (m < 0.0) throw std::domain_error("poisson_truncation: require m >= 0");
    long k = static_cast<long>(std::ceil(m + 12.0 * std::sqrt(m + 1.0) + 30.0));
    if (m == 0.0) return k;
    double log_tail = std::log(tail_mass);
    while (-m + k * (1.0 + std::log(m) - std::log(static_cast<double>(k))) > log_tail)
        k = k + k / 4 + 1;
    return k;
}

template <class F>
double poisson_expectation(F&& f, double m, const Tolerance& tol = {}) {
    if (m < 0.0) throw std::domain_error("poisson_expectation: require m >= 0");
    if (m == 0.0) return f(0L);
    const long kmax = poisson_truncation(m, tol.tail_mass);
    const double log_m = std::log(m);
    long double acc = 0.0L;
    for (long k = 0; k <= kmax; ++k) {
        double lp = k * log_m - m - log_gamma(static_cast<double>(k) + 1.0);
        double w = std::exp(lp);
        if (w == 0.0) continue;
        double fk = f(k);
        if (!std::isfinite(fk))
            throw integration_error(
                "poisson_expectation: non-finite integrand at k = " + std::to_string(k),
                static_cast<double>(acc), w);
        acc += static_cast<long double>(w) * fk;
    }
    return static_cast<double>(acc);
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (G7, K15) quadrature with interval bisection.
// ---------------------------------------------------------------------------

namespace detail {

// K15 abscissae on [0,1] side of the interval and weights (QUADPACK values).
inline constexpr double kGkX[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kGkWK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGkWG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct GkEstimate {
    double value;
    double error;
};

template <class F>
GkEstimate gk15(F&& f, double lo, double hi) {
    const double h = 0.5 * (hi - lo);
    const double mid = 0.5 * (lo + hi);
    double fk = 0.0, fg = 0.0;
    for (int i = 0; i < 8; ++i) {
        double v;
        if (i == 7) {
            v = f(mid);
            fk += kGkWK[7] * v;
            fg += kGkWG[3] * v;
        } else {
            double v1 = f(mid - h * kGkX[i]);
            double v2 = f(mid + h * kGkX[i]);
            v = v1 + v2;
            fk += kGkWK[i] * v;
            if (i % 2 == 1) fg += kGkWG[i / 2] * v;
        }
    }
    return {fk * h, std::fabs((fk - fg) * h)};
}

template <class F>
GkEstimate integrate_rec(F&& f, double lo, double hi, double abs_budget, double rel_tol, int depth) {
    GkEstimate e = gk15(f, lo, hi);
    if (e.error <= abs_budget || e.error <= rel_tol * std::fabs(e.value)) return e;
    if (depth >= 60)
        throw integration_error("integrate: max refinement depth exceeded", e.value, e.error);
    double mid = 0.5 * (lo + hi);
    GkEstimate l = integrate_rec(f, lo, mid, 0.5 * abs_budget, rel_tol, depth + 1);
    GkEstimate r = integrate_rec(f, mid, hi, 0.5 * abs_budget, rel_tol, depth + 1);
    return {l.value + r.value, l.error + r.error};
}

}  // namespace detail

template <class F>
double integrate(F&& f, double lo, double hi, const Tolerance& tol = {}) {
    if (!(lo < hi)) throw std::domain_error("integrate: require lo < hi");
    detail::GkEstimate e = detail::integrate_rec(f, lo, hi, tol.abs_tol, tol.rel_tol, 0);
    return e.value;
}

// ---------------------------------------------------------------------------
// Deterministic RNG: xoshiro256++ seeded from (seed, stream_id) via
// splitmix64, so sequences are identical on every platform.
// ---------------------------------------------------------------------------

struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    RngStream child(std::uint64_t i) const {
        return RngStream{seed, stream_id * 0x9e3779b97f4a7c15ULL + i + 1};
    }
};

class Rng {
public:
    explicit Rng(const RngStream& s) {
        std::uint64_t a = s.seed;
        std::uint64_t b = s.stream_id ^ 0xd2b74407b1ce6e93ULL;
        state_[0] = splitmix(a);
        state_[1] = splitmix(a) ^ splitmix(b);
        state_[2] = splitmix(a);
        state_[3] = splitmix(a) ^ splitmix(b);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via Marsaglia polar; no trig, pair cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return u * factor;
    }

private:
    static std::uint64_t splitmix(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Marsaglia-Tsang squeeze method; shape < 1 handled by the boost trick.
inline double sample_gamma(double shape, double rate, Rng& rng) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::domain_error("sample_gamma: require shape > 0 and rate > 0");
    if (shape < 1.0) {
        double u = rng.uniform();
        while (u == 0.0) u = rng.uniform();
        return sample_gamma(shape + 1.0, rate, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

// Inversion for small rates, Hormann PTRS transformed rejection otherwise.
inline long sample_poisson(double m, Rng& rng) {
    if (m < 0.0) throw std::domain_error("sample_poisson: require m >= 0");
    if (m == 0.0) return 0;
    if (m <= 30.0) {
        double p = std::exp(-m), cum = p;
        long k = 0;
        double u = rng.uniform();
        while (u > cum) {
            ++k;
            p *= m / static_cast<double>(k);
            cum += p;
            if (k > 2000) break;  // cum saturated by rounding
        }
        return k;
    }
    const double b = 0.931 + 2.53 * std::sqrt(m);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    const double log_m = std::log(m);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        double us = 0.5 - std::fabs(u);
        long k = static_cast<long>(std::floor((2.0 * a / us + b) * u + m + 0.43));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_m - m - log_gamma(static_cast<double>(k) + 1.0))
            return k;
    }
}

inline std::vector<double> sample_dirichlet(const std::vector<double>& params, Rng& rng) {
    if (params.empty()) throw std::domain_error("sample_dirichlet: empty parameter vector");
    std::vector<double> g(params.size());
    double total = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!(params[i] > 0.0)) throw std::domain_error("sample_dirichlet: require all params > 0");
        g[i] = sample_gamma(params[i], 1.0, rng);
        total += g[i];
    }
    for (auto& v : g) v /= total;
    return g;
}

// log(exp(a) + exp(b)) without overflow
inline double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace poispred

#endif  // POISPRED_NUMERICS_HPP
