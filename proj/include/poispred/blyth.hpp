// Computational machinery of the Blyth admissibility argument: the
// logarithmic truncation sequence h_l, the truncated-prior posterior mean
// mu_hat, the Bayes-risk gap between the candidate prior and its truncated
// version, and the analytic 1/log(l) upper bound on that gap.

#ifndef POISPRED_BLYTH_HPP
#define POISPRED_BLYTH_HPP

#include <algorithm>
#include <cmath>

#include "poispred/numerics.hpp"

namespace poispred {

struct BlythConfig {
    double l;  // truncation level, > 1
    double c;  // reduction exponent, in [0, 1)
    double a;
    double b;
    Tolerance tol;

    BlythConfig(double l_, double c_, double a_, double b_, Tolerance tol_ = {})
        : l(l_), c(c_), a(a_), b(b_), tol(tol_) {
        if (!(l > 1.0)) throw std::domain_error("BlythConfig: require l > 1");
        if (!(c >= 0.0 && c < 1.0)) throw std::domain_error("BlythConfig: require 0 <= c < 1");
        if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("BlythConfig: require a, b > 0");
    }
};

// h_l(mu): 1 on [0,1], 1 - log(mu)/log(l) on (1,l], 0 above l
inline double h_l(double mu, double l) {
    if (!(l > 1.0)) throw std::domain_error("h_l: require l > 1");
    if (mu < 0.0) throw std::domain_error("h_l: require mu >= 0");
    if (mu <= 1.0) return 1.0;
    if (mu > l) return 0.0;
    return 1.0 - std::log(mu) / std::log(l);
}

namespace detail {

// ln of  integral_0^L exp(kappa u - t e^u) w(u) du  with kappa > 0 and
// 0 <= w <= 1.  The exponent is concave with mode at ln(kappa/t); the
// domain is trimmed to where the exponent is within 100 of its maximum
// before handing off to the adaptive integrator.
template <class W>
double log_exp_integral(double kappa, double t, double L, W&& w, const Tolerance& tol) {
    auto g = [&](double u) { return kappa * u - t * std::exp(u); };
    double ustar = std::clamp(std::log(kappa / t), 0.0, L);
    const double gmax = g(ustar);
    const double cutoff = gmax - 100.0;
    auto bisect = [&](double inside, double outside) {
        for (int i = 0; i < 80; ++i) {
            double mid = 0.5 * (inside + outside);
            (g(mid) >= cutoff ? inside : outside) = mid;
        }
        return outside;
    };
    double ulo = g(0.0) >= cutoff ? 0.0 : bisect(ustar, 0.0);
    double uhi = g(L) >= cutoff ? L : bisect(ustar, L);
    if (!(ulo < uhi)) return kNegInf;
    Tolerance qt{1e-12, std::max(tol.rel_tol, 1e-11), tol.tail_mass};
    double integral =
        integrate([&](double u) { return std::exp(g(u) - gmax) * w(u); }, ulo, uhi, qt);
    if (!(integral > 0.0)) return kNegInf;
    return gmax + std::log(integral);
}

// ln of  integral_0^inf exp(-t mu) (t mu)^(z - c + shift) g_l(mu) dmu,
// split at mu = 1: a closed incomplete-gamma form on [0,1] where
// g_l = 1/2, and a log-variable quadrature on [1, l].
inline double log_weighted_moment(long z, double t, int shift, const BlythConfig& cfg) {
    const double p = static_cast<double>(z) - cfg.c + static_cast<double>(shift);
    const double L = std::log(cfg.l);
    // [0,1]: (1/(2t)) Gamma(p+1) P(p+1, t)
    double piece_a = -std::log(2.0 * t) + log_gamma(p + 1.0) +
                     log_regularized_lower_gamma(p + 1.0, t);
    // [1,l] in u = ln(mu): prefactor t^p, kernel exp((p+1)u - t e^u),
    // weight g_l(e^u) = (1/2)(1 - u/L)^2
    double piece_b = p * std::log(t) +
                     log_exp_integral(
                         p + 1.0, t, L,
                         [&](double u) {
                             double h = 1.0 - u / L;
                             return 0.5 * h * h;
                         },
                         cfg.tol);
    return log_sum_exp(piece_a, piece_b);
}

// ln of the magnitude of  integral exp(-t mu)(t mu)^(z+1-c) g_l'(mu) dmu;
// g_l' = -h_l/(mu log l) on (1,l), 0 elsewhere, so the integral is <= 0.
inline double log_correction_magnitude(long z, double t, const BlythConfig& cfg) {
    const double p1 = static_cast<double>(z) + 1.0 - cfg.c;
    const double L = std::log(cfg.l);
    return p1 * std::log(t) - std::log(L) +
           log_exp_integral(p1, t, L, [&](double u) { return 1.0 - u / L; }, cfg.tol);
}

}  // namespace detail

// the split integral  integral_0^inf exp(-t mu)(t mu)^(z - c + shift) g_l(mu) dmu
inline double weighted_moment(long z, double t, int shift, const BlythConfig& cfg) {
    if (z < 0) throw std::domain_error("weighted_moment: require z >= 0");
    if (!(t > 0.0)) throw std::domain_error("weighted_moment: require t > 0");
    if (shift != 0 && shift != 1) throw std::domain_error("weighted_moment: shift must be 0 or 1");
    return std::exp(detail::log_weighted_moment(z, t, shift, cfg));
}

// modified Bayes estimate (z+1-c)/t plus the negative g_l' correction
inline double mu_hat(long z, double t, const BlythConfig& cfg) {
    if (z < 0) throw std::domain_error("mu_hat: require z >= 0");
    if (!(t > 0.0)) throw std::domain_error("mu_hat: require t > 0");
    double log_m0 = detail::log_weighted_moment(z, t, 0, cfg);
    double log_corr = detail::log_correction_magnitude(z, t, cfg);
    double nu = (static_cast<double>(z) + 1.0 - cfg.c) / t;
    return nu - std::exp(log_corr - 2.0 * std::log(t) - log_m0);
}

// posterior-mean route: ratio of the shift-1 and shift-0 moments
inline double mu_hat_ratio(long z, double t, const BlythConfig& cfg) {
    double log_m0 = detail::log_weighted_moment(z, t, 0, cfg);
    double log_m1 = detail::log_weighted_moment(z, t, 1, cfg);
    return std::exp(log_m1 - log_m0) / t;
}

// analytic bound 2/((1-c) log l) (1/a - 1/(a+b))
inline double gap_upper_bound(const BlythConfig& cfg) {
    return 2.0 / ((1.0 - cfg.c) * std::log(cfg.l)) * (1.0 / cfg.a - 1.0 / (cfg.a + cfg.b));
}

namespace detail {

// Inner integrand of the gap at exposure t.  The mu-integral is pulled
// inside the z-series: each term becomes
//   t^c M0(z) / z! * (nu - mu_hat - mu_hat log(nu / mu_hat))
// with nu = (z+1-c)/t and mu_hat = M1/(t M0), all moments in log space.
inline double gap_inner(double t, const BlythConfig& cfg) {
    const long zmax = poisson_truncation(t * cfg.l, cfg.tol.tail_mass) + 20;
    const double log_t = std::log(t);
    long double acc = 0.0L;
    for (long z = 0; z <= zmax; ++z) {
        double log_m0 = log_weighted_moment(z, t, 0, cfg);
        double log_m1 = log_weighted_moment(z, t, 1, cfg);
        double muh = std::exp(log_m1 - log_m0) / t;
        double nu = (static_cast<double>(z) + 1.0 - cfg.c) / t;
        double kl = nu - muh - muh * std::log(nu / muh);
        double w = std::exp(cfg.c * log_t + log_m0 - log_gamma(static_cast<double>(z) + 1.0));
        acc += static_cast<long double>(w) * kl;
    }
    return static_cast<double>(acc);
}

}  // namespace detail

// Bayes-risk gap between the candidate predictive and the truncated-prior
// predictive, integrated over t in [a, a+b]; nonnegative by Bayes
// optimality of the truncated rule.
inline double bayes_risk_gap(const BlythConfig& cfg) {
    Tolerance outer{std::max(cfg.tol.abs_tol, 1e-9), std::max(cfg.tol.rel_tol, 1e-7),
                    cfg.tol.tail_mass};
    double gap = integrate([&](double t) { return detail::gap_inner(t, cfg); }, cfg.a,
                           cfg.a + cfg.b, outer);
    // roundoff-scale negatives only; genuine negatives would be a bug
    if (gap < 0.0 && gap >= -1e-13) gap = 0.0;
    return gap;
}

}  // namespace poispred

#endif  // POISPRED_BLYTH_HPP
