// Risk functionals under the Kullback-Leibler loss: coordinatewise Poisson
// KL, the exact one-dimensional totals-risk integral, the log-Gamma
// difference kernel and prior-vs-prior risk difference, the plug-in risk,
// the plug-in-minus-Bayes gap, Monte Carlo estimation over the full
// d-dimensional predictive, and a brute-force enumeration oracle.

#ifndef POISPRED_RISK_HPP
#define POISPRED_RISK_HPP

#include <cmath>
#include <string>
#include <vector>

#include "poispred/model.hpp"
#include "poispred/numerics.hpp"
#include "poispred/predictive.hpp"

namespace poispred {

enum class RiskMethod { exact_1d, brute_force, monte_carlo };

struct RiskEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 0 for deterministic methods
    RiskMethod method = RiskMethod::exact_1d;
    long n_samples = 0;
};

inline const char* risk_method_name(RiskMethod m) {
    switch (m) {
        case RiskMethod::exact_1d: return "exact-1d";
        case RiskMethod::brute_force: return "brute-force";
        default: return "monte-carlo";
    }
}

// sum_i b (lh_i - l_i - l_i log(lh_i / l_i)), with 0 log 0 = 0;
// +infinity when some l_i > 0 has lh_i = 0
inline double kl_poisson_vec(const MeanVector& lambda_true, const std::vector<double>& lambda_hat,
                             double b) {
    if (lambda_true.lambdas.size() != lambda_hat.size())
        throw std::domain_error("kl_poisson_vec: length mismatch");
    if (!(b > 0.0)) throw std::domain_error("kl_poisson_vec: require b > 0");
    double total = 0.0;
    for (std::size_t i = 0; i < lambda_hat.size(); ++i) {
        double l = lambda_true.lambdas[i], lh = lambda_hat[i];
        if (l == 0.0) {
            total += b * lh;
            continue;
        }
        if (lh == 0.0) return kPosInf;
        total += b * (lh - l - l * std::log(lh / l));
    }
    return total;
}

// integrand of the exact totals-risk integral at exposure t:
// E_{z ~ Poisson(t mu)}[(z+1-c)/t - mu - mu log((z+1-c)/(t mu))]
inline double totals_risk_integrand(double c, double t, double mu, const Tolerance& tol) {
    if (mu == 0.0) return (1.0 - c) / t;
    const double log_t_mu = std::log(t) + std::log(mu);
    return poisson_expectation(
        [&](long z) {
            double nu = (static_cast<double>(z) + 1.0 - c) / t;
            return nu - mu - mu * (std::log(static_cast<double>(z) + 1.0 - c) - log_t_mu);
        },
        t * mu, tol);
}

// E[D(p(y_total|mu), p_pi(y_total|x_total)) | mu] for the totals predictive
// with reduction exponent c; closed form (1-c) log((a+b)/a) at mu = 0
inline double exact_total_risk(double c, double a, double b, double mu, const Tolerance& tol = {}) {
    if (!(c < 1.0)) throw std::domain_error("exact_total_risk: require c < 1");
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("exact_total_risk: require a, b > 0");
    if (mu < 0.0) throw std::domain_error("exact_total_risk: require mu >= 0");
    if (mu == 0.0) return (1.0 - c) * std::log((a + b) / a);
    return integrate([&](double t) { return totals_risk_integrand(c, t, mu, tol); }, a,
                     a + b, tol);
}

// E[log Gamma(X+1+delta) - log Gamma(X+1) | mu] - delta log mu,
// X ~ Poisson(m); strictly decreasing in m
inline double lemma2_L(double m, double delta, const Tolerance& tol = {}) {
    if (!(m > 0.0)) throw std::domain_error("lemma2_L: require m > 0 (diverges at 0)");
    if (!(delta > 0.0)) throw std::domain_error("lemma2_L: require delta > 0");
    double e = poisson_expectation(
        [&](long k) {
            double kd = static_cast<double>(k);
            return log_gamma(kd + 1.0 + delta) - log_gamma(kd + 1.0);
        },
        m, tol);
    return e - delta * std::log(m);
}

// risk(dominated) - risk(dominating) for a prior pair separated by
// delta = alpha_tilde - alpha > 0; equals L(a mu) - L((a+b) mu) for mu > 0
inline double risk_difference(double delta, double a, double b, double mu,
                              const Tolerance& tol = {}) {
    if (!(delta > 0.0)) throw std::domain_error("risk_difference: require delta > 0");
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("risk_difference: require a, b > 0");
    if (mu < 0.0) throw std::domain_error("risk_difference: require mu >= 0");
    if (mu == 0.0) return delta * std::log((a + b) / a);
    return lemma2_L(a * mu, delta, tol) - lemma2_L((a + b) * mu, delta, tol);
}

// plug-in risk with mu_hat = (x_total + 1)/a; b/a at mu = 0
inline double plugin_total_risk(double a, double b, double mu, const Tolerance& tol = {}) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("plugin_total_risk: require a, b > 0");
    if (mu < 0.0) throw std::domain_error("plugin_total_risk: require mu >= 0");
    if (mu == 0.0) return b / a;
    const double log_a_mu = std::log(a) + std::log(mu);
    return b * poisson_expectation(
                   [&](long k) {
                       double muh = (static_cast<double>(k) + 1.0) / a;
                       return muh - mu - mu * (std::log(static_cast<double>(k) + 1.0) -
                                               log_a_mu);
                   },
                   a * mu, tol);
}

// plug-in risk minus the c = 0 totals-Bayes risk; positive for all mu >= 0
inline double theorem5_gap(double a, double b, double mu, const Tolerance& tol = {}) {
    return plugin_total_risk(a, b, mu, tol) - exact_total_risk(0.0, a, b, mu, tol);
}

namespace detail {

// E over y (independent Poisson(b lambda_i), totals Poisson(b mu)) of
// log p_pi(y|x).  Every term is a one-dimensional truncated expectation:
// the Gamma-ratio in the totals and the per-coordinate Gamma ratios.
inline double expected_log_predictive(const PriorAlphaBeta& prior, const ModelConfig& model,
                                      const MeanVector& lambda, const Counts& x,
                                      const Tolerance& y_tail) {
    const double a = model.a, b = model.b;
    const double xt = static_cast<double>(x.total);
    const double s = prior.beta_sum, alpha = prior.alpha;
    double v = (xt - alpha + s) * (std::log(a) - std::log(a + b)) +
               b * lambda.mu * (std::log(b) - std::log(a + b));
    v += -log_gamma(xt - alpha + s) + log_gamma(xt + s);
    v += poisson_expectation(
        [&](long yt) {
            double ytd = static_cast<double>(yt);
            return log_gamma(xt + ytd - alpha + s) - log_gamma(xt + ytd + s);
        },
        b * lambda.mu, y_tail);
    for (int i = 0; i < model.d; ++i) {
        double bi = prior.beta[i];
        double xi = static_cast<double>(x[i]);
        v -= log_gamma(xi + bi);
        v += poisson_expectation(
            [&](long y) {
                double yd = static_cast<double>(y);
                return log_gamma(xi + yd + bi) - log_gamma(yd + 1.0);
            },
            b * lambda.lambdas[i], y_tail);
    }
    return v;
}

// E over y of log p(y|lambda); separable across coordinates
inline double expected_log_true(const ModelConfig& model, const MeanVector& lambda,
                                const Tolerance& y_tail) {
    double v = 0.0;
    for (int i = 0; i < model.d; ++i) {
        double rate = model.b * lambda.lambdas[i];
        if (rate == 0.0) continue;  // degenerate coordinate contributes 0
        v += -rate + rate * std::log(rate);
        v -= poisson_expectation(
            [](long y) { return log_gamma(static_cast<double>(y) + 1.0); }, rate, y_tail);
    }
    return v;
}

struct Welford {
    long n = 0;
    double mean = 0.0, m2 = 0.0;
    void push(double v) {
        ++n;
        double d1 = v - mean;
        mean += d1 / static_cast<double>(n);
        m2 += d1 * (v - mean);
    }
    double std_error() const {
        return n > 1 ? std::sqrt(m2 / (static_cast<double>(n) * (n - 1.0))) : 0.0;
    }
};

}  // namespace detail

// Monte Carlo risk: x sampled from the model, the inner y-expectation of
// log(p(y|lambda)/p_pi(y|x)) computed exactly up to per-coordinate tail
// truncation.  Deterministic given the stream.
inline RiskEstimate mc_full_risk(const PriorAlphaBeta& prior, const ModelConfig& model,
                                 const MeanVector& lambda, long n, const RngStream& stream,
                                 const Tolerance& y_tail = {}) {
    if (n < 1) throw std::domain_error("mc_full_risk: require n >= 1");
    if (static_cast<int>(lambda.lambdas.size()) != model.d)
        throw std::domain_error("mc_full_risk: lambda length must match model.d");
    Rng rng(stream);
    const double entropy_term = detail::expected_log_true(model, lambda, y_tail);
    detail::Welford acc;
    std::vector<long> xv(model.d);
    for (long j = 0; j < n; ++j) {
        for (int i = 0; i < model.d; ++i)
            xv[i] = sample_poisson(model.a * lambda.lambdas[i], rng);
        Counts x(xv);
        acc.push(entropy_term - detail::expected_log_predictive(prior, model, lambda, x, y_tail));
    }
    return RiskEstimate{acc.mean, acc.std_error(), RiskMethod::monte_carlo, n};
}

// Paired Monte Carlo difference risk(prior_a) - risk(prior_b) on common x
// draws; the entropy term cancels and pairing collapses the variance.
inline RiskEstimate mc_risk_difference(const PriorAlphaBeta& prior_a, const PriorAlphaBeta& prior_b,
                                       const ModelConfig& model, const MeanVector& lambda, long n,
                                       const RngStream& stream, const Tolerance& y_tail = {}) {
    if (n < 1) throw std::domain_error("mc_risk_difference: require n >= 1");
    Rng rng(stream);
    detail::Welford acc;
    std::vector<long> xv(model.d);
    for (long j = 0; j < n; ++j) {
        for (int i = 0; i < model.d; ++i)
            xv[i] = sample_poisson(model.a * lambda.lambdas[i], rng);
        Counts x(xv);
        acc.push(detail::expected_log_predictive(prior_b, model, lambda, x, y_tail) -
                 detail::expected_log_predictive(prior_a, model, lambda, x, y_tail));
    }
    return RiskEstimate{acc.mean, acc.std_error(), RiskMethod::monte_carlo, n};
}

namespace detail {

// smallest K with P(Poisson(m) > K) <= tail by direct pmf summation
inline long quantile_window(double m, double tail) {
    if (m == 0.0) return 0;
    double p = std::exp(-m), cum = p;
    long k = 0;
    while (1.0 - cum > tail && k < 100000) {
        ++k;
        p *= m / static_cast<double>(k);
        cum += p;
    }
    return k;
}

inline void enumerate_grid(const std::vector<long>& limits, std::vector<long>& buf, std::size_t pos,
                           const std::function<void(const std::vector<long>&)>& fn) {
    if (pos == limits.size()) {
        fn(buf);
        return;
    }
    for (long v = 0; v <= limits[pos]; ++v) {
        buf[pos] = v;
        enumerate_grid(limits, buf, pos + 1, fn);
    }
}

}  // namespace detail

// Small-d enumeration oracle for the full risk: both x and y run over
// product windows whose per-coordinate tails are bounded so the discarded
// joint mass stays below tol.tail_mass.
inline double brute_full_risk(const PriorAlphaBeta& prior, const ModelConfig& model,
                              const MeanVector& lambda, const Tolerance& tol = {}) {
    if (model.d > 3)
        throw guard_error("brute_full_risk: d <= 3 required");
    if (model.a * lambda.mu > 30.0 || model.b * lambda.mu > 30.0)
        throw guard_error("brute_full_risk: a*mu and b*mu must be <= 30");
    if (static_cast<int>(lambda.lambdas.size()) != model.d)
        throw std::domain_error("brute_full_risk: lambda length must match model.d");
    const double per_coord_tail = tol.tail_mass / (2.0 * model.d);
    std::vector<long> x_lim(model.d), y_lim(model.d);
    for (int i = 0; i < model.d; ++i) {
        x_lim[i] = detail::quantile_window(model.a * lambda.lambdas[i], per_coord_tail);
        y_lim[i] = detail::quantile_window(model.b * lambda.lambdas[i], per_coord_tail);
    }
    double total = 0.0;
    std::vector<long> xbuf(model.d), ybuf(model.d);
    detail::enumerate_grid(x_lim, xbuf, 0, [&](const std::vector<long>& xv) {
        Counts x(xv);
        double log_px = 0.0;
        for (int i = 0; i < model.d; ++i)
            log_px += log_poisson_pmf(xv[i], model.a * lambda.lambdas[i]);
        double px = std::exp(log_px);
        if (px == 0.0) return;
        PredictivePmfSpec spec(prior, model, x);
        double inner = 0.0;
        detail::enumerate_grid(y_lim, ybuf, 0, [&](const std::vector<long>& yv) {
            double log_py = 0.0;
            for (int i = 0; i < model.d; ++i)
                log_py += log_poisson_pmf(yv[i], model.b * lambda.lambdas[i]);
            double py = std::exp(log_py);
            if (py == 0.0) return;
            inner += py * (log_py - log_predictive_pmf(spec, Counts(yv)));
        });
        total += px * inner;
    });
    return total;
}

}  // namespace poispred

#endif  // POISPRED_RISK_HPP
