// Predictive distributions: the closed-form Bayesian predictive pmf for
// the alpha/beta prior family, its totals-only marginal, enumeration of
// high-coverage support tables, an exact posterior-based sampler, the
// shrinkage generalized Bayes estimate, the plug-in pmf, and the mixed
// totals-Bayes/split-plug-in pmf.

#ifndef POISPRED_PREDICTIVE_HPP
#define POISPRED_PREDICTIVE_HPP

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "poispred/model.hpp"
#include "poispred/numerics.hpp"

namespace poispred {

class guard_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PredictivePmfSpec {
    PriorAlphaBeta prior;
    ModelConfig model;
    Counts x;

    PredictivePmfSpec(PriorAlphaBeta p, ModelConfig m, Counts x_)
        : prior(std::move(p)), model(m), x(std::move(x_)) {
        if (static_cast<int>(prior.beta.size()) != model.d)
            throw std::domain_error("PredictivePmfSpec: prior dimension must match model.d");
        if (static_cast<int>(x.size()) != model.d)
            throw std::domain_error("PredictivePmfSpec: x length must match model.d");
    }
};

struct PlugInSpec {
    std::vector<double> lambda_hat;
    double b;

    PlugInSpec(std::vector<double> lh, double b_) : lambda_hat(std::move(lh)), b(b_) {
        if (!(b > 0.0)) throw std::domain_error("PlugInSpec: require b > 0");
        for (double v : lambda_hat)
            if (v < 0.0) throw std::domain_error("PlugInSpec: require lambda_hat >= 0");
    }

    // a zero component puts the plug-in outside the finite-risk class
    bool has_zero_component() const {
        for (double v : lambda_hat)
            if (v == 0.0) return true;
        return false;
    }
};

// log p(y|x) from the closed form: a/(a+b) and b/(a+b) powers times two
// Gamma ratios on totals and a per-coordinate Gamma ratio over y_j!.
inline double log_predictive_pmf(const PredictivePmfSpec& spec, const Counts& y) {
    if (y.size() != spec.x.size())
        throw std::domain_error("log_predictive_pmf: y length must match model.d");
    const double a = spec.model.a, b = spec.model.b;
    const double xt = static_cast<double>(spec.x.total);
    const double yt = static_cast<double>(y.total);
    const double s = spec.prior.beta_sum, alpha = spec.prior.alpha;
    double lp = (xt - alpha + s) * (std::log(a) - std::log(a + b)) +
                yt * (std::log(b) - std::log(a + b));
    lp += log_gamma(xt + yt - alpha + s) - log_gamma(xt - alpha + s);
    lp += log_gamma(xt + s) - log_gamma(xt + yt + s);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double bi = spec.prior.beta[i];
        double xi = static_cast<double>(spec.x[i]);
        double yi = static_cast<double>(y[i]);
        lp += log_gamma(xi + yi + bi) - log_gamma(xi + bi) - log_gamma(yi + 1.0);
    }
    return lp;
}

// totals marginal: negative-binomial-type pmf on y_total with reduction
// exponent c < 1
inline double log_total_predictive_pmf(double c, double a, double b, long x_total, long y_total) {
    if (!(c < 1.0)) throw std::domain_error("log_total_predictive_pmf: require c < 1");
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("log_total_predictive_pmf: require a, b > 0");
    if (x_total < 0 || y_total < 0)
        throw std::domain_error("log_total_predictive_pmf: totals must be nonnegative");
    double xt = static_cast<double>(x_total), yt = static_cast<double>(y_total);
    return (xt + 1.0 - c) * (std::log(a) - std::log(a + b)) +
           yt * (std::log(b) - std::log(a + b)) + log_gamma(xt + yt - c + 1.0) -
           log_gamma(xt - c + 1.0) - log_gamma(yt + 1.0);
}

namespace detail {

// all length-d nonnegative compositions of total, lexicographic order
inline void for_each_composition(int d, long total, std::vector<long>& buf, std::size_t pos,
                                 const std::function<void(const std::vector<long>&)>& fn) {
    if (pos + 1 == static_cast<std::size_t>(d)) {
        buf[pos] = total;
        fn(buf);
        return;
    }
    for (long v = 0; v <= total; ++v) {
        buf[pos] = v;
        for_each_composition(d, total - v, buf, pos + 1, fn);
    }
}

}  // namespace detail

// Finite support table with total mass >= coverage. Enumeration is by
// ascending total, then lexicographic within a total; the totals marginal
// has geometric-type tails so this order converges quickly.
inline std::vector<std::pair<Counts, double>> predictive_table(const PredictivePmfSpec& spec,
                                                               double coverage) {
    if (!(coverage > 0.0) || coverage > 1.0 - 1e-12)
        throw std::domain_error("predictive_table: require 0 < coverage <= 1 - 1e-12");
    constexpr std::size_t kMaxEntries = 10'000'000;
    std::vector<std::pair<Counts, double>> table;
    double log_mass = kNegInf;
    std::vector<long> buf(spec.model.d, 0);
    bool done = false;
    for (long total = 0; !done; ++total) {
        detail::for_each_composition(
            spec.model.d, total, buf, 0, [&](const std::vector<long>& y_vals) {
                if (done) return;
                Counts y(y_vals);
                double lp = log_predictive_pmf(spec, y);
                table.emplace_back(std::move(y), std::exp(lp));
                if (table.size() > kMaxEntries)
                    throw guard_error("predictive_table: support exceeds 1e7 entries");
                log_mass = log_sum_exp(log_mass, lp);
                if (std::exp(log_mass) >= coverage) done = true;
            });
        if (total > 1'000'000 && !done)
            throw guard_error("predictive_table: coverage not reached after 1e6 totals");
    }
    return table;
}

// Exact draws from the predictive: posterior factorizes as
// Gamma(x_total + 1 - c, a) on mu times Dirichlet(x_i + beta_i) on the
// weights; y is then product-Poisson with rates b * mu * w_i.
inline std::vector<Counts> sample_predictive(const PredictivePmfSpec& spec, long n,
                                             const RngStream& stream) {
    if (n < 0) throw std::domain_error("sample_predictive: require n >= 0");
    Rng rng(stream);
    const int d = spec.model.d;
    std::vector<double> dir_params(d);
    for (int i = 0; i < d; ++i)
        dir_params[i] = static_cast<double>(spec.x[i]) + spec.prior.beta[i];
    const double shape = static_cast<double>(spec.x.total) + 1.0 - spec.prior.c;
    std::vector<Counts> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) {
        double mu = sample_gamma(shape, spec.model.a, rng);
        std::vector<double> w = sample_dirichlet(dir_params, rng);
        std::vector<long> y(d);
        for (int i = 0; i < d; ++i) y[i] = sample_poisson(spec.model.b * mu * w[i], rng);
        out.emplace_back(std::move(y));
    }
    return out;
}

// generalized Bayes estimate under the shrinkage prior:
// lambda_i = (1/a) (sum x + 1)/(sum x + d/2) (x_i + 1/2)
inline std::vector<double> gb_estimate(const Counts& x, double a, int d) {
    if (static_cast<int>(x.size()) != d) throw std::domain_error("gb_estimate: x length must be d");
    if (!(a > 0.0)) throw std::domain_error("gb_estimate: require a > 0");
    double xt = static_cast<double>(x.total);
    double factor = (xt + 1.0) / ((xt + 0.5 * d) * a);
    std::vector<double> out(d);
    for (int i = 0; i < d; ++i) out[i] = factor * (static_cast<double>(x[i]) + 0.5);
    return out;
}

inline double log_plugin_pmf(const PlugInSpec& plug, const Counts& y) {
    if (y.size() != plug.lambda_hat.size())
        throw std::domain_error("log_plugin_pmf: y length must match lambda_hat");
    double lp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double term = log_poisson_pmf(y[i], plug.b * plug.lambda_hat[i]);
        if (term == kNegInf) return kNegInf;
        lp += term;
    }
    return lp;
}

// mixed predictive of the inadmissibility construction: shrinkage-prior
// totals marginal (c = 0) times a multinomial split at the plug-in weights
// w_i = (x_i + 1/2)/(sum x + d/2)
inline double log_mixed_pmf(const Counts& x, const Counts& y, const ModelConfig& model) {
    if (static_cast<int>(x.size()) != model.d || static_cast<int>(y.size()) != model.d)
        throw std::domain_error("log_mixed_pmf: lengths must match model.d");
    double lp = log_total_predictive_pmf(0.0, model.a, model.b, x.total, y.total);
    double denom = static_cast<double>(x.total) + 0.5 * model.d;
    double lmult = log_gamma(static_cast<double>(y.total) + 1.0);
    for (int i = 0; i < model.d; ++i) {
        double w = (static_cast<double>(x[i]) + 0.5) / denom;
        double yi = static_cast<double>(y[i]);
        lmult += yi * std::log(w) - log_gamma(yi + 1.0);
    }
    return lp + lmult;
}

}  // namespace poispred

#endif  // POISPRED_PREDICTIVE_HPP
