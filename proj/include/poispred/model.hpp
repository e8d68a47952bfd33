// Domain types for the Poisson prediction problem: exposures, count
// vectors, the alpha/beta prior family with its reduction exponent c,
// and the closed-form log marginal likelihood.

#ifndef POISPRED_MODEL_HPP
#define POISPRED_MODEL_HPP

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "poispred/numerics.hpp"

namespace poispred {

class propriety_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct ModelConfig {
    int d;      // dimension
    double a;   // observed exposure
    double b;   // future exposure

    ModelConfig(int d_, double a_, double b_) : d(d_), a(a_), b(b_) {
        if (d < 1) throw std::domain_error("ModelConfig: require d >= 1");
        if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("ModelConfig: require a, b > 0");
    }
};

struct Counts {
    std::vector<long> values;
    long total = 0;

    Counts() = default;
    explicit Counts(std::vector<long> v) : values(std::move(v)) {
        for (long x : values) {
            if (x < 0) throw std::domain_error("Counts: entries must be nonnegative");
            total += x;
        }
    }

    std::size_t size() const { return values.size(); }
    long operator[](std::size_t i) const { return values[i]; }
};

// prior lambda_1^{b1-1}...lambda_d^{bd-1} / (sum lambda)^alpha,
// valid when -alpha + sum(beta) > 0; c = alpha - sum(beta) + 1 < 1.
struct PriorAlphaBeta {
    double alpha;
    std::vector<double> beta;
    double beta_sum;
    double c;
};

inline PriorAlphaBeta make_prior(double alpha, std::vector<double> beta) {
    if (beta.empty()) throw std::domain_error("make_prior: beta must be nonempty");
    double beta_sum = 0.0;
    for (double b : beta) {
        if (!(b > 0.0)) throw std::domain_error("make_prior: require all beta_i > 0");
        beta_sum += b;
    }
    if (!(-alpha + beta_sum > 0.0))
        throw propriety_error("make_prior: require -alpha + sum(beta) > 0 (posterior improper at x = 0)");
    return PriorAlphaBeta{alpha, std::move(beta), beta_sum, alpha - beta_sum + 1.0};
}

inline PriorAlphaBeta jeffreys(int d) {
    if (d < 1) throw std::domain_error("jeffreys: require d >= 1");
    return make_prior(0.0, std::vector<double>(d, 0.5));
}

inline PriorAlphaBeta shrinkage_s(int d) {
    if (d < 1) throw std::domain_error("shrinkage_s: require d >= 1");
    return make_prior(0.5 * d - 1.0, std::vector<double>(d, 0.5));
}

// the admissibility band 0 < -alpha + sum(beta) <= 1
inline bool in_admissible_class(const PriorAlphaBeta& prior) {
    double s = -prior.alpha + prior.beta_sum;
    return s > 0.0 && s <= 1.0;
}

struct MeanVector {
    std::vector<double> lambdas;
    double mu = 0.0;
    std::vector<double> weights;  // empty when mu == 0

    MeanVector() = default;
    explicit MeanVector(std::vector<double> l) : lambdas(std::move(l)) {
        for (double v : lambdas) {
            if (v < 0.0) throw std::domain_error("MeanVector: entries must be nonnegative");
            mu += v;
        }
        if (mu > 0.0) {
            weights.reserve(lambdas.size());
            for (double v : lambdas) weights.push_back(v / mu);
        }
    }
};

// log of  integral pi(lambda) prod_i exp(-a lambda_i)(a lambda_i)^{x_i} dlambda
//       = a^{alpha - sum(beta)} Gamma(sum x - alpha + sum beta) / Gamma(sum x + sum beta)
//         * prod_i Gamma(x_i + beta_i)
inline double log_marginal(const PriorAlphaBeta& prior, double a, const Counts& x) {
    if (!(a > 0.0)) throw std::domain_error("log_marginal: require a > 0");
    if (x.size() != prior.beta.size())
        throw std::domain_error("log_marginal: x length must match prior dimension");
    double xt = static_cast<double>(x.total);
    double lm = (prior.alpha - prior.beta_sum) * std::log(a);
    lm += log_gamma(xt - prior.alpha + prior.beta_sum) - log_gamma(xt + prior.beta_sum);
    for (std::size_t i = 0; i < x.size(); ++i)
        lm += log_gamma(static_cast<double>(x[i]) + prior.beta[i]);
    return lm;
}

}  // namespace poispred

#endif  // POISPRED_MODEL_HPP
