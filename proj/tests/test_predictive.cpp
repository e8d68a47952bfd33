#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "poispred/model.hpp"
#include "poispred/numerics.hpp"
#include "poispred/predictive.hpp"

using namespace poispred;

namespace {

// Marginal-ratio route: predictive(y|x) as
//   [marginal(a+b, x+y) / marginal(a, x)] * prod_j a^{x_j} b^{y_j}
//     / ((a+b)^{x_j+y_j} y_j!)
// (log_marginal carries the (exposure * lambda)^count powers, which is
// what the a^x b^y / (a+b)^{x+y} factor rebalances).
double log_pred_via_marginal(const PriorAlphaBeta& prior, const ModelConfig& m, const Counts& x,
                             const Counts& y) {
    Counts xy([&] {
        std::vector<long> v(x.values);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += y[i];
        return v;
    }());
    double lp = log_marginal(prior, m.a + m.b, xy) - log_marginal(prior, m.a, x);
    for (std::size_t i = 0; i < y.size(); ++i) {
        lp += double(x[i]) * std::log(m.a) + double(y[i]) * std::log(m.b) -
              double(x[i] + y[i]) * std::log(m.a + m.b) - log_gamma(double(y[i]) + 1.0);
    }
    return lp;
}

}  // namespace

TEST_CASE("geometric anchor, d = 1") {
    PredictivePmfSpec spec(make_prior(0.0, {1.0}), ModelConfig(1, 1.0, 1.0), Counts({0}));
    CHECK(log_predictive_pmf(spec, Counts({0})) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-13));
    CHECK(log_predictive_pmf(spec, Counts({1})) ==
          doctest::Approx(std::log(0.25)).epsilon(1e-13));
    CHECK(log_predictive_pmf(spec, Counts({7})) ==
          doctest::Approx(std::log(std::pow(0.5, 8.0))).epsilon(1e-12));
}

TEST_CASE("predictive equals marginal-likelihood ratio route") {
    Rng rng(RngStream{555, 0});
    for (int trial = 0; trial < 12; ++trial) {
        int d = 1 + int(3.0 * rng.uniform());
        std::vector<double> beta(d);
        double bsum = 0.0;
        for (auto& v : beta) {
            v = 0.3 + 1.4 * rng.uniform();
            bsum += v;
        }
        double alpha = bsum - 0.1 - 0.85 * rng.uniform();
        auto prior = make_prior(alpha, beta);
        ModelConfig model(d, 0.5 + 2.0 * rng.uniform(), 0.5 + 2.0 * rng.uniform());
        std::vector<long> xv(d), yv(d);
        for (auto& v : xv) v = long(4.0 * rng.uniform());
        for (auto& v : yv) v = long(4.0 * rng.uniform());
        Counts x(xv), y(yv);
        PredictivePmfSpec spec(prior, model, x);
        double direct = log_predictive_pmf(spec, y);
        double ratio = log_pred_via_marginal(prior, model, x, y);
        CHECK(std::fabs(direct - ratio) <= 1e-10);
    }
}

TEST_CASE("totals marginal anchors") {
    for (long k : {0L, 1L, 5L})
        CHECK(log_total_predictive_pmf(0.0, 1.0, 1.0, 0, k) ==
              doctest::Approx(-(double(k) + 1.0) * std::log(2.0)).epsilon(1e-13));
    CHECK(log_total_predictive_pmf(-0.5, 1.0, 1.0, 0, 0) ==
          doctest::Approx(-1.5 * std::log(2.0)).epsilon(1e-13));
    CHECK(log_total_predictive_pmf(0.0, 1.0, 1.0, 2, 1) ==
          doctest::Approx(std::log(3.0 / 16.0)).epsilon(1e-13));
}

TEST_CASE("marginalization consistency for equal-beta priors") {
    Rng rng(RngStream{556, 0});
    for (int trial = 0; trial < 6; ++trial) {
        int d = 2 + int(2.0 * rng.uniform());
        auto prior = trial % 2 == 0 ? shrinkage_s(d) : jeffreys(d);
        ModelConfig model(d, 0.5 + 2.0 * rng.uniform(), 0.5 + 2.0 * rng.uniform());
        std::vector<long> xv(d);
        for (auto& v : xv) v = long(3.0 * rng.uniform());
        Counts x(xv);
        PredictivePmfSpec spec(prior, model, x);
        for (long ytot : {0L, 1L, 4L}) {
            double acc = poispred::kNegInf;
            std::vector<long> buf(d);
            detail::for_each_composition(d, ytot, buf, 0, [&](const std::vector<long>& y) {
                acc = log_sum_exp(acc, log_predictive_pmf(spec, Counts(y)));
            });
            double want = log_total_predictive_pmf(prior.c, model.a, model.b, x.total, ytot);
            CHECK(std::fabs(std::exp(acc) - std::exp(want)) <= 1e-10);
        }
    }
}

TEST_CASE("predictive_table geometric case and contracts") {
    PredictivePmfSpec spec(make_prior(0.0, {1.0}), ModelConfig(1, 1.0, 1.0), Counts({0}));
    auto table = predictive_table(spec, 0.75);
    REQUIRE(table.size() == 2);
    CHECK(table[0].first.values == std::vector<long>{0});
    CHECK(table[0].second == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(table[1].first.values == std::vector<long>{1});
    CHECK(table[1].second == doctest::Approx(0.25).epsilon(1e-12));

    // coverage contract + per-entry self-consistency
    PredictivePmfSpec spec2(shrinkage_s(2), ModelConfig(2, 1.0, 1.0), Counts({0, 0}));
    auto t2 = predictive_table(spec2, 0.99);
    double mass = 0.0;
    for (const auto& [y, p] : t2) {
        CHECK(p == doctest::Approx(std::exp(log_predictive_pmf(spec2, y))).epsilon(1e-12));
        mass += p;
    }
    CHECK(mass >= 0.99);
}

TEST_CASE("predictive_table normalization") {
    std::vector<PredictivePmfSpec> specs;
    specs.emplace_back(jeffreys(1), ModelConfig(1, 1.0, 1.0), Counts({2}));
    specs.emplace_back(shrinkage_s(2), ModelConfig(2, 2.0, 1.0), Counts({1, 0}));
    specs.emplace_back(jeffreys(3), ModelConfig(3, 1.0, 2.0), Counts({2, 0, 1}));
    for (const auto& s : specs) {
        auto t = predictive_table(s, 1.0 - 1e-10);
        long double mass = 0.0L;
        for (const auto& [y, p] : t) mass += p;
        CHECK(double(mass) >= 1.0 - 1e-8);
        CHECK(double(mass) <= 1.0 + 1e-12);
    }
}

TEST_CASE("predictive_table support guard") {
    // huge x forces an enormous support before reaching the coverage target
    PredictivePmfSpec spec(shrinkage_s(3), ModelConfig(3, 1e-3, 1e3), Counts({400, 400, 400}));
    CHECK_THROWS_AS(predictive_table(spec, 1.0 - 1e-12), guard_error);
}

TEST_CASE("sample_predictive determinism, empty case, zero-frequency oracle") {
    PredictivePmfSpec spec(shrinkage_s(2), ModelConfig(2, 1.0, 1.0), Counts({1, 0}));
    CHECK(sample_predictive(spec, 0, RngStream{1, 1}).empty());
    auto s1 = sample_predictive(spec, 50, RngStream{9, 4});
    auto s2 = sample_predictive(spec, 50, RngStream{9, 4});
    REQUIRE(s1.size() == 50);
    bool identical = true;
    for (int i = 0; i < 50; ++i) identical = identical && (s1[i].values == s2[i].values);
    CHECK(identical);

    const long n = 100000;
    auto draws = sample_predictive(spec, n, RngStream{11, 0});
    long zeros = 0;
    for (const auto& y : draws)
        if (y.total == 0) ++zeros;
    double p0 = std::exp(log_predictive_pmf(spec, Counts({0, 0})));
    double se = std::sqrt(p0 * (1.0 - p0) / double(n));
    CHECK(std::fabs(double(zeros) / double(n) - p0) <= 4.0 * se);
}

TEST_CASE("gb_estimate") {
    auto e1 = gb_estimate(Counts({0, 0, 0}), 1.0, 3);
    for (double v : e1) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    auto e2 = gb_estimate(Counts({2, 0, 1}), 1.0, 3);
    CHECK(e2[0] == doctest::Approx(20.0 / 9.0).epsilon(1e-14));
    CHECK(e2[1] == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    CHECK(e2[2] == doctest::Approx(12.0 / 9.0).epsilon(1e-14));
    auto e3 = gb_estimate(Counts({2, 0, 1}), 2.0, 3);
    CHECK(e3[0] == doctest::Approx(10.0 / 9.0).epsilon(1e-14));
    // sum identity: (total + 1)/a, components strictly positive
    Rng rng(RngStream{77, 0});
    for (int trial = 0; trial < 8; ++trial) {
        int d = 1 + int(4.0 * rng.uniform());
        std::vector<long> xv(d);
        for (auto& v : xv) v = long(6.0 * rng.uniform());
        double a = 0.3 + 3.0 * rng.uniform();
        Counts x(xv);
        auto est = gb_estimate(x, a, d);
        double sum = 0.0;
        for (double v : est) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(double(x.total + 1) / a).epsilon(1e-13));
    }
}

TEST_CASE("log_plugin_pmf") {
    CHECK(log_plugin_pmf(PlugInSpec{{1.0}, 1.0}, Counts({0})) ==
          doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(log_plugin_pmf(PlugInSpec{{0.0}, 1.0}, Counts({1})) ==
          -std::numeric_limits<double>::infinity());
    CHECK(log_plugin_pmf(PlugInSpec{{1.0, 2.0}, 1.0}, Counts({1, 0})) ==
          doctest::Approx(-3.0).epsilon(1e-13));
    CHECK(PlugInSpec{{0.0, 1.0}, 1.0}.has_zero_component());
    CHECK_FALSE(PlugInSpec{{0.5, 1.0}, 1.0}.has_zero_component());
}

TEST_CASE("log_mixed_pmf anchors and normalization") {
    ModelConfig m2(2, 1.0, 1.0);
    CHECK(log_mixed_pmf(Counts({0, 0}), Counts({0, 0}), m2) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-13));
    CHECK(log_mixed_pmf(Counts({0, 0}), Counts({1, 0}), m2) ==
          doctest::Approx(std::log(0.125)).epsilon(1e-13));

    ModelConfig m3(3, 1.0, 2.0);
    Counts x({1, 0, 0});
    // totals tail decays like (b/(a+b))^ytot = (2/3)^ytot, so reaching
    // 1e-10 residual mass needs totals beyond 100
    long double mass = 0.0L;
    for (long ytot = 0; ytot <= 120; ++ytot) {
        std::vector<long> buf(3);
        detail::for_each_composition(3, ytot, buf, 0, [&](const std::vector<long>& y) {
            mass += std::exp((long double)log_mixed_pmf(x, Counts(y), m3));
        });
    }
    CHECK(double(mass) >= 1.0 - 1e-10);
    CHECK(double(mass) <= 1.0 + 1e-12);
}
