// Experiment CLI: predictive tables and samples, the risk-difference
// figure grid, exact/Monte-Carlo/brute risk evaluation, the plug-in
// inadmissibility gap, the Blyth gap-vs-bound table, and the large-b
// asymptotics check.  All output embeds reproduction metadata; CSV and
// JSON only, everything controlled by flags.

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poispred/blyth.hpp"
#include "poispred/model.hpp"
#include "poispred/numerics.hpp"
#include "poispred/predictive.hpp"
#include "poispred/risk.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
using namespace poispred;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct Provenance {
    std::string command;
    std::vector<std::pair<std::string, std::string>> fields;

    std::string csv_header() const {
        std::ostringstream os;
        os << "# poispred " << command << "\n# version: " << kVersion << "\n";
        for (const auto& [k, v] : fields) os << "# " << k << ": " << v << "\n";
        os << "# timestamp: " << utc_timestamp() << "\n";
        return os.str();
    }

    json metadata() const {
        json m;
        m["tool"] = "poispred";
        m["command"] = command;
        m["version"] = kVersion;
        for (const auto& [k, v] : fields) m[k] = v;
        m["timestamp"] = utc_timestamp();
        return m;
    }
};

void write_output(const std::string& out, const std::string& content) {
    if (out == "-") {
        std::cout << content;
        return;
    }
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open output file: " + out);
    f << content;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw CLI::ValidationError("empty comma-list");
    return out;
}

std::vector<long> parse_long_list(const std::string& s) {
    std::vector<long> out;
    for (double v : parse_double_list(s)) out.push_back(static_cast<long>(v));
    return out;
}

// "lo:hi:step" inclusive grid
std::vector<double> parse_grid(const std::string& s) {
    double lo, hi, step;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3)
        throw CLI::ValidationError("grid must be lo:hi:step, got " + s);
    std::vector<double> g;
    if (hi < lo) throw CLI::ValidationError("grid: hi < lo");
    if (step <= 0.0) {
        g.push_back(lo);
        return g;
    }
    for (long i = 0;; ++i) {
        double v = lo + static_cast<double>(i) * step;
        if (v > hi + 0.5 * step) break;
        g.push_back(std::min(v, hi));
    }
    return g;
}

PriorAlphaBeta parse_prior(const std::string& spec, int d) {
    if (spec == "jeffreys") return jeffreys(d);
    if (spec == "shrinkage") return shrinkage_s(d);
    if (spec.rfind("custom:", 0) == 0) {
        auto rest = spec.substr(7);
        auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("custom prior must be custom:<alpha>:<beta1,...>");
        double alpha = std::stod(rest.substr(0, colon));
        auto beta = parse_double_list(rest.substr(colon + 1));
        if (static_cast<int>(beta.size()) != d)
            throw CLI::ValidationError("custom prior needs exactly d beta entries");
        return make_prior(alpha, beta);
    }
    throw CLI::ValidationError("unknown prior: " + spec +
                               " (expected jeffreys | shrinkage | custom:a:b1,...)");
}

// expectation-route risk difference extended to any delta > -1 (the
// figure command accepts d < 3 where delta = d/2 - 1 is zero or negative)
double risk_difference_signed(double delta, double a, double b, double mu, const Tolerance& tol) {
    if (delta == 0.0) return 0.0;
    if (delta > 0.0) return risk_difference(delta, a, b, mu, tol);
    if (mu == 0.0) return delta * std::log((a + b) / a);
    auto kernel = [&](double m) {
        return poisson_expectation(
                   [&](long k) {
                       double kd = static_cast<double>(k);
                       return log_gamma(kd + 1.0 + delta) - log_gamma(kd + 1.0);
                   },
                   m, tol) -
               delta * std::log(m);
    };
    return kernel(a * mu) - kernel((a + b) * mu);
}

// ---------------------------------------------------------------------------

int cmd_predict(int d, double a, double b, const std::string& prior_spec, const std::string& x_str,
                double coverage, long n_samples, std::uint64_t seed, const std::string& out,
                const std::string& format) {
    auto prior = parse_prior(prior_spec, d);
    Counts x(parse_long_list(x_str));
    if (static_cast<int>(x.size()) != d) throw CLI::ValidationError("--x needs exactly d entries");
    ModelConfig model(d, a, b);
    PredictivePmfSpec spec(prior, model, x);

    Provenance prov{"predict",
                    {{"d", std::to_string(d)},
                     {"a", fmt17(a)},
                     {"b", fmt17(b)},
                     {"prior", prior_spec},
                     {"x", x_str},
                     {"seed", std::to_string(seed)}}};

    if (n_samples >= 0) {
        auto samples = sample_predictive(spec, n_samples, RngStream{seed, 0});
        if (format == "json") {
            json j;
            j["metadata"] = prov.metadata();
            j["samples"] = json::array();
            for (const auto& s : samples) j["samples"].push_back(s.values);
            write_output(out, j.dump(2) + "\n");
        } else {
            std::ostringstream os;
            os << prov.csv_header();
            for (int i = 0; i < d; ++i) os << (i ? "," : "") << "y" << (i + 1);
            os << "\n";
            for (const auto& s : samples) {
                for (int i = 0; i < d; ++i) os << (i ? "," : "") << s[i];
                os << "\n";
            }
            write_output(out, os.str());
        }
        return 0;
    }

    auto table = predictive_table(spec, coverage);
    prov.fields.emplace_back("coverage", fmt17(coverage));
    if (format == "json") {
        json j;
        j["metadata"] = prov.metadata();
        j["table"] = json::array();
        for (const auto& [y, p] : table) j["table"].push_back({{"y", y.values}, {"p", p}});
        write_output(out, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << prov.csv_header();
        for (int i = 0; i < d; ++i) os << "y" << (i + 1) << ",";
        os << "probability\n";
        for (const auto& [y, p] : table) {
            for (int i = 0; i < d; ++i) os << y[i] << ",";
            os << fmt17(p) << "\n";
        }
        write_output(out, os.str());
    }
    return 0;
}

int cmd_figure1(const std::string& d_list, double a, double b, const std::string& grid_str,
                const std::string& out) {
    auto ds = parse_long_list(d_list);
    auto grid = parse_grid(grid_str);
    Tolerance tol;
    Provenance prov{"figure1",
                    {{"d", d_list}, {"a", fmt17(a)}, {"b", fmt17(b)}, {"mu-grid", grid_str}}};
    std::ostringstream os;
    os << prov.csv_header();
    for (long d : ds)
        if (d < 3)
            os << "# advisory: d = " << d << " < 3, domination is not guaranteed\n";
    os << "mu,d,delta\n";
    for (double mu : grid)
        for (long d : ds) {
            double delta = risk_difference_signed(0.5 * static_cast<double>(d) - 1.0, a, b, mu, tol);
            os << fmt17(mu) << "," << d << "," << fmt17(delta) << "\n";
        }
    write_output(out, os.str());
    return 0;
}

int cmd_risk(const std::string& method, int d, double a, double b, const std::string& prior_spec,
             const std::string& lambda_str, double mu, bool have_mu, long n, std::uint64_t seed,
             const std::string& out) {
    auto prior = parse_prior(prior_spec, d);
    ModelConfig model(d, a, b);
    Tolerance tol;
    RiskEstimate est;
    if (method == "exact") {
        double mu_val = mu;
        if (!have_mu) {
            if (lambda_str.empty())
                throw CLI::ValidationError("risk --method exact needs --mu or --lambda");
            mu_val = MeanVector(parse_double_list(lambda_str)).mu;
        }
        est = RiskEstimate{exact_total_risk(prior.c, a, b, mu_val, tol), 0.0,
                           RiskMethod::exact_1d, 0};
    } else {
        if (lambda_str.empty())
            throw CLI::ValidationError("risk --method " + method + " needs --lambda");
        MeanVector lambda(parse_double_list(lambda_str));
        if (static_cast<int>(lambda.lambdas.size()) != d)
            throw CLI::ValidationError("--lambda needs exactly d entries");
        if (method == "mc") {
            est = mc_full_risk(prior, model, lambda, n, RngStream{seed, 0}, tol);
        } else if (method == "brute") {
            est = RiskEstimate{brute_full_risk(prior, model, lambda, tol), 0.0,
                               RiskMethod::brute_force, 0};
        } else {
            throw CLI::ValidationError("unknown method: " + method);
        }
    }
    Provenance prov{"risk",
                    {{"method", method},
                     {"d", std::to_string(d)},
                     {"a", fmt17(a)},
                     {"b", fmt17(b)},
                     {"prior", prior_spec},
                     {"lambda", lambda_str.empty() ? "-" : lambda_str},
                     {"mu", have_mu ? fmt17(mu) : "-"},
                     {"n", std::to_string(n)},
                     {"seed", std::to_string(seed)}}};
    json j;
    j["metadata"] = prov.metadata();
    j["value"] = est.value;
    j["std_error"] = est.std_error;
    j["method"] = risk_method_name(est.method);
    j["n_samples"] = est.n_samples;
    write_output(out, j.dump(2) + "\n");
    return 0;
}

int cmd_theorem5(double a, double b, const std::string& grid_str, const std::string& out) {
    auto grid = parse_grid(grid_str);
    Tolerance tol;
    Provenance prov{"theorem5", {{"a", fmt17(a)}, {"b", fmt17(b)}, {"mu-grid", grid_str}}};
    std::ostringstream os;
    os << prov.csv_header() << "mu,plugin_risk,bayes_risk,gap\n";
    for (double mu : grid) {
        double plugin = plugin_total_risk(a, b, mu, tol);
        double bayes = exact_total_risk(0.0, a, b, mu, tol);
        os << fmt17(mu) << "," << fmt17(plugin) << "," << fmt17(bayes) << ","
           << fmt17(plugin - bayes) << "\n";
    }
    write_output(out, os.str());
    return 0;
}

int cmd_blyth(const std::string& l_list, double c, double a, double b, const std::string& out) {
    if (!(c >= 0.0 && c < 1.0)) throw CLI::ValidationError("--c must be in [0, 1)");
    auto ls = parse_double_list(l_list);
    Provenance prov{"blyth", {{"l", l_list}, {"c", fmt17(c)}, {"a", fmt17(a)}, {"b", fmt17(b)}}};
    std::ostringstream os;
    os << prov.csv_header() << "l,gap,bound,ratio\n";
    for (double l : ls) {
        BlythConfig cfg(l, c, a, b);
        double gap = bayes_risk_gap(cfg);
        double bound = gap_upper_bound(cfg);
        os << fmt17(l) << "," << fmt17(gap) << "," << fmt17(bound) << "," << fmt17(gap / bound)
           << "\n";
    }
    write_output(out, os.str());
    return 0;
}

int cmd_asymptotics(int d, double a, double mu, const std::string& b_list,
                    const std::string& out) {
    auto bs = parse_double_list(b_list);
    Tolerance tol;
    const double delta = 0.5 * static_cast<double>(d) - 1.0;
    Provenance prov{"asymptotics",
                    {{"d", std::to_string(d)}, {"a", fmt17(a)}, {"mu", fmt17(mu)},
                     {"b-grid", b_list}}};
    std::ostringstream os;
    os << prov.csv_header();
    double limit;
    if (mu == 0.0) {
        os << "# delta_limit: log-divergent (mu = 0, exact value (d/2-1) log((a+b)/a) per row)\n";
        limit = 0.0;
    } else {
        // independent route: Poisson expectation of the Stirling limit
        limit = poisson_expectation(
            [&](long k) {
                double kd = static_cast<double>(k);
                return log_gamma(kd + 0.5 * d) - log_gamma(kd + 1.0);
            },
            a * mu, tol) - 0.5 * (d - 2.0) * std::log(a * mu);
    }
    os << "b,delta,delta_limit,abs_err\n";
    for (double b : bs) {
        double dv = risk_difference_signed(delta, a, b, mu, tol);
        double lim = mu == 0.0 ? delta * std::log((a + b) / a) : limit;
        double err = mu == 0.0 ? 0.0 : std::fabs(dv - lim);
        os << fmt17(b) << "," << fmt17(dv) << "," << fmt17(lim) << "," << fmt17(err) << "\n";
    }
    write_output(out, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian predictive distributions for independent Poisson observables: "
                 "predictive pmfs, KL risks, and admissibility diagnostics"};
    app.require_subcommand(1);

    // predict
    auto* predict = app.add_subcommand("predict", "predictive pmf table or samples");
    int p_d = 1;
    double p_a = 1.0, p_b = 1.0, p_cov = -1.0;
    long p_n = -1;
    std::uint64_t p_seed = 0;
    std::string p_prior, p_x, p_out = "-", p_fmt = "csv";
    predict->add_option("--d", p_d, "dimension")->required();
    predict->add_option("--a", p_a, "observed exposure");
    predict->add_option("--b", p_b, "future exposure");
    predict->add_option("--prior", p_prior, "jeffreys | shrinkage | custom:<alpha>:<b1,...>")
        ->required();
    predict->add_option("--x", p_x, "observed counts, comma-list")->required();
    auto* cov_opt = predict->add_option("--table-coverage", p_cov, "emit table with this coverage");
    auto* n_opt = predict->add_option("--sample", p_n, "emit this many predictive samples");
    predict->add_option("--seed", p_seed, "RNG seed for --sample");
    predict->add_option("--out", p_out, "output path or - for stdout");
    predict->add_option("--format", p_fmt, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    cov_opt->excludes(n_opt);

    // figure1
    auto* figure1 = app.add_subcommand("figure1", "risk-difference curves over mu, per d");
    std::string f_d = "3,5,8,12", f_grid = "0:10:0.1", f_out = "-";
    double f_a = 1.0, f_b = 1.0;
    figure1->add_option("--d", f_d, "comma-list of dimensions");
    figure1->add_option("--a", f_a, "observed exposure");
    figure1->add_option("--b", f_b, "future exposure");
    figure1->add_option("--mu-grid", f_grid, "lo:hi:step");
    figure1->add_option("--out", f_out, "output path or -");

    // risk
    auto* risk = app.add_subcommand("risk", "single risk evaluation (JSON)");
    std::string r_method, r_prior, r_lambda, r_out = "-";
    int r_d = 1;
    double r_a = 1.0, r_b = 1.0, r_mu = 0.0;
    long r_n = 100000;
    std::uint64_t r_seed = 0;
    risk->add_option("--method", r_method, "exact | mc | brute")
        ->required()
        ->check(CLI::IsMember({"exact", "mc", "brute"}));
    risk->add_option("--d", r_d, "dimension")->required();
    risk->add_option("--a", r_a, "observed exposure");
    risk->add_option("--b", r_b, "future exposure");
    risk->add_option("--prior", r_prior, "prior spec")->required();
    risk->add_option("--lambda", r_lambda, "true mean vector, comma-list");
    auto* mu_opt = risk->add_option("--mu", r_mu, "true total mean (exact method)");
    risk->add_option("--n", r_n, "Monte Carlo sample count");
    risk->add_option("--seed", r_seed, "RNG seed");
    risk->add_option("--out", r_out, "output path or -");

    // theorem5
    auto* t5 = app.add_subcommand("theorem5", "plug-in vs Bayes totals risk over mu");
    double t_a = 1.0, t_b = 1.0;
    std::string t_grid = "0:10:0.25", t_out = "-";
    t5->add_option("--a", t_a, "observed exposure");
    t5->add_option("--b", t_b, "future exposure");
    t5->add_option("--mu-grid", t_grid, "lo:hi:step");
    t5->add_option("--out", t_out, "output path or -");

    // blyth
    auto* blyth = app.add_subcommand("blyth", "Bayes-risk gap vs analytic bound, per l");
    std::string bl_l, bl_out = "-";
    double bl_c = 0.0, bl_a = 1.0, bl_b = 1.0;
    blyth->add_option("--l", bl_l, "comma-list of truncation levels")->required();
    blyth->add_option("--c", bl_c, "reduction exponent in [0,1)");
    blyth->add_option("--a", bl_a, "observed exposure");
    blyth->add_option("--b", bl_b, "future exposure");
    blyth->add_option("--out", bl_out, "output path or -");

    // asymptotics
    auto* asy = app.add_subcommand("asymptotics", "large-b limit of the risk difference");
    int as_d = 3;
    double as_a = 1.0, as_mu = 1.0;
    std::string as_b = "1,10,100,1000,10000,100000,1000000", as_out = "-";
    asy->add_option("--d", as_d, "dimension");
    asy->add_option("--a", as_a, "observed exposure");
    asy->add_option("--mu", as_mu, "true total mean");
    asy->add_option("--b-grid", as_b, "comma-list of future exposures");
    asy->add_option("--out", as_out, "output path or -");

    try {
        app.parse(argc, argv);
        if (predict->parsed()) {
            if (p_cov < 0.0 && p_n < 0)
                throw CLI::ValidationError("predict needs --table-coverage or --sample");
            return cmd_predict(p_d, p_a, p_b, p_prior, p_x, p_cov, p_n, p_seed, p_out, p_fmt);
        }
        if (figure1->parsed()) return cmd_figure1(f_d, f_a, f_b, f_grid, f_out);
        if (risk->parsed())
            return cmd_risk(r_method, r_d, r_a, r_b, r_prior, r_lambda, r_mu,
                            mu_opt->count() > 0, r_n, r_seed, r_out);
        if (t5->parsed()) return cmd_theorem5(t_a, t_b, t_grid, t_out);
        if (blyth->parsed()) return cmd_blyth(bl_l, bl_c, bl_a, bl_b, bl_out);
        if (asy->parsed()) return cmd_asymptotics(as_d, as_a, as_mu, as_b, as_out);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const poispred::guard_error& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 3;
    } catch (const poispred::integration_error& e) {
        std::cerr << "numerical non-convergence: " << e.what()
                  << " (best estimate " << fmt17(e.best_estimate) << ", error estimate "
                  << fmt17(e.error_estimate) << ")\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
