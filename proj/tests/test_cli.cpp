#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

const std::string kCli = POISPRED_CLI_PATH;

int run(const std::string& args) {
    int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// output with the timestamp line removed, for determinism comparisons
std::string without_timestamp(const std::string& s) {
    std::istringstream is(s);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line))
        if (line.find("timestamp") == std::string::npos) os << line << "\n";
    return os.str();
}

struct Csv {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Csv parse_csv(const std::string& content) {
    Csv out;
    std::istringstream is(content);
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            out.comments.push_back(line);
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!header_seen) {
            out.header = cells;
            header_seen = true;
        } else {
            out.rows.push_back(cells);
        }
    }
    return out;
}

std::string tmp_path(const std::string& stem) {
    return std::string("/tmp/poispred_clitest_") + stem;
}

}  // namespace

TEST_CASE("predict: geometric table rows") {
    auto p = tmp_path("geom.csv");
    REQUIRE(run("predict --d 1 --a 1 --b 1 --prior custom:0:1 --x 0 --table-coverage 0.75 --out " +
                p) == 0);
    auto csv = parse_csv(slurp(p));
    REQUIRE(csv.rows.size() == 2);
    CHECK(csv.rows[0][0] == "0");
    CHECK(std::stod(csv.rows[0][1]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(csv.rows[1][0] == "1");
    CHECK(std::stod(csv.rows[1][1]) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("predict: coverage contract with shrinkage prior") {
    auto p = tmp_path("cov.csv");
    REQUIRE(run("predict --d 3 --prior shrinkage --x 2,0,1 --a 1 --b 1 --table-coverage 0.99 "
                "--out " + p) == 0);
    auto csv = parse_csv(slurp(p));
    double mass = 0.0;
    for (const auto& r : csv.rows) mass += std::stod(r[3]);
    CHECK(mass >= 0.99);
}

TEST_CASE("figure1: mu = 0 closed forms and advisory for d < 3") {
    auto p = tmp_path("fig1.csv");
    REQUIRE(run("figure1 --d 2,3,12 --mu-grid 0:0:1 --out " + p) == 0);
    auto csv = parse_csv(slurp(p));
    bool advisory = false;
    for (const auto& c : csv.comments) advisory = advisory || c.find("advisory") != std::string::npos;
    CHECK(advisory);
    REQUIRE(csv.rows.size() == 3);
    CHECK(std::stod(csv.rows[0][2]) == doctest::Approx(0.0).epsilon(1e-14));  // d = 2
    CHECK(std::stod(csv.rows[1][2]) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-13));  // d = 3
    CHECK(std::stod(csv.rows[2][2]) ==
          doctest::Approx(5.0 * std::log(2.0)).epsilon(1e-13));  // d = 12
}

TEST_CASE("risk: exact closed form, mc brackets exact, brute matches") {
    auto p = tmp_path("riskx.json");
    REQUIRE(run("risk --method exact --prior shrinkage --d 3 --a 1 --b 1 --mu 0 --out " + p) == 0);
    auto body = slurp(p);
    CHECK(body.find("\"method\": \"exact-1d\"") != std::string::npos);
    auto at = body.find("\"value\":");
    REQUIRE(at != std::string::npos);
    CHECK(std::stod(body.substr(at + 8)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    auto pb = tmp_path("riskb.json");
    REQUIRE(run("risk --method brute --prior custom:0:1 --d 1 --a 1 --b 1 --lambda 1 --out " +
                pb) == 0);
    auto bb = slurp(pb);
    auto bat = bb.find("\"value\":");
    REQUIRE(bat != std::string::npos);
    double brute = std::stod(bb.substr(bat + 8));

    auto px = tmp_path("riskx1.json");
    REQUIRE(run("risk --method exact --prior custom:0:1 --d 1 --a 1 --b 1 --mu 1 --out " + px) ==
            0);
    auto xb = slurp(px);
    double exact = std::stod(xb.substr(xb.find("\"value\":") + 8));
    CHECK(std::fabs(brute - exact) <= 1e-8);

    auto pm = tmp_path("riskm.json");
    REQUIRE(run("risk --method mc --prior custom:0:1 --d 1 --a 1 --b 1 --lambda 1 --n 20000 "
                "--seed 7 --out " + pm) == 0);
    auto mb = slurp(pm);
    double mc = std::stod(mb.substr(mb.find("\"value\":") + 8));
    double se = std::stod(mb.substr(mb.find("\"std_error\":") + 12));
    CHECK(std::fabs(mc - exact) <= 4.0 * se);
}

TEST_CASE("theorem5: closed-form row and internal consistency") {
    auto p = tmp_path("t5.csv");
    REQUIRE(run("theorem5 --a 1 --b 1 --mu-grid 0:1:1 --out " + p) == 0);
    auto csv = parse_csv(slurp(p));
    REQUIRE(csv.rows.size() == 2);
    CHECK(std::stod(csv.rows[0][1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::stod(csv.rows[0][2]) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    for (const auto& r : csv.rows) {
        CHECK(std::stod(r[3]) > 0.0);
        CHECK(std::stod(r[3]) ==
              doctest::Approx(std::stod(r[1]) - std::stod(r[2])).epsilon(1e-12));
    }
}

TEST_CASE("blyth: bound column closed form, gap <= bound") {
    auto p = tmp_path("blyth.csv");
    char cmd[256];
    std::snprintf(cmd, sizeof(cmd), "blyth --l %.17g,10 --c 0 --a 1 --b 1 --out %s",
                  std::exp(1.0), p.c_str());
    REQUIRE(run(cmd) == 0);
    auto csv = parse_csv(slurp(p));
    REQUIRE(csv.rows.size() == 2);
    CHECK(std::stod(csv.rows[0][2]) == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& r : csv.rows) CHECK(std::stod(r[1]) <= std::stod(r[2]));
}

TEST_CASE("asymptotics: mu = 0 exact branch flagged log-divergent") {
    auto p = tmp_path("asym0.csv");
    REQUIRE(run("asymptotics --d 3 --a 1 --mu 0 --b-grid 1,3 --out " + p) == 0);
    auto content = slurp(p);
    CHECK(content.find("log-divergent") != std::string::npos);
    auto csv = parse_csv(content);
    REQUIRE(csv.rows.size() == 2);
    CHECK(std::stod(csv.rows[0][1]) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-13));
    CHECK(std::stod(csv.rows[1][1]) == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-13));
}

TEST_CASE("exit codes") {
    CHECK(run("predict --d 1 --prior nosuch --x 0 --table-coverage 0.5") == 2);
    CHECK(run("predict --d 2 --prior custom:0:1 --x 0,0 --table-coverage 0.5") == 2);  // arity
    CHECK(run("predict --d 1 --prior custom:0:1 --x 0") == 2);  // no mode selected
    CHECK(run("blyth --l 10 --c 1.5") == 2);
    CHECK(run("nosuchcommand") != 0);
    // brute-force guard refusal
    CHECK(run("risk --method brute --prior shrinkage --d 3 --a 1 --b 1 --lambda 20,20,20") == 3);
    // propriety violation in a custom prior
    CHECK(run("figure1 --d 3 --mu-grid 0:0:1 --out /nonexistent-dir/x.csv") == 2);
    CHECK(run("predict --d 2 --prior custom:5:0.5,0.5 --x 0,0 --table-coverage 0.5") == 2);
}

TEST_CASE("determinism: identical output modulo timestamp") {
    struct Cmd {
        const char* stem;
        std::string args;
    };
    std::vector<Cmd> cmds = {
        {"det_predict", "predict --d 2 --prior shrinkage --x 1,0 --sample 20 --seed 42"},
        {"det_table", "predict --d 1 --prior jeffreys --x 2 --table-coverage 0.9"},
        {"det_fig", "figure1 --d 3,5 --mu-grid 0:1:0.5"},
        {"det_risk", "risk --method mc --prior shrinkage --d 2 --lambda 0.5,0.5 --n 2000 --seed 3"},
        {"det_t5", "theorem5 --mu-grid 0:1:0.5"},
        {"det_blyth", "blyth --l 10 --c 0.5"},
        {"det_asym", "asymptotics --d 3 --b-grid 1,10"},
    };
    for (const auto& c : cmds) {
        auto p1 = tmp_path(std::string(c.stem) + "_1");
        auto p2 = tmp_path(std::string(c.stem) + "_2");
        REQUIRE(run(c.args + " --out " + p1) == 0);
        REQUIRE(run(c.args + " --out " + p2) == 0);
        CHECK(without_timestamp(slurp(p1)) == without_timestamp(slurp(p2)));
        CHECK(!slurp(p1).empty());
    }
}
