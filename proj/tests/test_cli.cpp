#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "toric/cli_registry.hpp"

#ifndef TORIC_CLI_PATH
#define TORIC_CLI_PATH "./toric-spectra"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout only
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(TORIC_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    while (size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/toric_cli_") + name;
    std::ofstream f(path);
    f << content;
    return path;
}

const char* kInterval = R"({"dim":1,"facets":[{"normal":[-1],"offset":0},{"normal":[1],"offset":1}]})";
const char* kSimplex2 = R"({"dim":2,"facets":[{"normal":[-1,0],"offset":0},{"normal":[0,-1],"offset":0},{"normal":[1,1],"offset":1}]})";
const char* kSquare = R"({"dim":2,"facets":[{"normal":[-1,0],"offset":0},{"normal":[0,-1],"offset":0},{"normal":[1,0],"offset":1},{"normal":[0,1],"offset":1}]})";
const char* kBadTriangle = R"({"dim":2,"facets":[{"normal":[-1,0],"offset":0},{"normal":[0,-1],"offset":0},{"normal":[1,2],"offset":2}]})";

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("every engine operation is reachable from a subcommand") {
    std::set<std::string> covered;
    for (const auto& sub : toric::cli::subcommand_table())
        covered.insert(sub.operations.begin(), sub.operations.end());
    for (const auto& op : toric::cli::all_operations()) {
        INFO("operation: " << op);
        CHECK(covered.count(op) == 1);
    }
}

TEST_CASE("validate accepts the simplex and reports its shape") {
    auto path = write_temp("simplex2.json", kSimplex2);
    auto r = run_cli("validate --polytope " + path);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("# delzant=true") != std::string::npos);
    CHECK(r.output.find("# vertices=3") != std::string::npos);
}

TEST_CASE("validate rejects a non-Delzant polytope with exit 2") {
    auto path = write_temp("bad.json", kBadTriangle);
    auto r = run_cli("validate --polytope " + path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("unknown flags exit with the usage code") {
    auto path = write_temp("interval.json", kInterval);
    auto r = run_cli("validate --polytope " + path + " --no-such-flag");
    CHECK(r.exit_code == 4);
    auto r2 = run_cli("no-such-subcommand");
    CHECK(r2.exit_code == 4);
}

TEST_CASE("density emits the constant Bernstein density") {
    auto path = write_temp("interval.json", kInterval);
    auto r = run_cli("density --polytope " + path + " --N 10 --grid 101");
    CHECK(r.exit_code == 0);
    auto rows = csv_rows(r.output);
    REQUIRE(rows.size() == 102);  // header + 101 samples
    CHECK(rows[0] == std::vector<std::string>{"y0", "density"});
    for (size_t i = 1; i < rows.size(); ++i) {
        double v = std::stod(rows[i][1]);
        CHECK(std::abs(v - 11.0) < 1e-6);
    }
}

TEST_CASE("em-check on the square at order 2") {
    auto path = write_temp("square.json", kSquare);
    auto r = run_cli("em-check --polytope " + path + " --f poly:1 --N 4 --order 2");
    CHECK(r.exit_code == 0);
    auto rows = csv_rows(r.output);
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][2]) == Catch::Approx(25.0 / 16.0).epsilon(1e-12));
    CHECK(std::stod(rows[1][4]) < 1e-9);  // |riemann - em|
}

TEST_CASE("transform matches the Beta oracle through the CLI") {
    auto path = write_temp("interval.json", kInterval);
    auto r = run_cli("transform --polytope " + path + " --N 10 --f poly:x0 --x 0.3 --tol 1e-12");
    CHECK(r.exit_code == 0);
    auto rows = csv_rows(r.output);
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][1]) == Catch::Approx(4.0 / 12.0).margin(1e-9));
}

TEST_CASE("lattice counts points") {
    auto path = write_temp("square.json", kSquare);
    auto r = run_cli("lattice --polytope " + path + " --N 10");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("# count=121") != std::string::npos);
    CHECK(csv_rows(r.output).size() == 122);
}

TEST_CASE("identical invocations produce byte-identical output") {
    auto path = write_temp("simplex2.json", kSimplex2);
    std::string args = "density --polytope " + path + " --N 4 --grid 11";
    auto a = run_cli(args);
    auto b = run_cli(args);
    CHECK(a.exit_code == 0);
    CHECK(a.output == b.output);
    CHECK(a.output.find("generated_at") == std::string::npos);
    auto c = run_cli(args + " --stamp");
    CHECK(c.output.find("generated_at") != std::string::npos);
}

TEST_CASE("json output carries the same table") {
    auto path = write_temp("interval.json", kInterval);
    auto r = run_cli("moments --polytope " + path +
                     " --N 20 --k 10 --m-list 1,2 --laplace --format json");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"meta\"") != std::string::npos);
    CHECK(r.output.find("\"laplace_ratio\"") != std::string::npos);
}

TEST_CASE("kernel-eval reports the argmax certificate") {
    auto path = write_temp("interval.json", kInterval);
    auto r = run_cli("kernel-eval --polytope " + path +
                     " --N 6 --x 0.4 --y 0.5 --k 3 --asymptotic");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("argmax_gradient_norm") != std::string::npos);
    CHECK(r.output.find("section_norm") != std::string::npos);
}

TEST_CASE("pinch and localize run end to end") {
    auto path = write_temp("interval.json", kInterval);
    auto r = run_cli("pinch --polytope " + path +
                     " --k 10 --N-base 20 --delta 0.25 --multipliers 1,2");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("sigma0") != std::string::npos);

    auto r2 = run_cli("localize --polytope " + path +
                      " --x 0.5 --g-center 0.05 --g-radius 0.05 --N-grid 20,40,60");
    CHECK(r2.exit_code == 0);
    CHECK(r2.output.find("slope") != std::string::npos);

    auto r3 = run_cli("expand --orthant 1 --f poly:x0^2 --x 1.0 --order 2 "
                      "--N-grid 20,28,40,57,80");
    CHECK(r3.exit_code == 0);
    CHECK(r3.output.find("model_P1") != std::string::npos);

    auto r4 = run_cli("pair --polytope " + path + " --N 6 --f poly:1");
    CHECK(r4.exit_code == 0);
    auto rows = csv_rows(r4.output);
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][1]) == Catch::Approx(7.0).margin(1e-6));

    auto r5 = run_cli("distribution --polytope " + path + " --N 2 --k 1 --t-grid 0.000001,1.0");
    CHECK(r5.exit_code == 0);
    auto rows5 = csv_rows(r5.output);
    REQUIRE(rows5.size() == 3);
    CHECK(std::stod(rows5[1][1]) == Catch::Approx(1.0).margin(1e-5));
    CHECK(std::stod(rows5[2][1]) == Catch::Approx(std::sqrt(3.0) / 3.0).margin(1e-4));
}
