#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "frw/lifedata.hpp"
#include "frw/run_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int status;
    std::string out;
    std::string err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "frw_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result run(const std::string &args) {
    const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
    const std::string cmd =
        std::string(FRW_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

void write(const fs::path &p, const std::string &text) {
    std::ofstream out(p);
    out << text;
}

} // namespace

TEST_CASE("gen-weights prints n positive values summing to n") {
    const Result r = run("gen-weights --scheme dirichlet --n 15 --seed 4");
    REQUIRE(r.status == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "weight");
    double sum = 0;
    int n = 0;
    while (std::getline(in, line)) {
        const double v = std::stod(line);
        CHECK(v > 0);
        sum += v;
        ++n;
    }
    CHECK(n == 15);
    CHECK(sum == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("fit on the bundled rocket data") {
    const fs::path out = scratch() / "fit1";
    const Result r = run("fit --family weibull --data rocket_motor --out " + out.string());
    REQUIRE(r.status == 0);
    CHECK(r.out.find("21.228") != std::string::npos);
    CHECK(r.out.find("8.126") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(out / "fit.json"));
    const auto fit = frw::fit_from_json(j.at("fit"));
    CHECK(fit.params[0] == doctest::Approx(21.228).epsilon(5e-3));
    CHECK(fit.params[1] == doctest::Approx(8.126).epsilon(5e-3));
    CHECK(fs::exists(out / "config.json"));
}

TEST_CASE("errors are single-line with documented exit codes and no partial output") {
    const fs::path out = scratch() / "bad";
    Result r = run("fit --family weibull --data /no/such/file --out " + out.string());
    CHECK(r.status == 2);
    CHECK(r.err.find("error=input") != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    CHECK_FALSE(fs::exists(out));
    CHECK_FALSE(fs::exists(fs::path(out).concat(".partial")));

    r = run("fit --family weibull");
    CHECK(r.status == 2);
    CHECK(r.err.find("error=usage") != std::string::npos);

    const fs::path cens = scratch() / "censored.csv";
    write(cens, "time,kind\n1,right\n2,right\n");
    r = run("fit --family weibull --data " + cens.string() + " --out " + out.string());
    CHECK(r.status == 3);
    CHECK(r.err.find("error=numerical") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    // Resampling the rocket data produces many degenerate samples; strict mode refuses.
    r = run("bootstrap --family weibull --data rocket_motor --scheme multinomial --B 200 --strict --out " +
            out.string());
    CHECK(r.status == 4);
    CHECK(r.err.find("error=pathology") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("bootstrap outputs are deterministic and round trip") {
    const fs::path a = scratch() / "boot_a", b = scratch() / "boot_b";
    const std::string args = "bootstrap --family weibull --data rocket_motor --scheme dirichlet --B 150 --seed 7 "
                             "--levels 0.95,0.90,0.80,0.50 --out ";
    REQUIRE(run(args + a.string() + " --threads 1").status == 0);
    REQUIRE(run(args + b.string() + " --threads 3").status == 0);
    for (const char *f : {"run.json", "replicates.csv", "intervals.csv", "pathology.json", "histogram.csv",
                          "config.json"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const frw::BootstrapRun loaded = frw::load_run(a);
    std::ostringstream dump;
    frw::write_replicates_csv(dump, loaded);
    CHECK(dump.str() == slurp(a / "replicates.csv"));
    CHECK(loaded.replicates == 150);

    // Four nested intervals.
    std::istringstream in(slurp(a / "intervals.csv"));
    std::string line;
    std::getline(in, line);
    double lo = -1e300, hi = 1e300;
    int rows = 0;
    while (std::getline(in, line)) {
        const auto f = frw::split_fields(line);
        const double l = std::stod(f[3]), u = std::stod(f[4]);
        CHECK(l >= lo);
        CHECK(u <= hi);
        lo = l;
        hi = u;
        ++rows;
    }
    CHECK(rows == 4);

    // An existing output directory is never overwritten.
    CHECK(run(args + a.string()).status == 2);
}

TEST_CASE("predict from a saved run") {
    const fs::path run_dir = scratch() / "boot_pred";
    REQUIRE(run("bootstrap --family weibull --data rocket_motor --B 120 --out " + run_dir.string()).status == 0);
    const fs::path rs = scratch() / "risk.csv";
    write(rs, "unit_id,current_age\nA,4\nB,9\nC,16\n");
    const fs::path p1 = scratch() / "pred1", p2 = scratch() / "pred2";
    const std::string base = "predict --run " + run_dir.string() + " --risk-set " + rs.string() +
                             " --horizon 10 --steps 10 --level 0.9 --out ";
    REQUIRE(run(base + p1.string()).status == 0);
    REQUIRE(run(base + p2.string()).status == 0);
    CHECK(slurp(p1 / "curve.csv") == slurp(p2 / "curve.csv"));
    std::istringstream in(slurp(p1 / "curve.csv"));
    const auto curve = frw::read_curve_csv(in, 0.9);
    CHECK(curve.horizon_grid.size() == 11);
    const fs::path p3 = scratch() / "pred3";
    REQUIRE(run(base + p3.string() + " --unit C").status == 0);
    CHECK(slurp(p3 / "individual.csv").find("C,16,") != std::string::npos);
    CHECK(run("predict --run " + run_dir.string() + " --risk-set " + rs.string() + " --horizon 10").status == 2);
}

TEST_CASE("select writes proportions and coefficient tables") {
    const fs::path design = scratch() / "design.csv", response = scratch() / "y.csv";
    std::string d = "a,b\nlow,0,0\nhigh,1,1\n";
    std::string y = "y\n";
    const double xs[][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}, {0, 0.5}, {1, 0.5}, {0.5, 0}, {0.5, 1}};
    int i = 0;
    for (const auto &x : xs) {
        d += frw::format_double(x[0]) + "," + frw::format_double(x[1]) + "\n";
        y += frw::format_double(3 * (2 * x[0] - 1) + 0.05 * ((i++ % 3) - 1)) + "\n";
    }
    write(design, d);
    write(response, y);
    const fs::path out = scratch() / "sel";
    const Result r = run("select --design " + design.string() + " --response " + response.string() +
                         " --B 100 --seed 3 --out " + out.string());
    REQUIRE(r.status == 0);
    const std::string props = slurp(out / "proportions.csv");
    CHECK(props.rfind("term,proportion\na,1\n", 0) == 0);
    CHECK(slurp(out / "coefficients.csv").rfind("replicate_id,a,b,a*b,a^2,b^2\n", 0) == 0);
}
