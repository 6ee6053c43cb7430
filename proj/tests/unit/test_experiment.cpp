#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "llq/error.hpp"
#include "llq/experiment.hpp"
#include "llq/output.hpp"

using namespace llq;
using namespace llq::experiment;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("llq_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ExperimentConfig tiny_quench() {
    ExperimentConfig c = defaults(Scenario::Quench);
    c.n_particles = 2;
    c.n_sites = 40;
    c.policy.chi_max = 16;
    c.t_final = 0.004;
    c.dt = 0.5;
    c.snapshot_periods = {0.0, 0.1};
    return c;
}

}  // namespace

TEST_CASE("scenario names round-trip") {
    for (auto s : {Scenario::Spectrum, Scenario::Quench, Scenario::TwoParticle, Scenario::Validate})
        CHECK(parse_scenario(to_string(s)) == s);
    CHECK_THROWS_AS(parse_scenario("relax"), ConfigError);
}

TEST_CASE("defaults") {
    auto q = defaults(Scenario::Quench);
    CHECK(q.n_particles == 6);
    CHECK(q.n_sites == 256);
    CHECK(q.gamma == kDeskGamma);
    CHECK_NOTHROW(q.validate());
    auto big = defaults(Scenario::Quench, true);
    CHECK(big.n_particles == 18);
    CHECK(big.n_sites == 1280);
    CHECK(big.policy.chi_max == 100);
    CHECK_NOTHROW(big.validate());
    auto tp = defaults(Scenario::TwoParticle);
    CHECK(tp.gamma == kTwoParticleGamma);
    CHECK(q.box() == doctest::Approx(2.5 * std::sqrt(12.0)));
}

TEST_CASE("config parsing lays fields over the defaults") {
    json j = json::parse(R"({
        "scenario": "quench",
        "physics": {"n_particles": 4, "gamma": -30.0},
        "lattice": {"n_sites": 128},
        "evolution": {"dt": 0.1, "t_final": 0.01, "preparation": "imaginary"},
        "truncation": {"chi_max": 24},
        "seed": 7
    })");
    auto c = from_json(j);
    CHECK(c.n_particles == 4);
    CHECK(c.gamma == -30.0);
    CHECK(c.n_sites == 128);
    CHECK(c.n_max == 4);
    CHECK(c.dt == 0.1);
    CHECK(c.preparation == Preparation::Imaginary);
    CHECK(c.policy.chi_max == 24);
    CHECK(c.seed == 7u);
    // echo parses back to the same configuration
    auto again = from_json(c.to_json());
    CHECK(again.to_json() == c.to_json());
}

TEST_CASE("overrides take precedence over the document") {
    json j = json::parse(R"({"scenario": "quench", "paper_scale": false})");
    auto c = from_json(j, Scenario::Spectrum, true);
    CHECK(c.scenario == Scenario::Spectrum);
    CHECK(c.paper_scale);
    CHECK(c.n_sites == 1280);
}

TEST_CASE("config errors name the field") {
    auto expect_error = [](const char* text, const std::string& field) {
        json j = json::parse(text);
        try {
            auto c = from_json(j);
            c.validate();
            FAIL("no error for " << text);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    expect_error(R"({"physics": {"gama": -3}})", "physics.gama");
    expect_error(R"({"bogus": 1})", "bogus");
    expect_error(R"({"physics": {"n_particles": "six"}})", "physics.n_particles");
    expect_error(R"({"lattice": {"n_sites": 20}})", "lattice.n_sites");
    expect_error(R"({"evolution": {"dt": -1}})", "evolution.dt");
    expect_error(R"({"evolution": {"preparation": "magic"}})", "evolution.preparation");
    expect_error(R"({"truncation": {"chi_max": 0}})", "truncation.chi_max");
    expect_error(R"({"scenario": "two-particle", "physics": {"gamma": 3}})", "physics.gamma");
    expect_error(R"({"scenario": "nope"})", "scenario");
    CHECK_THROWS_AS(from_json(json::array()), ConfigError);
}

TEST_CASE("pair period") {
    CHECK(std::isnan(pair_period(1.0)));
    CHECK(pair_period(-50.0) > 0.0);
    CHECK(pair_period(-1e3) == doctest::Approx(2.0 * 3.14159265358979 / 1e6).epsilon(1e-3));
}

TEST_CASE("csv writer format") {
    auto dir = scratch("csv");
    {
        out::CsvWriter w(dir / "a.csv", {"x", "y"});
        w.row({0.0, 1.0 / 3.0});
        w.row({-0.0, std::nan("")});
        CHECK_THROWS_AS(w.row({1.0}), std::invalid_argument);
    }
    CHECK(slurp(dir / "a.csv") == "x,y\n0,0.333333333333\n0,\n");
    auto t = out::read_csv(dir / "a.csv");
    CHECK(t.header == std::vector<std::string>{"x", "y"});
    CHECK(std::isnan(t.values("y")[1]));
    CHECK_THROWS(t.column("z"));
}

TEST_CASE("spectrum and two-particle outputs are deterministic") {
    auto a = scratch("det_a"), b = scratch("det_b");
    auto c = defaults(Scenario::Spectrum);
    c.spectrum_points = 41;
    run(c, a);
    run(c, b);
    CHECK(slurp(a / "spectrum.csv") == slurp(b / "spectrum.csv"));
    auto t = out::read_csv(a / "spectrum.csv");
    CHECK(t.header == std::vector<std::string>{"inv_gamma", "branch", "energy"});
    CHECK(fs::exists(a / "spectrum.svg"));
    CHECK(fs::exists(a / "config.json"));

    auto tp = defaults(Scenario::TwoParticle);
    tp.n_times = 101;
    tp.bethe_branches = 2000;
    run(tp, a);
    run(tp, b);
    CHECK(slurp(a / "two_particle.csv") == slurp(b / "two_particle.csv"));
    auto u = out::read_csv(a / "two_particle.csv");
    CHECK(u.header == std::vector<std::string>{"time", "g2_exact", "g2_single_mode", "g2_two_state"});
    auto times = u.values("time");
    for (std::size_t k = 1; k < times.size(); ++k) CHECK(times[k] > times[k - 1]);
}

TEST_CASE("small quench: outputs, schema and determinism") {
    auto a = scratch("q_a"), b = scratch("q_b");
    auto c = tiny_quench();
    auto info = run(c, a);
    run(c, b);
    CHECK(info["status"] == "completed");
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    auto t = out::read_csv(a / "trajectory.csv");
    for (const char* col : {"time", "g2_local", "g3_local", "sum_rule", "max_entropy", "truncation_weight"})
        CHECK_NOTHROW(t.column(col));
    auto times = t.values("time");
    REQUIRE(times.size() > 2);
    CHECK(times[0] == 0.0);
    for (std::size_t k = 1; k < times.size(); ++k) CHECK(times[k] > times[k - 1]);
    for (double s : t.values("sum_rule")) CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
    for (double n : t.values("particle_number")) CHECK(n == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fs::exists(a / "g2row_t0.000000.csv"));
    CHECK(fs::exists(a / "hs_reference.csv"));
    CHECK(fs::exists(a / "run_info.json"));
    auto cfg = out::read_json(a / "config.json");
    CHECK(from_json(cfg).to_json() == c.to_json());
}

TEST_CASE("max_steps caps the run") {
    auto a = scratch("cap");
    auto c = tiny_quench();
    c.max_steps = 2;
    auto info = run(c, a);
    CHECK(info["n_steps"] == 2);
    CHECK(out::read_csv(a / "trajectory.csv").rows.size() == 3u);
}
