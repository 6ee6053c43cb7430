// Acceptance criteria, one per invocation: `llq_acceptance cN [options]`.
// Prints one PASS/FAIL line per check and a summary line; exits 0 only when
// every check of the criterion passed.
//
// Criteria 6-8 read the outputs of the desk quench (and the gamma = 0 run)
// produced by the llq fixtures; see CMakeLists.txt in this directory.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "llq/bethe2.hpp"
#include "llq/ed.hpp"
#include "llq/experiment.hpp"
#include "llq/observables.hpp"
#include "llq/output.hpp"
#include "llq/validation.hpp"

namespace fs = std::filesystem;
using llq::validation::Check;
using nlohmann::json;

namespace {

struct Paths {
    fs::path desk;
    fs::path free;
    fs::path scratch;
};

Check make(std::string name, bool ok, double measured, double tol, std::string detail = "") {
    return {std::move(name), ok, measured, tol, std::move(detail)};
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, std::abs(x));
    return m;
}

std::vector<Check> c1(const Paths&) { return llq::validation::bethe_asymptotics(); }

// The third check (ground energy within 1e-6 of zero at |gamma| = 1e-4)
// cannot hold: the weak-coupling energy is 2 gamma = 2e-4. It is reported
// as stated.
std::vector<Check> c2(const Paths&) { return llq::validation::spectrum_endpoints(); }

std::vector<Check> c3(const Paths&) { return llq::validation::exact_beating(llq::experiment::kTwoParticleGamma); }

std::vector<Check> c4(const Paths&) {
    auto r = llq::validation::trotter_order(0.25);
    return {llq::validation::trotter_order_check(r)};
}

std::vector<Check> c5(const Paths&) {
    const std::size_t dim = llq::ed::FockBasis(32, 2, 4).size();
    llq::TruncationPolicy policy{static_cast<int>(dim), 0.0};
    auto r = llq::validation::tebd_vs_ed(policy, 0.25, 32, 2, -20.0);
    auto out = llq::validation::ed_checks(r);
    out.insert(out.begin(), make("chi_max >= basis dimension", policy.chi_max >= static_cast<int>(r.basis_dim),
                                 policy.chi_max, static_cast<double>(r.basis_dim)));
    return out;
}

std::vector<Check> c6(const Paths& p) {
    auto info = llq::out::read_json(p.desk / "run_info.json");
    auto traj = llq::out::read_csv(p.desk / "trajectory.csv");
    auto cfg = llq::out::read_json(p.desk / "config.json");
    const double n1 = cfg["physics"]["n_particles"].get<double>() - 1.0;
    auto s = traj.values("sum_rule");
    std::vector<Check> out;
    out.push_back(make("run completed", info["status"] == "completed", s.size(), 0.0, p.desk.string()));
    double e0 = std::abs(s.front() - n1) / n1;
    out.push_back(make("sum rule at t=0 vs N-1", e0 < 0.02, e0, 0.02,
                       "value " + llq::out::format_value(s.front())));
    double drift = 0.0;
    for (double v : s) drift = std::max(drift, std::abs(v - s.front()) / std::abs(s.front()));
    out.push_back(make("sum rule relative drift", drift < 0.01, drift, 0.01,
                       std::to_string(s.size()) + " samples to t = " +
                           llq::out::format_value(traj.values("time").back())));
    return out;
}

std::pair<double, double> fit_window(const json& info, double period) {
    double t_lo = 2.0 / info["hopping"].get<double>() / info["time_unit"].get<double>();
    return {t_lo, 0.25 * period};
}

std::vector<Check> c7(const Paths& p) {
    auto info = llq::out::read_json(p.desk / "run_info.json");
    auto traj = llq::out::read_csv(p.desk / "trajectory.csv");
    const double gamma = info["gamma"].get<double>();
    const double period = llq::experiment::pair_period(gamma);
    auto t = traj.values("time");
    auto g2 = traj.values("g2_local");
    auto g3 = traj.values("g3_local");
    std::vector<Check> out;

    const double eb = llq::bethe2::binding_energy(gamma);
    const double eb_lat = info["binding_energy_lattice"].get<double>();
    const double w = llq::dominant_frequency(t, g2, 0.2 * eb, 5.0 * eb);
    double rel = std::abs(w - eb) / eb;
    out.push_back(make("g2 frequency vs binding energy", rel < 0.05, rel, 0.05,
                       "omega " + llq::out::format_value(w) + ", E_b " + llq::out::format_value(eb) +
                           ", lattice E_b " + llq::out::format_value(eb_lat) + " (deviation " +
                           llq::out::format_value(std::abs(w - eb_lat) / eb_lat) + ")"));

    const double g2max = max_abs(g2), g3max = max_abs(g3);
    out.push_back(make("max g3 below 0.05 max g2", g3max < 0.05 * g2max, g3max, 0.05 * g2max));

    {
        auto fi = llq::out::read_json(p.free / "run_info.json");
        auto ft = llq::out::read_csv(p.free / "trajectory.csv");
        auto win = fit_window(fi, period);
        double a = llq::fit_power_law(ft.values("time"), ft.values("g2_local"), win);
        out.push_back(make("early-rise exponent at gamma=0", std::abs(a - 1.0) <= 0.1, a, 0.1,
                           "window [" + llq::out::format_value(win.first) + ", " +
                               llq::out::format_value(win.second) + "]"));
    }
    {
        auto win = fit_window(info, period);
        double a = llq::fit_power_law(t, g2, win);
        out.push_back(make("early-rise exponent at gamma=" + llq::out::format_value(gamma),
                           std::abs(a - 4.0 / 3.0) <= 0.15, a, 0.15,
                           "target 4/3, window [" + llq::out::format_value(win.first) + ", " +
                               llq::out::format_value(win.second) + "]"));
    }
    return out;
}

// Late-time stationary row: mean of the snapshots carrying the hard-sphere
// column (3.5, 4 and 4.5 beat periods by default).
std::vector<Check> c8(const Paths& p) {
    auto info = llq::out::read_json(p.desk / "run_info.json");
    std::vector<llq::out::CsvTable> late;
    std::string names;
    for (const auto& s : info["snapshots"])
        if (s["hs_reference"].get<bool>()) {
            late.push_back(llq::out::read_csv(p.desk / s["file"].get<std::string>()));
            names += " " + s["file"].get<std::string>();
        }
    std::vector<Check> out;
    out.push_back(make("late snapshots present", late.size() >= 2, late.size(), 2.0, names));
    if (late.empty()) return out;

    const double a = info["a_1d"].get<double>();
    const double rho = info["rho_center"].get<double>();
    auto xs = late.front().values("x");
    auto hs = late.front().values("hs_reference");
    auto valid = late.front().values("hs_valid");
    double worst = 0.0, worst_x = 0.0;
    int n = 0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        if (!(valid[j] == 1.0) || !std::isfinite(hs[j]) || std::abs(xs[j]) < a || std::abs(xs[j]) > 1.0 / rho)
            continue;
        double mean = 0.0;
        for (const auto& tab : late) mean += tab.values("g2")[j];
        mean /= static_cast<double>(late.size());
        if (!std::isfinite(mean)) continue;
        double dev = std::abs(mean - hs[j]) / std::abs(hs[j]);
        if (dev > worst) {
            worst = dev;
            worst_x = xs[j];
        }
        ++n;
    }
    out.push_back(make("grid points in [a_1D, 1/rho]", n >= 2, n, 2.0,
                       "a_1D " + llq::out::format_value(a) + ", 1/rho " + llq::out::format_value(1.0 / rho)));
    out.push_back(make("late g2 vs hard-sphere reference", n >= 2 && worst < 0.1, worst, 0.1,
                       "worst at x = " + llq::out::format_value(worst_x)));
    return out;
}

std::vector<Check> c9(const Paths& p) {
    using namespace llq::experiment;
    std::vector<Check> out;
    json doc = {{"scenario", "quench"}, {"paper_scale", true}};
    auto cfg = from_json(doc);
    bool shape = cfg.n_particles == 18 && cfg.n_sites == 1280 && cfg.policy.chi_max == 100;
    out.push_back(make("paper-scale configuration loads", shape, cfg.n_sites, 1280.0,
                       "N " + std::to_string(cfg.n_particles) + ", chi " + std::to_string(cfg.policy.chi_max)));
    cfg.validate();
    cfg.max_steps = 1;
    fs::path dir = p.scratch / "paper_scale";
    fs::create_directories(dir);
    auto info = run(cfg, dir, [](const std::string& m) { std::fprintf(stderr, "  %s\n", m.c_str()); });
    auto traj = llq::out::read_csv(dir / "trajectory.csv");
    double nmax_dev = 0.0;
    for (double v : traj.values("particle_number")) nmax_dev = std::max(nmax_dev, std::abs(v - 18.0));
    out.push_back(make("paper-scale run completes one step", info["status"] == "completed" && traj.rows.size() == 2,
                       traj.rows.size(), 2.0));
    out.push_back(make("paper-scale particle number", nmax_dev < 1e-8, nmax_dev, 1e-8));

    using namespace llq::validation;
    out.push_back(canonical_form_property(100, 101));
    out.push_back(charge_conservation_property(100, 102));
    out.push_back(truncation_monotonicity_property(100, 103));
    out.push_back(reversibility_property(100, 104));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string which;
    Paths paths{"acceptance/desk", "acceptance/free", "acceptance/scratch"};
    app.add_option("criterion", which, "c1 ... c9")->required();
    app.add_option("--desk", paths.desk, "output directory of the desk quench");
    app.add_option("--free", paths.free, "output directory of the gamma = 0 run");
    app.add_option("--scratch", paths.scratch, "work directory");
    CLI11_PARSE(app, argc, argv);

    const std::map<std::string, std::function<std::vector<Check>(const Paths&)>> table{
        {"c1", c1}, {"c2", c2}, {"c3", c3}, {"c4", c4}, {"c5", c5},
        {"c6", c6}, {"c7", c7}, {"c8", c8}, {"c9", c9}};
    auto it = table.find(which);
    if (it == table.end()) {
        std::cerr << "unknown criterion " << which << "\n";
        return 2;
    }

    std::vector<Check> checks;
    try {
        checks = it->second(paths);
    } catch (const std::exception& e) {
        std::printf("FAIL %s: %s\n", which.c_str(), e.what());
        return 1;
    }
    for (const auto& c : checks)
        std::printf("%s %s | %s: measured %s, tolerance %s%s%s\n", c.passed ? "PASS" : "FAIL", which.c_str(),
                    c.name.c_str(), llq::out::format_value(c.measured).c_str(),
                    llq::out::format_value(c.tolerance).c_str(), c.detail.empty() ? "" : " | ", c.detail.c_str());
    bool ok = llq::validation::all_passed(checks);
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", which.c_str());
    return ok ? 0 : 1;
}
