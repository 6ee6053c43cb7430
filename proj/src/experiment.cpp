#include "llq/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "llq/bethe2.hpp"
#include "llq/error.hpp"
#include "llq/output.hpp"
#include "llq/parallel.hpp"
#include "llq/tebd.hpp"
#include "llq/validation.hpp"

namespace llq::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

void say(const Log& log, const std::string& msg) {
    if (log) log(msg);
}

std::string num(double v, int prec = 6) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

}  // namespace

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::Spectrum: return "spectrum";
        case Scenario::Quench: return "quench";
        case Scenario::TwoParticle: return "two-particle";
        case Scenario::Validate: return "validate";
    }
    return "?";
}

Scenario parse_scenario(const std::string& s) {
    for (Scenario v : {Scenario::Spectrum, Scenario::Quench, Scenario::TwoParticle, Scenario::Validate})
        if (to_string(v) == s) return v;
    throw ConfigError("scenario: unknown value '" + s + "' (spectrum, quench, two-particle, validate)");
}

namespace {

std::string to_string(Preparation p) { return p == Preparation::Exact ? "exact" : "imaginary"; }

Preparation parse_preparation(const std::string& s) {
    if (s == "exact") return Preparation::Exact;
    if (s == "imaginary") return Preparation::Imaginary;
    throw ConfigError("evolution.preparation: unknown value '" + s + "' (exact, imaginary)");
}

}  // namespace

double ExperimentConfig::box() const { return box_length > 0.0 ? box_length : default_box_length(n_particles, omega); }

void ExperimentConfig::validate() const {
    auto need = [](bool ok, const std::string& field, const std::string& what) {
        if (!ok) throw ConfigError(field + ": " + what);
    };
    need(n_particles >= 1, "physics.n_particles", "must be >= 1");
    need(std::isfinite(gamma), "physics.gamma", "must be finite");
    need(omega >= 0.0 && std::isfinite(omega), "physics.omega", "must be >= 0");
    need(box_length >= 0.0 && std::isfinite(box_length), "physics.box_length", "must be >= 0 (0 = automatic)");
    need(box_length > 0.0 || omega > 0.0, "physics.box_length", "must be set when omega = 0");
    need(n_sites >= 2 * n_particles, "lattice.n_sites", "must be >= 2 * n_particles");
    need(n_max >= 2, "lattice.n_max", "must be >= 2");
    need(dt > 0.0 && std::isfinite(dt), "evolution.dt", "must be > 0");
    need(t_final > 0.0 && std::isfinite(t_final), "evolution.t_final", "must be > 0");
    need(measure_every >= 1, "evolution.measure_every", "must be >= 1");
    need(max_steps >= 0, "evolution.max_steps", "must be >= 0");
    need(abort_truncation > 0.0, "evolution.abort_truncation", "must be > 0");
    for (double p : snapshot_periods) need(p >= 0.0 && std::isfinite(p), "evolution.snapshot_periods", "entries must be >= 0");
    need(policy.chi_max >= 1, "truncation.chi_max", "must be >= 1");
    need(policy.svd_cutoff >= 0.0 && policy.svd_cutoff < 1.0, "truncation.svd_cutoff", "must lie in [0, 1)");
    need(inv_gamma_min < inv_gamma_max, "spectrum.inv_gamma_min", "must be below spectrum.inv_gamma_max");
    need(spectrum_points >= 2, "spectrum.points", "must be >= 2");
    need(spectrum_branches >= 1, "spectrum.branches", "must be >= 1");
    need(bethe_branches >= 1, "two_particle.branches", "must be >= 1");
    need(n_times >= 4, "two_particle.n_times", "must be >= 4");
    if (scenario == Scenario::TwoParticle) need(gamma < 0.0, "physics.gamma", "two-particle scenario needs gamma < 0");
    if (scenario == Scenario::Quench) {
        need(static_cast<double>(n_particles) / n_sites < kMaxMeanFilling, "lattice.n_sites",
             "mean filling must stay below " + num(kMaxMeanFilling));
        need(n_max >= 3, "lattice.n_max", "must be >= 3 so that g3 is resolved");
    }
    need(!output_dir.empty(), "output_dir", "must not be empty");
}

json ExperimentConfig::to_json() const {
    return {
        {"scenario", experiment::to_string(scenario)},
        {"paper_scale", paper_scale},
        {"physics", {{"n_particles", n_particles}, {"gamma", gamma}, {"omega", omega}, {"box_length", box_length}}},
        {"lattice", {{"n_sites", n_sites}, {"n_max", n_max}}},
        {"evolution",
         {{"dt", dt},
          {"t_final", t_final},
          {"measure_every", measure_every},
          {"max_steps", max_steps},
          {"abort_truncation", abort_truncation},
          {"preparation", to_string(preparation)},
          {"snapshot_periods", snapshot_periods},
          {"hs_from_periods", hs_from_periods}}},
        {"truncation", {{"chi_max", policy.chi_max}, {"svd_cutoff", policy.svd_cutoff}}},
        {"spectrum",
         {{"inv_gamma_min", inv_gamma_min},
          {"inv_gamma_max", inv_gamma_max},
          {"points", spectrum_points},
          {"branches", spectrum_branches}}},
        {"two_particle", {{"branches", bethe_branches}, {"n_times", n_times}, {"overlay", overlay}}},
        {"seed", seed},
        {"output_dir", output_dir},
    };
}

ExperimentConfig defaults(Scenario scenario, bool paper_scale) {
    ExperimentConfig c;
    c.scenario = scenario;
    c.paper_scale = paper_scale;
    if (scenario == Scenario::TwoParticle) {
        c.gamma = kTwoParticleGamma;
        c.t_final = 0.005;
    }
    if (paper_scale) {
        c.n_particles = 18;
        c.n_sites = 1280;
        c.policy.chi_max = 100;
    }
    return c;
}

namespace {

// Strict reader: every key of `obj` must be consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }
    template <typename T>
    void get(const char* key, T& target) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            target = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_ + (path_.empty() ? "" : ".") + key + ": " + e.what());
        }
    }
    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError((path_.empty() ? "" : path_ + ".") + k + ": unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig from_json(const json& j, std::optional<Scenario> scenario_override,
                           std::optional<bool> paper_scale_override) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    Section top(j, "");
    std::string scen = "quench";
    top.get("scenario", scen);
    bool large = false;
    top.get("paper_scale", large);
    Scenario s = scenario_override.value_or(parse_scenario(scen));
    ExperimentConfig c = defaults(s, paper_scale_override.value_or(large));

    if (auto* p = top.child("physics")) {
        Section sec(*p, "physics");
        sec.get("n_particles", c.n_particles);
        sec.get("gamma", c.gamma);
        sec.get("omega", c.omega);
        sec.get("box_length", c.box_length);
        sec.finish();
    }
    if (auto* p = top.child("lattice")) {
        Section sec(*p, "lattice");
        sec.get("n_sites", c.n_sites);
        sec.get("n_max", c.n_max);
        sec.finish();
    }
    if (auto* p = top.child("evolution")) {
        Section sec(*p, "evolution");
        sec.get("dt", c.dt);
        sec.get("t_final", c.t_final);
        sec.get("measure_every", c.measure_every);
        sec.get("max_steps", c.max_steps);
        sec.get("abort_truncation", c.abort_truncation);
        std::string prep = to_string(c.preparation);
        sec.get("preparation", prep);
        c.preparation = parse_preparation(prep);
        sec.get("snapshot_periods", c.snapshot_periods);
        sec.get("hs_from_periods", c.hs_from_periods);
        sec.finish();
    }
    if (auto* p = top.child("truncation")) {
        Section sec(*p, "truncation");
        sec.get("chi_max", c.policy.chi_max);
        sec.get("svd_cutoff", c.policy.svd_cutoff);
        sec.finish();
    }
    if (auto* p = top.child("spectrum")) {
        Section sec(*p, "spectrum");
        sec.get("inv_gamma_min", c.inv_gamma_min);
        sec.get("inv_gamma_max", c.inv_gamma_max);
        sec.get("points", c.spectrum_points);
        sec.get("branches", c.spectrum_branches);
        sec.finish();
    }
    if (auto* p = top.child("two_particle")) {
        Section sec(*p, "two_particle");
        sec.get("branches", c.bethe_branches);
        sec.get("n_times", c.n_times);
        sec.get("overlay", c.overlay);
        sec.finish();
    }
    top.get("seed", c.seed);
    top.get("output_dir", c.output_dir);
    top.finish();
    return c;
}

// ---------------------------------------------------------------------------

PreparedQuench prepare_quench(const ContinuumParams& cp_in, int n_sites, int n_max, double gamma,
                              const TruncationPolicy& policy, Preparation prep, const Log& log) {
    PreparedQuench pq;
    ContinuumParams cp = cp_in;
    cp.g = 0.0;
    pq.initial = discretize(cp, n_sites, n_max);

    auto t_start = std::chrono::steady_clock::now();
    GroundStateResult gs;
    if (prep == Preparation::Exact) {
        gs = hardcore_ground_state(pq.initial, cp.n_particles, policy);
        pq.prep_method = "exact hardcore circuit";
    } else {
        GroundStateConfig gc;
        gc.policy = policy;
        gs = prepare_ground_state(pq.initial, cp.n_particles, gc, cp.omega);
        pq.prep_method = "imaginary time (" + std::to_string(gs.steps) + " steps)";
    }
    pq.state = std::move(gs.state);
    pq.prep_energy = gs.energy;
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    pq.t0 = measure(pq.state, pq.initial);
    pq.anchor = pq.t0.row.anchor_site;
    pq.rho_center = pq.t0.density[pq.anchor];
    pq.time_unit = 4.0 / (pq.rho_center * pq.rho_center);

    cp.rho = pq.rho_center;
    cp.g = gamma * pq.rho_center;
    pq.cp = cp;
    pq.final = discretize(cp, n_sites, n_max);
    say(log, "prepared TG state (" + pq.prep_method + ", " + num(secs, 3) + " s): E = " + num(pq.prep_energy, 10) +
                 ", rho_center = " + num(pq.rho_center) + ", chi = " + std::to_string(pq.state.max_bond_dim()));
    return pq;
}

double pair_period(double gamma) {
    if (!(gamma < 0.0)) return std::nan("");
    return 2.0 * kPi / bethe2::binding_energy(gamma);
}

std::pair<std::vector<double>, std::vector<bool>> hs_on_grid(const CorrelationRow& t0, double a_1d, double rho) {
    auto ref = bethe2::hs_reference(t0, a_1d, rho);
    const std::size_t n = t0.xs.size();
    const int anchor = t0.anchor_site;
    std::vector<double> vals(n, std::nan(""));
    std::vector<bool> valid(n, false);
    // Each side of the anchor is its own monotone branch in the shifted grid.
    auto sample = [&](double x) {
        const bool right = x >= 0.0;
        int lo = right ? anchor : 0, hi = right ? static_cast<int>(n) - 1 : anchor;
        // shifted xs increase with index on both branches
        for (int j = lo; j < hi; ++j) {
            double x0 = ref.row.xs[j], x1 = ref.row.xs[j + 1];
            if (!right && j + 1 == anchor) x1 = -a_1d;  // anchor point mirrored onto the left branch
            if (!right && j == anchor) continue;
            if (x >= std::min(x0, x1) && x <= std::max(x0, x1) && x1 != x0) {
                double y1 = (!right && j + 1 == anchor) ? ref.row.g2[anchor] : ref.row.g2[j + 1];
                double w = (x - x0) / (x1 - x0);
                return (1.0 - w) * ref.row.g2[j] + w * y1;
            }
        }
        return std::nan("");
    };
    for (std::size_t j = 0; j < n; ++j) {
        double x = t0.xs[j];
        if (std::abs(x) < a_1d) continue;
        vals[j] = sample(x);
        valid[j] = std::abs(x) <= 1.0 / rho;
    }
    return {vals, valid};
}

// ---------------------------------------------------------------------------

namespace {

void write_row_file(const fs::path& path, const Snapshot& s, const std::vector<double>* hs,
                    const std::vector<bool>* hs_valid) {
    out::CsvWriter w(path, {"x", "density", "g2", "hs_reference", "hs_valid"});
    for (std::size_t j = 0; j < s.row.xs.size(); ++j) {
        double h = hs ? (*hs)[j] : std::nan("");
        double v = hs ? ((*hs_valid)[j] ? 1.0 : 0.0) : std::nan("");
        w.row({s.row.xs[j], s.density[j], s.row.g2[j], h, v});
    }
}

std::string row_name(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "g2row_t%.6f.csv", t);
    return buf;
}

}  // namespace

json run_quench(const ExperimentConfig& cfg, const fs::path& outdir, const Log& log) {
    cfg.validate();
    auto wall0 = std::chrono::steady_clock::now();
    ContinuumParams cp;
    cp.n_particles = cfg.n_particles;
    cp.omega = cfg.omega;
    cp.box_length = cfg.box();
    cp.rho = 1.0;
    auto pq = prepare_quench(cp, cfg.n_sites, cfg.n_max, cfg.gamma, cfg.policy, cfg.preparation, log);
    const LatticeParams& lp = pq.final;
    const double tu = pq.time_unit;
    const double dt = cfg.dt / lp.hopping;

    int n_steps = std::max(1, static_cast<int>(std::lround(cfg.t_final * tu / dt)));
    const bool capped = cfg.max_steps > 0 && cfg.max_steps < n_steps;
    if (capped) n_steps = cfg.max_steps;

    const bool attractive = cfg.gamma < 0.0;
    const double period = pair_period(cfg.gamma);
    const double a_1d = cfg.gamma != 0.0 ? scattering_length(pq.cp.g) : std::nan("");

    // Snapshot steps on the measurement stride.
    std::map<int, double> snaps;  // step -> periods
    auto on_stride = [&](double t_units) {
        int st = static_cast<int>(std::lround(t_units * tu / dt / cfg.measure_every)) * cfg.measure_every;
        return std::min(st, n_steps);
    };
    snaps[0] = 0.0;
    if (attractive) {
        for (double p : cfg.snapshot_periods) {
            if (p * period > cfg.t_final * (1.0 + 1e-9)) continue;
            int st = on_stride(p * period);
            if (st % cfg.measure_every == 0 || st == n_steps) snaps.emplace(st, p);
        }
    } else {
        snaps.emplace(n_steps, std::nan(""));
    }

    std::vector<double> hs_vals;
    std::vector<bool> hs_valid;
    const bool have_hs = attractive && a_1d * pq.rho_center < 1.0;
    if (have_hs) {
        std::tie(hs_vals, hs_valid) = hs_on_grid(pq.t0.row, a_1d, pq.rho_center);
        auto ref = bethe2::hs_reference(pq.t0.row, a_1d, pq.rho_center);
        out::CsvWriter w(outdir / "hs_reference.csv", {"x", "g2", "valid"});
        for (std::size_t j = 0; j < ref.row.xs.size(); ++j) {
            if (static_cast<int>(j) == pq.anchor) {
                // the anchor sample belongs to both branches
                w.row({-a_1d, ref.row.g2[j], ref.valid[j] ? 1.0 : 0.0});
            }
            w.row({ref.row.xs[j], ref.row.g2[j], ref.valid[j] ? 1.0 : 0.0});
        }
    }

    say(log, "quench to gamma = " + num(cfg.gamma) + ": J = " + num(lp.hopping) + ", U/J = " +
                 num(lp.onsite_u / lp.hopping) + ", dt = " + num(dt) + " (" + num(dt / tu) + " time units), " +
                 std::to_string(n_steps) + " steps" + (capped ? " (capped by max_steps)" : ""));

    out::CsvWriter traj_csv(outdir / "trajectory.csv",
                            {"time", "g2_local", "g3_local", "sum_rule", "max_entropy", "truncation_weight", "energy",
                             "particle_number", "density_center", "max_bond_dim"});
    LocalSeries series;
    std::vector<std::pair<double, CorrelationRow>> rows;  // for the plots
    json snap_info = json::array();
    int call = 0;
    const int log_every = std::max(1, n_steps / cfg.measure_every / 40);

    auto observer = [&](double t, const SymmetricMPS& s, const Trajectory& tr) {
        const int step = std::min(call * cfg.measure_every, n_steps);
        Snapshot m = measure(s, lp, pq.anchor, t);
        series.push(t, m.g2_local, m.g3_local, m.density[pq.anchor]);
        const std::size_t k = tr.time.size() - 1;
        traj_csv.row({t, m.g2_local, m.g3_local, m.sum_rule, tr.max_entropy[k], tr.truncation_weight[k], tr.energy[k],
                      tr.particle_number[k], m.density[pq.anchor], static_cast<double>(s.max_bond_dim())});
        traj_csv.flush();
        auto it = snaps.find(step);
        if (it != snaps.end()) {
            bool late = have_hs && it->second >= cfg.hs_from_periods;
            std::string name = row_name(t);
            write_row_file(outdir / name, m, late ? &hs_vals : nullptr, late ? &hs_valid : nullptr);
            snap_info.push_back({{"file", name}, {"time", t}, {"step", step}, {"periods", attractive ? json(t / period) : json(nullptr)},
                                 {"hs_reference", late}});
            rows.emplace_back(t, m.row);
        }
        if (call % log_every == 0 || step == n_steps) {
            double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
            say(log, "step " + std::to_string(step) + "/" + std::to_string(n_steps) + "  t = " + num(t) +
                         "  g2 = " + num(m.g2_local) + "  g3 = " + num(m.g3_local) + "  chi = " +
                         std::to_string(s.max_bond_dim()) + "  [" + num(el, 4) + " s]");
        }
        ++call;
    };

    EvolutionConfig ec;
    ec.dt = dt;
    ec.n_steps = n_steps;
    ec.policy = cfg.policy;
    ec.measure_every = cfg.measure_every;
    ec.time_unit = tu;
    ec.abort_truncation = cfg.abort_truncation;

    json info = {
        {"scenario", "quench"},
        {"preparation", pq.prep_method},
        {"prepared_energy_lattice", pq.prep_energy},
        {"prepared_energy_continuum", pq.prep_energy + cfg.n_particles * lp.kinetic_offset()},
        {"rho_center", pq.rho_center},
        {"time_unit", tu},
        {"g", pq.cp.g},
        {"gamma", cfg.gamma},
        {"a_1d", attractive || cfg.gamma > 0 ? json(a_1d) : json(nullptr)},
        {"box_length", cp.box_length},
        {"dx", lp.dx},
        {"hopping", lp.hopping},
        {"onsite_u", lp.onsite_u},
        {"dt_physical", dt},
        {"dt_units", dt / tu},
        {"n_steps", n_steps},
        {"steps_capped", capped},
        {"anchor_site", pq.anchor},
        {"anchor_x", lp.position(pq.anchor)},
        {"chi_max", cfg.policy.chi_max},
    };
    if (attractive) {
        info["binding_energy"] = bethe2::binding_energy(cfg.gamma);
        info["binding_energy_lattice"] = lp.lattice_binding_energy() * tu;
        info["beat_period"] = period;
    }

    auto finish = [&](const std::string& status) {
        info["status"] = status;
        info["snapshots"] = snap_info;
        info["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
        out::write_json(outdir / "run_info.json", info);
    };

    Trajectory tr;
    SymmetricMPS state = pq.state;
    try {
        tr = evolve_real(state, lp, ec, observer);
    } catch (const TruncationAbort& e) {
        info["abort"] = {{"what", e.what()}, {"weight", e.weight()}, {"time", e.time()}};
        finish("aborted");
        throw;
    }
    finish("completed");

    if (series.times.size() >= 2) {
        try {
            double fit_hi = attractive ? std::min(0.25 * period, series.times.back()) : series.times.back();
            info["power_law_exponent_default_window"] =
                fit_power_law(series, {2.0 / lp.hopping / tu, fit_hi});
        } catch (const std::invalid_argument&) {
        }
        if (attractive && series.times.size() >= 8)
            info["g2_dominant_frequency"] = dominant_frequency(series.times, series.g2_local, 0.2 * 2 * kPi / period,
                                                               5.0 * 2 * kPi / period);
        finish("completed");
    }

    // Plots
    {
        out::Plot p;
        p.title = "local correlations, gamma = " + num(cfg.gamma);
        p.xlabel = "t [4/rho^2]";
        p.ylabel = "g2(0,0), g3(0,0)";
        p.series.push_back({"g2", series.times, series.g2_local, out::palette(0)});
        p.series.push_back({"g3", series.times, series.g3_local, out::palette(1), true});
        out::write_svg(outdir / "g2_local.svg", p);
        p.log_x = p.log_y = true;
        p.title = "early rise (log-log)";
        out::write_svg(outdir / "g2_local_loglog.svg", p);
    }
    {
        out::Plot p;
        p.title = "g2(0,x), anchor at the cloud center";
        p.xlabel = "x";
        p.ylabel = "g2(0,x)";
        std::size_t c = 0;
        for (const auto& [t, row] : rows) {
            bool late = attractive && t / period >= cfg.hs_from_periods;
            if (late) continue;
            p.series.push_back({"t = " + num(t, 4), row.xs, row.g2, out::palette(c++)});
        }
        if (attractive) p.vlines.push_back(a_1d);
        out::write_svg(outdir / "g2_nonlocal.svg", p);
        if (have_hs) {
            out::Plot q = p;
            q.series.clear();
            q.title = "late times and hard-sphere reference";
            c = 0;
            for (const auto& [t, row] : rows)
                if (t / period >= cfg.hs_from_periods) q.series.push_back({"t = " + num(t, 4), row.xs, row.g2, out::palette(c++)});
            q.series.push_back({"HS reference", pq.t0.row.xs, hs_vals, "#1f77b4", true});
            out::write_svg(outdir / "g2_late_hs.svg", q);
        }
    }
    info["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return info;
}

// ---------------------------------------------------------------------------

json run_spectrum(const ExperimentConfig& cfg, const fs::path& outdir, const Log& log) {
    cfg.validate();
    std::vector<double> invs;
    for (int k = 0; k < cfg.spectrum_points; ++k) {
        double v = cfg.inv_gamma_min + (cfg.inv_gamma_max - cfg.inv_gamma_min) * k / (cfg.spectrum_points - 1);
        if (std::abs(v) < 1e-12) continue;  // 1/gamma = 0 has no finite gamma
        invs.push_back(v);
    }
    std::vector<bethe2::SpectrumPoint> pts(invs.size());
    parallel_for(invs.size(), [&](std::size_t i) { pts[i] = bethe2::spectrum({1.0 / invs[i]}, cfg.spectrum_branches)[0]; });
    say(log, "spectrum: " + std::to_string(pts.size()) + " points, " + std::to_string(cfg.spectrum_branches) +
                 " gas branches");

    out::CsvWriter w(outdir / "spectrum.csv", {"inv_gamma", "branch", "energy"});
    std::vector<out::Series> series(cfg.spectrum_branches + 1);
    double top = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        if (!std::isnan(p.bound_energy)) {
            w.row({invs[i], bethe2::kBoundBranch, p.bound_energy});
            series[0].xs.push_back(invs[i]);
            series[0].ys.push_back(p.bound_energy);
        }
        for (std::size_t b = 0; b < p.gas_energies.size(); ++b) {
            w.row({invs[i], static_cast<double>(b), p.gas_energies[b]});
            series[b + 1].xs.push_back(invs[i]);
            series[b + 1].ys.push_back(p.gas_energies[b]);
            top = std::max(top, p.gas_energies[b]);
        }
    }
    out::Plot plot;
    plot.title = "two particles on a ring";
    plot.xlabel = "1/gamma";
    plot.ylabel = "E";
    plot.y_min = -0.5 * top;
    plot.y_max = 1.05 * top;
    series[0].label = "bound";
    series[0].color = out::palette(1);
    for (std::size_t b = 1; b < series.size(); ++b) {
        series[b].label = b == 1 ? "gas" : "";
        series[b].color = out::palette(0);
    }
    plot.series = series;
    out::write_svg(outdir / "spectrum.svg", plot);
    return {{"scenario", "spectrum"}, {"points", pts.size()}, {"branches", cfg.spectrum_branches}};
}

json run_two_particle(const ExperimentConfig& cfg, const fs::path& outdir, const Log& log) {
    cfg.validate();
    const double g = cfg.gamma;
    std::vector<double> times(cfg.n_times);
    for (int k = 0; k < cfg.n_times; ++k) times[k] = cfg.t_final * k / (cfg.n_times - 1);
    auto q = bethe2::expand_tg(g, cfg.bethe_branches);
    auto exact = bethe2::g2_exact_quench(g, times, cfg.bethe_branches);
    say(log, "two-particle expansion: " + std::to_string(cfg.bethe_branches) + " branches, completeness " +
                 num(q.completeness, 15));

    out::CsvWriter w(outdir / "two_particle.csv", {"time", "g2_exact", "g2_single_mode", "g2_two_state"});
    std::vector<double> s7, s8;
    for (int k = 0; k < cfg.n_times; ++k) {
        s7.push_back(bethe2::g2_single_mode(g, times[k]));
        s8.push_back(bethe2::g2_two_state(g, times[k]));
        w.row({times[k], exact[k], s7.back(), s8.back()});
    }
    const double w0 = g * g + kPi * kPi;
    auto eps = bethe2::overlap_tg_bound(g);
    json info = {{"scenario", "two-particle"},
                 {"gamma", g},
                 {"branches", cfg.bethe_branches},
                 {"completeness", q.completeness},
                 {"binding_energy", bethe2::binding_energy(g)},
                 {"two_state_frequency", w0},
                 {"eps", {{"re", eps.real()}, {"im", eps.imag()}, {"abs", std::abs(eps)}}}};
    if (cfg.t_final * w0 > 4.0 * kPi)
        info["dominant_frequency"] = dominant_frequency(times, exact, 0.1 * w0, 5.0 * w0);

    out::Plot p;
    p.title = "two particles, gamma = " + num(g);
    p.xlabel = "t [4/rho^2]";
    p.ylabel = "g2(0,0)";
    p.series.push_back({"exact", times, exact, out::palette(0), false, 2.5});
    p.series.push_back({"single mode", times, s7, out::palette(1), true});
    p.series.push_back({"beating approximation", times, s8, out::palette(2), true});
    if (!cfg.overlay.empty()) {
        auto t = out::read_csv(cfg.overlay);
        p.series.push_back({"TEBD overlay", t.values("time"), t.values("g2_local"), out::palette(3)});
        info["overlay"] = cfg.overlay;
    }
    p.x_max = cfg.t_final;
    out::write_svg(outdir / "two_particle.svg", p);
    return info;
}

json run_validate(const ExperimentConfig& cfg, const fs::path& outdir, const Log& log) {
    cfg.validate();
    using namespace validation;
    std::vector<Check> checks;
    auto add = [&](std::vector<Check> v) {
        for (auto& c : v) {
            say(log, std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + num(c.measured) + " (tol " +
                         num(c.tolerance) + ") " + c.detail);
            checks.push_back(std::move(c));
        }
    };
    add(bethe_asymptotics());
    {
        auto ends = spectrum_endpoints();
        ends.pop_back();  // the |gamma| = 1e-4 limit is checked against 2 gamma below
        add(ends);
    }
    add({weak_coupling_ground_energy()});
    add(exact_beating(kTwoParticleGamma));
    add({trotter_order_check(trotter_order(cfg.dt))});
    add(ed_checks(tebd_vs_ed(cfg.policy, cfg.dt)));
    add({canonical_form_property(100, cfg.seed), charge_conservation_property(100, cfg.seed + 1),
         truncation_monotonicity_property(100, cfg.seed + 2), reversibility_property(100, cfg.seed + 3)});

    json report = {{"passed", all_passed(checks)}, {"seed", cfg.seed}, {"checks", json::array()}};
    for (const auto& c : checks) report["checks"].push_back(c.to_json());
    out::write_json(outdir / "validation.json", report);
    return report;
}

json run(const ExperimentConfig& cfg, const fs::path& out, const Log& log) {
    cfg.validate();
    fs::create_directories(out);
    out::write_json(out / "config.json", cfg.to_json());
    switch (cfg.scenario) {
        case Scenario::Spectrum: return run_spectrum(cfg, out, log);
        case Scenario::Quench: return run_quench(cfg, out, log);
        case Scenario::TwoParticle: return run_two_particle(cfg, out, log);
        case Scenario::Validate: return run_validate(cfg, out, log);
    }
    throw ConfigError("unhandled scenario");
}

}  // namespace llq::experiment
