#include "chemofluid/run.hpp"

#include "chemofluid/errors.hpp"
#include "chemofluid/initial.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace chemofluid {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

double active_max(const Mesh& mesh, const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (mesh.active(k)) m = std::max(m, f[k]);
    }
    return m;
}

double active_min(const Mesh& mesh, const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (mesh.active(k)) m = std::min(m, f[k]);
    }
    return m;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Verdict from_report(const InequalityReport& r, bool enforced) {
    Verdict v;
    v.name = r.id;
    v.passed = r.passed;
    v.enforced = enforced;
    v.value = r.violation;
    v.tolerance = r.tolerance;
    return v;
}

/// Worst report per id prefix, reduced into one verdict.
void add_worst(std::vector<Verdict>& out, const std::vector<InequalityReport>& reports, const std::string& id,
               bool enforced) {
    const InequalityReport* worst = nullptr;
    int failures = 0;
    for (const auto& r : reports) {
        if (r.id != id) continue;
        if (!r.passed) ++failures;
        if (!worst || (!r.passed && worst->passed) || (r.passed == worst->passed && r.violation > worst->violation)) {
            worst = &r;
        }
    }
    if (!worst) return;
    Verdict v = from_report(*worst, enforced);
    v.detail = std::to_string(failures) + " failing snapshot(s), worst at t = " + std::to_string(worst->time);
    out.push_back(v);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

} // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot write " + tmp.string());
        os << content;
        os.flush();
        if (!os) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

RunResult run_simulation(const RunConfig& cfg, const std::string& out_dir, std::ostream* log, const RunTolerances& tol) {
    const auto wall0 = Clock::now();
    cfg.validate();
    RunResult res;

    auto t0 = Clock::now();
    const LevelSetDomain domain = cfg.domain.build();
    auto mesh = std::make_shared<const Mesh>(classify_cells(domain, cfg.h()));
    res.timings["geometry"] = seconds_since(t0);

    const KineticsModel model = cfg.model.build();
    SimState s = build_initial_state(*mesh, cfg.init);
    validate_initial_state(*mesh, s);

    const double c0_max = active_max(*mesh, s.c);
    // c0 = 0 stays 0; [0, 1] is then the range the derived tables cover.
    const double c_range = c0_max > 0 ? c0_max : 1.0;
    const AssumptionReport assumptions =
        validate_assumptions(model, c_range, static_cast<std::size_t>(cfg.model.validate_samples));
    if (!assumptions.passed()) {
        throw ValidationError("model violates '" + assumptions.first_failure() + "' on [0, " +
                              std::to_string(c_range) + "]");
    }

    const double c_floor = cfg.diagnostics.c_floor > 0 ? cfg.diagnostics.c_floor : 1e-10 * std::max(1.0, c0_max);
    Solver solver(mesh, model, cfg.solver, c_floor);
    t0 = Clock::now();
    const DerivedScalars derived = build_derived(model, c_floor, c_range);
    const GridGeometry& geom = mesh->geometry();
    const Diagnostics diag(mesh, derived, volume_integral(s.n, geom) / geom.area());
    double diag_time = seconds_since(t0);

    StepStats& st = res.stats;
    st.mass0 = diag.mass(s.n);
    st.c_max0 = c0_max;
    st.n_min = active_min(*mesh, s.n);
    st.n_max = active_max(*mesh, s.n);
    double c_prev = c0_max;

    const bool convex = cfg.domain.convex();
    const DiagnosticsSpec& dspec = cfg.diagnostics;
    StepInfo last;
    auto record = [&](const StepInfo* info) {
        if (!dspec.enabled) return;
        const auto tr = Clock::now();
        DiagnosticsRow row = diag.evaluate(s, info);
        res.rows.push_back(row);
        if (dspec.ms) res.reports.push_back(check_ms_lemma(*mesh, s.c, dspec.c_check, s.t));
        if (dspec.boundary_sign) res.reports.push_back(check_boundary_sign(diag, s.c, dspec.c_check, s.t));
        if (dspec.gradient_hessian) res.reports.push_back(check_gradient_hessian(diag, s.c, 0.0, 1e-12, s.t));
        if (dspec.trace_bound) {
            res.reports.push_back(check_trace_bound(*mesh, jet_extended(*mesh, s.c).hess, 1e-10, s.t));
        }
        diag_time += seconds_since(tr);
    };

    fs::path snap_dir;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        if (cfg.output.snapshot_every > 0) {
            snap_dir = fs::path(out_dir) / "snapshots";
            fs::create_directories(snap_dir);
        }
    }
    auto snapshot = [&] {
        if (snap_dir.empty()) return;
        std::ostringstream name;
        name << "step_" << std::setw(7) << std::setfill('0') << s.step << ".grid";
        write_checkpoint((snap_dir / name.str()).string(), s);
    };

    record(nullptr);
    snapshot();
    const double t_end = cfg.solver.end_time;
    const auto loop0 = Clock::now();
    while (s.t < t_end * (1 - 1e-12) && (cfg.max_steps == 0 || s.step < cfg.max_steps)) {
        last = solver.step(s);
        ++st.steps;

        const double m = diag.mass(s.n);
        st.mass_drift = std::max(st.mass_drift, std::abs(m - st.mass0) / std::abs(st.mass0));
        const double cm = active_max(*mesh, s.c);
        st.c_max_increase = std::max(st.c_max_increase, (cm - c_prev) / c_range);
        c_prev = cm;
        st.n_min = std::min(st.n_min, active_min(*mesh, s.n));
        st.n_max = std::max(st.n_max, active_max(*mesh, s.n));
        if (cfg.solver.fluid) {
            st.div_ratio = std::max(st.div_ratio, last.div_max * last.dt / cfg.solver.linear_tol);
            if (last.p_max > 0) st.gauge_ratio = std::max(st.gauge_ratio, std::abs(last.p_mean) / last.p_max);
        }
        st.max_cg_iterations = std::max(st.max_cg_iterations, last.iterations);

        const bool final_step = !(s.t < t_end * (1 - 1e-12)) || (cfg.max_steps > 0 && s.step >= cfg.max_steps);
        if (s.step % cfg.output.every == 0 || final_step) record(&last);
        if (cfg.output.snapshot_every > 0 && (s.step % cfg.output.snapshot_every == 0 || final_step)) snapshot();
        if (log && s.step % (cfg.output.every * 10) == 0) {
            *log << "step " << s.step << "  t = " << s.t << "  dt = " << last.dt << '\n';
        }
    }
    st.final_time = s.t;
    const double loop_time = seconds_since(loop0);

    // Verdicts.
    auto add = [&](std::string name, bool passed, double value, double tolerance, bool enforced = true) {
        res.verdicts.push_back({std::move(name), passed, enforced, value, tolerance, {}});
    };
    add("mass_conservation", st.mass_drift <= tol.mass_rel, st.mass_drift, tol.mass_rel);
    add("c_max_nonincreasing", st.c_max_increase <= tol.c_max_rel, st.c_max_increase, tol.c_max_rel);
    add("n_positive", st.n_min >= -1e-10 * st.n_max, st.n_min, -1e-10 * st.n_max);
    if (cfg.solver.fluid) {
        add("divergence", st.div_ratio <= tol.div_factor, st.div_ratio, tol.div_factor);
        add("pressure_gauge", st.gauge_ratio <= tol.gauge_rel, st.gauge_ratio, tol.gauge_rel);
    }
    // Pointwise boundary second derivatives of a state are only as good as the
    // first-order boundary closure; the bound itself is enforced by the scan.
    add_worst(res.verdicts, res.reports, "ms_lemma", false);
    add_worst(res.verdicts, res.reports, "boundary_sign", convex);
    add_worst(res.verdicts, res.reports, "gradient_hessian", convex);
    add_worst(res.verdicts, res.reports, "trace_bound", true);

    if (res.rows.size() >= 3) {
        const auto tr = Clock::now();
        const std::vector<double> residual = entropy_identity_residual(res.rows);
        for (std::size_t k = 1; k + 1 < residual.size(); ++k) {
            res.identity_residual_max = std::max(res.identity_residual_max, residual[k]);
        }
        InequalityReport energy = check_energy_inequality(res.rows, dspec.energy_slack);
        res.reports.push_back(energy);
        Verdict ev = from_report(energy, true);
        ev.detail = "fitted C = " + std::to_string(energy.constant);
        res.verdicts.push_back(ev);
        if (cfg.solver.fluid) {
            InequalityReport ve = check_velocity_energy(res.rows, model.gravity, dspec.energy_slack);
            res.reports.push_back(ve);
            Verdict vv = from_report(ve, true);
            vv.detail = "fitted C = " + std::to_string(ve.constant);
            res.verdicts.push_back(vv);
        }
        res.convergence = convergence_monitor(res.rows);
        Verdict cv;
        cv.name = "convergence_monitor";
        cv.passed = res.convergence.passed;
        cv.enforced = false;
        cv.value = res.convergence.conv_n_ratio;
        cv.tolerance = 1e-2;
        cv.detail = res.convergence.reason;
        res.verdicts.push_back(cv);
        diag_time += seconds_since(tr);
    }

    for (const auto& [k, v] : solver.timings()) res.timings[k] = v;
    res.timings["diagnostics"] = diag_time;
    res.timings["time_loop"] = loop_time;

    res.exit_code = 0;
    for (const Verdict& v : res.verdicts) {
        if (v.enforced && !v.passed) res.exit_code = 2;
    }

    if (!out_dir.empty()) {
        std::ostringstream d;
        write_diagnostics_csv(d, res.rows);
        write_file_atomic((fs::path(out_dir) / "diagnostics.csv").string(), d.str());
        std::ostringstream q;
        write_inequality_csv(q, res.reports);
        write_file_atomic((fs::path(out_dir) / "inequalities.csv").string(), q.str());
    }
    res.timings["total"] = seconds_since(wall0);
    if (!out_dir.empty()) write_file_atomic((fs::path(out_dir) / "summary.json").string(), res.summary_json(cfg));
    return res;
}

std::string RunResult::summary_json(const RunConfig& cfg) const {
    json j;
    j["name"] = cfg.name;
    j["status"] = exit_code == 0 ? "pass" : "fail";
    j["exit_code"] = exit_code;
    j["seed"] = cfg.seed;
    j["domain"] = {{"shape", cfg.domain.shape}, {"convex", cfg.domain.convex()}};
    j["grid"] = {{"n", cfg.grid_n}, {"h", cfg.h()}};
    j["model"] = {{"chi", cfg.model.chi.text()},
                  {"f", cfg.model.f.text()},
                  {"gravity", cfg.model.gravity},
                  {"kappa_ns", cfg.model.kappa_ns}};
    j["steps"] = stats.steps;
    j["final_time"] = stats.final_time;
    j["invariants"] = {{"mass0", stats.mass0},
                       {"mass_drift", stats.mass_drift},
                       {"c_max0", stats.c_max0},
                       {"c_max_increase", stats.c_max_increase},
                       {"n_min", stats.n_min},
                       {"n_max", stats.n_max},
                       {"div_ratio", stats.div_ratio},
                       {"gauge_ratio", stats.gauge_ratio},
                       {"max_cg_iterations", stats.max_cg_iterations}};
    j["identity_residual_max"] = number(identity_residual_max);
    json verdict_list = json::array();
    for (const Verdict& v : verdicts) {
        verdict_list.push_back({{"name", v.name},
                                {"passed", v.passed},
                                {"enforced", v.enforced},
                                {"value", number(v.value)},
                                {"tolerance", number(v.tolerance)},
                                {"detail", v.detail}});
    }
    j["verdicts"] = verdict_list;
    j["convergence"] = {{"passed", convergence.passed},
                        {"c_max_monotone", convergence.c_max_monotone},
                        {"tail_monotone", convergence.tail_monotone},
                        {"conv_n_ratio", number(convergence.conv_n_ratio)},
                        {"c_max_ratio", number(convergence.c_max_ratio)},
                        {"u_sup_ratio", number(convergence.u_sup_ratio)},
                        {"reason", convergence.reason}};
    if (!rows.empty()) {
        const DiagnosticsRow& r = rows.back();
        j["final"] = {{"time", r.time},         {"mass", r.mass},           {"c_max", r.c_max},
                      {"entropy_n", r.entropy_n}, {"fisher", r.fisher},     {"u_l2", r.u_l2},
                      {"u_sup", r.u_sup},       {"conv_n", r.conv_n},       {"n_min", r.n_min},
                      {"n_max", r.n_max},       {"clamped_fraction", r.clamped_fraction}};
    }
    json t;
    for (const auto& [k, v] : timings) t[k] = v;
    j["timings_seconds"] = t;
    return j.dump(2) + "\n";
}

} // namespace chemofluid
