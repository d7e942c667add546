// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "chemofluid/config.hpp"
#include "chemofluid/initial.hpp"
#include "chemofluid/mms.hpp"
#include "chemofluid/run.hpp"
#include "chemofluid/scan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace chemofluid;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

RunConfig config(const std::string& name) {
    return load_config(std::string(CHEMOFLUID_SOURCE_DIR) + "/configs/" + name + ".cfg");
}

struct Run {
    std::string label;
    RunConfig cfg;
    RunResult result;
    double seconds = 0;
};

Run execute(const std::string& label, RunConfig cfg, const std::string& out_dir = "") {
    const auto t0 = Clock::now();
    Run r{label, cfg, run_simulation(cfg, out_dir), 0};
    r.seconds = seconds_since(t0);
    return r;
}

const Verdict* verdict(const RunResult& r, const std::string& name) {
    for (const Verdict& v : r.verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

const InequalityReport* report(const RunResult& r, const std::string& id) {
    for (const InequalityReport& q : r.reports)
        if (q.id == id) return &q;
    return nullptr;
}

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

/// Worst normalised identity residual at t = 0.1, 0.2, 0.3 of a run to
/// t = 0.4 with dt = 0.16 h and snapshots every 10 steps.
double identity_residual(int n, bool fluid) {
    const double h = 1.0 / n;
    const double dt = 0.16 * h;
    auto mesh = std::make_shared<const Mesh>(classify_cells(LevelSetDomain::disk(1.0), h));
    const KineticsModel model = KineticsModel::linear(fluid ? 1.0 : 0.0, fluid ? 1.0 : 0.0);
    InitialData init;
    init.n = {1.0, 0.5, {0.1, 0.1}, 0.2};
    init.c = {0.5, 0.3, {-0.1, 0.0}, 0.2};
    init.velocity = fluid ? VelocityProfile::vortex : VelocityProfile::zero;
    init.vortex = {0.2, {0, 0}, 0.6};
    SimState s = build_initial_state(*mesh, init);
    SolverConfig sc;
    sc.fluid = fluid;
    sc.end_time = 1e9;
    Solver solver(mesh, model, sc, 1e-10);
    const Diagnostics d(mesh, build_derived(model, 1e-10, 1.0),
                        volume_integral(s.n, mesh->geometry()) / mesh->geometry().area());
    std::vector<DiagnosticsRow> rows{d.evaluate(s)};
    const long steps = std::lround(0.4 / dt);
    for (long k = 1; k <= steps; ++k) {
        const StepInfo info = solver.step_fixed(s, dt);
        if (k % 10 == 0) rows.push_back(d.evaluate(s, &info));
    }
    const std::vector<double> res = entropy_identity_residual(rows);
    double worst = 0;
    for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
        const double q = rows[k].time / 0.1;
        if (std::abs(q - std::round(q)) < 1e-6) worst = std::max(worst, res[k]);
    }
    return worst;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main() {
    const auto wall0 = Clock::now();
    const fs::path scratch = fs::temp_directory_path() / "chemofluid_acceptance";
    fs::remove_all(scratch);

    // Default matrix {disk, star} x {Stokes, NS} x {small, moderate} at its
    // configured grid and one refinement, plus the small-data runs at 1/128.
    std::vector<std::string> matrix;
    for (const char* shape : {"disk", "star"})
        for (const char* fluid : {"ns", "stokes"})
            for (const char* size : {"small", "moderate"})
                matrix.push_back(std::string(shape) + "_" + fluid + "_" + size);
    std::vector<Run> coarse, fine, small;
    for (const std::string& name : matrix) {
        RunConfig cfg = config(name);
        coarse.push_back(execute(name, cfg));
        cfg.grid_n *= 2;
        fine.push_back(execute(name + "@" + std::to_string(cfg.grid_n), cfg));
        if (name.ends_with("small")) {
            cfg.grid_n = 128;
            small.push_back(execute(name + "@128", cfg));
        }
    }
    std::vector<const Run*> all;
    for (const auto* set : {&coarse, &fine, &small})
        for (const Run& r : *set) all.push_back(&r);

    std::vector<std::pair<std::string, Outcome>> results;
    auto record = [&](std::string name, Outcome o) {
        std::printf("%-2zu %-28s %s  %s\n", results.size() + 1, name.c_str(), o.passed ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
        results.emplace_back(std::move(name), std::move(o));
    };

    {   // 1
        Outcome o;
        for (const std::string& name : {"disk_ns_small", "star_ns_small"}) {
            RunConfig cfg = config(name);
            cfg.grid_n = 128;
            cfg.solver.end_time = 1e6;
            cfg.max_steps = 2000;
            cfg.output.every = 100;
            const Run r = execute(name, cfg);
            o.require(r.result.stats.steps == 2000, name + " stopped early");
            o.require(r.result.stats.mass_drift <= 1e-8, name + " mass drift");
            o.require(r.seconds <= 120, name + " slower than 2 min");
            o.detail += (o.detail.empty() ? "" : "; ") +
                        fmt("%s drift %.2e in %.1f s", name.c_str(), r.result.stats.mass_drift, r.seconds);
        }
        record("mass_conservation", o);
    }
    {   // 2
        Outcome o;
        double worst = 0;
        for (const auto* set : {&coarse, &fine})
            for (const Run& r : *set) {
                worst = std::max(worst, r.result.stats.c_max_increase);
                o.require(r.result.stats.c_max_increase <= 1e-12, r.label);
            }
        o.detail += (o.detail.empty() ? "" : "; ") + fmt("max increase %.2e of |c0|", worst);
        record("c_max_monotone", o);
    }
    {   // 3
        Outcome o;
        double worst = INFINITY;
        for (const Run* r : all) {
            const StepStats& st = r->result.stats;
            worst = std::min(worst, st.n_min / st.n_max);
            o.require(st.n_min >= -1e-10 * st.n_max, r->label);
        }
        o.detail += (o.detail.empty() ? "" : "; ") + fmt("smallest min n / max n %.2e", worst);
        record("positivity", o);
    }
    {   // 4
        Outcome o;
        double div = 0, gauge = 0;
        for (const Run* r : all) {
            const StepStats& st = r->result.stats;
            div = std::max(div, st.div_ratio);
            gauge = std::max(gauge, st.gauge_ratio);
            o.require(st.div_ratio <= 10, r->label + " divergence");
            o.require(st.gauge_ratio <= 1e-12, r->label + " gauge");
        }
        o.detail += (o.detail.empty() ? "" : "; ") + fmt("|div u| dt/tol %.2e, |mean p|/max|p| %.2e", div, gauge);
        record("incompressibility_gauge", o);
    }

    std::vector<ScanSummary> disk_scans, star_scans;
    double scan_seconds = 0;
    {
        const auto t0 = Clock::now();
        const LevelSetDomain disk = LevelSetDomain::disk(1.0);
        const LevelSetDomain star = LevelSetDomain::star(3, 0.4);
        for (int n : {64, 128, 256}) {
            ScanOptions opt;
            opt.trials = 100;
            opt.seed = 1;
            disk_scans.push_back(scan_inequalities(
                disk, std::make_shared<const Mesh>(classify_cells(disk, 1.0 / n)), KineticsModel::linear(), opt));
            star_scans.push_back(scan_inequalities(
                star, std::make_shared<const Mesh>(classify_cells(star, 1.0 / n)), KineticsModel::linear(), opt));
        }
        scan_seconds = seconds_since(t0);
    }

    {   // 5
        Outcome o;
        for (const Run* r : all) {
            const Verdict* v = verdict(r->result, "trace_bound");
            o.require(v && v->passed, r->label);
        }
        int scan_failures = 0;
        for (const auto* set : {&disk_scans, &star_scans})
            for (const ScanSummary& s : *set) scan_failures += s.trace_bound_failures;
        o.require(scan_failures == 0, fmt("%d scan failures", scan_failures));
        o.detail += (o.detail.empty() ? "" : "; ") + fmt("%zu runs and 600 scan fields", all.size());
        record("trace_bound", o);
    }
    {   // 6
        Outcome o;
        for (const auto& [label, scans] : {std::pair{"disk", &disk_scans}, std::pair{"star", &star_scans}}) {
            std::string series;
            for (std::size_t k = 0; k < scans->size(); ++k) {
                const ScanSummary& s = (*scans)[k];
                o.require(s.ms_failures == 0, fmt("%s level %zu above C h^1/2", label, k));
                if (k > 0) o.require(s.ms_max < (*scans)[k - 1].ms_max, fmt("%s level %zu not decreasing", label, k));
                series += fmt("%s%.2e", k ? " " : "", s.ms_max);
            }
            o.detail += (o.detail.empty() ? "" : "; ") + std::string(label) + " " + series;
        }
        o.detail += fmt(" (%.0f s)", scan_seconds);
        record("ms_lemma_scan", o);
    }
    {   // 7
        Outcome o;
        int disk_runs = 0;
        for (const Run* r : all) {
            if (!r->cfg.domain.convex()) continue;
            ++disk_runs;
            const Verdict* v = verdict(r->result, "boundary_sign");
            o.require(v && v->passed && v->enforced, r->label);
        }
        int disk_above = 0;
        for (const ScanSummary& s : disk_scans) disk_above += s.boundary_positive;
        o.require(disk_above == 0, fmt("%d disk trials above tolerance", disk_above));
        int star_raw = 0;
        for (const ScanSummary& s : star_scans) star_raw += s.boundary_positive_raw;
        o.require(star_raw >= 1, "no positive boundary term on the star");
        o.detail += (o.detail.empty() ? "" : "; ") +
                    fmt("%d disk runs, %d disk trials above tolerance, %d positive star trials", disk_runs,
                        disk_above, star_raw);
        record("boundary_sign", o);
    }
    {   // 8
        Outcome o;
        for (const auto& [fluid, min_order] : {std::pair{false, 0.8}, std::pair{true, 0.5}}) {
            std::vector<double> r;
            for (int n : {32, 64, 128}) r.push_back(identity_residual(n, fluid));
            const double p1 = std::log2(r[0] / r[1]);
            const double p2 = std::log2(r[1] / r[2]);
            const char* label = fluid ? "coupled" : "u=0";
            o.require(r[1] < r[0] && r[2] < r[1], std::string(label) + " not decreasing");
            o.require(p1 >= min_order && p2 >= min_order, std::string(label) + " order");
            o.detail += (o.detail.empty() ? "" : "; ") +
                        fmt("%s %.2e %.2e %.2e orders %.2f %.2f", label, r[0], r[1], r[2], p1, p2);
        }
        record("entropy_identity", o);
    }
    {   // 9
        Outcome o;
        for (std::size_t k = 0; k < coarse.size(); ++k) {
            const InequalityReport* a = report(coarse[k].result, "entropy_energy");
            const InequalityReport* b = report(fine[k].result, "entropy_energy");
            if (!a || !b) {
                o.require(false, coarse[k].label + " missing report");
                continue;
            }
            o.require(a->passed && b->passed, coarse[k].label + " slack");
            o.require(std::isfinite(a->constant) && std::isfinite(b->constant), coarse[k].label + " C infinite");
            const double lo = std::min(a->constant, b->constant);
            const double hi = std::max(a->constant, b->constant);
            o.require(hi <= 2 * lo, coarse[k].label + " C unstable");
            o.detail += (o.detail.empty() ? "" : "; ") +
                        fmt("%s C %.4f -> %.4f", coarse[k].label.c_str(), a->constant, b->constant);
        }
        for (const Run& r : small) {
            const InequalityReport* a = report(r.result, "entropy_energy");
            o.require(a && a->passed && std::isfinite(a->constant), r.label);
        }
        record("entropy_energy_inequality", o);
    }
    {   // 10
        Outcome o;
        for (const Run& r : small) {
            const ConvergenceVerdict& c = r.result.convergence;
            o.require(c.passed, r.label + ": " + c.reason);
            o.require(r.seconds <= 600, r.label + " slower than 10 min");
            o.detail += (o.detail.empty() ? "" : "; ") +
                        fmt("%s n %.1e c %.1e u %.1e in %.0f s", r.label.c_str(), c.conv_n_ratio, c.c_max_ratio,
                            c.u_sup_ratio, r.seconds);
        }
        record("convergence_to_steady_state", o);
    }
    {   // 11
        Outcome o;
        MmsOptions opt;
        opt.kind = MmsCase::coupled;
        opt.resolutions = {16, 32, 64};
        const MmsResult m = run_mms(opt);
        double worst = INFINITY;
        for (const auto& row : m.orders)
            for (double p : row) worst = std::min(worst, p);
        o.require(m.levels.size() == 3 && m.orders.size() == 2, "expected three levels");
        o.require(worst >= 0.8, "order below 0.8");
        o.detail += (o.detail.empty() ? "" : "; ") + fmt("minimum order %.3f over n, c, u", worst);
        record("mms_orders", o);
    }
    {   // 12
        Outcome o;
        RunConfig cfg = config("disk_ns_moderate");
        const fs::path a = scratch / "a", b = scratch / "b";
        execute("a", cfg, a.string());
        execute("b", cfg, b.string());
        const std::string da = slurp(a / "diagnostics.csv");
        o.require(!da.empty(), "empty CSV");
        o.require(da == slurp(b / "diagnostics.csv"), "diagnostics.csv differs");
        o.require(slurp(a / "inequalities.csv") == slurp(b / "inequalities.csv"), "inequalities.csv differs");
        o.detail += (o.detail.empty() ? "" : "; ") + fmt("%zu bytes identical", da.size());
        record("determinism", o);
    }
    fs::remove_all(scratch);

    int failed = 0;
    for (const auto& [name, o] : results) failed += o.passed ? 0 : 1;
    std::printf("%zu criteria, %d failed, %.0f s\n", results.size(), failed, seconds_since(wall0));
    return failed == 0 ? 0 : 1;
}
