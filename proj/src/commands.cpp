#include "chemofluid/commands.hpp"

#include "chemofluid/errors.hpp"
#include "chemofluid/run.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace chemofluid {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

std::string g17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

int command_run(const RunConfig& cfg, const std::string& out_dir, std::ostream& os) {
    const RunResult r = run_simulation(cfg, out_dir, &os);
    os << cfg.name << ": " << r.stats.steps << " steps to t = " << r.stats.final_time << '\n';
    for (const Verdict& v : r.verdicts) {
        os << "  " << std::left << std::setw(22) << v.name << (v.passed ? "PASS" : "FAIL")
           << (v.enforced ? "" : " (reported)") << "  value " << v.value << "  tol " << v.tolerance;
        if (!v.detail.empty()) os << "  " << v.detail;
        os << '\n';
    }
    os << "  identity residual max " << r.identity_residual_max << '\n';
    return r.exit_code;
}

int command_validate_model(const RunConfig& cfg, const std::string& out_dir, std::ostream& os) {
    cfg.validate();
    const double c0 = cfg.init.c.base + std::max(0.0, cfg.init.c.amplitude);
    const double c_max = c0 > 0 ? c0 : 1.0;
    const AssumptionReport rep = validate_assumptions(cfg.model.build(), c_max,
                                                      static_cast<std::size_t>(cfg.model.validate_samples));
    os << "chi = " << cfg.model.chi.text() << ", f = " << cfg.model.f.text() << " on [0, " << c_max << "], "
       << rep.samples << " samples\n";
    std::ostringstream csv;
    csv << "condition,passed,worst_s,margin\n";
    for (const ConditionResult& c : rep.conditions) {
        os << "  " << std::left << std::setw(16) << c.name << (c.passed ? "PASS" : "FAIL") << "  margin " << c.margin
           << " at s = " << c.worst_s << '\n';
        csv << c.name << ',' << (c.passed ? 1 : 0) << ',' << g17(c.worst_s) << ',' << g17(c.margin) << '\n';
    }
    if (!out_dir.empty()) write_file_atomic(join(out_dir, "assumptions.csv"), csv.str());
    if (!rep.passed()) {
        os << "first failing condition: " << rep.first_failure() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}

int command_check_geometry(const RunConfig& cfg, const std::string& out_dir, std::ostream& os) {
    cfg.validate();
    const LevelSetDomain domain = cfg.domain.build();
    const Mesh mesh(classify_cells(domain, cfg.h()));
    const GridGeometry& g = mesh.geometry();
    json j;
    j["shape"] = cfg.domain.shape;
    j["description"] = domain.description();
    j["h"] = g.h();
    j["nx"] = g.shape.nx;
    j["ny"] = g.shape.ny;
    j["interior_cells"] = g.count(CellClass::interior);
    j["band_cells"] = g.count(CellClass::boundary_band);
    j["exterior_cells"] = g.count(CellClass::exterior);
    j["merged_cells"] = mesh.merged_cells();
    j["control_volumes"] = mesh.num_cv();
    j["area"] = g.area();
    j["perimeter"] = g.perimeter();
    j["kappa_max"] = g.kappa_max;
    j["diameter"] = g.diameter;
    j["segments"] = g.segments.size();
    os << domain.description() << " at h = " << g.h() << '\n'
       << "  cells: " << g.count(CellClass::interior) << " interior, " << g.count(CellClass::boundary_band)
       << " band, " << mesh.merged_cells() << " merged into neighbours\n"
       << "  area " << g.area() << ", perimeter " << g.perimeter() << ", kappa_max " << g.kappa_max << '\n';
    if (!out_dir.empty()) {
        write_file_atomic(join(out_dir, "geometry.json"), j.dump(2) + "\n");
        std::ostringstream csv;
        csv << "x,y,nx,ny,length,curvature\n";
        for (const BoundarySegment& s : g.segments) {
            csv << g17(s.midpoint.x) << ',' << g17(s.midpoint.y) << ',' << g17(s.normal.x) << ',' << g17(s.normal.y)
                << ',' << g17(s.length) << ',' << g17(s.curvature) << '\n';
        }
        write_file_atomic(join(out_dir, "boundary.csv"), csv.str());
    }
    return kExitOk;
}

int command_mms(const RunConfig& cfg, const std::string& out_dir, std::ostream& os) {
    cfg.validate();
    const MmsResult r = run_mms(cfg.mms);
    std::ostringstream csv;
    csv << "h,dt,steps,err_n,err_c,err_u,order_n,order_c,order_u\n";
    os << (cfg.mms.kind == MmsCase::heat ? "heat" : "coupled") << " manufactured solution\n";
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
        const MmsLevel& l = r.levels[k];
        csv << g17(l.h) << ',' << g17(l.dt) << ',' << l.steps << ',' << g17(l.err_n) << ',' << g17(l.err_c) << ','
            << g17(l.err_u);
        os << "  h = " << std::setw(10) << std::left << l.h << " err n " << l.err_n << "  c " << l.err_c << "  u "
           << l.err_u;
        if (k > 0) {
            const auto& o = r.orders[k - 1];
            csv << ',' << g17(o[0]) << ',' << g17(o[1]) << ',' << g17(o[2]);
            os << "  | order " << o[0] << ", " << o[1] << ", " << o[2];
        } else {
            csv << ",,,";
        }
        csv << '\n';
        os << '\n';
    }
    os << (r.passed ? "PASS" : "FAIL") << ": minimum order " << cfg.mms.min_order << '\n';
    if (!out_dir.empty()) write_file_atomic(join(out_dir, "mms.csv"), csv.str());
    return r.passed ? kExitOk : kExitValidation;
}

int command_scan(const RunConfig& cfg, const std::string& out_dir, std::ostream& os) {
    cfg.validate();
    const LevelSetDomain domain = cfg.domain.build();
    auto mesh = std::make_shared<const Mesh>(classify_cells(domain, cfg.h()));
    ScanOptions opt = cfg.scan;
    opt.seed = cfg.seed;
    const ScanSummary s = scan_inequalities(domain, mesh, cfg.model.build(), opt);
    const bool convex = cfg.domain.convex();
    const bool passed = s.ms_failures == 0 && s.trace_bound_failures == 0 &&
                        (!convex || (s.boundary_positive == 0 && s.grad_hess_failures == 0));
    os << opt.trials << " trials on " << domain.description() << " at h = " << cfg.h() << '\n'
       << "  ms_lemma        max " << s.ms_max << ", failures " << s.ms_failures << '\n'
       << "  boundary_sign   max " << s.boundary_max << ", above tolerance " << s.boundary_positive
       << ", positive " << s.boundary_positive_raw << (convex ? "" : " (reported)") << '\n'
       << "  gradient_hessian max ratio " << s.grad_hess_max_ratio << ", failures " << s.grad_hess_failures
       << (convex ? "" : " (reported)") << '\n'
       << "  trace_bound     max " << s.trace_bound_max << ", failures " << s.trace_bound_failures << '\n'
       << (passed ? "PASS" : "FAIL") << '\n';
    if (!out_dir.empty()) {
        std::ostringstream csv;
        write_inequality_csv(csv, s.reports);
        write_file_atomic(join(out_dir, "inequalities.csv"), csv.str());
        json j{{"trials", opt.trials},
               {"seed", opt.seed},
               {"h", cfg.h()},
               {"convex", convex},
               {"ms_max", number(s.ms_max)},
               {"ms_failures", s.ms_failures},
               {"boundary_max", number(s.boundary_max)},
               {"boundary_above_tolerance", s.boundary_positive},
               {"boundary_positive", s.boundary_positive_raw},
               {"gradient_hessian_max_ratio", number(s.grad_hess_max_ratio)},
               {"gradient_hessian_failures", s.grad_hess_failures},
               {"trace_bound_max", number(s.trace_bound_max)},
               {"trace_bound_failures", s.trace_bound_failures},
               {"passed", passed}};
        write_file_atomic(join(out_dir, "scan.json"), j.dump(2) + "\n");
    }
    return passed ? kExitOk : kExitValidation;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"run", "validate-model", "check-geometry", "mms", "scan-inequalities"};
    return names;
}

int run_command(const std::string& verb, const RunConfig& cfg, const std::string& out_dir, std::ostream& os) {
    if (verb == "run") return command_run(cfg, out_dir, os);
    if (verb == "validate-model") return command_validate_model(cfg, out_dir, os);
    if (verb == "check-geometry") return command_check_geometry(cfg, out_dir, os);
    if (verb == "mms") return command_mms(cfg, out_dir, os);
    if (verb == "scan-inequalities") return command_scan(cfg, out_dir, os);
    throw ConfigError("unknown command '" + verb + "'");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const GeometryError*>(&e)) return kExitConfig;
    if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
    if (dynamic_cast<const SolverAbort*>(&e)) return kExitSolver;
    return kExitError;
}

} // namespace chemofluid
