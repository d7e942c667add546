#include "chemofluid/config.hpp"

#include "chemofluid/errors.hpp"
#include "chemofluid/grid_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace chemofluid {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
    double out = 0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) throw ConfigError("expected a number, got '" + v + "'");
    return out;
}

long to_long(const std::string& v) {
    long out = 0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("expected an integer, got '" + v + "'");
    return out;
}

int to_int(const std::string& v) {
    const long x = to_long(v);
    if (x < INT32_MIN || x > INT32_MAX) throw ConfigError("integer out of range: '" + v + "'");
    return static_cast<int>(x);
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
    if (out.empty()) throw ConfigError("expected a comma separated list");
    return out;
}

FunctionSpec to_function(const std::string& v) {
    const auto open = v.find('(');
    if (open == std::string::npos || v.back() != ')') throw ConfigError("expected name(args), got '" + v + "'");
    FunctionSpec f;
    f.kind = trim(v.substr(0, open));
    const std::string inner = trim(v.substr(open + 1, v.size() - open - 2));
    f.args = inner.empty() ? std::vector<double>{} : to_list(inner);
    const std::map<std::string, std::size_t> arity{{"constant", 1}, {"saturating", 2}, {"decaying", 2}};
    if (f.kind == "polynomial") {
        if (f.args.empty()) throw ConfigError("polynomial needs at least one coefficient");
    } else if (auto it = arity.find(f.kind); it != arity.end()) {
        if (f.args.size() != it->second) {
            throw ConfigError(f.kind + " takes " + std::to_string(it->second) + " argument(s)");
        }
    } else {
        throw ConfigError("unknown function '" + f.kind + "'");
    }
    return f;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

#define CF_DOUBLE(key, field) {key, [](RunConfig& c, const std::string& v) { c.field = to_double(v); }}
#define CF_INT(key, field) {key, [](RunConfig& c, const std::string& v) { c.field = to_int(v); }}
#define CF_BOOL(key, field) {key, [](RunConfig& c, const std::string& v) { c.field = to_bool(v); }}
#define CF_STRING(key, field) {key, [](RunConfig& c, const std::string& v) { c.field = v; }}

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table{
        CF_STRING("name", name),
        {"seed",
         [](RunConfig& c, const std::string& v) {
             const long s = to_long(v);
             if (s < 0) throw ConfigError("seed must be non-negative");
             c.seed = static_cast<std::uint64_t>(s);
             c.scan.seed = c.seed;
         }},
        {"domain.shape",
         [](RunConfig& c, const std::string& v) {
             if (v != "disk" && v != "annulus" && v != "star" && v != "samples") {
                 throw ConfigError("domain.shape must be disk, annulus, star or samples");
             }
             c.domain.shape = v;
         }},
        CF_DOUBLE("domain.radius", domain.radius),
        CF_DOUBLE("domain.center_x", domain.center_x),
        CF_DOUBLE("domain.center_y", domain.center_y),
        CF_DOUBLE("domain.inner", domain.inner),
        CF_DOUBLE("domain.outer", domain.outer),
        CF_INT("domain.k", domain.k),
        CF_DOUBLE("domain.amplitude", domain.amplitude),
        CF_DOUBLE("domain.base", domain.base),
        CF_STRING("domain.path", domain.path),
        CF_INT("grid.n", grid_n),
        {"model.chi", [](RunConfig& c, const std::string& v) { c.model.chi = to_function(v); }},
        {"model.f", [](RunConfig& c, const std::string& v) { c.model.f = to_function(v); }},
        CF_DOUBLE("model.gravity", model.gravity),
        CF_DOUBLE("model.kappa_ns", model.kappa_ns),
        CF_INT("model.validate_samples", model.validate_samples),
        CF_DOUBLE("init.n.base", init.n.base),
        CF_DOUBLE("init.n.amplitude", init.n.amplitude),
        CF_DOUBLE("init.n.center_x", init.n.center.x),
        CF_DOUBLE("init.n.center_y", init.n.center.y),
        CF_DOUBLE("init.n.width", init.n.width),
        CF_DOUBLE("init.c.base", init.c.base),
        CF_DOUBLE("init.c.amplitude", init.c.amplitude),
        CF_DOUBLE("init.c.center_x", init.c.center.x),
        CF_DOUBLE("init.c.center_y", init.c.center.y),
        CF_DOUBLE("init.c.width", init.c.width),
        {"init.u",
         [](RunConfig& c, const std::string& v) {
             if (v == "zero") c.init.velocity = VelocityProfile::zero;
             else if (v == "vortex") c.init.velocity = VelocityProfile::vortex;
             else throw ConfigError("init.u must be zero or vortex");
         }},
        CF_DOUBLE("init.vortex.strength", init.vortex.strength),
        CF_DOUBLE("init.vortex.radius", init.vortex.radius),
        CF_DOUBLE("init.vortex.center_x", init.vortex.center.x),
        CF_DOUBLE("init.vortex.center_y", init.vortex.center.y),
        CF_DOUBLE("solver.dt_max", solver.dt_max),
        CF_DOUBLE("solver.cfl_safety", solver.cfl_safety),
        CF_DOUBLE("solver.end_time", solver.end_time),
        CF_DOUBLE("solver.linear_tol", solver.linear_tol),
        CF_DOUBLE("solver.scalar_tol", solver.scalar_tol),
        CF_INT("solver.max_cg_iterations", solver.max_cg_iterations),
        {"solver.preconditioner",
         [](RunConfig& c, const std::string& v) {
             if (v == "none") c.solver.preconditioner = Preconditioner::none;
             else if (v == "jacobi") c.solver.preconditioner = Preconditioner::jacobi;
             else if (v == "ic") c.solver.preconditioner = Preconditioner::incomplete_cholesky;
             else if (v == "cholesky") c.solver.preconditioner = Preconditioner::cholesky;
             else throw ConfigError("solver.preconditioner must be none, jacobi, ic or cholesky");
         }},
        CF_BOOL("solver.fluid", solver.fluid),
        CF_BOOL("solver.dt_ladder", solver.dt_ladder),
        {"solver.max_steps", [](RunConfig& c, const std::string& v) { c.max_steps = to_long(v); }},
        CF_STRING("output.dir", output.dir),
        CF_INT("output.every", output.every),
        CF_INT("output.snapshot_every", output.snapshot_every),
        CF_BOOL("diagnostics.enabled", diagnostics.enabled),
        CF_DOUBLE("diagnostics.c_floor", diagnostics.c_floor),
        CF_DOUBLE("diagnostics.c_check", diagnostics.c_check),
        CF_BOOL("diagnostics.ms", diagnostics.ms),
        CF_BOOL("diagnostics.boundary_sign", diagnostics.boundary_sign),
        CF_BOOL("diagnostics.gradient_hessian", diagnostics.gradient_hessian),
        CF_BOOL("diagnostics.trace_bound", diagnostics.trace_bound),
        CF_DOUBLE("diagnostics.energy_slack", diagnostics.energy_slack),
        CF_INT("scan.trials", scan.trials),
        CF_INT("scan.modes", scan.modes),
        CF_DOUBLE("scan.cutoff", scan.cutoff),
        CF_DOUBLE("scan.c_check", scan.c_check),
        CF_DOUBLE("scan.c_mean", scan.c_mean),
        CF_DOUBLE("scan.c_spread", scan.c_spread),
        {"mms.case",
         [](RunConfig& c, const std::string& v) {
             if (v == "heat") c.mms.kind = MmsCase::heat;
             else if (v == "coupled") c.mms.kind = MmsCase::coupled;
             else throw ConfigError("mms.case must be heat or coupled");
         }},
        {"mms.resolutions",
         [](RunConfig& c, const std::string& v) {
             c.mms.resolutions.clear();
             for (double r : to_list(v)) {
                 if (r != std::floor(r)) throw ConfigError("mms.resolutions must be integers");
                 c.mms.resolutions.push_back(static_cast<int>(r));
             }
         }},
        CF_DOUBLE("mms.end_time", mms.end_time),
        CF_DOUBLE("mms.dt_per_h", mms.dt_per_h),
        CF_DOUBLE("mms.amplitude", mms.amplitude),
        CF_DOUBLE("mms.stream_amplitude", mms.stream_amplitude),
        CF_DOUBLE("mms.gravity", mms.gravity),
        CF_DOUBLE("mms.kappa_ns", mms.kappa_ns),
        CF_DOUBLE("mms.min_order", mms.min_order),
    };
    return table;
}

#undef CF_DOUBLE
#undef CF_INT
#undef CF_BOOL
#undef CF_STRING

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

} // namespace

LevelSetDomain DomainSpec::build() const {
    if (shape == "disk") return LevelSetDomain::disk(radius, {center_x, center_y});
    if (shape == "annulus") return LevelSetDomain::annulus(inner, outer);
    if (shape == "star") return LevelSetDomain::star(k, amplitude, base);
    if (shape == "samples") {
        try {
            return LevelSetDomain::from_samples(find_block(read_grid_file(path), "phi"));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError("domain.path '" + path + "': " + e.what());
        }
    }
    throw ConfigError("unknown domain.shape '" + shape + "'");
}

ScalarFunction FunctionSpec::build() const {
    if (kind == "constant") return ScalarFunction::constant(args.at(0));
    if (kind == "polynomial") return ScalarFunction::polynomial(args);
    if (kind == "saturating") return ScalarFunction::saturating(args.at(0), args.at(1));
    if (kind == "decaying") return ScalarFunction::decaying(args.at(0), args.at(1));
    throw ConfigError("unknown function '" + kind + "'");
}

std::string FunctionSpec::text() const {
    std::ostringstream os;
    os.precision(17);
    os << kind << '(';
    for (std::size_t k = 0; k < args.size(); ++k) os << (k ? ", " : "") << args[k];
    os << ')';
    return os.str();
}

KineticsModel ModelSpec::build() const {
    KineticsModel m;
    m.chi = chi.build();
    m.f = f.build();
    m.gravity = gravity;
    m.kappa_ns = kappa_ns;
    return m;
}

void RunConfig::validate() const {
    require(grid_n >= 8, "grid.n must be at least 8");
    require(grid_n <= 4096, "grid.n must be at most 4096");
    if (domain.shape == "disk") require(domain.radius > 0, "domain.radius must be positive");
    if (domain.shape == "annulus") {
        require(domain.inner > 0 && domain.outer > domain.inner, "annulus needs 0 < domain.inner < domain.outer");
    }
    if (domain.shape == "star") {
        require(domain.k >= 1, "domain.k must be at least 1");
        require(domain.base > 0, "domain.base must be positive");
        require(domain.amplitude >= 0 && domain.amplitude < 1, "domain.amplitude must lie in [0, 1)");
    }
    if (domain.shape == "samples") require(!domain.path.empty(), "domain.path is required for samples");
    require(model.validate_samples >= 2, "model.validate_samples must be at least 2");
    require(init.n.width > 0 && init.c.width > 0, "init widths must be positive");
    require(init.vortex.radius > 0, "init.vortex.radius must be positive");
    require(max_steps >= 0, "solver.max_steps must be non-negative");
    solver.validate();
    require(output.every >= 1, "output.every must be at least 1");
    require(output.snapshot_every >= 0, "output.snapshot_every must be non-negative");
    require(!output.dir.empty(), "output.dir must not be empty");
    require(diagnostics.c_floor >= 0, "diagnostics.c_floor must be non-negative");
    require(diagnostics.c_check > 0, "diagnostics.c_check must be positive");
    require(diagnostics.energy_slack >= 0, "diagnostics.energy_slack must be non-negative");
    require(scan.trials >= 1, "scan.trials must be at least 1");
    require(scan.modes >= 1, "scan.modes must be at least 1");
    require(scan.cutoff > 0, "scan.cutoff must be positive");
    require(scan.c_check > 0, "scan.c_check must be positive");
    require(scan.c_spread > 0 && scan.c_mean - scan.c_spread > 0, "scan needs c_mean > c_spread > 0");
    require(mms.end_time > 0 && mms.dt_per_h > 0, "mms.end_time and mms.dt_per_h must be positive");
    for (int r : mms.resolutions) require(r >= 8, "mms.resolutions entries must be at least 8");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    std::map<std::string, const Setter*> index;
    for (const auto& [key, fn] : setters()) index[key] = &fn;

    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no) + ": ";
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = index.find(key);
        if (it == index.end()) throw ConfigError(where + "unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
        if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
        try {
            (*it->second)(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + key + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [key, fn] : setters()) k.push_back(key);
        return k;
    }();
    return keys;
}

} // namespace chemofluid
