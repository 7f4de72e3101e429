#include "cohlim/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace cohlim {

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const json& need(const json& obj, const std::string& ptr, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(child(ptr, key), "required field missing");
    return obj.at(key);
}

void require_object(const json& j, const std::string& ptr) {
    if (!j.is_object()) throw ConfigError(ptr, "expected an object");
}

void reject_unknown(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ConfigError(child(ptr, key), "unknown field");
    }
}

double number(const json& j, const std::string& ptr) {
    if (!j.is_number()) throw ConfigError(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(ptr, "expected a finite number");
    return v;
}

double positive(const json& j, const std::string& ptr) {
    const double v = number(j, ptr);
    if (v <= 0.0) throw ConfigError(ptr, "must be positive");
    return v;
}

std::string string(const json& j, const std::string& ptr) {
    if (!j.is_string()) throw ConfigError(ptr, "expected a string");
    return j.get<std::string>();
}

std::size_t count(const json& j, const std::string& ptr) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(ptr, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

// A complex number is either a plain number or [re, im].
cplx complex_value(const json& j, const std::string& ptr) {
    if (j.is_number()) return number(j, ptr);
    if (j.is_array() && j.size() == 2) return {number(j[0], child(ptr, 0)), number(j[1], child(ptr, 1))};
    throw ConfigError(ptr, "expected a number or [re, im]");
}

json complex_json(cplx z) {
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
}

Point point(const json& j, const std::string& ptr, int dim) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ConfigError(ptr, "expected an array of " + std::to_string(dim) + " numbers");
    Point p{};
    for (int i = 0; i < dim; ++i) p[i] = number(j[i], child(ptr, i));
    return p;
}

json point_json(const Point& p, int dim) { return json(std::vector<double>(p.begin(), p.begin() + dim)); }

std::vector<double> numbers(const json& j, const std::string& ptr) {
    if (!j.is_array()) throw ConfigError(ptr, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], child(ptr, i)));
    return v;
}

GridSpec parse_grid(const json& j, const std::string& ptr) {
    require_object(j, ptr);
    reject_unknown(j, ptr, {"d", "R", "N"});
    GridSpec g;
    const json& d = need(j, ptr, "d");
    if (!d.is_number_integer() || d.get<int>() < 1 || d.get<int>() > 3) throw ConfigError(child(ptr, "d"), "must be 1, 2 or 3");
    g.dim = d.get<int>();
    g.half_width = positive(need(j, ptr, "R"), child(ptr, "R"));
    g.cells = count(need(j, ptr, "N"), child(ptr, "N"));
    if (g.cells < 2) throw ConfigError(child(ptr, "N"), "need at least 2 cells per axis");
    return g;
}

MeasureSpec parse_measure(const json& j, const std::string& ptr) {
    require_object(j, ptr);
    reject_unknown(j, ptr, {"kind", "atoms", "values"});
    MeasureSpec m;
    m.kind = string(need(j, ptr, "kind"), child(ptr, "kind"));
    if (m.kind == "atoms") {
        const std::string ap = child(ptr, "atoms");
        const json& a = need(j, ptr, "atoms");
        if (!a.is_array() || a.empty()) throw ConfigError(ap, "expected a nonempty array of [angle, weight]");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::string ip = child(ap, i);
            if (!a[i].is_array() || a[i].size() != 2) throw ConfigError(ip, "expected [angle, weight]");
            const double w = number(a[i][1], child(ip, 1));
            if (w < 0.0) throw ConfigError(child(ip, 1), "weight must be nonnegative");
            m.atoms.push_back({number(a[i][0], child(ip, 0)), w});
        }
    } else if (m.kind == "density") {
        m.density = numbers(need(j, ptr, "values"), child(ptr, "values"));
        if (m.density.size() < 2) throw ConfigError(child(ptr, "values"), "need at least two samples");
    } else if (m.kind != "uniform") {
        throw ConfigError(child(ptr, "kind"), "expected uniform, atoms or density");
    }
    try {
        (void)m.make();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr, e.what());
    }
    return m;
}

DensitySpec parse_density(const json& j, const std::string& ptr, int dim) {
    require_object(j, ptr);
    reject_unknown(j, ptr, {"kind", "value", "center", "width", "values"});
    DensitySpec d;
    d.kind = string(need(j, ptr, "kind"), child(ptr, "kind"));
    if (d.kind == "constant" || d.kind == "gaussian") {
        d.value = number(need(j, ptr, "value"), child(ptr, "value"));
        if (d.value < 0.0) throw ConfigError(child(ptr, "value"), "density must be nonnegative");
        if (d.kind == "gaussian") {
            d.center = point(need(j, ptr, "center"), child(ptr, "center"), dim);
            d.width = positive(need(j, ptr, "width"), child(ptr, "width"));
        }
    } else if (d.kind == "values") {
        d.values = numbers(need(j, ptr, "values"), child(ptr, "values"));
        for (std::size_t i = 0; i < d.values.size(); ++i)
            if (d.values[i] < 0.0) throw ConfigError(child(child(ptr, "values"), i), "density must be nonnegative");
    } else {
        throw ConfigError(child(ptr, "kind"), "expected constant, gaussian or values");
    }
    return d;
}

FunctionSpec parse_function(const json& j, const std::string& ptr, int dim) {
    require_object(j, ptr);
    FunctionSpec f;
    const std::string kind = string(need(j, ptr, "kind"), child(ptr, "kind"));
    if (kind == "file") {
        reject_unknown(j, ptr, {"kind", "path"});
        f.path = string(need(j, ptr, "path"), child(ptr, "path"));
        return f;
    }
    reject_unknown(j, ptr, {"kind", "amplitude", "center", "width", "shift"});
    ClosedForm c;
    try {
        c.kind = closed_form_kind(kind);
    } catch (const std::invalid_argument&) {
        throw ConfigError(child(ptr, "kind"), "expected gaussian, box, plane_wave or file");
    }
    c.dim = dim;
    if (j.contains("amplitude")) c.amplitude = complex_value(j["amplitude"], child(ptr, "amplitude"));
    if (j.contains("center")) c.center = point(j["center"], child(ptr, "center"), dim);
    c.width = positive(need(j, ptr, "width"), child(ptr, "width"));
    if (j.contains("shift")) c.shift = point(j["shift"], child(ptr, "shift"), dim);
    f.closed = c;
    return f;
}

Assertion parse_assertion(const json& j, const std::string& ptr) {
    require_object(j, ptr);
    reject_unknown(j, ptr, {"quantity", "op", "expected", "tolerance"});
    Assertion a;
    a.quantity = string(need(j, ptr, "quantity"), child(ptr, "quantity"));
    a.op = string(need(j, ptr, "op"), child(ptr, "op"));
    if (a.op == "abs" || a.op == "rel") {
        a.expected = number(need(j, ptr, "expected"), child(ptr, "expected"));
        a.tolerance = number(need(j, ptr, "tolerance"), child(ptr, "tolerance"));
        if (a.tolerance < 0.0) throw ConfigError(child(ptr, "tolerance"), "must be nonnegative");
    } else if (a.op == "max" || a.op == "min") {
        // The bound itself is the tolerance; no hidden default.
        a.tolerance = number(need(j, ptr, "tolerance"), child(ptr, "tolerance"));
        if (j.contains("expected")) throw ConfigError(child(ptr, "expected"), "not used with max/min");
    } else {
        throw ConfigError(child(ptr, "op"), "expected abs, rel, max or min");
    }
    return a;
}

const std::set<std::string> kStochastic{"clt", "chi", "moments", "decohere"};

}  // namespace

PhaseMeasure MeasureSpec::make() const {
    if (kind == "atoms") return PhaseMeasure::atoms(atoms);
    if (kind == "density") return PhaseMeasure::density(density);
    return PhaseMeasure::uniform();
}

DensityFunction DensitySpec::function() const {
    if (kind == "constant") return [v = value](const Point&) { return v; };
    if (kind == "gaussian") {
        return [v = value, c = center, w = width](const Point& k) {
            double r2 = 0.0;
            for (int i = 0; i < 3; ++i) r2 += (k[i] - c[i]) * (k[i] - c[i]);
            return v * std::exp(-r2 / (2.0 * w * w));
        };
    }
    throw std::invalid_argument("density of kind '" + kind + "' has no closed form");
}

ModeDensity DensitySpec::make(const MomentumGrid& grid) const {
    if (kind == "values") {
        if (values.size() != grid.size()) throw ConfigError("/density/values", "length does not match the grid");
        return ModeDensity(grid, values);
    }
    return ModeDensity::sample(grid, function());
}

TestFunction FunctionSpec::make(const MomentumGrid& grid) const {
    if (closed) return TestFunction::from_closed_form(grid, *closed);
    auto v = read_complex_column(path);
    if (v.size() != grid.size())
        throw std::invalid_argument("function file '" + path + "' has " + std::to_string(v.size()) +
                                    " values, grid has " + std::to_string(grid.size()));
    return TestFunction(grid, std::move(v), {}, std::filesystem::path(path).filename().string());
}

cplx ExperimentConfig::second_moment() const {
    if (mu2) return *mu2;
    if (measure) return fourier_moment(measure->make(), 2);
    throw ConfigError("/measure", "a phase measure or mu2 is required");
}

std::vector<TestFunction> ExperimentConfig::battery() const {
    const MomentumGrid g = grid.make();
    std::vector<TestFunction> out;
    for (const auto& f : functions) out.push_back(f.make(g));
    return out;
}

ModeDensity ExperimentConfig::reservoir() const {
    if (!density) throw ConfigError("/density", "a mode density is required");
    return density->make(grid.make());
}

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
    require_object(j, "");
    reject_unknown(j, "", {"schema", "experiment", "grid", "measure", "mu2", "density", "functions", "modes",
                           "dispersion", "seed", "threads", "params", "assertions"});
    if (j.contains("schema") && (!j["schema"].is_string() || j["schema"] != kSchemaVersion))
        throw ConfigError("/schema", std::string("unsupported schema; expected \"") + kSchemaVersion + "\"");
    ExperimentConfig c;
    c.base_dir = base_dir;
    c.experiment = string(need(j, "", "experiment"), "/experiment");
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw ConfigError("/experiment", "unknown experiment '" + c.experiment + "'");
    c.grid = parse_grid(need(j, "", "grid"), "/grid");
    if (j.contains("measure")) c.measure = parse_measure(j["measure"], "/measure");
    if (j.contains("mu2")) {
        if (c.measure) throw ConfigError("/mu2", "give either a measure or mu2, not both");
        c.mu2 = complex_value(j["mu2"], "/mu2");
        if (std::abs(*c.mu2) > 1.0 + 1e-12) throw ConfigError("/mu2", "|mu2| must be <= 1");
    }
    if (j.contains("density")) c.density = parse_density(j["density"], "/density", c.grid.dim);
    if (j.contains("functions")) {
        const json& fs = j["functions"];
        if (!fs.is_array()) throw ConfigError("/functions", "expected an array");
        for (std::size_t i = 0; i < fs.size(); ++i) {
            FunctionSpec f = parse_function(fs[i], child("/functions", i), c.grid.dim);
            if (!f.path.empty() && !base_dir.empty() && std::filesystem::path(f.path).is_relative())
                f.path = (std::filesystem::path(base_dir) / f.path).string();
            c.functions.push_back(std::move(f));
        }
    }
    if (j.contains("modes")) {
        const json& ms = j["modes"];
        if (!ms.is_array()) throw ConfigError("/modes", "expected an array");
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const std::string ip = child("/modes", i);
            require_object(ms[i], ip);
            reject_unknown(ms[i], ip, {"k", "rho", "theta"});
            CoherentMode m;
            m.k = point(need(ms[i], ip, "k"), child(ip, "k"), c.grid.dim);
            m.rho = number(need(ms[i], ip, "rho"), child(ip, "rho"));
            if (m.rho < 0.0) throw ConfigError(child(ip, "rho"), "must be nonnegative");
            m.theta = number(need(ms[i], ip, "theta"), child(ip, "theta"));
            c.modes.push_back(m);
        }
        c.modes = validated(std::move(c.modes));
    }
    if (j.contains("dispersion")) {
        c.dispersion = string(j["dispersion"], "/dispersion");
        if (*c.dispersion != "photon" && *c.dispersion != "quadratic")
            throw ConfigError("/dispersion", "expected photon or quadratic");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("/seed", "expected a nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("threads")) {
        const std::size_t t = count(j["threads"], "/threads");
        if (t == 0) throw ConfigError("/threads", "must be at least 1");
        c.threads = static_cast<unsigned>(t);
    }
    if (j.contains("params")) {
        require_object(j["params"], "/params");
        c.params = j["params"];
    }
    if (j.contains("assertions")) {
        const json& as = j["assertions"];
        if (!as.is_array()) throw ConfigError("/assertions", "expected an array");
        for (std::size_t i = 0; i < as.size(); ++i) c.assertions.push_back(parse_assertion(as[i], child("/assertions", i)));
    }
    if (kStochastic.count(c.experiment) && !c.seed)
        throw ConfigError("/seed", "experiment '" + c.experiment + "' is stochastic; a seed is required");
    return c;
}

json serialize_config(const ExperimentConfig& c) {
    json j;
    j["schema"] = kSchemaVersion;
    j["experiment"] = c.experiment;
    j["grid"] = {{"d", c.grid.dim}, {"R", c.grid.half_width}, {"N", c.grid.cells}};
    if (c.measure) {
        json m{{"kind", c.measure->kind}};
        if (c.measure->kind == "atoms") {
            m["atoms"] = json::array();
            for (const auto& a : c.measure->atoms) m["atoms"].push_back(json::array({a.angle, a.weight}));
        }
        if (c.measure->kind == "density") m["values"] = c.measure->density;
        j["measure"] = m;
    }
    if (c.mu2) j["mu2"] = complex_json(*c.mu2);
    if (c.density) {
        const DensitySpec& d = *c.density;
        json dj{{"kind", d.kind}};
        if (d.kind == "values") {
            dj["values"] = d.values;
        } else {
            dj["value"] = d.value;
            if (d.kind == "gaussian") {
                dj["center"] = point_json(d.center, c.grid.dim);
                dj["width"] = d.width;
            }
        }
        j["density"] = dj;
    }
    if (!c.functions.empty()) {
        j["functions"] = json::array();
        for (const auto& f : c.functions) {
            if (!f.closed) {
                j["functions"].push_back({{"kind", "file"}, {"path", f.path}});
                continue;
            }
            const ClosedForm& cf = *f.closed;
            j["functions"].push_back({{"kind", to_string(cf.kind)},
                                      {"amplitude", complex_json(cf.amplitude)},
                                      {"center", point_json(cf.center, c.grid.dim)},
                                      {"width", cf.width},
                                      {"shift", point_json(cf.shift, c.grid.dim)}});
        }
    }
    if (!c.modes.empty()) {
        j["modes"] = json::array();
        for (const auto& m : c.modes)
            j["modes"].push_back({{"k", point_json(m.k, c.grid.dim)}, {"rho", m.rho}, {"theta", m.theta}});
    }
    if (c.dispersion) j["dispersion"] = *c.dispersion;
    if (c.seed) j["seed"] = *c.seed;
    if (c.threads) j["threads"] = *c.threads;
    if (!c.params.empty()) j["params"] = c.params;
    if (!c.assertions.empty()) {
        j["assertions"] = json::array();
        for (const auto& a : c.assertions) {
            json aj{{"quantity", a.quantity}, {"op", a.op}, {"tolerance", a.tolerance}};
            if (a.op == "abs" || a.op == "rel") aj["expected"] = a.expected;
            j["assertions"].push_back(aj);
        }
    }
    return j;
}

std::vector<ExperimentConfig> load_configs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    const std::string base = std::filesystem::path(path).parent_path().string();
    std::vector<ExperimentConfig> out;
    if (j.is_object() && j.contains("experiments")) {
        const json& list = j["experiments"];
        if (!list.is_array() || list.empty()) throw ConfigError("/experiments", "expected a nonempty array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            try {
                out.push_back(parse_config(list[i], base));
            } catch (const ConfigError& e) {
                throw ConfigError(child("/experiments", i) + e.pointer(), e.message());
            }
        }
        return out;
    }
    out.push_back(parse_config(j, base));
    return out;
}

std::string digest(const json& j) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<AssertionOutcome> evaluate_assertions(const std::vector<Assertion>& assertions, const json& values) {
    std::vector<AssertionOutcome> out;
    for (const auto& a : assertions) {
        AssertionOutcome r{a, 0.0, false, {}};
        if (!values.contains(a.quantity) || !values[a.quantity].is_number()) {
            r.message = "quantity '" + a.quantity + "' not produced by this experiment";
            out.push_back(r);
            continue;
        }
        r.actual = values[a.quantity].get<double>();
        char buf[160];
        if (a.op == "abs") {
            const double err = std::abs(r.actual - a.expected);
            r.passed = err <= a.tolerance;
            std::snprintf(buf, sizeof buf, "|%.12g - %.12g| = %.3g (tol %.3g)", r.actual, a.expected, err, a.tolerance);
        } else if (a.op == "rel") {
            const double err = std::abs(r.actual - a.expected) / std::max(std::abs(a.expected), 1e-300);
            r.passed = err <= a.tolerance;
            std::snprintf(buf, sizeof buf, "rel err %.3g of %.12g vs %.12g (tol %.3g)", err, r.actual, a.expected, a.tolerance);
        } else if (a.op == "max") {
            r.passed = r.actual <= a.tolerance;
            std::snprintf(buf, sizeof buf, "%.12g <= %.12g", r.actual, a.tolerance);
        } else {
            r.passed = r.actual >= a.tolerance;
            std::snprintf(buf, sizeof buf, "%.12g >= %.12g", r.actual, a.tolerance);
        }
        r.message = buf;
        out.push_back(r);
    }
    return out;
}

double param_number(const ExperimentConfig& c, const std::string& key, std::optional<double> fallback) {
    if (!c.params.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError("/params/" + key, "required field missing");
    }
    return number(c.params[key], "/params/" + key);
}

std::string param_string(const ExperimentConfig& c, const std::string& key, std::optional<std::string> fallback) {
    if (!c.params.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError("/params/" + key, "required field missing");
    }
    return string(c.params[key], "/params/" + key);
}

}  // namespace cohlim
