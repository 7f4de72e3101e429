#include "cohlim/experiments.hpp"

#include "cohlim/gns_reps.hpp"
#include "cohlim/ito_sampler.hpp"
#include "cohlim/moments.hpp"
#include "cohlim/open_system.hpp"
#include "cohlim/parallel.hpp"
#include "cohlim/stats.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

namespace cohlim {

bool ResultRecord::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const AssertionOutcome& a) { return a.passed; });
}

json ResultRecord::to_json() const {
    json j;
    j["schema"] = kSchemaVersion;
    j["experiment"] = experiment;
    j["inputs_digest"] = inputs_digest;
    j["values"] = values;
    j["values_digest"] = values_digest();
    j["params_used"] = params_used;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["runtime_seconds"] = runtime_seconds;
    j["assertions"] = json::array();
    json tolerances = json::object();
    for (const auto& a : assertions) {
        j["assertions"].push_back({{"quantity", a.assertion.quantity},
                                   {"op", a.assertion.op},
                                   {"tolerance", a.assertion.tolerance},
                                   {"actual", a.actual},
                                   {"passed", a.passed},
                                   {"detail", a.message}});
        tolerances[a.assertion.quantity] = a.assertion.tolerance;
    }
    j["tolerances"] = tolerances;
    j["passed"] = passed();
    return j;
}

std::string ResultRecord::to_csv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    char buf[32];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::vector<double> parse_time_grid(const std::string& text) {
    double a = 0, b = 0, h = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> a >> c1 >> b >> c2 >> h) || c1 != ':' || c2 != ':' || !(h > 0.0) || b < a)
        throw std::invalid_argument("time grid must be start:stop:step with step > 0 and stop >= start");
    std::vector<double> t;
    const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) t.push_back(a + static_cast<double>(i) * h);
    return t;
}

namespace {

using Clock = std::chrono::steady_clock;

std::size_t param_count(const ExperimentConfig& c, const std::string& key, std::optional<std::size_t> fallback = {}) {
    const double v = param_number(c, key, fallback ? std::optional<double>(static_cast<double>(*fallback)) : std::nullopt);
    if (v < 0.0 || v != std::floor(v)) throw ConfigError("/params/" + key, "expected a nonnegative integer");
    return static_cast<std::size_t>(v);
}

std::vector<double> times_of(const ExperimentConfig& c) {
    if (c.params.contains("t")) {
        const json& t = c.params["t"];
        if (!t.is_array() || t.empty()) throw ConfigError("/params/t", "expected a nonempty array of times");
        std::vector<double> out;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!t[i].is_number()) throw ConfigError("/params/t/" + std::to_string(i), "expected a number");
            out.push_back(t[i].get<double>());
        }
        return out;
    }
    try {
        return parse_time_grid(param_string(c, "t_grid"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("/params/t_grid", e.what());
    }
}

std::vector<TestFunction> need_functions(const ExperimentConfig& c, std::size_t at_least) {
    if (c.functions.size() < at_least)
        throw ConfigError("/functions", "need at least " + std::to_string(at_least) + " test function(s)");
    return c.battery();
}

std::uint64_t need_seed(const ExperimentConfig& c) {
    if (!c.seed) throw ConfigError("/seed", "a seed is required for this experiment");
    return *c.seed;
}

PhaseMeasure need_measure(const ExperimentConfig& c) {
    if (!c.measure) throw ConfigError("/measure", "a phase measure is required");
    return c.measure->make();
}

Dispersion dispersion_of(const ExperimentConfig& c) {
    return make_dispersion(c.grid.make(), dispersion_form(c.dispersion.value_or("photon")));
}

void put_complex(json& v, const std::string& key, cplx z) {
    v[key + "_re"] = z.real();
    v[key + "_im"] = z.imag();
    v[key + "_abs"] = std::abs(z);
}

void run_rarefied(const ExperimentConfig& c, ResultRecord& r);

void run_functional(const ExperimentConfig& c, ResultRecord& r) {
    const std::string kind = param_string(c, "kind", "fock");
    r.params_used["kind"] = kind;
    if (kind == "rarefied") return run_rarefied(c, r);
    const auto fs = need_functions(c, 1);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        FunctionalValue v;
        if (kind == "fock") {
            v = fock_functional(fs[i]);
        } else if (kind == "nmode") {
            v = n_mode_functional(fs[i], c.modes);
        } else if (kind == "averaged") {
            try {
                v = phase_averaged_functional(fs[i], c.reservoir(), need_measure(c));
            } catch (const std::invalid_argument& e) {
                throw ConfigError("/measure", e.what());
            }
        } else if (kind == "discrete") {
            v = discrete_phase_average_functional(fs[i], c.reservoir(), need_measure(c));
        } else {
            throw ConfigError("/params/kind", "expected fock, nmode, averaged, discrete or rarefied");
        }
        put_complex(r.values, "value_" + std::to_string(i), v.value);
        r.values["sigma_sq_" + std::to_string(i)] = v.sigma_sq;
    }
}

void run_clt(const ExperimentConfig& c, ResultRecord& r, unsigned threads) {
    const auto fs = need_functions(c, 1);
    const PhaseMeasure mu = need_measure(c);
    if (!admissible(mu)) throw ConfigError("/measure", "mu_hat_1 nonzero: the continuous-mode limit diverges");
    const ModeDensity rho = c.reservoir();
    const std::size_t draws = param_count(c, "draws");
    const std::uint64_t seed = need_seed(c);
    r.params_used["draws"] = draws;
    const double sigma_sq = sigma_mu_sq(fs[0], rho, fourier_moment(mu, 2));
    const auto xs = clt_sample(fs[0], rho, mu, draws, seed, threads);
    r.values["sigma_sq"] = sigma_sq;
    r.values["sample_variance"] = sample_variance(xs);
    r.values["ks_distance"] = ks_distance_normal(xs, std::sqrt(sigma_sq));
    r.values["ks_threshold"] = 1.95 / std::sqrt(static_cast<double>(draws));
    if (c.params.contains("lyapounov_delta")) {
        const double delta = param_number(c, "lyapounov_delta");
        const auto ly = lyapounov_ratio(fs[0], rho, mu, delta);
        r.values["lyapounov_ratio"] = ly.ratio;
        r.values["lyapounov_degenerate"] = ly.degenerate;
    }
}

void run_chi(const ExperimentConfig& c, ResultRecord& r, unsigned threads) {
    const auto fs = need_functions(c, 1);
    const ModeDensity rho = c.reservoir();
    const cplx mu2 = c.second_moment();
    const std::size_t samples = param_count(c, "samples");
    if (samples < 10) throw ConfigError("/params/samples", "need at least 10 samples");
    const std::uint64_t seed = need_seed(c);
    r.params_used["samples"] = samples;
    const CoefficientPair coeffs = build_coefficients(rho, mu2);
    r.values["alternate_branch"] = coeffs.alternate_branch;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const ChiKernel kernel(fs[i], coeffs);
        std::vector<double> x(samples);
        parallel_for(samples, threads, [&](std::size_t m) { x[m] = kernel(BrownianSample::draw(rho.grid(), seed, m)).real(); });
        const double var = sample_variance(x);
        const double mean = sample_mean(x);
        double m4 = 0.0;
        for (double v : x) m4 += std::pow(v - mean, 4);
        m4 /= static_cast<double>(samples);
        const double se = std::sqrt(std::max(0.0, m4 - var * var) / static_cast<double>(samples));
        const double expected = sigma_mu_sq(fs[i], rho, mu2);
        const std::string s = std::to_string(i);
        r.values["sigma_sq_" + s] = expected;
        r.values["sample_variance_" + s] = var;
        r.values["variance_z_" + s] = se > 0.0 ? std::abs(var - expected) / se : (var == expected ? 0.0 : INFINITY);
        put_complex(r.values, "chi_first_" + s, kernel(BrownianSample::draw(rho.grid(), seed, 0)));
    }
}

void run_moments(const ExperimentConfig& c, ResultRecord& r, unsigned threads) {
    const std::size_t p = param_count(c, "p"), q = param_count(c, "q");
    const auto all = need_functions(c, p + q);
    const std::span<const TestFunction> fs(all.data(), p), gs(all.data() + p, q);
    const ModeDensity rho = c.reservoir();
    const cplx mu2 = c.second_moment();
    r.params_used["p"] = p;
    r.params_used["q"] = q;
    const cplx wick = wick_moment(build_q(fs, gs, rho, mu2));
    put_complex(r.values, "wick", wick);
    if (std::abs(mu2) == 0.0 && p <= 10) put_complex(r.values, "permanent", permanent_moment(fs, gs, rho));
    if (c.params.contains("samples")) {
        const std::size_t samples = param_count(c, "samples");
        r.params_used["samples"] = samples;
        const McEstimate mc = mc_oracle(fs, gs, build_coefficients(rho, mu2), samples, need_seed(c), threads);
        put_complex(r.values, "mc", mc.mean);
        r.values["mc_stderr"] = mc.standard_error();
        r.values["z_score"] = mc.z_score(wick);
    }
}

void run_gns(const ExperimentConfig& c, ResultRecord& r) {
    const std::string rep = param_string(c, "rep");
    r.params_used["rep"] = rep;
    const auto fs = need_functions(c, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        RepCheck chk;
        if (rep == "nmode") {
            chk = rep_expectation_nmode(fs[i], c.modes);
        } else if (rep == "averaged") {
            chk = rep_expectation_averaged(fs[i], c.reservoir(), c.second_moment());
        } else if (rep == "random") {
            const ModeDensity rho = c.reservoir();
            chk = rep_expectation_random(fs[i], build_coefficients(rho, c.second_moment()),
                                         BrownianSample::draw(rho.grid(), need_seed(c), i));
        } else {
            throw ConfigError("/params/rep", "expected nmode, averaged or random");
        }
        const std::string s = std::to_string(i);
        put_complex(r.values, "representation_" + s, chk.representation.value);
        put_complex(r.values, "reference_" + s, chk.reference.value);
        r.values["residual_" + s] = chk.residual();
        worst = std::max(worst, chk.residual());
    }
    r.values["max_residual"] = worst;
}

void run_dynamics(const ExperimentConfig& c, ResultRecord& r, unsigned threads) {
    const auto fs = need_functions(c, 1);
    const ModeDensity rho = c.reservoir();
    const cplx mu2 = c.second_moment();
    const Dispersion eps = dispersion_of(c);
    const auto times = times_of(c);
    r.columns = {"t", "sigma_t", "metric"};
    r.rows.assign(times.size(), {});
    parallel_for(times.size(), threads, [&](std::size_t i) {
        r.rows[i] = {times[i], sigma_t(fs[0], rho, mu2, eps, times[i]), uniformization_metric(fs, rho, mu2, eps, times[i])};
    });
    r.values["inner_rho"] = inner(fs[0], fs[0], rho).real();
    r.values["sigma_t_first"] = r.rows.front()[1];
    r.values["sigma_t_last"] = r.rows.back()[1];
    r.values["metric_first"] = r.rows.front()[2];
    r.values["metric_last"] = r.rows.back()[2];
}

cplx matrix_entry(const json& e, const std::string& ptr) {
    if (e.is_number()) return e.get<double>();
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) return {e[0].get<double>(), e[1].get<double>()};
    throw ConfigError(ptr, "expected a number or [re, im]");
}

SystemSpec system_of(const ExperimentConfig& c, std::size_t& k, std::size_t& l) {
    if (!c.params.contains("system") || !c.params["system"].is_object())
        throw ConfigError("/params/system", "required object missing");
    const json& s = c.params["system"];
    auto vec = [&](const char* key) {
        const std::string ptr = std::string("/params/system/") + key;
        if (!s.contains(key) || !s[key].is_array()) throw ConfigError(ptr, "expected an array of numbers");
        std::vector<double> v;
        for (std::size_t i = 0; i < s[key].size(); ++i) {
            if (!s[key][i].is_number()) throw ConfigError(ptr + "/" + std::to_string(i), "expected a number");
            v.push_back(s[key][i].get<double>());
        }
        return v;
    };
    const auto fs = need_functions(c, 1);
    SystemSpec sys{vec("energies"), vec("couplings"), fs[0], dispersion_of(c), c.reservoir(), c.second_moment(), {}};
    const std::size_t n = sys.energies.size();
    if (!s.contains("initial") || !s["initial"].is_array() || s["initial"].size() != n)
        throw ConfigError("/params/system/initial", "expected an N x N array");
    sys.initial.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const std::string rp = "/params/system/initial/" + std::to_string(i);
        const json& row = s["initial"][i];
        if (!row.is_array() || row.size() != n) throw ConfigError(rp, "expected a row of length N");
        for (std::size_t j = 0; j < n; ++j)
            sys.initial(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = matrix_entry(row[j], rp + "/" + std::to_string(j));
    }
    try {
        sys.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("/params/system", e.what());
    }
    k = param_count(c, "k", 0);
    l = param_count(c, "l", 1);
    if (k >= n || l >= n) throw ConfigError("/params/k", "level index out of range");
    return sys;
}

void run_decohere(const ExperimentConfig& c, ResultRecord& r, unsigned threads) {
    std::size_t k = 0, l = 1;
    const SystemSpec sys = system_of(c, k, l);
    const auto times = times_of(c);
    const std::size_t samples = param_count(c, "samples");
    r.params_used["samples"] = samples;
    r.params_used["k"] = k;
    r.params_used["l"] = l;
    const auto mc = random_factor_mc(sys, k, l, times, samples, need_seed(c), threads);
    const double dg = sys.couplings[k] - sys.couplings[l];
    const double var = sigma_mu_sq(sys.form_factor, sys.reservoir, sys.mu2);
    r.columns = {"t", "envelope_gaussian", "envelope_gamma", "mc_mean_re", "mc_mean_im", "mc_stderr"};
    double worst_rel = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        r.rows.push_back({t, averaged_offdiagonal(sys, k, l, t), gamma_envelope(sys, k, l, t), mc[i].mean.real(),
                          mc[i].mean.imag(), mc[i].standard_error()});
        const double predicted = std::exp(-0.5 * t * t * dg * dg * var);
        worst_rel = std::max(worst_rel, std::abs(mc[i].mean - predicted) / predicted);
    }
    r.values["max_mc_relative_deviation"] = worst_rel;
    r.values["mc_relative_budget"] = 5.0 / std::sqrt(static_cast<double>(samples));
    const PlateauResult plateau = gamma_plateau(sys.form_factor, sys.dispersion);
    r.values["gamma_plateau"] = plateau.value;
    r.values["gamma_plateau_divergent"] = plateau.divergent;
    if (c.params.contains("fit_window")) {
        const auto cmp = exponential_crossover(sys, k, l, times, param_number(c, "fit_window"));
        r.values["fit_rate"] = cmp.rate;
        r.values["crossover"] = std::isnan(cmp.crossover) ? json(nullptr) : json(cmp.crossover);
    }
    if (c.params.contains("infrared")) {
        const json& ir = c.params["infrared"];
        if (!ir.is_object()) throw ConfigError("/params/infrared", "expected an object");
        RadialFormFactor ff;
        ff.dim = c.grid.dim;
        ff.amplitude = ir.value("amplitude", 1.0);
        ff.exponent = ir.value("exponent", -1.0);
        ff.cutoff = ir.value("cutoff", 1.0);
        const PlateauResult rp = radial_plateau(ff);
        r.values["radial_plateau"] = rp.value;
        r.values["radial_plateau_divergent"] = rp.divergent;
        if (std::abs(2.0 * ff.exponent + ff.dim - 1.0) < 1e-12) {
            std::vector<double> ts, gs;
            for (double t = 50.0; t <= 200.0 + 1e-9; t += 10.0) {
                ts.push_back(t);
                gs.push_back(radial_gamma(t, ff));
            }
            r.values["radial_slope"] = least_squares_line(ts, gs).slope;
            r.values["predicted_slope"] = infrared_slope_prediction(ff);
        }
    }
}

void run_diverge(const ExperimentConfig& c, ResultRecord& r) {
    if (c.functions.empty() || !c.functions[0].closed)
        throw ConfigError("/functions/0", "the divergence diagnostic needs a closed-form function");
    if (!c.density || c.density->kind == "values")
        throw ConfigError("/density", "the divergence diagnostic needs a constant or gaussian density");
    const double theta = param_number(c, "theta", 0.0);
    std::vector<std::size_t> cells;
    if (!c.params.contains("cells") || !c.params["cells"].is_array())
        throw ConfigError("/params/cells", "expected an array of cell counts");
    for (std::size_t i = 0; i < c.params["cells"].size(); ++i) {
        const json& v = c.params["cells"][i];
        if (!v.is_number_unsigned()) throw ConfigError("/params/cells/" + std::to_string(i), "expected a positive integer");
        cells.push_back(v.get<std::size_t>());
    }
    r.params_used["theta"] = theta;
    const DivergenceFit fit = divergence_diagnostic(*c.functions[0].closed, c.density->function(),
                                                    [theta](const Point&) { return theta; }, c.grid.half_width, cells);
    r.values["conclusive"] = fit.conclusive;
    r.values["slope"] = fit.slope;
    r.values["expected_slope"] = 0.5 * c.grid.dim;
    r.columns = {"cells", "magnitude"};
    for (std::size_t i = 0; i < fit.cells.size(); ++i)
        r.rows.push_back({static_cast<double>(fit.cells[i]), fit.magnitudes[i]});
}

void run_rarefied(const ExperimentConfig& c, ResultRecord& r) {
    const auto fs = need_functions(c, 1);
    const double a = param_number(c, "a"), b = param_number(c, "b"), sigma = param_number(c, "sigma");
    cplx alpha = 1.0;
    if (c.params.contains("alpha")) alpha = matrix_entry(c.params["alpha"], "/params/alpha");
    if (!c.params.contains("volumes") || !c.params["volumes"].is_array())
        throw ConfigError("/params/volumes", "expected an array of box sizes");
    std::vector<double> volumes;
    for (std::size_t i = 0; i < c.params["volumes"].size(); ++i) {
        const json& v = c.params["volumes"][i];
        if (!v.is_number()) throw ConfigError("/params/volumes/" + std::to_string(i), "expected a number");
        volumes.push_back(v.get<double>());
    }
    const RarefiedResult res = rarefied_functional(fs[0], [alpha](double) { return alpha; }, a, b, sigma, volumes);
    put_complex(r.values, "limit", res.limit.value);
    r.values["error_first"] = res.errors.front();
    r.values["error_last"] = res.errors.back();
    r.columns = {"L", "occupied_modes", "value_re", "value_im", "error"};
    for (std::size_t i = 0; i < res.volumes.size(); ++i)
        r.rows.push_back({res.volumes[i], static_cast<double>(res.occupied_modes[i]), res.finite_values[i].real(),
                          res.finite_values[i].imag(), res.errors[i]});
}

}  // namespace

ResultRecord run_experiment(const ExperimentConfig& config, unsigned threads) {
    if (threads == 0) threads = config.threads.value_or(default_threads());
    ResultRecord r;
    r.experiment = config.experiment;
    r.inputs_digest = digest(serialize_config(config));
    r.seed = config.seed;
    r.params_used = config.params;
    const auto start = Clock::now();
    const std::string& e = config.experiment;
    if (e == "functional") run_functional(config, r);
    else if (e == "clt") run_clt(config, r, threads);
    else if (e == "chi") run_chi(config, r, threads);
    else if (e == "moments") run_moments(config, r, threads);
    else if (e == "gns-check") run_gns(config, r);
    else if (e == "dynamics") run_dynamics(config, r, threads);
    else if (e == "decohere") run_decohere(config, r, threads);
    else if (e == "diverge") run_diverge(config, r);
    else if (e == "rarefied") run_rarefied(config, r);
    else throw ConfigError("/experiment", "unknown experiment '" + e + "'");
    r.runtime_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    r.assertions = evaluate_assertions(config.assertions, r.values);
    return r;
}

}  // namespace cohlim
