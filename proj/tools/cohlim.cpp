// cohlim - command-line runner for the experiments.
//
//   cohlim <subcommand> --config <file> [--out <dir|file>] [--threads n]
//
// Exit status: 0 when every in-config assertion passes, 1 on an assertion
// failure, 2 on invalid configuration or input.
#include "cohlim/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace cohlim;

namespace {

struct Options {
    std::string config;
    std::string out;
    unsigned threads{0};
    // Subcommand overrides written into params before validation.
    std::string kind, rep, t_grid, pq;
    std::optional<std::size_t> samples, mc_samples;
    std::optional<std::uint64_t> seed;
};

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << text;
}

// A path with a .json or .csv extension names the file; anything else is a directory.
void emit(const ResultRecord& r, const std::string& out) {
    const std::string text = r.to_json().dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        if (!r.columns.empty()) std::cout << r.to_csv();
        return;
    }
    const fs::path p(out);
    if (p.extension() == ".json") {
        write_file(p, text);
        if (!r.columns.empty()) write_file(fs::path(p).replace_extension(".csv"), r.to_csv());
    } else if (p.extension() == ".csv") {
        write_file(p, r.columns.empty() ? std::string() : r.to_csv());
        write_file(fs::path(p).replace_extension(".json"), text);
    } else {
        write_file(p / (r.experiment + ".json"), text);
        if (!r.columns.empty()) write_file(p / (r.experiment + ".csv"), r.to_csv());
    }
}

void report(const ResultRecord& r) {
    for (const auto& a : r.assertions)
        std::cerr << (a.passed ? "PASS " : "FAIL ") << r.experiment << ": " << a.assertion.quantity << " "
                  << a.assertion.op << " " << a.message << "\n";
}

int execute(const std::string& subcommand, const Options& o) {
    std::vector<ExperimentConfig> configs;
    try {
        std::ifstream in(o.config);
        if (!in) throw std::runtime_error("cannot open config '" + o.config + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("", std::string("invalid JSON: ") + e.what());
        }
        const std::string base = fs::path(o.config).parent_path().string();
        if (subcommand == "run") {
            configs = load_configs(o.config);
        } else {
            if (j.is_object() && !j.contains("experiment")) j["experiment"] = subcommand;
            if (j.is_object() && j["experiment"] != subcommand)
                throw ConfigError("/experiment", "config is for '" + j["experiment"].dump() + "', not '" + subcommand + "'");
            json& params = j["params"];
            if (params.is_null()) params = json::object();
            if (!o.kind.empty()) params["kind"] = o.kind;
            if (!o.rep.empty()) params["rep"] = o.rep;
            if (!o.t_grid.empty()) params["t_grid"] = o.t_grid;
            if (!o.pq.empty()) {
                const auto comma = o.pq.find(',');
                if (comma == std::string::npos) throw ConfigError("/params/p", "--pq expects p,q");
                params["p"] = std::stoul(o.pq.substr(0, comma));
                params["q"] = std::stoul(o.pq.substr(comma + 1));
            }
            if (o.samples) params[subcommand == "clt" ? "draws" : "samples"] = *o.samples;
            if (o.mc_samples) params["samples"] = *o.mc_samples;
            if (o.seed) j["seed"] = *o.seed;
            configs.push_back(parse_config(j, base));
        }
    } catch (const ConfigError& e) {
        std::cerr << "cohlim: " << e.what() << "\n";
        return 2;
    }

    bool all_passed = true;
    for (const auto& c : configs) {
        try {
            const ResultRecord r = run_experiment(c, o.threads);
            std::string out = o.out;
            if (configs.size() > 1 && !out.empty() && fs::path(out).has_extension())
                throw std::runtime_error("--out must be a directory when the config holds several experiments");
            emit(r, out);
            report(r);
            all_passed = all_passed && r.passed();
        } catch (const ConfigError& e) {
            std::cerr << "cohlim: " << c.experiment << ": " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "cohlim: " << c.experiment << ": " << e.what() << "\n";
            return 2;
        }
    }
    return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random-phase coherent state experiments"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory, or a .json/.csv file");
        sub->add_option("--threads", o.threads, "Worker threads (default: config, then COHLIM_THREADS, then 1)");
    };
    auto add = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        common(sub);
        return sub;
    };

    add("functional", "Evaluate expectation functionals")
        ->add_option("--kind", o.kind, "fock | nmode | averaged | discrete | rarefied");
    auto* clt = add("clt", "Central limit check for the random-phase sum");
    clt->add_option("--samples", o.samples, "Number of draws");
    clt->add_option("--seed", o.seed, "Random seed");
    auto* chi = add("chi", "Variance law of the random phase");
    chi->add_option("--samples", o.samples, "Number of Brownian samples");
    chi->add_option("--seed", o.seed, "Random seed");
    auto* mom = add("moments", "Quasifree n-point functions");
    mom->add_option("--pq", o.pq, "Numbers of creation and annihilation operators, as p,q");
    mom->add_option("--mc-samples", o.mc_samples, "Monte Carlo samples for the oracle");
    mom->add_option("--seed", o.seed, "Random seed");
    add("gns-check", "Representation-level identities")->add_option("--rep", o.rep, "nmode | averaged | random");
    add("dynamics", "Phase uniformization under free evolution")
        ->add_option("--t-grid", o.t_grid, "start:stop:step");
    auto* dec = add("decohere", "Decoherence of an N-level system");
    dec->add_option("--t-grid", o.t_grid, "start:stop:step");
    dec->add_option("--mc-samples", o.mc_samples, "Monte Carlo samples");
    dec->add_option("--seed", o.seed, "Random seed");
    add("diverge", "Growth of the fixed-phase sum");
    add("rarefied", "Rarefied coherent-mode limit");
    add("run", "Run the experiment(s) named in the config");

    CLI11_PARSE(app, argc, argv);
    return execute(app.get_subcommands().front()->get_name(), o);
}
