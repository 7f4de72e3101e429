// experiments.hpp - named, seeded experiments and their result records.
#pragma once

#include "cohlim/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cohlim {

struct ResultRecord {
    std::string experiment;
    std::string inputs_digest;
    json values = json::object();   // scalar results, addressable by assertions
    json params_used = json::object();
    std::vector<std::string> columns;  // optional time series
    std::vector<std::vector<double>> rows;
    std::vector<AssertionOutcome> assertions;
    double runtime_seconds{0.0};
    std::optional<std::uint64_t> seed;

    bool passed() const;
    std::string values_digest() const { return digest(values); }
    json to_json() const;
    std::string to_csv() const;
};

/// Runs one experiment. threads = 0 means: config value, else COHLIM_THREADS, else 1.
ResultRecord run_experiment(const ExperimentConfig& config, unsigned threads = 0);

/// Parses "start:stop:step" into an inclusive grid.
std::vector<double> parse_time_grid(const std::string& text);

}  // namespace cohlim
