// config.hpp - experiment configuration: parsing, validation and canonical form.
//
// A config is a JSON object. Validation errors carry the JSON pointer of the
// offending field. serialize(parse(c)) fills in no defaults beyond what the
// parser needs, so it is idempotent.
#pragma once

#include "cohlim/circle_measure.hpp"
#include "cohlim/dynamics.hpp"
#include "cohlim/functionals.hpp"
#include "cohlim/mode_space.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cohlim {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string pointer, const std::string& message)
        : std::runtime_error("config error at " + (pointer.empty() ? std::string("/") : pointer) + ": " + message),
          pointer_(std::move(pointer)),
          message_(message) {}
    const std::string& pointer() const { return pointer_; }
    const std::string& message() const { return message_; }

private:
    std::string pointer_;
    std::string message_;
};

struct GridSpec {
    int dim{1};
    double half_width{1.0};
    std::size_t cells{64};
    MomentumGrid make() const { return MomentumGrid(dim, half_width, cells); }
};

struct MeasureSpec {
    std::string kind{"uniform"};  // uniform | atoms | density
    std::vector<PhaseMeasure::Atom> atoms;
    std::vector<double> density;
    PhaseMeasure make() const;
};

struct DensitySpec {
    std::string kind{"constant"};  // constant | gaussian | values
    double value{0.0};             // constant level or gaussian peak
    Point center{};
    double width{1.0};
    std::vector<double> values;
    DensityFunction function() const;  // rejects kind "values"
    ModeDensity make(const MomentumGrid& grid) const;
};

struct FunctionSpec {
    std::optional<ClosedForm> closed;
    std::string path;  // binary complex column, resolved against the config directory
    TestFunction make(const MomentumGrid& grid) const;
};

struct Assertion {
    std::string quantity;
    std::string op;  // abs | rel | max | min
    double expected{0.0};
    double tolerance{0.0};
};

struct AssertionOutcome {
    Assertion assertion;
    double actual{0.0};
    bool passed{false};
    std::string message;
};

struct ExperimentConfig {
    std::string experiment;
    GridSpec grid;
    std::optional<MeasureSpec> measure;
    std::optional<cplx> mu2;  // alternative to a measure where only the second moment matters
    std::optional<DensitySpec> density;
    std::vector<FunctionSpec> functions;
    CoherentModeSet modes;
    std::optional<std::string> dispersion;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    json params = json::object();  // experiment-specific knobs
    std::vector<Assertion> assertions;
    std::string base_dir;  // not serialized

    /// Second phase moment from mu2 or the measure; throws ConfigError if neither is given.
    cplx second_moment() const;
    std::vector<TestFunction> battery() const;
    ModeDensity reservoir() const;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"functional", "clt",      "chi",      "moments", "gns-check",
                                                "dynamics",   "decohere", "diverge", "rarefied"};
    return names;
}

ExperimentConfig parse_config(const json& j, const std::string& base_dir = {});
json serialize_config(const ExperimentConfig& c);
/// Reads a file; a top-level "experiments" array yields several configs.
std::vector<ExperimentConfig> load_configs(const std::string& path);

/// 64-bit FNV-1a over the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string digest(const json& j);

std::vector<AssertionOutcome> evaluate_assertions(const std::vector<Assertion>& assertions, const json& values);

/// Reads a double from params at key, or returns fallback; ConfigError with
/// pointer /params/<key> on a type mismatch.
double param_number(const ExperimentConfig& c, const std::string& key, std::optional<double> fallback = {});
std::string param_string(const ExperimentConfig& c, const std::string& key, std::optional<std::string> fallback = {});

}  // namespace cohlim
