#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "basket/designs.hpp"
#include "basket/model.hpp"
#include "basket/optimizer.hpp"
#include "basket/simulator.hpp"

namespace basket {

/// Parse or schema failure; what() carries "origin: path: message".
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

enum class OptimizeTarget { none, inverse_gamma, half_cauchy };

/// A design plus the directives that derive its missing parts.
/// `prior_given` is false when the prior must come from the optimizer
/// (for AOBHM this covers the per-partition priors).
struct DesignEntry {
    DesignSpec spec;
    OptimizeTarget optimize = OptimizeTarget::none;
    bool prior_given = true;
    bool calibrate = false;
};

struct RunConfig {
    std::string name;
    TrialSpec trial;
    std::vector<DesignEntry> designs;
    UtilitySpec utility;
    std::vector<ScenarioTruth> scenarios;
    McmcControl mcmc;
    HyperPrior hyper;
    GridSpec grid;
    int n_reps = 5000;
    std::uint64_t base_seed = 20240601;
    std::string output_dir = "out";
    double target_alpha = 0.10;
    bool common_random_numbers = true;

    /// Canonical JSON of every field above; hashing it identifies a run.
    std::string canonical_json() const;
    std::string hash() const;  // 16 hex digits
};

RunConfig parse_config(std::string_view text, std::string_view origin = "<config>");
RunConfig load_config(const std::string& path);

/// Embedded presets; a config may also start from one with "preset": "<name>".
std::vector<std::string> preset_names();
std::optional<std::string> preset_text(std::string_view name);
RunConfig load_preset(std::string_view name);

/// Seed for design d: shared across designs under common random numbers.
std::uint64_t design_seed(const RunConfig& config, std::size_t design_index);

}  // namespace basket
