#include <map>
#include <string>

#include "basket/config.hpp"

namespace basket {

namespace {

// Interim at n = 10, final at n = 20 for every arm. zeta values are starting
// points for calibration. The independent design uses delta = 0: with the
// Beta(0.1, 0.1) prior, delta = 0.32 leaves no stopping boundary near a 10%
// global-null claim rate.
constexpr const char* kPaper4Arm = R"json({
  "name": "paper-4arm",
  "trial": {"arms": [
    {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
    {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
    {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
    {"p0": 0.15, "p1": 0.30, "max_n": 20, "interims": [10, 20]}
  ]},
  "utility": {"type": "two_region", "lambda1": 1, "lambda2": 2, "eta": 0.2, "weights": "equal"},
  "designs": [
    {"name": "Independent", "kind": "independent", "zeta": 0.7, "delta": 0, "calibrate": true},
    {"name": "BHM", "kind": "bhm", "prior": "vague",
     "zeta": [0.715, 0.715, 0.715, 0.7], "delta": [0.32, 0.32, 0.32, 0], "calibrate": true},
    {"name": "OBHM", "kind": "obhm", "prior": {"a0": 2, "b0": 8}, "optimize": "inverse_gamma",
     "zeta": [0.715, 0.715, 0.715, 0.7], "delta": [0.32, 0.32, 0.32, 0], "calibrate": true},
    {"name": "COBHM", "kind": "cobhm", "prior": {"a0": 1, "b0": 1.44}, "omega": 2, "optimize": "inverse_gamma",
     "zeta": [0.715, 0.715, 0.715, 0.72], "delta": [0.32, 0.32, 0.32, 0], "calibrate": true},
    {"name": "AOBHM", "kind": "aobhm", "optimize": "inverse_gamma", "model_prior": "equal",
     "zeta": [0.73, 0.73, 0.73, 0.7], "delta": [0.32, 0.32, 0.32, 0], "calibrate": true}
  ],
  "scenarios": [
    {"name": "1", "p": [0.05, 0.05, 0.05, 0.15]},
    {"name": "2", "p": [0.20, 0.20, 0.20, 0.30]},
    {"name": "3", "p": [0.20, 0.20, 0.05, 0.30]},
    {"name": "4", "p": [0.20, 0.20, 0.05, 0.15]},
    {"name": "5", "p": [0.20, 0.05, 0.05, 0.30]},
    {"name": "6", "p": [0.20, 0.20, 0.20, 0.15]},
    {"name": "7", "p": [0.05, 0.05, 0.05, 0.30]},
    {"name": "8", "p": [0.20, 0.05, 0.05, 0.15]}
  ],
  "n_reps": 5000,
  "base_seed": 20240601,
  "target_alpha": 0.10
})json";

constexpr const char* kPaper4ArmHalfCauchy = R"json({
  "name": "paper-4arm-half-cauchy",
  "trial": {"arms": [
    {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
    {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
    {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
    {"p0": 0.15, "p1": 0.30, "max_n": 20, "interims": [10, 20]}
  ]},
  "utility": {"type": "two_region", "lambda1": 1, "lambda2": 2, "eta": 0.2, "weights": "equal"},
  "designs": [
    {"name": "OBHM", "kind": "obhm", "optimize": "half_cauchy",
     "zeta": [0.715, 0.715, 0.715, 0.7], "delta": [0.32, 0.32, 0.32, 0], "calibrate": true},
    {"name": "COBHM", "kind": "cobhm", "omega": 2, "optimize": "half_cauchy",
     "zeta": [0.715, 0.715, 0.715, 0.72], "delta": [0.32, 0.32, 0.32, 0], "calibrate": true},
    {"name": "AOBHM", "kind": "aobhm", "optimize": "half_cauchy", "model_prior": "equal",
     "zeta": [0.73, 0.73, 0.73, 0.7], "delta": [0.32, 0.32, 0.32, 0], "calibrate": true}
  ],
  "scenarios": [
    {"name": "1", "p": [0.05, 0.05, 0.05, 0.15]},
    {"name": "2", "p": [0.20, 0.20, 0.20, 0.30]},
    {"name": "3", "p": [0.20, 0.20, 0.05, 0.30]},
    {"name": "4", "p": [0.20, 0.20, 0.05, 0.15]},
    {"name": "5", "p": [0.20, 0.05, 0.05, 0.30]},
    {"name": "6", "p": [0.20, 0.20, 0.20, 0.15]},
    {"name": "7", "p": [0.05, 0.05, 0.05, 0.30]},
    {"name": "8", "p": [0.20, 0.05, 0.05, 0.15]}
  ],
  "n_reps": 5000,
  "base_seed": 20240601,
  "target_alpha": 0.10
})json";

constexpr const char* kPaper3Arm = R"json({
  "name": "paper-3arm",
  "trial": {"arms": [
    {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
    {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]},
    {"p0": 0.05, "p1": 0.20, "max_n": 20, "interims": [10, 20]}
  ]},
  "utility": {"type": "two_region", "lambda1": 1, "lambda2": 2, "eta": 0.2, "weights": "equal"},
  "designs": [
    {"name": "Independent", "kind": "independent", "zeta": 0.7, "delta": 0, "calibrate": true},
    {"name": "BHM", "kind": "bhm", "prior": "vague", "zeta": 0.715, "delta": 0.32, "calibrate": true},
    {"name": "OBHM", "kind": "obhm", "optimize": "inverse_gamma", "zeta": 0.715, "delta": 0.32, "calibrate": true},
    {"name": "COBHM", "kind": "cobhm", "omega": 2, "optimize": "inverse_gamma",
     "zeta": 0.715, "delta": 0.32, "calibrate": true},
    {"name": "AOBHM", "kind": "aobhm", "optimize": "inverse_gamma", "model_prior": "equal",
     "zeta": 0.73, "delta": 0.32, "calibrate": true}
  ],
  "scenarios": [
    {"name": "1", "p": [0.05, 0.05, 0.05]},
    {"name": "2", "p": [0.20, 0.20, 0.20]},
    {"name": "3", "p": [0.20, 0.20, 0.05]},
    {"name": "4", "p": [0.20, 0.05, 0.05]}
  ],
  "n_reps": 5000,
  "base_seed": 20240601,
  "target_alpha": 0.10
})json";

const std::map<std::string, const char*, std::less<>>& presets() {
    static const std::map<std::string, const char*, std::less<>> table{
        {"paper-4arm", kPaper4Arm},
        {"paper-4arm-half-cauchy", kPaper4ArmHalfCauchy},
        {"paper-3arm", kPaper3Arm},
    };
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : presets()) out.push_back(name);
    return out;
}

std::optional<std::string> preset_text(std::string_view name) {
    const auto& table = presets();
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return std::string(it->second);
}

}  // namespace basket
