#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "basket/designs.hpp"
#include "basket/model.hpp"
#include "basket/simulator.hpp"

namespace basket {

struct GridSpec {
    std::vector<double> v0;
    std::vector<double> sigma0_sq;
    std::vector<double> half_cauchy_a;
    int reps_per_point = 1000;
    int refine_reps = 5000;
    int refine_top = 3;

    /// v0 evenly over [0.1, J]; sigma0^2 at k * 5 sigma_max^2 / n for k = 1..n;
    /// A on the same points as sigma0^2.
    static GridSpec for_trial(const TrialSpec& spec, std::size_t n_v0 = 8, std::size_t n_sigma0_sq = 10,
                              std::size_t n_a = 10);
    void validate() const;
};

/// Evenly spaced points from lo to hi inclusive; a single point is lo.
std::vector<double> linspace(double lo, double hi, std::size_t n);

struct GridPoint {
    PriorSpec prior;
    double v0 = 0.0;         // scaled-inverse-chi^2 coordinates, zero for half-Cauchy points
    double sigma0_sq = 0.0;
    double scale_a = 0.0;    // half-Cauchy coordinate, zero otherwise
    std::vector<PartitionRates> rates;  // canonical partition order; empty when not evaluated
    std::vector<double> utilities;      // U_g, zero where not evaluated
    double mean_utility = 0.0;
    int reps = 0;
};

struct OptimizationResult {
    PriorSpec best_prior;
    double best_mean_utility = 0.0;
    std::size_t best_index = 0;
    std::vector<GridPoint> grid_trace;
};

/// Candidate priors are plugged into `design` (kind VagueBHM, OBHM or COBHM);
/// every grid point sees the same replicate seeds.
OptimizationResult grid_search_prior(const TrialSpec& spec, const UtilitySpec& utility, const DesignSpec& design,
                                     const GridSpec& grid, std::uint64_t base_seed, const SimOptions& options = {});

OptimizationResult optimize_half_cauchy(const TrialSpec& spec, const UtilitySpec& utility, const DesignSpec& design,
                                        const GridSpec& grid, std::uint64_t base_seed,
                                        const SimOptions& options = {});

struct PerPartitionResult {
    std::vector<PriorSpec> priors;      // canonical partition order
    std::vector<std::size_t> best_index;
    OptimizationResult trace;           // all partitions evaluated, equal weights
};

/// One shared trace over every partition; M_g is the argmax of U_g alone.
/// Uses the half-Cauchy grid when `half_cauchy` is set.
PerPartitionResult per_partition_priors(const TrialSpec& spec, const UtilitySpec& utility, const DesignSpec& design,
                                        const GridSpec& grid, std::uint64_t base_seed, bool half_cauchy = false,
                                        const SimOptions& options = {});

struct CalibrationOptions {
    double tolerance = 0.005;
    int max_steps = 30;
    double zeta_lo = 0.01;
    double zeta_hi = 0.99;
};

struct CalibrationResult {
    StoppingPolicy policy;
    std::vector<double> claim_prob;  // global null, per arm, at the returned policy
    std::vector<int> group_of_arm;
    int evaluations = 0;
    bool converged = false;
    std::vector<std::string> diagnostics;
};

/// Arms sharing (p0, p1, N, interims, delta) form a group with one zeta.
std::vector<int> calibration_groups(const TrialSpec& spec, const StoppingPolicy& policy);

/// Bisects each group's zeta until the group-mean global-null claim probability
/// is within tolerance of target_alpha. Starts from design.policy's zeta.
CalibrationResult calibrate_zeta(const TrialSpec& spec, const DesignSpec& design, double target_alpha, int n_reps,
                                 std::uint64_t base_seed, const SimOptions& options = {},
                                 const CalibrationOptions& calibration = {});

/// Columns: v0, sigma0_sq, scale_a, partition_id, rho_1..rho_J, gamma_1..gamma_J, U_g, mean_utility.
/// rho_j is filled only when arm j is sensitive in the partition, gamma_j only when it is not.
/// partition_id is the 1-based canonical index.
void write_trace_csv(std::ostream& os, const TrialSpec& spec, const OptimizationResult& result);

}  // namespace basket
