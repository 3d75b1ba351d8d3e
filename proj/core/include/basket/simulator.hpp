#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "basket/designs.hpp"
#include "basket/model.hpp"

namespace basket {

struct ScenarioTruth {
    std::string name;
    std::vector<double> true_p;

    void validate(std::size_t n_arms) const;
};

struct OperatingCharacteristics {
    std::vector<double> claim_prob;
    std::vector<double> mean_n;
    std::vector<double> early_stop_prob;
    std::vector<double> mc_se;
    int n_reps = 0;
};

/// Execution knobs shared by every Monte Carlo entry point.
struct SimOptions {
    unsigned threads = 1;
    PosteriorCache* cache = nullptr;
};

/// Seed of replicate r; the same for every design so designs see common random numbers.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate);

/// Cumulative responders of one arm after each of its first n patients,
/// driven by the (seed, arm) patient stream: patient i responds iff u_i < p.
std::vector<int> patient_responses(std::uint64_t seed, std::size_t arm, int max_n, double p);

/// One trial: looks in rounds, each arm advancing to its next interim count
/// until it stops or reaches max_n. Stopped arms keep their data frozen.
std::vector<ArmDecision> simulate_trial(const ScenarioTruth& truth, const TrialSpec& spec, const DesignSpec& design,
                                        std::uint64_t seed, PosteriorCache* cache = nullptr);

OperatingCharacteristics operating_characteristics(const ScenarioTruth& truth, const TrialSpec& spec,
                                                   const DesignSpec& design, int n_reps, std::uint64_t base_seed,
                                                   const SimOptions& options = {});

struct PartitionRates {
    std::vector<double> powers;  // sensitive arms, ascending arm index
    std::vector<double> type1s;  // insensitive arms, ascending arm index
};

/// Truth p1 on sensitive arms and p0 elsewhere; claim probabilities split by membership.
PartitionRates oc_under_partition(const Partition& partition, const TrialSpec& spec, const DesignSpec& design,
                                  int n_reps, std::uint64_t base_seed, const SimOptions& options = {});

ScenarioTruth partition_truth(const Partition& partition, const TrialSpec& spec);

struct OcRow {
    std::string scenario;
    std::string design;
    OperatingCharacteristics oc;
    std::uint64_t seed = 0;
};

/// Columns: scenario, design, arm, claim_prob, mc_se, mean_n, early_stop_prob, n_reps, seed.
void write_oc_csv(std::ostream& os, const std::vector<OcRow>& rows);

}  // namespace basket
