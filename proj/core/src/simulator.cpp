#include "basket/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "basket/parallel.hpp"
#include "basket/rng.hpp"

namespace basket {

void ScenarioTruth::validate(std::size_t n_arms) const {
    if (true_p.size() != n_arms) throw InvalidArgument("scenario '" + name + "' does not match the arm count");
    for (double p : true_p) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("scenario '" + name + "' has a rate outside [0,1]");
    }
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate) {
    return stream_seed(base_seed, replicate);
}

std::vector<int> patient_responses(std::uint64_t seed, std::size_t arm, int max_n, double p) {
    Engine rng(stream_seed(seed, 0x5bd1e995ULL, arm));
    std::vector<int> cumulative(static_cast<std::size_t>(max_n) + 1, 0);
    for (int i = 1; i <= max_n; ++i) {
        cumulative[static_cast<std::size_t>(i)] = cumulative[static_cast<std::size_t>(i - 1)] + (uniform01(rng) < p);
    }
    return cumulative;
}

std::vector<ArmDecision> simulate_trial(const ScenarioTruth& truth, const TrialSpec& spec, const DesignSpec& design,
                                        std::uint64_t seed, PosteriorCache* cache) {
    const std::size_t J = spec.size();
    std::vector<std::vector<int>> responses(J);
    std::size_t rounds = 0;
    for (std::size_t j = 0; j < J; ++j) {
        responses[j] = patient_responses(seed, j, spec.arms[j].max_n, truth.true_p[j]);
        rounds = std::max(rounds, spec.arms[j].interim_ns.size());
    }

    ObservedData data{std::vector<int>(J, 0), std::vector<int>(J, 0)};
    std::vector<ArmDecision> status(J);
    for (std::size_t k = 0; k < rounds; ++k) {
        std::vector<bool> at_look(J, false);
        bool any = false;
        for (std::size_t j = 0; j < J; ++j) {
            const auto& looks = spec.arms[j].interim_ns;
            if (is_terminal(status[j].status) || k >= looks.size()) continue;
            data.n[j] = looks[k];
            data.x[j] = responses[j][static_cast<std::size_t>(looks[k])];
            at_look[j] = true;
            any = true;
        }
        if (!any) break;
        const auto decisions = analyze(data, spec, design, cache);
        for (std::size_t j = 0; j < J; ++j) {
            if (at_look[j]) status[j] = decisions[j];
        }
    }
    return status;
}

OperatingCharacteristics operating_characteristics(const ScenarioTruth& truth, const TrialSpec& spec,
                                                   const DesignSpec& design, int n_reps, std::uint64_t base_seed,
                                                   const SimOptions& options) {
    if (n_reps < 1) throw InvalidArgument("n_reps must be at least 1");
    spec.validate();
    truth.validate(spec.size());
    design.validate(spec);

    const std::size_t J = spec.size();
    std::vector<std::vector<ArmDecision>> results(static_cast<std::size_t>(n_reps));
    parallel_for(results.size(), options.threads, [&](std::size_t r) {
        results[r] = simulate_trial(truth, spec, design, replicate_seed(base_seed, r), options.cache);
    });

    OperatingCharacteristics oc;
    oc.n_reps = n_reps;
    oc.claim_prob.assign(J, 0.0);
    oc.mean_n.assign(J, 0.0);
    oc.early_stop_prob.assign(J, 0.0);
    std::vector<long> claims(J, 0);
    std::vector<long> early(J, 0);
    std::vector<long> total_n(J, 0);
    for (const auto& rep : results) {
        for (std::size_t j = 0; j < J; ++j) {
            claims[j] += claims_effective(rep[j].status);
            early[j] += rep[j].status == ArmStatus::stopped_futile || rep[j].status == ArmStatus::stopped_superior;
            total_n[j] += rep[j].n_at_decision;
        }
    }
    const double reps = n_reps;
    for (std::size_t j = 0; j < J; ++j) {
        oc.claim_prob[j] = static_cast<double>(claims[j]) / reps;
        oc.early_stop_prob[j] = static_cast<double>(early[j]) / reps;
        oc.mean_n[j] = static_cast<double>(total_n[j]) / reps;
        oc.mc_se.push_back(std::sqrt(oc.claim_prob[j] * (1.0 - oc.claim_prob[j]) / reps));
    }
    return oc;
}

ScenarioTruth partition_truth(const Partition& partition, const TrialSpec& spec) {
    if (partition.size() != spec.size()) throw InvalidArgument("partition length differs from arm count");
    ScenarioTruth truth{partition.label(), {}};
    for (std::size_t j = 0; j < spec.size(); ++j) {
        truth.true_p.push_back(partition.sensitive[j] ? spec.arms[j].p1 : spec.arms[j].p0);
    }
    return truth;
}

PartitionRates oc_under_partition(const Partition& partition, const TrialSpec& spec, const DesignSpec& design,
                                  int n_reps, std::uint64_t base_seed, const SimOptions& options) {
    const auto oc = operating_characteristics(partition_truth(partition, spec), spec, design, n_reps, base_seed, options);
    PartitionRates rates;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        (partition.sensitive[j] ? rates.powers : rates.type1s).push_back(oc.claim_prob[j]);
    }
    return rates;
}

void write_oc_csv(std::ostream& os, const std::vector<OcRow>& rows) {
    os << "scenario,design,arm,claim_prob,mc_se,mean_n,early_stop_prob,n_reps,seed\n";
    const auto flags = os.flags();
    os << std::fixed;
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.oc.claim_prob.size(); ++j) {
            os << row.scenario << ',' << row.design << ',' << j + 1 << ',' << std::setprecision(6)
               << row.oc.claim_prob[j] << ',' << row.oc.mc_se[j] << ',' << row.oc.mean_n[j] << ','
               << row.oc.early_stop_prob[j] << ',' << row.oc.n_reps << ',' << row.seed << '\n';
        }
    }
    os.flags(flags);
}

}  // namespace basket
