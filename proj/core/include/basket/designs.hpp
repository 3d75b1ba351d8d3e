#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "basket/inference.hpp"
#include "basket/model.hpp"

namespace basket {

enum class DesignKind { Independent, VagueBHM, OBHM, COBHM, AOBHM };
enum class DecisionMode { model_average, model_select };

std::string_view to_string(DesignKind kind);
std::optional<DesignKind> parse_design_kind(std::string_view name);

/// Per-arm BOP2 tuning (zeta, delta) and an optional superiority cutoff C2.
struct StoppingPolicy {
    std::vector<double> zeta;
    std::vector<double> delta;
    std::vector<std::optional<double>> superiority_cutoff;

    static StoppingPolicy uniform(std::size_t n_arms, double zeta, double delta);
    void validate(std::size_t n_arms) const;
};

/// Vague prior on sigma^2 used by the plain hierarchical design.
PriorSpec vague_bhm_prior();

struct DesignSpec {
    std::string name;
    DesignKind kind = DesignKind::OBHM;
    PriorSpec prior = PriorSpec::inverse_gamma(2.0, 8.0);  // within-cluster prior for COBHM
    double omega = 2.0;                                    // COBHM clustering exponent
    std::vector<PriorSpec> partition_priors;               // AOBHM, canonical partition order
    std::vector<double> model_prior;                       // AOBHM Pr(M_g)
    BetaParams beta_prior{0.1, 0.1};
    StoppingPolicy policy;
    DecisionMode decision_mode = DecisionMode::model_average;
    HyperPrior hyper;
    McmcControl mcmc;

    void validate(const TrialSpec& spec) const;
};

enum class ArmStatus { continuing, stopped_futile, stopped_superior, final_effective, final_not_effective };

std::string_view to_string(ArmStatus status);

inline bool claims_effective(ArmStatus s) {
    return s == ArmStatus::final_effective || s == ArmStatus::stopped_superior;
}
inline bool is_terminal(ArmStatus s) { return s != ArmStatus::continuing; }

struct ArmDecision {
    ArmStatus status = ArmStatus::continuing;
    double futility_prob = 0.0;
    int n_at_decision = 0;
};

/// Memo of hierarchical-model tail probabilities keyed by (model, data).
/// The chain seed is derived from the key, so a cached value is exactly the
/// value a fresh computation would return; sharing it across threads or
/// replicates never changes results.
class PosteriorCache {
   public:
    template <class Compute>
    TailProbs get_or_compute(const std::string& key, Compute&& compute) {
        {
            std::lock_guard lock(mutex_);
            if (auto it = map_.find(key); it != map_.end()) {
                ++hits_;
                return it->second;
            }
        }
        TailProbs value = compute();
        std::lock_guard lock(mutex_);
        ++misses_;
        map_.emplace(key, value);
        return value;
    }

    std::size_t size() const;
    std::uint64_t hits() const;
    std::uint64_t misses() const;
    void clear();

   private:
    mutable std::mutex mutex_;
    std::unordered_map<std::string, TailProbs> map_;
    std::uint64_t hits_ = 0;
    std::uint64_t misses_ = 0;
};

/// C(n) = 1 - zeta * (n / max_n)^delta.
double bop2_cutoff(int n, int max_n, double zeta, double delta);

/// Per-arm Pr(p_j <= p0_j | D) and Pr(p_j >= p1_j | D) under a design's model.
struct ArmProbabilities {
    std::vector<double> futility;
    std::vector<double> efficacy;
};

/// Hierarchical posterior over the arms in `subset` (all arms when empty),
/// seeded from the model and data so that identical inputs agree bit for bit.
TailProbs bhm_posterior(const ObservedData& data, const TrialSpec& spec, std::span<const int> subset,
                        const PriorSpec& prior, const HyperPrior& hyper, const McmcControl& mcmc,
                        PosteriorCache* cache = nullptr);

/// Sensitive iff Pr(p_j > (p0_j+p1_j)/2 | D) > 0.5 (n_j/N_j)^omega under the beta-binomial model.
Partition cluster_arms(const ObservedData& data, const TrialSpec& spec, double omega, const BetaParams& beta_prior);

double log_model_likelihood(const ObservedData& data, const Partition& partition, const TrialSpec& spec);
double model_likelihood(const ObservedData& data, const Partition& partition, const TrialSpec& spec);

/// Pr(M_g | D) for every partition, normalised in log space.
std::vector<double> bma_weights(const ObservedData& data, const TrialSpec& spec,
                                const std::vector<Partition>& partitions, std::span<const double> model_prior);

ArmProbabilities design_probabilities(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                      PosteriorCache* cache = nullptr);

/// Applies the futility (and optional superiority) rule arm by arm.
std::vector<ArmDecision> apply_stopping_rules(const ObservedData& data, const TrialSpec& spec,
                                              const StoppingPolicy& policy, const ArmProbabilities& probs);

std::vector<ArmDecision> independent_analyze(const ObservedData& data, const TrialSpec& spec,
                                             const DesignSpec& design);
std::vector<ArmDecision> bhm_analyze(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                     PosteriorCache* cache = nullptr);
std::vector<ArmDecision> cobhm_analyze(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                       PosteriorCache* cache = nullptr);
std::vector<ArmDecision> aobhm_analyze(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                       PosteriorCache* cache = nullptr);

/// Dispatches on design.kind.
std::vector<ArmDecision> analyze(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                 PosteriorCache* cache = nullptr);

}  // namespace basket
