#include "basket/designs.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <tuple>

#include "basket/rng.hpp"

namespace basket {

namespace {

template <class T>
void append_bytes(std::string& key, const T& v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    key.append(buf, sizeof(T));
}

std::string model_key(const PriorSpec& prior, const HyperPrior& hyper, const McmcControl& mcmc) {
    std::string key;
    key.reserve(160);
    if (const auto* s = std::get_if<ScaledInvChiSq>(&prior.variant)) {
        key.push_back('S');
        append_bytes(key, s->v0);
        append_bytes(key, s->sigma0_sq);
    } else {
        key.push_back('H');
        append_bytes(key, std::get<HalfCauchy>(prior.variant).scale_a);
    }
    append_bytes(key, hyper.alpha0);
    append_bytes(key, hyper.tau0_sq);
    append_bytes(key, mcmc.burn_in);
    append_bytes(key, mcmc.kept_draws);
    append_bytes(key, mcmc.thin);
    append_bytes(key, mcmc.seed);
    append_bytes(key, mcmc.step_scale);
    return key;
}

double log_binom_coeff(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

std::string_view to_string(DesignKind kind) {
    switch (kind) {
        case DesignKind::Independent: return "Independent";
        case DesignKind::VagueBHM: return "BHM";
        case DesignKind::OBHM: return "OBHM";
        case DesignKind::COBHM: return "COBHM";
        case DesignKind::AOBHM: return "AOBHM";
    }
    return "?";
}

std::optional<DesignKind> parse_design_kind(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "independent") return DesignKind::Independent;
    if (lower == "bhm" || lower == "vague_bhm") return DesignKind::VagueBHM;
    if (lower == "obhm") return DesignKind::OBHM;
    if (lower == "cobhm") return DesignKind::COBHM;
    if (lower == "aobhm") return DesignKind::AOBHM;
    return std::nullopt;
}

std::string_view to_string(ArmStatus status) {
    switch (status) {
        case ArmStatus::continuing: return "continue";
        case ArmStatus::stopped_futile: return "stopped_futile";
        case ArmStatus::stopped_superior: return "stopped_superior";
        case ArmStatus::final_effective: return "final_effective";
        case ArmStatus::final_not_effective: return "final_not_effective";
    }
    return "?";
}

StoppingPolicy StoppingPolicy::uniform(std::size_t n_arms, double zeta, double delta) {
    StoppingPolicy p;
    p.zeta.assign(n_arms, zeta);
    p.delta.assign(n_arms, delta);
    p.superiority_cutoff.assign(n_arms, std::nullopt);
    return p;
}

void StoppingPolicy::validate(std::size_t n_arms) const {
    if (zeta.size() != n_arms || delta.size() != n_arms) {
        throw InvalidArgument("stopping policy needs zeta and delta for every arm");
    }
    if (!superiority_cutoff.empty() && superiority_cutoff.size() != n_arms) {
        throw InvalidArgument("superiority cutoffs must be given for every arm or none");
    }
    for (std::size_t j = 0; j < n_arms; ++j) {
        if (!(zeta[j] > 0.0 && zeta[j] < 1.0)) throw InvalidArgument("zeta must lie in (0,1)");
        if (!(delta[j] >= 0.0) || !std::isfinite(delta[j])) throw InvalidArgument("delta must be >= 0");
    }
    for (const auto& c : superiority_cutoff) {
        if (c && !(*c >= 0.0 && *c <= 1.0)) throw InvalidArgument("superiority cutoff must be a probability");
    }
}

PriorSpec vague_bhm_prior() { return PriorSpec::inverse_gamma(0.0005, 0.000005); }

void DesignSpec::validate(const TrialSpec& spec) const {
    policy.validate(spec.size());
    hyper.validate();
    mcmc.validate();
    if (!(beta_prior.a > 0.0) || !(beta_prior.b > 0.0)) throw InvalidArgument("beta prior must be positive");
    switch (kind) {
        case DesignKind::Independent: break;
        case DesignKind::VagueBHM:
        case DesignKind::OBHM: prior.validate(); break;
        case DesignKind::COBHM:
            prior.validate();
            if (!(omega > 0.0)) throw InvalidArgument("COBHM omega must be positive");
            break;
        case DesignKind::AOBHM: {
            const auto g = enumerate_partitions(spec).size();
            if (partition_priors.size() != g) throw InvalidArgument("AOBHM needs one prior per partition");
            if (model_prior.size() != g) throw InvalidArgument("AOBHM needs one model prior per partition");
            for (const auto& p : partition_priors) p.validate();
            double sum = 0.0;
            for (double w : model_prior) {
                if (!(w >= 0.0)) throw InvalidArgument("model prior must be nonnegative");
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("model prior must sum to 1");
            break;
        }
    }
}

std::size_t PosteriorCache::size() const {
    std::lock_guard lock(mutex_);
    return map_.size();
}

std::uint64_t PosteriorCache::hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
}

std::uint64_t PosteriorCache::misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

void PosteriorCache::clear() {
    std::lock_guard lock(mutex_);
    map_.clear();
    hits_ = misses_ = 0;
}

double bop2_cutoff(int n, int max_n, double zeta, double delta) {
    if (n < 1 || n > max_n) throw InvalidArgument("bop2_cutoff needs 1 <= n <= max_n");
    return 1.0 - zeta * std::pow(static_cast<double>(n) / static_cast<double>(max_n), delta);
}

TailProbs bhm_posterior(const ObservedData& data, const TrialSpec& spec, std::span<const int> subset,
                        const PriorSpec& prior, const HyperPrior& hyper, const McmcControl& mcmc,
                        PosteriorCache* cache) {
    std::vector<int> arms(subset.begin(), subset.end());
    if (arms.empty()) {
        arms.resize(spec.size());
        std::iota(arms.begin(), arms.end(), 0);
    }
    // The joint model is symmetric in the arms, so arms are put in a canonical
    // order before keying and seeding; permuted data then share one chain.
    auto tuple_of = [&](int j) {
        const auto& arm = spec.arms.at(static_cast<std::size_t>(j));
        return std::tuple(arm.p0, arm.p1, data.n.at(static_cast<std::size_t>(j)),
                          data.x.at(static_cast<std::size_t>(j)));
    };
    std::vector<std::size_t> order(arms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tuple_of(arms[a]) < tuple_of(arms[b]); });

    std::vector<int> n;
    std::vector<int> x;
    std::vector<double> p0;
    std::vector<double> p1;
    std::string key = model_key(prior, hyper, mcmc);
    for (std::size_t k : order) {
        const auto [a0, a1, nj, xj] = tuple_of(arms[k]);
        p0.push_back(a0);
        p1.push_back(a1);
        n.push_back(nj);
        x.push_back(xj);
        append_bytes(key, a0);
        append_bytes(key, a1);
        append_bytes(key, nj);
        append_bytes(key, xj);
    }
    auto compute = [&] {
        McmcControl control = mcmc;
        control.seed = stream_seed(mcmc.seed, fnv1a(key));
        return bhm_tail_probs(n, x, p0, p1, prior, hyper, control);
    };
    const TailProbs sorted = cache ? cache->get_or_compute(key, compute) : compute();
    TailProbs out = sorted;
    for (std::size_t k = 0; k < order.size(); ++k) {
        out.futility[order[k]] = sorted.futility[k];
        out.efficacy[order[k]] = sorted.efficacy[k];
    }
    return out;
}

Partition cluster_arms(const ObservedData& data, const TrialSpec& spec, double omega, const BetaParams& beta_prior) {
    data.validate(spec.size());
    if (!(omega > 0.0)) throw InvalidArgument("omega must be positive");
    Partition out{std::vector<bool>(spec.size(), false)};
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const auto& arm = spec.arms[j];
        const auto post = beta_binomial_posterior(data.x[j], data.n[j], beta_prior.a, beta_prior.b);
        const double prob = beta_tail_prob(post, 0.5 * (arm.p0 + arm.p1), Tail::greater);
        const double threshold =
            0.5 * std::pow(static_cast<double>(data.n[j]) / static_cast<double>(arm.max_n), omega);
        out.sensitive[j] = prob > threshold;
    }
    return out;
}

double log_model_likelihood(const ObservedData& data, const Partition& partition, const TrialSpec& spec) {
    data.validate(spec.size());
    if (partition.size() != spec.size()) throw InvalidArgument("partition length differs from arm count");
    double total = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const int n = data.n[j];
        const int x = data.x[j];
        if (n == 0) continue;
        const double p = partition.sensitive[j] ? spec.arms[j].p1 : spec.arms[j].p0;
        total += log_binom_coeff(n, x) + x * std::log(p) + (n - x) * std::log1p(-p);
    }
    return total;
}

double model_likelihood(const ObservedData& data, const Partition& partition, const TrialSpec& spec) {
    return std::exp(log_model_likelihood(data, partition, spec));
}

std::vector<double> bma_weights(const ObservedData& data, const TrialSpec& spec,
                                const std::vector<Partition>& partitions, std::span<const double> model_prior) {
    if (partitions.size() != model_prior.size() || partitions.empty()) {
        throw InvalidArgument("one model prior per partition is required");
    }
    std::vector<double> logw(partitions.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < partitions.size(); ++g) {
        logw[g] = model_prior[g] > 0.0 ? log_model_likelihood(data, partitions[g], spec) + std::log(model_prior[g])
                                       : -std::numeric_limits<double>::infinity();
        top = std::max(top, logw[g]);
    }
    if (!std::isfinite(top)) throw NumericalError("all model likelihoods vanish");
    double sum = 0.0;
    for (double& w : logw) {
        w = std::exp(w - top);
        sum += w;
    }
    for (double& w : logw) w /= sum;
    return logw;
}

namespace {

ArmProbabilities independent_probabilities(const ObservedData& data, const TrialSpec& spec, const BetaParams& prior,
                                           std::span<const int> arms) {
    ArmProbabilities out{std::vector<double>(spec.size(), 0.0), std::vector<double>(spec.size(), 0.0)};
    for (int j : arms) {
        const auto u = static_cast<std::size_t>(j);
        const auto post = beta_binomial_posterior(data.x[u], data.n[u], prior.a, prior.b);
        out.futility[u] = beta_tail_prob(post, spec.arms[u].p0, Tail::leq);
        out.efficacy[u] = beta_tail_prob(post, spec.arms[u].p1, Tail::greater);
    }
    return out;
}

std::vector<int> all_arms(const TrialSpec& spec) {
    std::vector<int> arms(spec.size());
    std::iota(arms.begin(), arms.end(), 0);
    return arms;
}

ArmProbabilities from_tail(const TailProbs& t) { return {t.futility, t.efficacy}; }

ArmProbabilities cobhm_probabilities(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                     PosteriorCache* cache) {
    const auto clusters = cluster_arms(data, spec, design.omega, design.beta_prior);
    ArmProbabilities out{std::vector<double>(spec.size(), 0.0), std::vector<double>(spec.size(), 0.0)};
    for (bool sensitive : {true, false}) {
        std::vector<int> members;
        for (std::size_t j = 0; j < spec.size(); ++j) {
            if (clusters.sensitive[j] == sensitive) members.push_back(static_cast<int>(j));
        }
        if (members.empty()) continue;
        if (members.size() == 1) {
            const auto single = independent_probabilities(data, spec, design.beta_prior, members);
            const auto u = static_cast<std::size_t>(members.front());
            out.futility[u] = single.futility[u];
            out.efficacy[u] = single.efficacy[u];
            continue;
        }
        const auto tail = bhm_posterior(data, spec, members, design.prior, design.hyper, design.mcmc, cache);
        for (std::size_t k = 0; k < members.size(); ++k) {
            const auto u = static_cast<std::size_t>(members[k]);
            out.futility[u] = tail.futility[k];
            out.efficacy[u] = tail.efficacy[k];
        }
    }
    return out;
}

ArmProbabilities aobhm_probabilities(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                     PosteriorCache* cache) {
    const auto partitions = enumerate_partitions(spec);
    const auto weights = bma_weights(data, spec, partitions, design.model_prior);
    const std::size_t J = spec.size();
    ArmProbabilities out{std::vector<double>(J, 0.0), std::vector<double>(J, 0.0)};

    if (design.decision_mode == DecisionMode::model_select) {
        const auto best = static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
        return from_tail(bhm_posterior(data, spec, {}, design.partition_priors[best], design.hyper, design.mcmc, cache));
    }
    for (std::size_t g = 0; g < partitions.size(); ++g) {
        if (weights[g] == 0.0) continue;
        const auto tail = bhm_posterior(data, spec, {}, design.partition_priors[g], design.hyper, design.mcmc, cache);
        for (std::size_t j = 0; j < J; ++j) {
            out.futility[j] += weights[g] * tail.futility[j];
            out.efficacy[j] += weights[g] * tail.efficacy[j];
        }
    }
    // Guard the convex combination against rounding just past [0,1].
    for (std::size_t j = 0; j < J; ++j) {
        out.futility[j] = std::clamp(out.futility[j], 0.0, 1.0);
        out.efficacy[j] = std::clamp(out.efficacy[j], 0.0, 1.0);
    }
    return out;
}

}  // namespace

ArmProbabilities design_probabilities(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                      PosteriorCache* cache) {
    data.validate(spec.size());
    switch (design.kind) {
        case DesignKind::Independent: return independent_probabilities(data, spec, design.beta_prior, all_arms(spec));
        case DesignKind::VagueBHM:
        case DesignKind::OBHM:
            return from_tail(bhm_posterior(data, spec, {}, design.prior, design.hyper, design.mcmc, cache));
        case DesignKind::COBHM: return cobhm_probabilities(data, spec, design, cache);
        case DesignKind::AOBHM: return aobhm_probabilities(data, spec, design, cache);
    }
    throw InvalidArgument("unknown design kind");
}

std::vector<ArmDecision> apply_stopping_rules(const ObservedData& data, const TrialSpec& spec,
                                              const StoppingPolicy& policy, const ArmProbabilities& probs) {
    const std::size_t J = spec.size();
    std::vector<ArmDecision> out(J);
    for (std::size_t j = 0; j < J; ++j) {
        const int n = data.n[j];
        const int max_n = spec.arms[j].max_n;
        auto& d = out[j];
        d.futility_prob = probs.futility[j];
        d.n_at_decision = n;
        if (n == 0) continue;
        const bool final_look = n >= max_n;
        const double cutoff = bop2_cutoff(n, max_n, policy.zeta[j], policy.delta[j]);
        const auto sup = policy.superiority_cutoff.empty() ? std::nullopt : policy.superiority_cutoff[j];
        if (probs.futility[j] > cutoff) {
            d.status = final_look ? ArmStatus::final_not_effective : ArmStatus::stopped_futile;
        } else if (sup && probs.efficacy[j] > *sup) {
            d.status = final_look ? ArmStatus::final_effective : ArmStatus::stopped_superior;
        } else {
            d.status = final_look ? ArmStatus::final_effective : ArmStatus::continuing;
        }
    }
    return out;
}

std::vector<ArmDecision> independent_analyze(const ObservedData& data, const TrialSpec& spec,
                                             const DesignSpec& design) {
    data.validate(spec.size());
    const auto probs = independent_probabilities(data, spec, design.beta_prior, all_arms(spec));
    return apply_stopping_rules(data, spec, design.policy, probs);
}

std::vector<ArmDecision> bhm_analyze(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                     PosteriorCache* cache) {
    data.validate(spec.size());
    const auto tail = bhm_posterior(data, spec, {}, design.prior, design.hyper, design.mcmc, cache);
    return apply_stopping_rules(data, spec, design.policy, from_tail(tail));
}

std::vector<ArmDecision> cobhm_analyze(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                       PosteriorCache* cache) {
    data.validate(spec.size());
    return apply_stopping_rules(data, spec, design.policy, cobhm_probabilities(data, spec, design, cache));
}

std::vector<ArmDecision> aobhm_analyze(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                       PosteriorCache* cache) {
    data.validate(spec.size());
    return apply_stopping_rules(data, spec, design.policy, aobhm_probabilities(data, spec, design, cache));
}

std::vector<ArmDecision> analyze(const ObservedData& data, const TrialSpec& spec, const DesignSpec& design,
                                 PosteriorCache* cache) {
    return apply_stopping_rules(data, spec, design.policy, design_probabilities(data, spec, design, cache));
}

}  // namespace basket
