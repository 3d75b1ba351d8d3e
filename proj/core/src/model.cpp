#include "basket/model.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

namespace basket {

namespace {

bool is_open_probability(double p) { return p > 0.0 && p < 1.0 && std::isfinite(p); }

// Group arms by identical (p0, p1); returns group id per arm (first-appearance order).
std::vector<int> arm_groups(const TrialSpec& spec) {
    std::vector<int> group(spec.size(), -1);
    std::vector<std::pair<double, double>> keys;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const std::pair key{spec.arms[j].p0, spec.arms[j].p1};
        auto it = std::find(keys.begin(), keys.end(), key);
        if (it == keys.end()) {
            keys.push_back(key);
            group[j] = static_cast<int>(keys.size() - 1);
        } else {
            group[j] = static_cast<int>(it - keys.begin());
        }
    }
    return group;
}

double penalty_two(double gamma, double l1, double l2, double eta) {
    return l1 * gamma + (gamma > eta ? l2 * (gamma - eta) : 0.0);
}

}  // namespace

void ArmSpec::validate() const {
    if (!is_open_probability(p0) || !is_open_probability(p1)) {
        throw InvalidArgument("arm response rates must lie strictly inside (0,1)");
    }
    if (!(p0 < p1)) throw InvalidArgument("arm requires p0 < p1");
    if (max_n < 1) throw InvalidArgument("arm max_n must be positive");
    if (interim_ns.empty()) throw InvalidArgument("arm needs at least one look");
    for (std::size_t k = 0; k < interim_ns.size(); ++k) {
        if (interim_ns[k] < 1) throw InvalidArgument("interim sample sizes must be >= 1");
        if (k > 0 && interim_ns[k] <= interim_ns[k - 1]) {
            throw InvalidArgument("interim sample sizes must be strictly increasing");
        }
    }
    if (interim_ns.back() != max_n) throw InvalidArgument("last interim must equal max_n");
}

void TrialSpec::validate() const {
    if (arms.size() < 2) throw InvalidArgument("a trial needs at least two arms");
    for (const auto& arm : arms) arm.validate();
}

std::size_t Partition::n_sensitive() const {
    return static_cast<std::size_t>(std::count(sensitive.begin(), sensitive.end(), true));
}

std::vector<int> Partition::sensitive_arms() const {
    std::vector<int> out;
    for (std::size_t j = 0; j < sensitive.size(); ++j) {
        if (sensitive[j]) out.push_back(static_cast<int>(j));
    }
    return out;
}

std::string Partition::label() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (int j : sensitive_arms()) {
        if (!first) os << ',';
        os << j + 1;
        first = false;
    }
    os << '}';
    return os.str();
}

ScaledInvChiSq ScaledInvChiSq::from_inverse_gamma(double a0, double b0) {
    if (!(a0 > 0.0) || !(b0 > 0.0)) throw InvalidArgument("inverse-gamma parameters must be positive");
    return {2.0 * a0, b0 / a0};
}

PriorSpec PriorSpec::inverse_gamma(double a0, double b0) {
    PriorSpec p{ScaledInvChiSq::from_inverse_gamma(a0, b0)};
    p.validate();
    return p;
}

PriorSpec PriorSpec::scaled_inv_chisq(double v0, double sigma0_sq) {
    PriorSpec p{ScaledInvChiSq{v0, sigma0_sq}};
    p.validate();
    return p;
}

PriorSpec PriorSpec::half_cauchy(double a) {
    PriorSpec p{HalfCauchy{a}};
    p.validate();
    return p;
}

void PriorSpec::validate() const {
    if (const auto* s = std::get_if<ScaledInvChiSq>(&variant)) {
        if (!(s->v0 > 0.0) || !(s->sigma0_sq > 0.0) || !std::isfinite(s->v0) ||
            !std::isfinite(s->sigma0_sq)) {
            throw InvalidArgument("scaled-inv-chi2 prior needs positive finite v0 and sigma0_sq");
        }
    } else {
        const auto& h = std::get<HalfCauchy>(variant);
        if (!(h.scale_a > 0.0) || !std::isfinite(h.scale_a)) {
            throw InvalidArgument("half-Cauchy scale must be positive");
        }
    }
}

std::string PriorSpec::describe() const {
    std::ostringstream os;
    os.precision(6);
    if (const auto* s = std::get_if<ScaledInvChiSq>(&variant)) {
        os << "IG(" << s->shape() << "," << s->scale() << ")";
    } else {
        os << "HC(" << std::get<HalfCauchy>(variant).scale_a << ")";
    }
    return os.str();
}

void UtilitySpec::validate(std::size_t n_arms) const {
    auto nonneg = [](double v) { return v >= 0.0 && std::isfinite(v); };
    if (const auto* t = std::get_if<TwoRegion>(&variant)) {
        if (!nonneg(t->lambda1) || !nonneg(t->lambda2)) throw InvalidArgument("penalties must be >= 0");
        if (!is_open_probability(t->eta)) throw InvalidArgument("eta must lie in (0,1)");
    } else if (const auto* r = std::get_if<ThreeRegion>(&variant)) {
        if (!nonneg(r->lambda1) || !nonneg(r->lambda2) || !nonneg(r->lambda3)) {
            throw InvalidArgument("penalties must be >= 0");
        }
        if (!is_open_probability(r->eta1) || !is_open_probability(r->eta2)) {
            throw InvalidArgument("eta1, eta2 must lie in (0,1)");
        }
        if (!(r->eta1 < r->eta2)) throw InvalidArgument("three-region utility needs eta1 < eta2");
    } else {
        const auto& c = std::get<CostBenefit>(variant);
        if (c.gains.size() != n_arms) throw InvalidArgument("cost-benefit needs one gain per arm");
        if (!std::all_of(c.gains.begin(), c.gains.end(), nonneg) || !nonneg(c.f1) || !nonneg(c.f2)) {
            throw InvalidArgument("gains and losses must be >= 0");
        }
        if (!is_open_probability(c.eta)) throw InvalidArgument("eta must lie in (0,1)");
    }
    if (weights.empty()) throw InvalidArgument("partition weights are empty");
    double sum = 0.0;
    for (double w : weights) {
        if (!nonneg(w)) throw InvalidArgument("partition weights must be >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("partition weights must sum to 1");
}

void HyperPrior::validate() const {
    if (!std::isfinite(alpha0)) throw InvalidArgument("alpha0 must be finite");
    if (!(tau0_sq > 0.0) || !std::isfinite(tau0_sq)) throw InvalidArgument("tau0_sq must be positive");
}

std::vector<Partition> enumerate_partitions(const TrialSpec& spec) {
    const std::size_t J = spec.size();
    if (J >= 31) throw InvalidArgument("too many arms to enumerate partitions");
    const auto group = arm_groups(spec);

    // A class is fixed by how many arms of each group are sensitive; the
    // representative marks the earliest arms of each group.
    std::map<std::vector<int>, Partition> classes;
    for (std::uint32_t mask = 0; mask < (1u << J); ++mask) {
        std::vector<int> counts(J, 0);
        for (std::size_t j = 0; j < J; ++j) {
            if (mask & (1u << j)) ++counts[static_cast<std::size_t>(group[j])];
        }
        if (classes.count(counts)) continue;
        Partition rep{std::vector<bool>(J, false)};
        auto left = counts;
        for (std::size_t j = 0; j < J; ++j) {
            auto& k = left[static_cast<std::size_t>(group[j])];
            if (k > 0) {
                rep.sensitive[j] = true;
                --k;
            }
        }
        classes.emplace(std::move(counts), std::move(rep));
    }

    std::vector<Partition> out;
    out.reserve(classes.size());
    for (auto& [_, p] : classes) out.push_back(std::move(p));
    std::sort(out.begin(), out.end(), [](const Partition& a, const Partition& b) {
        const auto na = a.n_sensitive();
        const auto nb = b.n_sensitive();
        if (na != nb) return na < nb;
        return a.sensitive_arms() < b.sensitive_arms();
    });
    return out;
}

std::size_t canonical_index(const TrialSpec& spec, const std::vector<Partition>& partitions,
                            const Partition& assignment) {
    if (assignment.size() != spec.size()) throw InvalidArgument("partition length differs from arm count");
    const auto group = arm_groups(spec);
    auto counts_of = [&](const Partition& p) {
        std::vector<int> counts(spec.size(), 0);
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (p.sensitive[j]) ++counts[static_cast<std::size_t>(group[j])];
        }
        return counts;
    };
    const auto target = counts_of(assignment);
    for (std::size_t g = 0; g < partitions.size(); ++g) {
        if (counts_of(partitions[g]) == target) return g;
    }
    throw InvalidArgument("assignment does not match any canonical partition");
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double theta_offset(double p, double p0) {
    if (!is_open_probability(p) || !is_open_probability(p0)) {
        throw InvalidArgument("theta_offset requires probabilities strictly inside (0,1)");
    }
    return logit(p) - logit(p0);
}

double inv_theta_offset(double theta, double p0) {
    const double eta = theta + logit(p0);
    // Logistic evaluated on the stable side.
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double utility(const Partition& partition, std::span<const double> powers,
               std::span<const double> type1s, const UtilitySpec& spec) {
    const auto n_sens = partition.n_sensitive();
    if (powers.size() != n_sens || type1s.size() != partition.size() - n_sens) {
        throw InvalidArgument("rate vectors do not match partition membership");
    }
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!std::all_of(powers.begin(), powers.end(), in_unit) ||
        !std::all_of(type1s.begin(), type1s.end(), in_unit)) {
        throw InvalidArgument("rates must lie in [0,1]");
    }

    if (const auto* t = std::get_if<TwoRegion>(&spec.variant)) {
        double u = std::accumulate(powers.begin(), powers.end(), 0.0);
        for (double g : type1s) u -= penalty_two(g, t->lambda1, t->lambda2, t->eta);
        return u;
    }
    if (const auto* r = std::get_if<ThreeRegion>(&spec.variant)) {
        double u = std::accumulate(powers.begin(), powers.end(), 0.0);
        for (double g : type1s) {
            u -= r->lambda1 * g;
            if (g > r->eta1) u -= r->lambda2 * (g - r->eta1);
            if (g > r->eta2) u -= r->lambda3 * (g - r->eta2);
        }
        return u;
    }
    const auto& c = std::get<CostBenefit>(spec.variant);
    double u = 0.0;
    const auto sens = partition.sensitive_arms();
    for (std::size_t i = 0; i < sens.size(); ++i) u += c.gains[static_cast<std::size_t>(sens[i])] * powers[i];
    for (double g : type1s) u -= penalty_two(g, c.f1, c.f2, c.eta);
    return u;
}

double mean_utility(std::span<const double> utilities, std::span<const double> weights) {
    if (utilities.size() != weights.size()) throw InvalidArgument("one weight per utility is required");
    double wsum = 0.0;
    double total = 0.0;
    for (std::size_t g = 0; g < utilities.size(); ++g) {
        wsum += weights[g];
        total += weights[g] * utilities[g];
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw InvalidArgument("weights must sum to 1");
    return total;
}

double empirical_sigma_max(const TrialSpec& spec) {
    spec.validate();
    const std::size_t J = spec.size();
    double best = 0.0;
    for (const auto& part : enumerate_partitions(spec)) {
        std::vector<double> theta(J);
        for (std::size_t j = 0; j < J; ++j) {
            const auto& arm = spec.arms[j];
            theta[j] = theta_offset(part.sensitive[j] ? arm.p1 : arm.p0, arm.p0);
        }
        const double mean = std::accumulate(theta.begin(), theta.end(), 0.0) / static_cast<double>(J);
        double ss = 0.0;
        for (double t : theta) ss += (t - mean) * (t - mean);
        best = std::max(best, ss / static_cast<double>(J - 1));
    }
    return best;
}

std::vector<double> equal_weights(std::size_t g) {
    return std::vector<double>(g, 1.0 / static_cast<double>(g));
}

}  // namespace basket
