#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace basket {

/// Thrown for any violated precondition on domain values.
class InvalidArgument : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// One disease cohort: null/target response rates and its look schedule.
struct ArmSpec {
    double p0 = 0.0;
    double p1 = 0.0;
    int max_n = 0;
    std::vector<int> interim_ns;  // strictly increasing, last == max_n

    void validate() const;
};

struct TrialSpec {
    std::vector<ArmSpec> arms;

    std::size_t size() const { return arms.size(); }
    void validate() const;
};

/// sensitive[j] == true  <=>  arm j belongs to the responding set.
struct Partition {
    std::vector<bool> sensitive;

    std::size_t size() const { return sensitive.size(); }
    std::size_t n_sensitive() const;
    std::vector<int> sensitive_arms() const;  // 0-based, ascending
    std::string label() const;                // e.g. "{1,4}" with 1-based arms

    friend bool operator==(const Partition&, const Partition&) = default;
};

/// Scaled-inverse-chi-square prior on sigma^2; equivalent to IG(v0/2, v0*sigma0_sq/2).
struct ScaledInvChiSq {
    double v0 = 1.0;
    double sigma0_sq = 1.0;

    double shape() const { return v0 / 2.0; }
    double scale() const { return v0 * sigma0_sq / 2.0; }
    static ScaledInvChiSq from_inverse_gamma(double a0, double b0);

    friend bool operator==(const ScaledInvChiSq&, const ScaledInvChiSq&) = default;
};

/// Half-Cauchy prior p(sigma) ~ (1 + (sigma/A)^2)^-1.
struct HalfCauchy {
    double scale_a = 1.0;

    friend bool operator==(const HalfCauchy&, const HalfCauchy&) = default;
};

struct PriorSpec {
    std::variant<ScaledInvChiSq, HalfCauchy> variant;

    static PriorSpec inverse_gamma(double a0, double b0);
    static PriorSpec scaled_inv_chisq(double v0, double sigma0_sq);
    static PriorSpec half_cauchy(double a);

    bool is_half_cauchy() const { return std::holds_alternative<HalfCauchy>(variant); }
    void validate() const;
    std::string describe() const;  // "IG(2,8)" or "HC(1.5)"

    friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// Finite stand-in for an "infinite" penalty that enforces strict type I control.
inline constexpr double kStrictPenalty = 1e6;

struct TwoRegion {
    double lambda1 = 1.0;
    double lambda2 = 2.0;
    double eta = 0.2;
};

struct ThreeRegion {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double lambda3 = 1.0;
    double eta1 = 0.1;
    double eta2 = 0.2;
};

/// gains[j] is the payoff for a correct claim in arm j (only sensitive arms are read).
struct CostBenefit {
    std::vector<double> gains;
    double f1 = 1.0;
    double f2 = 0.0;
    double eta = 0.2;
};

struct UtilitySpec {
    std::variant<TwoRegion, ThreeRegion, CostBenefit> variant;
    std::vector<double> weights;  // one per canonical partition

    void validate(std::size_t n_arms) const;
};

struct HyperPrior {
    double alpha0 = 0.0;
    double tau0_sq = 100.0;

    void validate() const;
};

/// All 2^J sensitivity assignments collapsed over arms sharing (p0, p1).
/// The representative of each class lists its sensitive arms as early as
/// possible (smallest sensitive-index set); output is sorted by the number
/// of sensitive arms, then by that index set.
std::vector<Partition> enumerate_partitions(const TrialSpec& spec);

/// Index of the canonical class containing `assignment` within `partitions`.
std::size_t canonical_index(const TrialSpec& spec, const std::vector<Partition>& partitions,
                            const Partition& assignment);

double logit(double p);
double theta_offset(double p, double p0);
double inv_theta_offset(double theta, double p0);

double utility(const Partition& partition, std::span<const double> powers,
               std::span<const double> type1s, const UtilitySpec& spec);

double mean_utility(std::span<const double> utilities, std::span<const double> weights);

/// Largest sample variance (divisor J-1) of the logit offsets over all partitions.
double empirical_sigma_max(const TrialSpec& spec);

/// Convenience: uniform weights over G partitions.
std::vector<double> equal_weights(std::size_t g);

}  // namespace basket
