#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "basket/model.hpp"
#include "basket/rng.hpp"

namespace basket {

/// Raised when the sampler meets a non-finite log density.
class NumericalError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Per-arm enrolment and responder counts at one analysis.
struct ObservedData {
    std::vector<int> n;
    std::vector<int> x;

    std::size_t size() const { return n.size(); }
    void validate(std::size_t n_arms) const;
};

struct McmcControl {
    int burn_in = 2000;
    int kept_draws = 10000;
    int thin = 1;
    std::uint64_t seed = 20240601;
    double step_scale = 0.8;

    void validate() const;
};

/// kept_draws x J response-rate samples plus the shared hyperparameters.
struct PosteriorDraws {
    std::size_t n_arms = 0;
    std::vector<double> p;          // row-major, kept x J
    std::vector<double> arm_theta;  // row-major, kept x J (logit offsets)
    std::vector<double> theta;
    std::vector<double> sigma2;
    double arm_acceptance = 0.0;    // fraction of accepted theta_j proposals

    std::size_t n_draws() const { return theta.size(); }
    double p_at(std::size_t draw, std::size_t arm) const { return p[draw * n_arms + arm]; }
};

struct BetaParams {
    double a = 1.0;
    double b = 1.0;

    friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

enum class Tail { greater, leq };

BetaParams beta_binomial_posterior(int x, int n, double a1, double b1);

/// Pr(p > t) or Pr(p <= t) for p ~ Beta(a, b).
double beta_tail_prob(const BetaParams& params, double t, Tail direction);

/// Metropolis-within-Gibbs draws for the hierarchical logit model.
PosteriorDraws bhm_sample(const ObservedData& data, const TrialSpec& spec, const PriorSpec& prior,
                          const HyperPrior& hyper, const McmcControl& control);

/// Fraction of draws with p_j <= p0.
double posterior_futility_prob(const PosteriorDraws& draws, std::size_t arm, double p0);
/// Fraction of draws with p_j >= p1.
double posterior_efficacy_prob(const PosteriorDraws& draws, std::size_t arm, double p1);

/// Tail probabilities from one chain without materialising the draws.
struct TailProbs {
    std::vector<double> futility;  // Pr(p_j <= p0_j | D)
    std::vector<double> efficacy;  // Pr(p_j >= p1_j | D)
    double arm_acceptance = 0.0;
};

/// Same chain as bhm_sample (identical seed gives identical tail fractions),
/// over an arbitrary subset of arms given by their (p0, p1).
TailProbs bhm_tail_probs(std::span<const int> n, std::span<const int> x, std::span<const double> p0,
                         std::span<const double> p1, const PriorSpec& prior, const HyperPrior& hyper,
                         const McmcControl& control);

/// CSV columns: iteration, theta_1..theta_J, theta, sigma2.
void write_chain_csv(std::ostream& os, const PosteriorDraws& draws);

/// Single Gibbs blocks; the sampler calls exactly these.
namespace gibbs {

/// theta | theta_j, sigma^2 is normal with this mean and sd.
struct NormalParams {
    double mean = 0.0;
    double sd = 1.0;
};
NormalParams theta_conditional(std::span<const double> arm_theta, double sigma2, const HyperPrior& hyper);
double draw_theta(std::span<const double> arm_theta, double sigma2, const HyperPrior& hyper, Engine& rng,
                  StdNormal& normal);

/// sigma^2 | theta_j, theta is IG(shape, scale) under a scaled-inverse-chi-square prior.
struct InvGammaParams {
    double shape = 1.0;
    double scale = 1.0;
};
InvGammaParams sigma2_conditional(std::span<const double> arm_theta, double theta, const ScaledInvChiSq& prior);
double draw_sigma2(std::span<const double> arm_theta, double theta, const ScaledInvChiSq& prior, Engine& rng);

}  // namespace gibbs

}  // namespace basket
