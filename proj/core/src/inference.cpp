#include "basket/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

namespace basket {

namespace {

// log(1 + e^eta) without overflow.
inline double softplus(double eta) {
    return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

inline double binom_loglik(int x, int n, double eta) {
    if (n == 0) return 0.0;
    return x * eta - n * softplus(eta);
}

struct ChainInput {
    std::span<const int> n;
    std::span<const int> x;
    std::vector<double> logit_p0;
    std::vector<double> info;  // n p(1-p) at a smoothed point estimate
};

inline double logistic(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// Runs the Metropolis-within-Gibbs chain and hands every kept state to `keep`.
// Returns the theta_j acceptance rate over all iterations.
template <class Keep>
double run_chain(const ChainInput& in, const PriorSpec& prior, const HyperPrior& hyper,
                 const McmcControl& control, Keep&& keep) {
    const std::size_t J = in.n.size();
    Engine rng(control.seed);
    StdNormal normal;
    auto unif = [](Engine& r) { return uniform01(r); };

    std::vector<double> th(J);
    std::vector<double> ll(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double phat = (in.x[j] + 0.5) / (in.n[j] + 1.0);
        th[j] = logit(phat) - in.logit_p0[j];
        ll[j] = binom_loglik(in.x[j], in.n[j], th[j] + in.logit_p0[j]);
    }
    double t = std::accumulate(th.begin(), th.end(), 0.0) / static_cast<double>(J);
    double s2 = 0.0;
    for (double v : th) s2 += (v - t) * (v - t);
    s2 = std::clamp(s2 / static_cast<double>(J), 0.05, 10.0);

    const auto* sic = std::get_if<ScaledInvChiSq>(&prior.variant);
    const double hc_a = sic ? 0.0 : std::get<HalfCauchy>(prior.variant).scale_a;
    const double step = control.step_scale;
    const double tau2 = hyper.tau0_sq;

    auto fail = [&](const char* what) {
        std::ostringstream os;
        os << "non-finite " << what << " in hierarchical sampler (theta=" << t << ", sigma2=" << s2 << ")";
        throw NumericalError(os.str());
    };

    long accepted = 0;
    long proposed = 0;
    const long total = static_cast<long>(control.burn_in) + static_cast<long>(control.kept_draws) * control.thin;
    std::vector<double> ll_shift(J);
    for (long it = 0; it < total; ++it) {
        // theta_j | rest: random walk scaled by the conditional spread, which
        // depends only on sigma^2 and the data, so the proposal stays symmetric.
        const double inv_s2 = 1.0 / s2;
        for (std::size_t j = 0; j < J; ++j) {
            const double sd = 2.8 * step / std::sqrt(inv_s2 + in.info[j]);
            const double prop = th[j] + sd * normal(rng);
            const double ll_prop = binom_loglik(in.x[j], in.n[j], prop + in.logit_p0[j]);
            const double d_old = th[j] - t;
            const double d_new = prop - t;
            const double log_ratio = ll_prop - ll[j] - (d_new * d_new - d_old * d_old) / (2.0 * s2);
            ++proposed;
            if (std::log(unif(rng)) < log_ratio) {
                th[j] = prop;
                ll[j] = ll_prop;
                ++accepted;
            }
        }

        // Joint location shift of (theta_1..theta_J, theta); deviations unchanged.
        // Only needed when sigma^2 is small and the theta_j steps are tiny; the
        // choice depends on sigma^2 alone, which the move leaves fixed.
        if (s2 < 1.0) {
            const double eps = step * normal(rng);
            double log_ratio = 0.0;
            for (std::size_t j = 0; j < J; ++j) {
                ll_shift[j] = binom_loglik(in.x[j], in.n[j], th[j] + eps + in.logit_p0[j]);
                log_ratio += ll_shift[j] - ll[j];
            }
            const double a_old = t - hyper.alpha0;
            const double a_new = a_old + eps;
            log_ratio -= (a_new * a_new - a_old * a_old) / (2.0 * tau2);
            if (std::log(unif(rng)) < log_ratio) {
                for (std::size_t j = 0; j < J; ++j) {
                    th[j] += eps;
                    ll[j] = ll_shift[j];
                }
                t += eps;
            }
        }

        t = gibbs::draw_theta(th, s2, hyper, rng, normal);

        if (sic) {
            s2 = gibbs::draw_sigma2(th, t, *sic, rng);
        } else {
            double ss = 0.0;
            for (double v : th) ss += (v - t) * (v - t);
            // Random walk on log sigma; the +log sigma term is the Jacobian.
            auto log_target = [&](double log_sigma) {
                const double sigma = std::exp(log_sigma);
                const double r = sigma / hc_a;
                return -static_cast<double>(J) * log_sigma - ss / (2.0 * sigma * sigma) - std::log1p(r * r) +
                       log_sigma;
            };
            const double cur = 0.5 * std::log(s2);
            const double prop = cur + step * normal(rng);
            if (std::log(unif(rng)) < log_target(prop) - log_target(cur)) s2 = std::exp(2.0 * prop);
        }

        if (!std::isfinite(t)) fail("theta");
        if (!(s2 > 0.0) || !std::isfinite(s2)) {
            // IG draws can underflow for extremely concentrated priors.
            if (s2 == 0.0) {
                s2 = std::numeric_limits<double>::min();
            } else {
                fail("sigma2");
            }
        }

        if (it >= control.burn_in && (it - control.burn_in) % control.thin == 0) keep(th, t, s2);
    }
    return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
}

ChainInput make_input(std::span<const int> n, std::span<const int> x, std::span<const double> p0) {
    ChainInput in{n, x, {}, {}};
    for (std::size_t j = 0; j < p0.size(); ++j) {
        in.logit_p0.push_back(logit(p0[j]));
        const double phat = (x[j] + 0.5) / (n[j] + 1.0);
        in.info.push_back(n[j] * phat * (1.0 - phat));
    }
    return in;
}

}  // namespace

void ObservedData::validate(std::size_t n_arms) const {
    if (n.size() != n_arms || x.size() != n_arms) throw InvalidArgument("observed data must cover every arm");
    for (std::size_t j = 0; j < n.size(); ++j) {
        if (n[j] < 0 || x[j] < 0 || x[j] > n[j]) throw InvalidArgument("observed data needs 0 <= x <= n");
    }
}

void McmcControl::validate() const {
    if (burn_in < 1 || kept_draws < 1 || thin < 1) {
        throw InvalidArgument("burn_in, kept_draws and thin must be positive");
    }
    if (!(step_scale > 0.0) || !std::isfinite(step_scale)) throw InvalidArgument("step_scale must be positive");
}

BetaParams beta_binomial_posterior(int x, int n, double a1, double b1) {
    if (n < 0 || x < 0 || x > n) throw InvalidArgument("beta-binomial update needs 0 <= x <= n");
    if (!(a1 > 0.0) || !(b1 > 0.0)) throw InvalidArgument("beta prior parameters must be positive");
    return {x + a1, n - x + b1};
}

double beta_tail_prob(const BetaParams& params, double t, Tail direction) {
    if (!(params.a > 0.0) || !(params.b > 0.0)) throw InvalidArgument("beta parameters must be positive");
    if (t <= 0.0) return direction == Tail::greater ? 1.0 : 0.0;
    if (t >= 1.0) return direction == Tail::greater ? 0.0 : 1.0;
    return direction == Tail::greater ? boost::math::ibetac(params.a, params.b, t)
                                      : boost::math::ibeta(params.a, params.b, t);
}

PosteriorDraws bhm_sample(const ObservedData& data, const TrialSpec& spec, const PriorSpec& prior,
                          const HyperPrior& hyper, const McmcControl& control) {
    spec.validate();
    data.validate(spec.size());
    prior.validate();
    hyper.validate();
    control.validate();

    std::vector<double> p0(spec.size());
    for (std::size_t j = 0; j < spec.size(); ++j) p0[j] = spec.arms[j].p0;
    const auto in = make_input(data.n, data.x, p0);

    PosteriorDraws out;
    const std::size_t J = spec.size();
    const auto kept = static_cast<std::size_t>(control.kept_draws);
    out.n_arms = J;
    out.p.reserve(kept * J);
    out.arm_theta.reserve(kept * J);
    out.theta.reserve(kept);
    out.sigma2.reserve(kept);
    out.arm_acceptance = run_chain(in, prior, hyper, control,
                                   [&](const std::vector<double>& th, double t, double s2) {
                                       for (std::size_t j = 0; j < J; ++j) {
                                           out.arm_theta.push_back(th[j]);
                                           // Saturated logistic values are pulled back inside (0,1).
                                           out.p.push_back(std::clamp(logistic(th[j] + in.logit_p0[j]),
                                                                      std::numeric_limits<double>::min(),
                                                                      std::nextafter(1.0, 0.0)));
                                       }
                                       out.theta.push_back(t);
                                       out.sigma2.push_back(s2);
                                   });
    return out;
}

double posterior_futility_prob(const PosteriorDraws& draws, std::size_t arm, double p0) {
    if (arm >= draws.n_arms) throw InvalidArgument("arm index out of range");
    if (draws.n_draws() == 0) throw InvalidArgument("no posterior draws");
    std::size_t hits = 0;
    for (std::size_t d = 0; d < draws.n_draws(); ++d) hits += draws.p_at(d, arm) <= p0;
    return static_cast<double>(hits) / static_cast<double>(draws.n_draws());
}

double posterior_efficacy_prob(const PosteriorDraws& draws, std::size_t arm, double p1) {
    if (arm >= draws.n_arms) throw InvalidArgument("arm index out of range");
    if (draws.n_draws() == 0) throw InvalidArgument("no posterior draws");
    std::size_t hits = 0;
    for (std::size_t d = 0; d < draws.n_draws(); ++d) hits += draws.p_at(d, arm) >= p1;
    return static_cast<double>(hits) / static_cast<double>(draws.n_draws());
}

TailProbs bhm_tail_probs(std::span<const int> n, std::span<const int> x, std::span<const double> p0,
                         std::span<const double> p1, const PriorSpec& prior, const HyperPrior& hyper,
                         const McmcControl& control) {
    const std::size_t J = n.size();
    if (x.size() != J || p0.size() != J || p1.size() != J) throw InvalidArgument("arm vectors differ in length");
    if (J == 0) throw InvalidArgument("no arms");
    const auto in = make_input(n, x, p0);
    std::vector<long> fut(J, 0);
    std::vector<long> eff(J, 0);
    TailProbs out;
    out.arm_acceptance = run_chain(in, prior, hyper, control,
                                   [&](const std::vector<double>& th, double, double) {
                                       for (std::size_t j = 0; j < J; ++j) {
                                           const double p = logistic(th[j] + in.logit_p0[j]);
                                           fut[j] += p <= p0[j];
                                           eff[j] += p >= p1[j];
                                       }
                                   });
    const double kept = control.kept_draws;
    for (std::size_t j = 0; j < J; ++j) {
        out.futility.push_back(static_cast<double>(fut[j]) / kept);
        out.efficacy.push_back(static_cast<double>(eff[j]) / kept);
    }
    return out;
}

void write_chain_csv(std::ostream& os, const PosteriorDraws& draws) {
    os << "iteration";
    for (std::size_t j = 0; j < draws.n_arms; ++j) os << ",theta_" << j + 1;
    os << ",theta,sigma2\n";
    const auto old_precision = os.precision(17);
    for (std::size_t d = 0; d < draws.n_draws(); ++d) {
        os << d + 1;
        for (std::size_t j = 0; j < draws.n_arms; ++j) os << ',' << draws.arm_theta[d * draws.n_arms + j];
        os << ',' << draws.theta[d] << ',' << draws.sigma2[d] << '\n';
    }
    os.precision(old_precision);
}

namespace gibbs {

NormalParams theta_conditional(std::span<const double> arm_theta, double sigma2, const HyperPrior& hyper) {
    const double sum = std::accumulate(arm_theta.begin(), arm_theta.end(), 0.0);
    const double prec = 1.0 / hyper.tau0_sq + static_cast<double>(arm_theta.size()) / sigma2;
    return {(hyper.alpha0 / hyper.tau0_sq + sum / sigma2) / prec, 1.0 / std::sqrt(prec)};
}

double draw_theta(std::span<const double> arm_theta, double sigma2, const HyperPrior& hyper, Engine& rng,
                  StdNormal& normal) {
    const auto c = theta_conditional(arm_theta, sigma2, hyper);
    return c.mean + c.sd * normal(rng);
}

InvGammaParams sigma2_conditional(std::span<const double> arm_theta, double theta, const ScaledInvChiSq& prior) {
    double ss = 0.0;
    for (double v : arm_theta) ss += (v - theta) * (v - theta);
    return {prior.shape() + 0.5 * static_cast<double>(arm_theta.size()), prior.scale() + 0.5 * ss};
}

double draw_sigma2(std::span<const double> arm_theta, double theta, const ScaledInvChiSq& prior, Engine& rng) {
    const auto c = sigma2_conditional(arm_theta, theta, prior);
    std::gamma_distribution<double> gamma(c.shape, 1.0);
    return c.scale / gamma(rng);
}

}  // namespace gibbs

}  // namespace basket
