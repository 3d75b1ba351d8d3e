#pragma once

#include <vector>

#include "basket/designs.hpp"
#include "basket/model.hpp"

namespace fixture {

inline basket::ArmSpec arm(double p0, double p1, int max_n = 20, std::vector<int> looks = {10, 20}) {
    return basket::ArmSpec{p0, p1, max_n, std::move(looks)};
}

/// Three rare-null arms and one arm with a higher null rate.
inline basket::TrialSpec four_arm() {
    return basket::TrialSpec{{arm(0.05, 0.20), arm(0.05, 0.20), arm(0.05, 0.20), arm(0.15, 0.30)}};
}

inline basket::TrialSpec three_arm() {
    return basket::TrialSpec{{arm(0.05, 0.20), arm(0.05, 0.20), arm(0.05, 0.20)}};
}

inline basket::TrialSpec uniform_arms(std::size_t J, double p0 = 0.05, double p1 = 0.20) {
    return basket::TrialSpec{std::vector<basket::ArmSpec>(J, arm(p0, p1))};
}

inline std::vector<double> p0s(const basket::TrialSpec& s) {
    std::vector<double> v;
    for (const auto& a : s.arms) v.push_back(a.p0);
    return v;
}

inline std::vector<double> p1s(const basket::TrialSpec& s) {
    std::vector<double> v;
    for (const auto& a : s.arms) v.push_back(a.p1);
    return v;
}

/// Short chains for tests that only need decisions, not precise tails.
inline basket::McmcControl quick_mcmc(std::uint64_t seed = 7) {
    basket::McmcControl c;
    c.burn_in = 500;
    c.kept_draws = 2000;
    c.seed = seed;
    return c;
}

inline basket::DesignSpec design(basket::DesignKind kind, std::size_t J, double zeta = 0.715, double delta = 0.32) {
    basket::DesignSpec d;
    d.name = std::string(basket::to_string(kind));
    d.kind = kind;
    d.policy = basket::StoppingPolicy::uniform(J, zeta, delta);
    return d;
}

}  // namespace fixture
