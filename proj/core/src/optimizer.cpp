#include "basket/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

namespace basket {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    out.back() = hi;
    return out;
}

GridSpec GridSpec::for_trial(const TrialSpec& spec, std::size_t n_v0, std::size_t n_sigma0_sq, std::size_t n_a) {
    spec.validate();
    const double upper = 5.0 * empirical_sigma_max(spec);
    GridSpec g;
    g.v0 = linspace(0.1, static_cast<double>(spec.size()), n_v0);
    for (std::size_t k = 1; k <= n_sigma0_sq; ++k) {
        g.sigma0_sq.push_back(upper * static_cast<double>(k) / static_cast<double>(n_sigma0_sq));
    }
    // A shares the sigma0^2 interval.
    for (std::size_t k = 1; k <= n_a; ++k) {
        g.half_cauchy_a.push_back(upper * static_cast<double>(k) / static_cast<double>(n_a));
    }
    return g;
}

void GridSpec::validate() const {
    auto positive = [](const std::vector<double>& v, const char* what) {
        for (double x : v) {
            if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string("grid ") + what + " must be positive");
        }
    };
    positive(v0, "v0");
    positive(sigma0_sq, "sigma0_sq");
    positive(half_cauchy_a, "half_cauchy_a");
    if (reps_per_point < 1 || refine_reps < 1) throw InvalidArgument("grid reps must be positive");
    if (refine_top < 0) throw InvalidArgument("refine_top must be nonnegative");
}

namespace {

using Objective = std::function<double(const GridPoint&)>;

// Higher score wins; ties go to the smaller sigma0^2, then v0, then A.
bool better(const GridPoint& a, double sa, const GridPoint& b, double sb) {
    if (sa != sb) return sa > sb;
    return std::tie(a.sigma0_sq, a.v0, a.scale_a) < std::tie(b.sigma0_sq, b.v0, b.scale_a);
}

std::size_t argmax(const std::vector<GridPoint>& pts, const Objective& score) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (better(pts[i], score(pts[i]), pts[best], score(pts[best]))) best = i;
    }
    return best;
}

struct Evaluator {
    const TrialSpec& spec;
    const UtilitySpec& utility;
    const DesignSpec& design;
    const std::vector<Partition>& partitions;
    std::vector<bool> mask;
    std::uint64_t base_seed;
    SimOptions options;

    void operator()(GridPoint& pt, int reps) const {
        DesignSpec d = design;
        d.prior = pt.prior;
        // Posterior memo is per point: keys never repeat across priors.
        PosteriorCache cache;
        SimOptions opts = options;
        opts.cache = &cache;
        pt.rates.assign(partitions.size(), {});
        pt.utilities.assign(partitions.size(), 0.0);
        for (std::size_t g = 0; g < partitions.size(); ++g) {
            if (!mask[g]) continue;
            pt.rates[g] = oc_under_partition(partitions[g], spec, d, reps, base_seed, opts);
            pt.utilities[g] = basket::utility(partitions[g], pt.rates[g].powers, pt.rates[g].type1s, utility);
        }
        pt.mean_utility = mean_utility(pt.utilities, utility.weights);
        pt.reps = reps;
    }
};

// Coarse pass over every point, then the top candidates of each objective at
// refine_reps. Any unrefined point that still ends up on top is refined too,
// so every reported argmax rests on refine_reps replicates.
void search(std::vector<GridPoint>& pts, const GridSpec& grid, const Evaluator& eval,
            const std::vector<Objective>& objectives) {
    for (auto& p : pts) eval(p, grid.reps_per_point);
    if (grid.refine_reps <= grid.reps_per_point) return;

    std::vector<bool> refined(pts.size(), false);
    auto refine = [&](std::size_t i) {
        if (refined[i]) return false;
        eval(pts[i], grid.refine_reps);
        refined[i] = true;
        return true;
    };
    std::vector<std::size_t> first;
    for (const auto& score : objectives) {
        std::vector<std::size_t> order(pts.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return better(pts[a], score(pts[a]), pts[b], score(pts[b]));
        });
        const auto top = std::min<std::size_t>(order.size(), static_cast<std::size_t>(grid.refine_top));
        first.insert(first.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top));
    }
    std::sort(first.begin(), first.end());
    first.erase(std::unique(first.begin(), first.end()), first.end());
    for (std::size_t i : first) refine(i);

    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& score : objectives) changed |= refine(argmax(pts, score));
    }
}

OptimizationResult finish(std::vector<GridPoint> pts) {
    OptimizationResult r;
    r.best_index = argmax(pts, [](const GridPoint& p) { return p.mean_utility; });
    r.best_prior = pts[r.best_index].prior;
    r.best_mean_utility = pts[r.best_index].mean_utility;
    r.grid_trace = std::move(pts);
    return r;
}

void check_design(const TrialSpec& spec, const UtilitySpec& utility, const DesignSpec& design) {
    spec.validate();
    utility.validate(spec.size());
    if (design.kind == DesignKind::Independent || design.kind == DesignKind::AOBHM) {
        throw InvalidArgument("prior search needs a VagueBHM, OBHM or COBHM design");
    }
    const auto g = enumerate_partitions(spec).size();
    if (utility.weights.size() != g) {
        throw InvalidArgument("utility weights must have one entry per partition (" + std::to_string(g) + ")");
    }
}

std::vector<GridPoint> sic_points(const GridSpec& grid) {
    if (grid.v0.empty() || grid.sigma0_sq.empty()) throw InvalidArgument("empty prior grid");
    std::vector<GridPoint> pts;
    for (double v0 : grid.v0) {
        for (double s : grid.sigma0_sq) {
            GridPoint p;
            p.prior = PriorSpec::scaled_inv_chisq(v0, s);
            p.v0 = v0;
            p.sigma0_sq = s;
            pts.push_back(std::move(p));
        }
    }
    return pts;
}

std::vector<GridPoint> hc_points(const GridSpec& grid) {
    if (grid.half_cauchy_a.empty()) throw InvalidArgument("empty half-Cauchy grid");
    std::vector<GridPoint> pts;
    for (double a : grid.half_cauchy_a) {
        GridPoint p;
        p.prior = PriorSpec::half_cauchy(a);
        p.scale_a = a;
        pts.push_back(std::move(p));
    }
    return pts;
}

OptimizationResult run_search(std::vector<GridPoint> pts, const TrialSpec& spec, const UtilitySpec& utility,
                              const DesignSpec& design, const GridSpec& grid, std::uint64_t base_seed,
                              const SimOptions& options) {
    const auto partitions = enumerate_partitions(spec);
    std::vector<bool> mask(partitions.size());
    for (std::size_t g = 0; g < mask.size(); ++g) mask[g] = utility.weights[g] != 0.0;
    const Evaluator eval{spec, utility, design, partitions, mask, base_seed, options};
    search(pts, grid, eval, {[](const GridPoint& p) { return p.mean_utility; }});
    return finish(std::move(pts));
}

}  // namespace

OptimizationResult grid_search_prior(const TrialSpec& spec, const UtilitySpec& utility, const DesignSpec& design,
                                     const GridSpec& grid, std::uint64_t base_seed, const SimOptions& options) {
    check_design(spec, utility, design);
    grid.validate();
    return run_search(sic_points(grid), spec, utility, design, grid, base_seed, options);
}

OptimizationResult optimize_half_cauchy(const TrialSpec& spec, const UtilitySpec& utility, const DesignSpec& design,
                                        const GridSpec& grid, std::uint64_t base_seed,
                                        const SimOptions& options) {
    check_design(spec, utility, design);
    grid.validate();
    return run_search(hc_points(grid), spec, utility, design, grid, base_seed, options);
}

PerPartitionResult per_partition_priors(const TrialSpec& spec, const UtilitySpec& utility, const DesignSpec& design,
                                        const GridSpec& grid, std::uint64_t base_seed, bool half_cauchy,
                                        const SimOptions& options) {
    check_design(spec, utility, design);
    grid.validate();
    const auto partitions = enumerate_partitions(spec);
    auto pts = half_cauchy ? hc_points(grid) : sic_points(grid);
    const Evaluator eval{spec, utility, design, partitions, std::vector<bool>(partitions.size(), true), base_seed,
                         options};
    std::vector<Objective> objectives;
    for (std::size_t g = 0; g < partitions.size(); ++g) {
        objectives.push_back([g](const GridPoint& p) { return p.utilities[g]; });
    }
    search(pts, grid, eval, objectives);

    PerPartitionResult out;
    for (const auto& score : objectives) {
        const auto i = argmax(pts, score);
        out.best_index.push_back(i);
        out.priors.push_back(pts[i].prior);
    }
    out.trace = finish(std::move(pts));
    return out;
}

std::vector<int> calibration_groups(const TrialSpec& spec, const StoppingPolicy& policy) {
    using Key = std::tuple<double, double, int, std::vector<int>, double>;
    std::map<Key, int> ids;
    std::vector<int> out;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const auto& a = spec.arms[j];
        Key key{a.p0, a.p1, a.max_n, a.interim_ns, policy.delta.at(j)};
        auto [it, inserted] = ids.emplace(key, static_cast<int>(ids.size()));
        out.push_back(it->second);
    }
    return out;
}

CalibrationResult calibrate_zeta(const TrialSpec& spec, const DesignSpec& design, double target_alpha, int n_reps,
                                 std::uint64_t base_seed, const SimOptions& options,
                                 const CalibrationOptions& calibration) {
    if (!(target_alpha > 0.0 && target_alpha <= 1.0)) throw InvalidArgument("target_alpha must lie in (0, 1]");
    if (!(calibration.zeta_lo > 0.0 && calibration.zeta_lo < calibration.zeta_hi && calibration.zeta_hi < 1.0)) {
        throw InvalidArgument("zeta search bounds must satisfy 0 < lo < hi < 1");
    }
    if (calibration.max_steps < 1) throw InvalidArgument("max_steps must be positive");
    design.validate(spec);

    const auto group_of = calibration_groups(spec, design.policy);
    const std::size_t n_groups = static_cast<std::size_t>(*std::max_element(group_of.begin(), group_of.end())) + 1;
    std::vector<double> zeta(n_groups), lo(n_groups, calibration.zeta_lo), hi(n_groups, calibration.zeta_hi);
    for (std::size_t j = 0; j < spec.size(); ++j) {
        zeta[static_cast<std::size_t>(group_of[j])] =
            std::clamp(design.policy.zeta[j], calibration.zeta_lo, calibration.zeta_hi);
    }

    PosteriorCache local;
    SimOptions opts = options;
    if (!opts.cache) opts.cache = &local;
    const auto null_truth = partition_truth(Partition{std::vector<bool>(spec.size(), false)}, spec);

    CalibrationResult result;
    result.group_of_arm = group_of;
    double best_err = std::numeric_limits<double>::infinity();
    std::vector<double> group_mean(n_groups);
    for (int step = 0; step < calibration.max_steps; ++step) {
        DesignSpec d = design;
        for (std::size_t j = 0; j < spec.size(); ++j) d.policy.zeta[j] = zeta[static_cast<std::size_t>(group_of[j])];
        const auto oc = operating_characteristics(null_truth, spec, d, n_reps, base_seed, opts);
        ++result.evaluations;

        std::fill(group_mean.begin(), group_mean.end(), 0.0);
        std::vector<int> count(n_groups, 0);
        for (std::size_t j = 0; j < spec.size(); ++j) {
            group_mean[static_cast<std::size_t>(group_of[j])] += oc.claim_prob[j];
            ++count[static_cast<std::size_t>(group_of[j])];
        }
        double worst = 0.0;
        for (std::size_t g = 0; g < n_groups; ++g) {
            group_mean[g] /= count[g];
            worst = std::max(worst, std::abs(group_mean[g] - target_alpha));
        }
        // Ties go to the later, tighter bracket; claim rates are flat over zeta plateaus.
        if (worst <= best_err) {
            best_err = worst;
            result.policy = d.policy;
            result.claim_prob = oc.claim_prob;
        }
        if (worst <= calibration.tolerance) break;

        // Larger zeta lowers the cutoff, so stopping gets easier and claims drop.
        for (std::size_t g = 0; g < n_groups; ++g) {
            const double m = group_mean[g];
            if (std::abs(m - target_alpha) <= calibration.tolerance) continue;
            (m > target_alpha ? lo[g] : hi[g]) = zeta[g];
            zeta[g] = 0.5 * (lo[g] + hi[g]);
        }
    }
    result.converged = best_err <= calibration.tolerance;
    if (!result.converged) {
        for (std::size_t g = 0; g < n_groups; ++g) {
            std::ostringstream os;
            os << "arms";
            double z = 0.0;
            double m = 0.0;
            int c = 0;
            for (std::size_t j = 0; j < spec.size(); ++j) {
                if (group_of[j] != static_cast<int>(g)) continue;
                os << ' ' << j + 1;
                z = result.policy.zeta[j];
                m += result.claim_prob[j];
                ++c;
            }
            m /= c;
            if (std::abs(m - target_alpha) <= calibration.tolerance) continue;
            os << ": global-null claim probability " << m << " misses target " << target_alpha << " at zeta " << z;
            if (z - calibration.zeta_lo < 1e-6) os << " (lower search bound)";
            if (calibration.zeta_hi - z < 1e-6) os << " (upper search bound)";
            result.diagnostics.push_back(os.str());
        }
    }
    return result;
}

void write_trace_csv(std::ostream& os, const TrialSpec& spec, const OptimizationResult& result) {
    const std::size_t J = spec.size();
    const auto partitions = enumerate_partitions(spec);
    os << "v0,sigma0_sq,scale_a,partition_id";
    for (std::size_t j = 1; j <= J; ++j) os << ",rho_" << j;
    for (std::size_t j = 1; j <= J; ++j) os << ",gamma_" << j;
    os << ",U_g,mean_utility\n";
    const auto flags = os.flags();
    os << std::fixed << std::setprecision(6);
    for (const auto& pt : result.grid_trace) {
        for (std::size_t g = 0; g < partitions.size(); ++g) {
            if (g >= pt.rates.size() || (pt.rates[g].powers.empty() && pt.rates[g].type1s.empty())) continue;
            os << pt.v0 << ',' << pt.sigma0_sq << ',' << pt.scale_a << ',' << g + 1;
            std::vector<std::string> rho(J), gamma(J);
            std::size_t r = 0, t = 0;
            for (std::size_t j = 0; j < J; ++j) {
                std::ostringstream cell;
                cell << std::fixed << std::setprecision(6);
                if (partitions[g].sensitive[j]) {
                    cell << pt.rates[g].powers[r++];
                    rho[j] = cell.str();
                } else {
                    cell << pt.rates[g].type1s[t++];
                    gamma[j] = cell.str();
                }
            }
            for (const auto& c : rho) os << ',' << c;
            for (const auto& c : gamma) os << ',' << c;
            os << ',' << pt.utilities[g] << ',' << pt.mean_utility << '\n';
        }
    }
    os.flags(flags);
}

}  // namespace basket
