#include "basket/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "basket/rng.hpp"

namespace basket {

using nlohmann::json;

namespace {

struct Ctx {
    std::string origin;

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        throw ConfigError(origin + ": " + (path.empty() ? std::string("(root)") : path) + ": " + msg);
    }
};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void check_object(const Ctx& c, const json& v, const std::string& path) {
    if (!v.is_object()) c.fail(path, "expected an object");
}

void check_keys(const Ctx& c, const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    check_object(c, obj, path);
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            std::string list;
            for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
            c.fail(join(path, key), "unknown key (allowed: " + list + ")");
        }
    }
}

const json& require(const Ctx& c, const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) c.fail(join(path, key), "missing required key");
    return *it;
}

double number(const Ctx& c, const json& v, const std::string& path) {
    if (!v.is_number()) c.fail(path, "expected a number");
    return v.get<double>();
}

int integer(const Ctx& c, const json& v, const std::string& path) {
    if (!v.is_number_integer()) c.fail(path, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) c.fail(path, "integer out of range");
    return static_cast<int>(x);
}

std::uint64_t unsigned64(const Ctx& c, const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    c.fail(path, "expected a nonnegative integer");
}

bool boolean(const Ctx& c, const json& v, const std::string& path) {
    if (!v.is_boolean()) c.fail(path, "expected true or false");
    return v.get<bool>();
}

std::string string(const Ctx& c, const json& v, const std::string& path) {
    if (!v.is_string()) c.fail(path, "expected a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const Ctx& c, const json& v, const std::string& path) {
    if (!v.is_array()) c.fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(c, v[i], index(path, i)));
    return out;
}

// A scalar broadcasts to every arm; an array must match the arm count.
std::vector<double> per_arm(const Ctx& c, const json& v, const std::string& path, std::size_t J) {
    if (v.is_number()) return std::vector<double>(J, v.get<double>());
    auto out = numbers(c, v, path);
    if (out.size() != J) c.fail(path, "expected " + std::to_string(J) + " values, one per arm, got " +
                                          std::to_string(out.size()));
    return out;
}

// Runs a domain validator and reports its message at `path`.
template <class F>
void validated(const Ctx& c, const std::string& path, F&& f) {
    try {
        f();
    } catch (const InvalidArgument& e) {
        c.fail(path, e.what());
    }
}

PriorSpec parse_prior(const Ctx& c, const json& v, const std::string& path) {
    if (v.is_string()) {
        if (v.get<std::string>() == "vague") return vague_bhm_prior();
        c.fail(path, "unknown prior name (allowed: vague)");
    }
    check_keys(c, v, path, {"a0", "b0", "v0", "sigma0_sq", "half_cauchy"});
    PriorSpec p;
    if (v.contains("half_cauchy")) {
        if (v.size() != 1) c.fail(path, "half_cauchy takes no other keys");
        const double a = number(c, v["half_cauchy"], join(path, "half_cauchy"));
        validated(c, path, [&] { p = PriorSpec::half_cauchy(a); });
    } else if (v.contains("a0") || v.contains("b0")) {
        if (v.contains("v0") || v.contains("sigma0_sq")) c.fail(path, "give either a0/b0 or v0/sigma0_sq");
        const double a0 = number(c, require(c, v, path, "a0"), join(path, "a0"));
        const double b0 = number(c, require(c, v, path, "b0"), join(path, "b0"));
        validated(c, path, [&] { p = PriorSpec::inverse_gamma(a0, b0); });
    } else {
        const double v0 = number(c, require(c, v, path, "v0"), join(path, "v0"));
        const double s2 = number(c, require(c, v, path, "sigma0_sq"), join(path, "sigma0_sq"));
        validated(c, path, [&] { p = PriorSpec::scaled_inv_chisq(v0, s2); });
    }
    validated(c, path, [&] { p.validate(); });
    return p;
}

json prior_json(const PriorSpec& p) {
    if (const auto* hc = std::get_if<HalfCauchy>(&p.variant)) return {{"half_cauchy", hc->scale_a}};
    const auto& s = std::get<ScaledInvChiSq>(p.variant);
    return {{"a0", s.shape()}, {"b0", s.scale()}};
}

// "{1,4}" -> canonical partition index.
std::size_t parse_partition_key(const Ctx& c, const std::string& key, const std::string& path, const TrialSpec& spec,
                                const std::vector<Partition>& partitions) {
    if (key.size() < 2 || key.front() != '{' || key.back() != '}') {
        c.fail(path, "partition keys list sensitive arms, e.g. \"{1,4}\" or \"{}\"");
    }
    Partition p{std::vector<bool>(spec.size(), false)};
    std::stringstream ss(key.substr(1, key.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        int arm = 0;
        try {
            std::size_t used = 0;
            arm = std::stoi(item, &used);
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            c.fail(path, "bad arm number '" + item + "'");
        }
        if (arm < 1 || arm > static_cast<int>(spec.size())) c.fail(path, "arm " + std::to_string(arm) + " out of range");
        if (p.sensitive[static_cast<std::size_t>(arm - 1)]) c.fail(path, "arm listed twice");
        p.sensitive[static_cast<std::size_t>(arm - 1)] = true;
    }
    return canonical_index(spec, partitions, p);
}

// "equal" or an object keyed by partition; unlisted partitions get 0.
std::vector<double> parse_partition_weights(const Ctx& c, const json& v, const std::string& path,
                                            const TrialSpec& spec, const std::vector<Partition>& partitions) {
    if (v.is_string()) {
        if (v.get<std::string>() == "equal") return equal_weights(partitions.size());
        c.fail(path, "expected \"equal\" or an object keyed by partition");
    }
    check_object(c, v, path);
    std::vector<double> w(partitions.size(), 0.0);
    std::set<std::size_t> seen;
    for (const auto& [key, val] : v.items()) {
        const auto p = join(path, key);
        const auto g = parse_partition_key(c, key, p, spec, partitions);
        if (!seen.insert(g).second) c.fail(p, "partition given twice (arms sharing (p0, p1) are interchangeable)");
        w[g] = number(c, val, p);
    }
    return w;
}

TrialSpec parse_trial(const Ctx& c, const json& v, const std::string& path) {
    check_keys(c, v, path, {"arms"});
    const auto& arms = require(c, v, path, "arms");
    const auto ap = join(path, "arms");
    if (!arms.is_array()) c.fail(ap, "expected an array of arms");
    TrialSpec t;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const auto p = index(ap, i);
        check_keys(c, arms[i], p, {"p0", "p1", "max_n", "interims"});
        ArmSpec a;
        a.p0 = number(c, require(c, arms[i], p, "p0"), join(p, "p0"));
        a.p1 = number(c, require(c, arms[i], p, "p1"), join(p, "p1"));
        a.max_n = integer(c, require(c, arms[i], p, "max_n"), join(p, "max_n"));
        if (arms[i].contains("interims")) {
            const auto& iv = arms[i]["interims"];
            if (!iv.is_array()) c.fail(join(p, "interims"), "expected an array of counts");
            for (std::size_t k = 0; k < iv.size(); ++k) {
                a.interim_ns.push_back(integer(c, iv[k], index(join(p, "interims"), k)));
            }
        } else {
            a.interim_ns = {a.max_n};
        }
        validated(c, p, [&] { a.validate(); });
        t.arms.push_back(a);
    }
    validated(c, ap, [&] { t.validate(); });
    return t;
}

UtilitySpec parse_utility(const Ctx& c, const json& v, const std::string& path, const TrialSpec& spec) {
    const auto partitions = enumerate_partitions(spec);
    UtilitySpec u;
    const std::string type = v.contains("type") ? string(c, v["type"], join(path, "type")) : "two_region";
    auto penalty = [&](const char* key, double dflt) {
        if (!v.contains(key)) return dflt;
        const auto& x = v[key];
        if (x.is_string() && x.get<std::string>() == "strict") return kStrictPenalty;
        return number(c, x, join(path, key));
    };
    auto num = [&](const char* key, double dflt) { return v.contains(key) ? number(c, v[key], join(path, key)) : dflt; };
    if (type == "two_region") {
        check_keys(c, v, path, {"type", "lambda1", "lambda2", "eta", "weights"});
        u.variant = TwoRegion{penalty("lambda1", 1.0), penalty("lambda2", 2.0), num("eta", 0.2)};
    } else if (type == "three_region") {
        check_keys(c, v, path, {"type", "lambda1", "lambda2", "lambda3", "eta1", "eta2", "weights"});
        u.variant = ThreeRegion{penalty("lambda1", 1.0), penalty("lambda2", 1.0), penalty("lambda3", 1.0),
                                num("eta1", 0.1), num("eta2", 0.2)};
    } else if (type == "cost_benefit") {
        check_keys(c, v, path, {"type", "gains", "f1", "f2", "eta", "weights"});
        CostBenefit cb;
        cb.gains = per_arm(c, require(c, v, path, "gains"), join(path, "gains"), spec.size());
        cb.f1 = num("f1", 1.0);
        cb.f2 = num("f2", 0.0);
        cb.eta = num("eta", 0.2);
        u.variant = cb;
    } else {
        c.fail(join(path, "type"), "unknown utility type (allowed: two_region, three_region, cost_benefit)");
    }
    u.weights = v.contains("weights")
                    ? parse_partition_weights(c, v["weights"], join(path, "weights"), spec, partitions)
                    : equal_weights(partitions.size());
    validated(c, path, [&] { u.validate(spec.size()); });
    return u;
}

McmcControl parse_mcmc(const Ctx& c, const json& v, const std::string& path) {
    check_keys(c, v, path, {"burn_in", "kept_draws", "thin", "seed", "step_scale"});
    McmcControl m;
    if (v.contains("burn_in")) m.burn_in = integer(c, v["burn_in"], join(path, "burn_in"));
    if (v.contains("kept_draws")) m.kept_draws = integer(c, v["kept_draws"], join(path, "kept_draws"));
    if (v.contains("thin")) m.thin = integer(c, v["thin"], join(path, "thin"));
    if (v.contains("seed")) m.seed = unsigned64(c, v["seed"], join(path, "seed"));
    if (v.contains("step_scale")) m.step_scale = number(c, v["step_scale"], join(path, "step_scale"));
    validated(c, path, [&] { m.validate(); });
    return m;
}

GridSpec parse_grid(const Ctx& c, const json& v, const std::string& path, const TrialSpec& spec) {
    check_keys(c, v, path,
               {"v0_points", "sigma0_sq_points", "a_points", "v0", "sigma0_sq", "half_cauchy_a", "reps_per_point",
                "refine_reps", "refine_top"});
    auto count = [&](const char* key, int dflt) {
        if (!v.contains(key)) return static_cast<std::size_t>(dflt);
        const int n = integer(c, v[key], join(path, key));
        if (n < 1) c.fail(join(path, key), "expected at least one point");
        return static_cast<std::size_t>(n);
    };
    GridSpec g = GridSpec::for_trial(spec, count("v0_points", 8), count("sigma0_sq_points", 10), count("a_points", 10));
    if (v.contains("v0")) g.v0 = numbers(c, v["v0"], join(path, "v0"));
    if (v.contains("sigma0_sq")) g.sigma0_sq = numbers(c, v["sigma0_sq"], join(path, "sigma0_sq"));
    if (v.contains("half_cauchy_a")) g.half_cauchy_a = numbers(c, v["half_cauchy_a"], join(path, "half_cauchy_a"));
    if (v.contains("reps_per_point")) g.reps_per_point = integer(c, v["reps_per_point"], join(path, "reps_per_point"));
    if (v.contains("refine_reps")) g.refine_reps = integer(c, v["refine_reps"], join(path, "refine_reps"));
    if (v.contains("refine_top")) g.refine_top = integer(c, v["refine_top"], join(path, "refine_top"));
    validated(c, path, [&] { g.validate(); });
    return g;
}

DesignEntry parse_design(const Ctx& c, const json& v, const std::string& path, const TrialSpec& spec,
                         const McmcControl& mcmc, const HyperPrior& hyper) {
    check_keys(c, v, path,
               {"name", "kind", "prior", "omega", "beta_prior", "zeta", "delta", "superiority_cutoff",
                "decision_mode", "model_prior", "partition_priors", "optimize", "calibrate"});
    const std::size_t J = spec.size();
    const auto partitions = enumerate_partitions(spec);
    DesignEntry e;
    auto& d = e.spec;
    const auto kind_name = string(c, require(c, v, path, "kind"), join(path, "kind"));
    const auto kind = parse_design_kind(kind_name);
    if (!kind) c.fail(join(path, "kind"), "unknown design kind (allowed: independent, bhm, obhm, cobhm, aobhm)");
    d.kind = *kind;
    d.name = v.contains("name") ? string(c, v["name"], join(path, "name")) : std::string(to_string(d.kind));
    d.mcmc = mcmc;
    d.hyper = hyper;

    if (v.contains("optimize")) {
        const auto o = string(c, v["optimize"], join(path, "optimize"));
        if (o == "inverse_gamma") {
            e.optimize = OptimizeTarget::inverse_gamma;
        } else if (o == "half_cauchy") {
            e.optimize = OptimizeTarget::half_cauchy;
        } else if (o != "none") {
            c.fail(join(path, "optimize"), "expected inverse_gamma, half_cauchy or none");
        }
        if (e.optimize != OptimizeTarget::none &&
            (d.kind == DesignKind::Independent || d.kind == DesignKind::VagueBHM)) {
            c.fail(join(path, "optimize"), "only obhm, cobhm and aobhm priors are optimized");
        }
    }
    if (v.contains("calibrate")) e.calibrate = boolean(c, v["calibrate"], join(path, "calibrate"));

    d.policy.zeta = per_arm(c, require(c, v, path, "zeta"), join(path, "zeta"), J);
    d.policy.delta = v.contains("delta") ? per_arm(c, v["delta"], join(path, "delta"), J) : std::vector<double>(J, 0.0);
    if (v.contains("superiority_cutoff") && !v["superiority_cutoff"].is_null()) {
        for (double x : per_arm(c, v["superiority_cutoff"], join(path, "superiority_cutoff"), J)) {
            d.policy.superiority_cutoff.emplace_back(x);
        }
    }
    if (v.contains("beta_prior")) {
        const auto bp = join(path, "beta_prior");
        check_keys(c, v["beta_prior"], bp, {"a", "b"});
        d.beta_prior.a = number(c, require(c, v["beta_prior"], bp, "a"), join(bp, "a"));
        d.beta_prior.b = number(c, require(c, v["beta_prior"], bp, "b"), join(bp, "b"));
    }
    if (v.contains("omega")) {
        if (d.kind != DesignKind::COBHM) c.fail(join(path, "omega"), "omega applies to cobhm only");
        d.omega = number(c, v["omega"], join(path, "omega"));
    }

    const bool aobhm = d.kind == DesignKind::AOBHM;
    for (const char* key : {"decision_mode", "model_prior", "partition_priors"}) {
        if (v.contains(key) && !aobhm) c.fail(join(path, key), "applies to aobhm only");
    }
    if (v.contains("prior") && (aobhm || d.kind == DesignKind::Independent)) {
        c.fail(join(path, "prior"), aobhm ? "aobhm takes partition_priors" : "independent uses beta_prior");
    }

    if (aobhm) {
        d.model_prior = v.contains("model_prior")
                            ? parse_partition_weights(c, v["model_prior"], join(path, "model_prior"), spec, partitions)
                            : equal_weights(partitions.size());
        if (v.contains("decision_mode")) {
            const auto m = string(c, v["decision_mode"], join(path, "decision_mode"));
            if (m == "model_average") {
                d.decision_mode = DecisionMode::model_average;
            } else if (m == "model_select") {
                d.decision_mode = DecisionMode::model_select;
            } else {
                c.fail(join(path, "decision_mode"), "expected model_average or model_select");
            }
        }
        if (v.contains("partition_priors")) {
            const auto pp = join(path, "partition_priors");
            check_object(c, v["partition_priors"], pp);
            std::vector<std::optional<PriorSpec>> slots(partitions.size());
            for (const auto& [key, val] : v["partition_priors"].items()) {
                const auto g = parse_partition_key(c, key, join(pp, key), spec, partitions);
                if (slots[g]) c.fail(join(pp, key), "partition given twice");
                slots[g] = parse_prior(c, val, join(pp, key));
            }
            for (std::size_t g = 0; g < slots.size(); ++g) {
                if (!slots[g]) c.fail(pp, "missing prior for partition " + partitions[g].label());
                d.partition_priors.push_back(*slots[g]);
            }
        } else {
            if (e.optimize == OptimizeTarget::none) {
                c.fail(join(path, "partition_priors"), "required unless optimize is set");
            }
            e.prior_given = false;
            // Placeholder until the optimizer fills them in.
            d.partition_priors.assign(partitions.size(), PriorSpec::inverse_gamma(2.0, 8.0));
        }
    } else if (d.kind != DesignKind::Independent) {
        if (v.contains("prior")) {
            d.prior = parse_prior(c, v["prior"], join(path, "prior"));
        } else if (d.kind == DesignKind::VagueBHM) {
            d.prior = vague_bhm_prior();
        } else if (e.optimize != OptimizeTarget::none) {
            e.prior_given = false;
        } else {
            c.fail(join(path, "prior"), "required unless optimize is set");
        }
    }
    validated(c, path, [&] { d.validate(spec); });
    return e;
}

std::vector<ScenarioTruth> parse_scenarios(const Ctx& c, const json& v, const std::string& path, std::size_t J) {
    if (!v.is_array()) c.fail(path, "expected an array of scenarios");
    std::vector<ScenarioTruth> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = index(path, i);
        check_keys(c, v[i], p, {"name", "p"});
        ScenarioTruth s;
        s.name = v[i].contains("name") ? string(c, v[i]["name"], join(p, "name")) : std::to_string(i + 1);
        s.true_p = per_arm(c, require(c, v[i], p, "p"), join(p, "p"), J);
        validated(c, p, [&] { s.validate(J); });
        out.push_back(s);
    }
    return out;
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json parse_json(std::string_view text, const std::string& origin) {
    try {
        return json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": parse error: " + e.what());
    }
}

RunConfig from_json(const json& root, const Ctx& c) {
    check_keys(c, root, "",
               {"preset", "name", "trial", "designs", "utility", "scenarios", "mcmc", "hyper", "grid", "n_reps",
                "base_seed", "output_dir", "target_alpha", "common_random_numbers"});
    RunConfig cfg;
    cfg.name = root.contains("name") ? string(c, root["name"], "name") : "run";
    cfg.trial = parse_trial(c, require(c, root, "", "trial"), "trial");
    if (root.contains("mcmc")) cfg.mcmc = parse_mcmc(c, root["mcmc"], "mcmc");
    if (root.contains("hyper")) {
        check_keys(c, root["hyper"], "hyper", {"alpha0", "tau0_sq"});
        if (root["hyper"].contains("alpha0")) cfg.hyper.alpha0 = number(c, root["hyper"]["alpha0"], "hyper.alpha0");
        if (root["hyper"].contains("tau0_sq")) cfg.hyper.tau0_sq = number(c, root["hyper"]["tau0_sq"], "hyper.tau0_sq");
        validated(c, "hyper", [&] { cfg.hyper.validate(); });
    }
    cfg.utility = root.contains("utility") ? parse_utility(c, root["utility"], "utility", cfg.trial)
                                           : parse_utility(c, json::object(), "utility", cfg.trial);
    cfg.grid = root.contains("grid") ? parse_grid(c, root["grid"], "grid", cfg.trial)
                                     : GridSpec::for_trial(cfg.trial);
    const auto& designs = require(c, root, "", "designs");
    if (!designs.is_array() || designs.empty()) c.fail("designs", "expected a nonempty array of designs");
    std::set<std::string> names;
    for (std::size_t i = 0; i < designs.size(); ++i) {
        cfg.designs.push_back(parse_design(c, designs[i], index("designs", i), cfg.trial, cfg.mcmc, cfg.hyper));
        if (!names.insert(cfg.designs.back().spec.name).second) {
            c.fail(index("designs", i) + ".name", "duplicate design name");
        }
    }
    cfg.scenarios = parse_scenarios(c, require(c, root, "", "scenarios"), "scenarios", cfg.trial.size());
    if (root.contains("n_reps")) {
        cfg.n_reps = integer(c, root["n_reps"], "n_reps");
        if (cfg.n_reps < 1) c.fail("n_reps", "must be at least 1");
    }
    if (root.contains("base_seed")) cfg.base_seed = unsigned64(c, root["base_seed"], "base_seed");
    if (root.contains("output_dir")) cfg.output_dir = string(c, root["output_dir"], "output_dir");
    if (root.contains("target_alpha")) {
        cfg.target_alpha = number(c, root["target_alpha"], "target_alpha");
        if (!(cfg.target_alpha > 0.0 && cfg.target_alpha <= 1.0)) c.fail("target_alpha", "must lie in (0, 1]");
    }
    if (root.contains("common_random_numbers")) {
        cfg.common_random_numbers = boolean(c, root["common_random_numbers"], "common_random_numbers");
    }
    return cfg;
}

json design_json(const DesignEntry& e, const TrialSpec& spec) {
    const auto& d = e.spec;
    json j;
    j["name"] = d.name;
    j["kind"] = std::string(to_string(d.kind));
    j["zeta"] = d.policy.zeta;
    j["delta"] = d.policy.delta;
    if (!d.policy.superiority_cutoff.empty()) {
        json s = json::array();
        for (const auto& x : d.policy.superiority_cutoff) s.push_back(x ? json(*x) : json(nullptr));
        j["superiority_cutoff"] = s;
    }
    j["beta_prior"] = {{"a", d.beta_prior.a}, {"b", d.beta_prior.b}};
    j["calibrate"] = e.calibrate;
    j["optimize"] = e.optimize == OptimizeTarget::none          ? "none"
                    : e.optimize == OptimizeTarget::half_cauchy ? "half_cauchy"
                                                                : "inverse_gamma";
    if (d.kind == DesignKind::COBHM) j["omega"] = d.omega;
    if (d.kind == DesignKind::AOBHM) {
        const auto partitions = enumerate_partitions(spec);
        json mp, pp;
        for (std::size_t g = 0; g < partitions.size(); ++g) {
            mp[partitions[g].label()] = d.model_prior[g];
            if (e.prior_given) pp[partitions[g].label()] = prior_json(d.partition_priors[g]);
        }
        j["model_prior"] = mp;
        if (e.prior_given) j["partition_priors"] = pp;
        j["decision_mode"] = d.decision_mode == DecisionMode::model_select ? "model_select" : "model_average";
    } else if (d.kind != DesignKind::Independent && e.prior_given) {
        j["prior"] = prior_json(d.prior);
    }
    return j;
}

}  // namespace

std::string RunConfig::canonical_json() const {
    json j;
    j["name"] = name;
    for (const auto& a : trial.arms) {
        j["trial"]["arms"].push_back({{"p0", a.p0}, {"p1", a.p1}, {"max_n", a.max_n}, {"interims", a.interim_ns}});
    }
    for (const auto& d : designs) j["designs"].push_back(design_json(d, trial));
    json u;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, TwoRegion>) {
                u = {{"type", "two_region"}, {"lambda1", v.lambda1}, {"lambda2", v.lambda2}, {"eta", v.eta}};
            } else if constexpr (std::is_same_v<T, ThreeRegion>) {
                u = {{"type", "three_region"}, {"lambda1", v.lambda1}, {"lambda2", v.lambda2},
                     {"lambda3", v.lambda3},   {"eta1", v.eta1},       {"eta2", v.eta2}};
            } else {
                u = {{"type", "cost_benefit"}, {"gains", v.gains}, {"f1", v.f1}, {"f2", v.f2}, {"eta", v.eta}};
            }
        },
        utility.variant);
    const auto partitions = enumerate_partitions(trial);
    for (std::size_t g = 0; g < partitions.size(); ++g) u["weights"][partitions[g].label()] = utility.weights[g];
    j["utility"] = u;
    for (const auto& s : scenarios) j["scenarios"].push_back({{"name", s.name}, {"p", s.true_p}});
    j["mcmc"] = {{"burn_in", mcmc.burn_in},
                 {"kept_draws", mcmc.kept_draws},
                 {"thin", mcmc.thin},
                 {"seed", mcmc.seed},
                 {"step_scale", mcmc.step_scale}};
    j["hyper"] = {{"alpha0", hyper.alpha0}, {"tau0_sq", hyper.tau0_sq}};
    j["grid"] = {{"v0", grid.v0},
                 {"sigma0_sq", grid.sigma0_sq},
                 {"half_cauchy_a", grid.half_cauchy_a},
                 {"reps_per_point", grid.reps_per_point},
                 {"refine_reps", grid.refine_reps},
                 {"refine_top", grid.refine_top}};
    j["n_reps"] = n_reps;
    j["base_seed"] = base_seed;
    j["target_alpha"] = target_alpha;
    j["common_random_numbers"] = common_random_numbers;
    // output_dir is left out on purpose: moving outputs must not change the hash.
    return j.dump(2);
}

std::string RunConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_json())));
    return buf;
}

RunConfig parse_config(std::string_view text, std::string_view origin) {
    const Ctx c{std::string(origin)};
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw ConfigError(c.origin + ": configuration is empty; required keys: trial, designs, scenarios "
                                     "(or \"preset\": one of paper-4arm, paper-4arm-half-cauchy, paper-3arm)");
    }
    json root = parse_json(text, c.origin);
    check_object(c, root, "");
    if (root.contains("preset")) {
        const auto name = string(c, root["preset"], "preset");
        const auto base = preset_text(name);
        if (!base) c.fail("preset", "unknown preset '" + name + "'");
        json merged = parse_json(*base, "preset " + name);
        root.erase("preset");
        merged.merge_patch(root);
        root = std::move(merged);
    }
    return from_json(root, c);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

RunConfig load_preset(std::string_view name) {
    const auto text = preset_text(name);
    if (!text) throw ConfigError("unknown preset '" + std::string(name) + "'");
    return parse_config(*text, "preset " + std::string(name));
}

std::uint64_t design_seed(const RunConfig& config, std::size_t design_index) {
    if (config.common_random_numbers) return config.base_seed;
    return stream_seed(config.base_seed, 0xde5196ULL, design_index);
}

}  // namespace basket
