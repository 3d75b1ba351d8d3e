#include "basket/pipeline.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "basket/rng.hpp"

#ifndef BASKET_VERSION
#define BASKET_VERSION "0.0.0"
#endif

namespace basket {

namespace fs = std::filesystem;

std::optional<Command> parse_command(std::string_view name) {
    if (name == "optimize-prior") return Command::optimize_prior;
    if (name == "calibrate") return Command::calibrate;
    if (name == "simulate") return Command::simulate;
    if (name == "oc-table") return Command::oc_table;
    return std::nullopt;
}

std::string_view to_string(Command command) {
    switch (command) {
        case Command::optimize_prior: return "optimize-prior";
        case Command::calibrate: return "calibrate";
        case Command::simulate: return "simulate";
        case Command::oc_table: return "oc-table";
    }
    return "?";
}

std::string_view tool_version() { return BASKET_VERSION; }

std::string csv_comment_header(const RunConfig& config) {
    std::ostringstream os;
    os << "# basket " << tool_version() << " config_hash=" << config.hash() << " base_seed=" << config.base_seed
       << '\n';
    return os.str();
}

void write_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

void say(std::ostream* log, const std::string& msg) {
    if (log) *log << msg << '\n' << std::flush;
}

std::string file_safe(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

}  // namespace

std::string optimize_design(RunConfig& config, std::size_t d, const SimOptions& options, std::ostream* log) {
    auto& entry = config.designs.at(d);
    if (entry.optimize == OptimizeTarget::none) return {};
    const bool hc = entry.optimize == OptimizeTarget::half_cauchy;
    const auto seed = design_seed(config, d);
    std::ostringstream csv;
    if (entry.spec.kind == DesignKind::AOBHM) {
        DesignSpec tmpl = entry.spec;
        tmpl.kind = DesignKind::OBHM;
        say(log, "optimize " + entry.spec.name + ": per-partition " + (hc ? "half-Cauchy" : "inverse-gamma") +
                     " search");
        const auto res = per_partition_priors(config.trial, config.utility, tmpl, config.grid, seed, hc, options);
        entry.spec.partition_priors = res.priors;
        write_trace_csv(csv, config.trial, res.trace);
        const auto partitions = enumerate_partitions(config.trial);
        for (std::size_t g = 0; g < partitions.size(); ++g) {
            say(log, "  M" + std::to_string(g + 1) + " " + partitions[g].label() + ": " + res.priors[g].describe());
        }
    } else {
        say(log, "optimize " + entry.spec.name + ": " + (hc ? "half-Cauchy" : "inverse-gamma") + " search");
        const auto res = hc ? optimize_half_cauchy(config.trial, config.utility, entry.spec, config.grid, seed, options)
                            : grid_search_prior(config.trial, config.utility, entry.spec, config.grid, seed, options);
        entry.spec.prior = res.best_prior;
        write_trace_csv(csv, config.trial, res);
        std::ostringstream msg;
        msg << "  best " << res.best_prior.describe() << " mean utility " << res.best_mean_utility;
        say(log, msg.str());
    }
    entry.prior_given = true;
    return csv.str();
}

CalibrationResult calibrate_design(RunConfig& config, std::size_t d, const SimOptions& options, std::ostream* log) {
    auto& entry = config.designs.at(d);
    if (!entry.prior_given) optimize_design(config, d, options, log);
    auto res = calibrate_zeta(config.trial, entry.spec, config.target_alpha, config.n_reps, design_seed(config, d),
                              options);
    entry.spec.policy = res.policy;
    std::ostringstream msg;
    msg << "calibrate " << entry.spec.name << ": zeta";
    for (double z : res.policy.zeta) msg << ' ' << z;
    msg << " after " << res.evaluations << " evaluations" << (res.converged ? "" : " (not converged)");
    say(log, msg.str());
    for (const auto& diag : res.diagnostics) say(log, "  " + diag);
    return res;
}

std::string render_oc_table(const RunConfig& config, const std::vector<OcRow>& rows) {
    const std::size_t J = config.trial.size();
    std::size_t name_w = 8;
    for (const auto& d : config.designs) name_w = std::max(name_w, d.spec.name.size());
    std::ostringstream os;
    os << std::left << std::setw(10) << "Scenario" << std::setw(static_cast<int>(name_w) + 2) << "Design";
    for (std::size_t j = 1; j <= J; ++j) os << std::right << std::setw(9) << ("Arm " + std::to_string(j));
    os << '\n';
    os << std::fixed;
    for (const auto& s : config.scenarios) {
        os << std::left << std::setw(10) << s.name << std::setw(static_cast<int>(name_w) + 2) << "";
        for (std::size_t j = 0; j < J; ++j) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(2) << s.true_p[j];
            if (std::abs(s.true_p[j] - config.trial.arms[j].p1) < 1e-12) cell << '*';
            os << std::right << std::setw(9) << cell.str();
        }
        os << '\n';
        for (const auto& r : rows) {
            if (r.scenario != s.name) continue;
            os << std::left << std::setw(10) << "" << std::setw(static_cast<int>(name_w) + 2) << r.design;
            for (std::size_t j = 0; j < J; ++j) {
                os << std::right << std::setw(9) << std::setprecision(2) << 100.0 * r.oc.claim_prob[j];
            }
            os << '\n';
        }
        os << '\n';
    }
    os << "Percent of replicates claiming the treatment effective; * marks sensitive arms.\n";
    return os.str();
}

PipelineResult run_pipeline(RunConfig& config, Command command, const PipelineOptions& options) {
    PipelineResult result;
    auto* log = options.log;
    const fs::path out_dir(config.output_dir);
    const std::string header = csv_comment_header(config);
    auto emit = [&](const fs::path& p, const std::string& body) {
        write_atomic(p.string(), body);
        result.artifacts.push_back(p.string());
        say(log, "wrote " + p.string());
    };

    if (command == Command::optimize_prior) {
        std::ostringstream priors;
        priors << header << "design,partition,prior\n";
        bool any = false;
        for (std::size_t d = 0; d < config.designs.size(); ++d) {
            auto& e = config.designs[d];
            if (e.optimize == OptimizeTarget::none) continue;
            any = true;
            SimOptions sim{options.threads, nullptr};
            const auto trace = optimize_design(config, d, sim, log);
            emit(out_dir / ("trace_" + file_safe(e.spec.name) + ".csv"), header + trace);
            if (e.spec.kind == DesignKind::AOBHM) {
                const auto partitions = enumerate_partitions(config.trial);
                for (std::size_t g = 0; g < partitions.size(); ++g) {
                    priors << e.spec.name << ",\"" << partitions[g].label() << "\","
                           << e.spec.partition_priors[g].describe() << '\n';
                }
            } else {
                priors << e.spec.name << ",," << e.spec.prior.describe() << '\n';
            }
        }
        if (!any) {
            say(log, "no design carries an optimize directive");
            result.exit_code = 2;
            return result;
        }
        emit(out_dir / "priors.csv", priors.str());
        return result;
    }

    // Every other command needs concrete priors and, where requested, calibrated zeta.
    std::ostringstream cal;
    cal << header << "design,arm,zeta,delta,claim_prob,converged\n" << std::fixed << std::setprecision(6);
    std::vector<std::unique_ptr<PosteriorCache>> caches;
    for (std::size_t d = 0; d < config.designs.size(); ++d) {
        caches.push_back(std::make_unique<PosteriorCache>());
        SimOptions sim{options.threads, caches.back().get()};
        auto& e = config.designs[d];
        if (!e.prior_given) optimize_design(config, d, SimOptions{options.threads, nullptr}, log);
        if (!e.calibrate) continue;
        const auto res = calibrate_design(config, d, sim, log);
        for (std::size_t j = 0; j < config.trial.size(); ++j) {
            cal << e.spec.name << ',' << j + 1 << ',' << res.policy.zeta[j] << ',' << res.policy.delta[j] << ','
                << res.claim_prob[j] << ',' << (res.converged ? 1 : 0) << '\n';
        }
    }
    if (command == Command::calibrate) {
        emit(out_dir / "calibration.csv", cal.str());
        return result;
    }

    std::vector<OcRow> rows;
    for (const auto& s : config.scenarios) {
        for (std::size_t d = 0; d < config.designs.size(); ++d) {
            const auto& e = config.designs[d];
            say(log, "simulate scenario " + s.name + " / " + e.spec.name);
            const auto seed = design_seed(config, d);
            SimOptions sim{options.threads, caches[d].get()};
            rows.push_back({s.name, e.spec.name,
                            operating_characteristics(s, config.trial, e.spec, config.n_reps, seed, sim), seed});
        }
    }
    std::ostringstream csv;
    csv << header;
    write_oc_csv(csv, rows);
    emit(out_dir / "oc.csv", csv.str());

    if (options.dump_chains && !config.scenarios.empty()) {
        // One chain per hierarchical design on the first scenario's first-look data.
        const auto& s = config.scenarios.front();
        ObservedData data{std::vector<int>(config.trial.size()), std::vector<int>(config.trial.size())};
        for (std::size_t j = 0; j < config.trial.size(); ++j) {
            const auto& arm = config.trial.arms[j];
            data.n[j] = arm.interim_ns.front();
            data.x[j] = patient_responses(replicate_seed(config.base_seed, 0), j, arm.max_n,
                                          s.true_p[j])[static_cast<std::size_t>(data.n[j])];
        }
        for (const auto& e : config.designs) {
            if (e.spec.kind == DesignKind::Independent) continue;
            const PriorSpec& prior = e.spec.kind == DesignKind::AOBHM ? e.spec.partition_priors.front() : e.spec.prior;
            const auto draws = bhm_sample(data, config.trial, prior, e.spec.hyper, e.spec.mcmc);
            std::ostringstream chain;
            chain << header;
            write_chain_csv(chain, draws);
            emit(out_dir / "chains" / ("chain_" + file_safe(e.spec.name) + ".csv"), chain.str());
        }
    }

    if (command == Command::oc_table) {
        emit(out_dir / "oc_table.txt", render_oc_table(config, rows));
    }
    return result;
}

}  // namespace basket
