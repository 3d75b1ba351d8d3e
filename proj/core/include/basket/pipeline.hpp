#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "basket/config.hpp"

namespace basket {

enum class Command { optimize_prior, calibrate, simulate, oc_table };

std::optional<Command> parse_command(std::string_view name);
std::string_view to_string(Command command);

struct PipelineOptions {
    unsigned threads = 1;
    bool dump_chains = false;
    std::ostream* log = nullptr;  // progress and diagnostics; silent when null
};

struct PipelineResult {
    int exit_code = 0;
    std::vector<std::string> artifacts;  // paths written, in order
};

std::string_view tool_version();

/// "# basket <version> config_hash=<h> base_seed=<s>" followed by a newline.
std::string csv_comment_header(const RunConfig& config);

/// Writes to a sibling temp file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// Fills in optimizer-derived priors for design d. Returns the search trace(s) as CSV text
/// (empty when nothing was optimized).
std::string optimize_design(RunConfig& config, std::size_t d, const SimOptions& options, std::ostream* log = nullptr);

/// Replaces design d's zeta with the calibrated values.
CalibrationResult calibrate_design(RunConfig& config, std::size_t d, const SimOptions& options,
                                   std::ostream* log = nullptr);

/// Table-1 style text: one block per scenario, one row per design, percentages
/// to two decimals; sensitive arms (true rate at p1) are starred in the truth row.
std::string render_oc_table(const RunConfig& config, const std::vector<OcRow>& rows);

PipelineResult run_pipeline(RunConfig& config, Command command, const PipelineOptions& options = {});

}  // namespace basket
