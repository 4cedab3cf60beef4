#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "h221/config.hpp"
#include "h221/convergence.hpp"

namespace h221 {

// thresholds every command gates on
namespace thresholds {
inline constexpr double invariant = 1e-10;
inline constexpr double traceless_relative = 1e-12;
inline constexpr double gauge_relative = 1e-12;
inline constexpr double commutativity = 1e-8;
inline constexpr double chart_consistency = 1e-8;
inline constexpr double min_order = 1.8;
inline constexpr double curvature_floor = 1e-8;
inline constexpr double prlg_floor = 1e-7;
inline constexpr double psi_floor = 1e-6;
inline constexpr double det_z = 1e-8;
inline constexpr double kernel_identity = 1e-10;
inline constexpr double s_order_swap = 1e-8;
inline constexpr double gauge_consistency = 1e-8;
}  // namespace thresholds

struct Check {
    std::string id;
    bool gating = true;
    bool pass = false;
    nlohmann::json detail;  // metric values, thresholds, convergence tables
};

Check invariant_check(const std::string& id, double value, double threshold, bool gating = true);
Check convergence_check(const std::string& id, const ConvergenceStudy& s, std::size_t nodes, double max_floor,
                        bool gating = true);

struct RunOptions {
    std::string mutation;       // empty for the genuine run
    std::vector<double> steps;  // overrides the command's finite-difference steps when non-empty
    std::string out_dir;        // overrides the config's output directory when non-empty
    bool write_files = true;
};

struct RunResult {
    nlohmann::json report;
    bool pass = false;
};

// mutation ids accepted by each command
const std::vector<std::string>& mutations_for(const std::string& command);
const std::vector<std::string>& command_names();

// SHA-1 of the bytes framed as a git blob object, hex encoded
std::string git_blob_sha1(const std::string& bytes);

// Runs one of flow, lax-check, prlg, psi. Throws ConfigError for unusable configs or options;
// numerical failures inside a check are reported as failing checks.
RunResult run_command(const std::string& command, const RunConfig& cfg, const RunOptions& opt);

// the report without its timestamp, for determinism comparisons
nlohmann::json strip_timestamp(nlohmann::json report);

}  // namespace h221
