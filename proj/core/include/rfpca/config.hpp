#pragma once

// Run configuration: flat `key = value` text with `[section]` headers.
// Lines starting with '#' or ';' are comments. Unknown sections or keys,
// duplicates and malformed values are errors reported with file:line.
//
//   format_version = 1
//   [fpca]      method, psi, components
//   [solver]    max_iter, tol, anchor_eps, warm_start, threads
//   [simulate]  generator (network | sphere), seed, contamination, scheme, shift, scale
//   [network]   nodes, grid_points, subjects_per_group, base_weight, bump_variance,
//               noise_sd, groups (comma separated tau:amplitude:communities)
//   [sphere]    grid_points, subjects, start, direction, arc_length, noise_sd, antithetic
//   [breakdown] levels, reps, reference_reps, methods, component, components,
//               scheme, shift, scale, seed, threads
//   [ingest]    nodes (comma separated ids), bin_seconds

#include "rfpca/ingest.hpp"
#include "rfpca/robustness.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace rfpca {

inline constexpr int kConfigFormatVersion = 1;

struct RunConfig {
    int format_version = kConfigFormatVersion;

    Method method = Method::Wpu;
    PipelineOptions pipeline{};

    std::string generator = "network";
    std::uint64_t seed = 1;
    ContaminationSpec contamination{};
    NetworkSimConfig network{};
    SphereSimConfig sphere{};

    BreakdownConfig breakdown{};
    IngestConfig ingest{};

    /// Breakdown settings with the shared [network], [fpca] and [solver] values applied.
    BreakdownConfig breakdown_config() const;
    void validate() const;
};

RunConfig parse_run_config(std::string_view text, std::string_view source = "config");
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical text form; parse_run_config(format_run_config(c)) reproduces c.
std::string format_run_config(const RunConfig& config);

}  // namespace rfpca
