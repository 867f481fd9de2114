#pragma once

// Command implementations behind the `rfpca` executable. Each command writes
// its outputs and a `report.json` into an output directory and returns a
// process exit code; diagnostics go to `log`.

#include "rfpca/config.hpp"

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace rfpca::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInternal = 1,
    kValidation = 2,
    kConvergence = 3,
    kInsufficientSample = 4,
    kIo = 5,
};

/// Exit code for an exception thrown by the library.
int exit_code_for(const std::exception& e);

/// Command-line overrides applied on top of the config file (or defaults).
struct Overrides {
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<double> psi;
    std::optional<int> components;
    std::optional<std::string> method;  ///< fpca: one method; breakdown: comma separated list
};

RunConfig resolve_config(const Overrides& overrides);

/// center.csv (+ sidecar): pointwise Frechet median trajectory.
int cmd_median(const std::filesystem::path& input, const std::filesystem::path& out_dir,
               const Overrides& overrides, std::ostream& log);

/// center.csv, eigenfunctions.csv, spectrum.csv, scores.csv.
int cmd_fpca(const std::filesystem::path& input, const std::filesystem::path& out_dir,
             const Overrides& overrides, std::ostream& log);

/// sample.csv (+ sidecar); labels.csv with group and outlier flags for networks.
int cmd_simulate(const std::filesystem::path& out_dir, const Overrides& overrides, std::ostream& log);

/// curves.csv, bias.csv, reference.csv.
int cmd_breakdown(const std::filesystem::path& out_dir, const Overrides& overrides, std::ostream& log);

/// sample.csv (+ sidecar) with one subject per UTC day.
int cmd_ingest(const std::filesystem::path& events, const std::filesystem::path& out_dir,
               const Overrides& overrides, std::ostream& log);

}  // namespace rfpca::cli
