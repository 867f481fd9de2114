#include "rfpca/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_overrides(CLI::App* cmd, rfpca::cli::Overrides& o, bool method, bool psi, bool components, bool seed) {
    cmd->add_option("--config", o.config, "run configuration file")->check(CLI::ExistingFile);
    if (seed) cmd->add_option("--seed", o.seed, "random seed");
    if (psi) cmd->add_option("--psi", o.psi, "Winsorization quantile level in (0, 1]");
    if (components) cmd->add_option("--components", o.components, "retained components (0 = 90% rule)");
    if (method) cmd->add_option("--method", o.method, "wpu | dm | spatial-sign | classical");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust functional principal component analysis for time-varying objects"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(RFPCA_VERSION_STRING));

    rfpca::cli::Overrides o;
    std::filesystem::path input;
    std::filesystem::path out = ".";

    auto* median = app.add_subcommand("median", "pointwise Frechet median trajectory");
    median->add_option("input", input, "trajectory CSV (sidecar <input>.json alongside)")->required();
    median->add_option("-o,--out", out, "output directory");
    add_overrides(median, o, false, false, false, false);

    auto* fpca = app.add_subcommand("fpca", "robust FPCA of a trajectory sample");
    fpca->add_option("input", input, "trajectory CSV (sidecar <input>.json alongside)")->required();
    fpca->add_option("-o,--out", out, "output directory");
    add_overrides(fpca, o, true, true, true, false);

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic sample");
    simulate->add_option("-o,--out", out, "output directory");
    add_overrides(simulate, o, false, false, false, true);

    auto* breakdown = app.add_subcommand("breakdown", "contamination study of eigenfunction estimates");
    breakdown->add_option("-o,--out", out, "output directory");
    add_overrides(breakdown, o, true, true, true, true);

    auto* ingest = app.add_subcommand("ingest", "bin event records into daily Laplacian trajectories");
    ingest->add_option("events", input, "CSV with header timestamp,origin,destination")->required();
    ingest->add_option("-o,--out", out, "output directory");
    add_overrides(ingest, o, false, false, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : rfpca::cli::kValidation;
    }

    if (median->parsed()) return rfpca::cli::cmd_median(input, out, o, std::cerr);
    if (fpca->parsed()) return rfpca::cli::cmd_fpca(input, out, o, std::cerr);
    if (simulate->parsed()) return rfpca::cli::cmd_simulate(out, o, std::cerr);
    if (breakdown->parsed()) return rfpca::cli::cmd_breakdown(out, o, std::cerr);
    return rfpca::cli::cmd_ingest(input, out, o, std::cerr);
}
