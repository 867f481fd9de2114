#include "rfpca/cli.hpp"

#include "rfpca/errors.hpp"
#include "rfpca/io.hpp"
#include "rfpca/rng.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <functional>

#ifndef RFPCA_VERSION
#define RFPCA_VERSION "unknown"
#endif

namespace rfpca::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Report {
public:
    Report(std::string command, fs::path out_dir) : out_dir_(std::move(out_dir)) {
        doc_["tool"] = "rfpca";
        doc_["version"] = RFPCA_VERSION;
        doc_["report_format_version"] = io::kFormatVersion;
        doc_["command"] = std::move(command);
        doc_["rng"] = kRngAlgorithm;
        doc_["inputs"] = json::array();
        doc_["outputs"] = json::array();
        doc_["warnings"] = json::array();
        doc_["timings_seconds"] = json::object();
        doc_["results"] = json::object();
    }

    void config(const RunConfig& c) { doc_["config"] = format_run_config(c); }

    void input(const fs::path& path) {
        const std::string bytes = io::read_file(path);
        doc_["inputs"].push_back({{"path", path.string()}, {"bytes", bytes.size()}, {"sha256", io::sha256_hex(bytes)}});
    }

    /// Writes `content` atomically under the output directory and records it.
    void emit(const std::string& name, const std::string& content) {
        const fs::path path = out_dir_ / name;
        io::write_file_atomic(path, content);
        doc_["outputs"].push_back({{"path", name}, {"bytes", content.size()}, {"sha256", io::sha256_hex(content)}});
    }

    void warn(const std::string& message, std::ostream& log) {
        log << "warning: " << message << "\n";
        doc_["warnings"].push_back(message);
    }

    json& results() { return doc_["results"]; }
    void timing(const std::string& name, double seconds) { doc_["timings_seconds"][name] = seconds; }

    void finish(int code, const std::string& error) {
        doc_["exit_code"] = code;
        if (!error.empty()) doc_["error"] = error;
        io::write_file_atomic(out_dir_ / "report.json", doc_.dump(2) + "\n");
    }

private:
    fs::path out_dir_;
    json doc_;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string describe(const std::exception& e) {
    if (const auto* c = dynamic_cast<const ConvergenceError*>(&e)) {
        std::string s = c->what();
        s += " (last step " + io::format_real(c->last_step()) + ")";
        return s;
    }
    return e.what();
}

/// Shared shell: output directory, report lifecycle, exception mapping.
int run_command(const std::string& name, const fs::path& out_dir, const Overrides& overrides, std::ostream& log,
                const std::function<void(const RunConfig&, Report&)>& body) {
    std::optional<Report> report;
    try {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec || !fs::is_directory(out_dir))
            throw IoError("cannot create output directory '" + out_dir.string() + "'");
        report.emplace(name, out_dir);
        const RunConfig config = resolve_config(overrides);
        report->config(config);
        if (overrides.config) report->input(*overrides.config);
        const Stopwatch total;
        body(config, *report);
        report->timing("total", total.seconds());
        report->finish(kSuccess, {});
        return kSuccess;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        const std::string message = describe(e);
        log << "error: " << message << "\n";
        if (report) {
            try {
                report->finish(code, message);
            } catch (const std::exception& inner) {
                log << "error: could not write report: " << inner.what() << "\n";
            }
        }
        return code;
    }
}

void emit_pair(Report& report, const std::string& name, const io::TextPair& text) {
    report.emit(name + ".json", text.sidecar);
    report.emit(name, text.csv);
}

void note_surface(const PipelineResult& r, Report& report, std::ostream& log) {
    const auto& s = r.surface;
    if (s.degenerate_sample) report.warn("all distance trajectories coincide; covariance surface is zero", log);
    if (s.degenerate_pairs > 0)
        report.warn(std::to_string(s.degenerate_pairs) + " degenerate pairs (distance <= " +
                        io::format_real(kDegeneratePairRelTol) + " x max) in the spatial-sign sum",
                    log);
    if (s.skipped_pairs > 0) report.warn(std::to_string(s.skipped_pairs) + " zero-distance pairs skipped", log);
    if (r.eigen.clip_count > 0)
        report.warn(std::to_string(r.eigen.clip_count) + " negative eigenvalues clipped to zero", log);
    if (!(r.eigen.total_variance > 0.0)) report.warn("degenerate spectrum: total variance is zero", log);
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConvergenceError*>(&e)) return kConvergence;
    if (dynamic_cast<const InsufficientSample*>(&e)) return kInsufficientSample;
    if (dynamic_cast<const IoError*>(&e)) return kIo;
    if (dynamic_cast<const Error*>(&e)) return kValidation;
    return kInternal;
}

RunConfig resolve_config(const Overrides& o) {
    RunConfig c = o.config ? load_run_config(*o.config) : RunConfig{};
    if (o.seed) {
        c.seed = *o.seed;
        c.breakdown.seed = *o.seed;
    }
    if (o.psi) c.pipeline.psi = *o.psi;
    if (o.components) {
        c.pipeline.components = *o.components;
        c.breakdown.pipeline.components = *o.components;
    }
    if (o.method) {
        std::vector<Method> methods;
        std::string_view rest = *o.method;
        while (true) {
            const auto comma = rest.find(',');
            methods.push_back(method_from_string(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        c.method = methods.front();
        c.breakdown.methods = methods;
    }
    c.validate();
    return c;
}

int cmd_median(const fs::path& input, const fs::path& out_dir, const Overrides& overrides, std::ostream& log) {
    return run_command("median", out_dir, overrides, log, [&](const RunConfig& config, Report& report) {
        report.input(input);
        report.input(io::sidecar_path(input));
        const io::TrajectoryFile file = io::read_trajectories(input);
        const Stopwatch sw;
        const CenterTrajectory center = compute_center_trajectory(file.sample, CenterKind::Median,
                                                                  config.pipeline.solver, config.pipeline.center);
        report.timing("median", sw.seconds());
        emit_pair(report, "center.csv", io::format_center(center));
        report.results()["subjects"] = file.sample.subjects();
        report.results()["times"] = file.sample.times();
        log << "median of " << file.sample.subjects() << " subjects over " << file.sample.times()
            << " time points written to " << (out_dir / "center.csv").string() << "\n";
    });
}

int cmd_fpca(const fs::path& input, const fs::path& out_dir, const Overrides& overrides, std::ostream& log) {
    return run_command("fpca", out_dir, overrides, log, [&](const RunConfig& config, Report& report) {
        report.input(input);
        report.input(io::sidecar_path(input));
        const io::TrajectoryFile file = io::read_trajectories(input);
        if (file.sample.subjects() < 2) throw InsufficientSample("FPCA needs at least two subjects");
        const Stopwatch sw;
        const PipelineResult r = run_fpca(file.sample, config.method, config.pipeline);
        report.timing("pipeline", sw.seconds());
        note_surface(r, report, log);

        emit_pair(report, "center.csv", io::format_center(r.center));
        report.emit("eigenfunctions.csv", io::format_eigenfunctions(r.eigen));
        report.emit("spectrum.csv", io::format_spectrum(r.eigen));
        report.emit("scores.csv", io::format_scores(r.scores, file.labels));

        auto& res = report.results();
        res["method"] = to_string(config.method);
        res["subjects"] = file.sample.subjects();
        res["components"] = r.eigen.components();
        if (config.method == Method::Wpu) {
            res["psi"] = r.cutoff.psi;
            res["q_hat"] = r.cutoff.q_hat;
            res["q_rank"] = r.cutoff.rank;
        }
        res["total_variance"] = r.eigen.total_variance;
        res["clip_count"] = r.eigen.clip_count;
        res["degenerate_pairs"] = r.surface.degenerate_pairs;
        log << to_string(config.method) << " FPCA: " << r.eigen.components() << " components, leading eigenvalue "
            << (r.eigen.components() > 0 ? r.eigen.eigenvalues(0) : 0.0) << "\n";
    });
}

int cmd_simulate(const fs::path& out_dir, const Overrides& overrides, std::ostream& log) {
    return run_command("simulate", out_dir, overrides, log, [&](const RunConfig& config, Report& report) {
        auto& res = report.results();
        res["generator"] = config.generator;
        res["seed"] = config.seed;
        if (config.generator == "sphere") {
            const ObjectTrajectorySample s = gen_sphere_sample(config.sphere, config.seed);
            emit_pair(report, "sample.csv", io::format_trajectories(s));
            res["subjects"] = s.subjects();
            log << "simulated " << s.subjects() << " sphere trajectories\n";
            return;
        }
        const NetworkDraw draw = gen_network_sample(config.network, config.seed);
        Contaminated c{draw.sample, {}};
        if (config.contamination.fraction > 0.0)
            c = contaminate(draw, config.contamination, derive_stream("cli-contaminate", {config.seed}));
        std::vector<bool> is_outlier(static_cast<std::size_t>(c.sample.subjects()), false);
        for (int i : c.outliers) is_outlier[static_cast<std::size_t>(i)] = true;

        emit_pair(report, "sample.csv", io::format_trajectories(c.sample));
        std::string labels = "subject,group,outlier\n";
        for (int i = 0; i < c.sample.subjects(); ++i)
            labels += std::to_string(i) + "," + std::to_string(draw.groups[static_cast<std::size_t>(i)] + 1) + "," +
                      (is_outlier[static_cast<std::size_t>(i)] ? "1" : "0") + "\n";
        report.emit("labels.csv", labels);
        res["subjects"] = c.sample.subjects();
        res["outliers"] = c.outliers.size();
        res["contamination"] = config.contamination.fraction;
        res["contamination_scheme"] = to_string(config.contamination.scheme);
        res["contamination_order"] = "shift then scale";
        log << "simulated " << c.sample.subjects() << " network trajectories (" << c.outliers.size()
            << " outliers)\n";
    });
}

int cmd_breakdown(const fs::path& out_dir, const Overrides& overrides, std::ostream& log) {
    return run_command("breakdown", out_dir, overrides, log, [&](const RunConfig& config, Report& report) {
        const BreakdownConfig bc = config.breakdown_config();
        const Stopwatch sw;
        const BreakdownResult result = breakdown_experiment(bc);
        report.timing("experiment", sw.seconds());
        for (const auto& e : result.errors) report.warn(e, log);

        std::string curves = "method,epsilon,mea,mise,replications,failures\n";
        std::string bias = "method,epsilon,time,bias\n";
        std::string reference = "time";
        for (const auto& c : result.curves) reference += "," + std::string(to_string(c.method));
        reference += '\n';
        for (int k = 0; k < result.grid.size(); ++k) {
            reference += io::format_real(result.grid[k]);
            for (const auto& c : result.curves) reference += "," + io::format_real(c.reference(k));
            reference += '\n';
        }
        for (const auto& c : result.curves) {
            const std::string m(to_string(c.method));
            for (std::size_t l = 0; l < result.levels.size(); ++l) {
                const auto& met = c.metrics[l];
                const std::string eps = io::format_real(result.levels[l]);
                curves += m + "," + eps + "," + io::format_real(met.mea) + "," + io::format_real(met.mise) + "," +
                          std::to_string(met.replications) + "," + std::to_string(c.failures[l]) + "\n";
                for (Eigen::Index k = 0; k < met.bias.size(); ++k)
                    bias += m + "," + eps + "," + io::format_real(result.grid[static_cast<int>(k)]) + "," +
                            io::format_real(met.bias(k)) + "\n";
            }
        }
        report.emit("curves.csv", curves);
        report.emit("bias.csv", bias);
        report.emit("reference.csv", reference);
        report.results()["levels"] = result.levels;
        report.results()["replications"] = bc.reps;
        report.results()["failed_cells"] = result.errors.size();
        report.results()["theoretical_breakdown"] = theoretical_breakdown(bc.pipeline.psi);
        log << "breakdown experiment: " << result.curves.size() << " methods x " << result.levels.size()
            << " levels x " << bc.reps << " replications\n";
    });
}

int cmd_ingest(const fs::path& events, const fs::path& out_dir, const Overrides& overrides, std::ostream& log) {
    return run_command("ingest", out_dir, overrides, log, [&](const RunConfig& config, Report& report) {
        report.input(events);
        std::ifstream in(events, std::ios::binary);
        if (!in) throw IoError("cannot open '" + events.string() + "'");
        const IngestResult r = ingest_event_records(in, config.ingest, events.string());
        if (in.bad()) throw IoError("read from '" + events.string() + "' failed");
        for (const auto& [node, count] : r.unknown_nodes)
            report.warn("unknown node '" + node + "' in " + std::to_string(count) + " records (skipped)", log);
        if (r.self_loops > 0) report.warn(std::to_string(r.self_loops) + " self-loop records skipped", log);
        emit_pair(report, "sample.csv", io::format_trajectories(r.sample, r.days));
        auto& res = report.results();
        res["records"] = r.records;
        res["counted"] = r.counted;
        res["unknown_records"] = r.unknown_records;
        res["self_loops"] = r.self_loops;
        res["days"] = r.days;
        res["bins_per_day"] = config.ingest.bins_per_day();
        log << "ingested " << r.counted << " of " << r.records << " records into " << r.days.size() << " days\n";
    });
}

}  // namespace rfpca::cli
