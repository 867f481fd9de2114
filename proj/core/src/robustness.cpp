#include "rfpca/robustness.hpp"

#include "rfpca/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>
#include <thread>

namespace rfpca {

InfluenceResult influence_function(const DistanceTrajectories& v, const Eigen::VectorXd& z_distance,
                                   const EigenSystem& es, int k, const CutoffSpec& cutoff,
                                   int components) {
    const int t = v.grid.size();
    if (!(v.grid == es.grid)) throw InvalidInput("influence_function: sample and eigen system grids differ");
    if (z_distance.size() != t) throw InvalidInput("influence_function: z is not on the sample grid");
    if (components < 1 || components > es.components())
        throw InvalidInput("influence_function: component count out of range");
    if (k < 0 || k >= components) throw InvalidInput("influence_function: k must index a retained component");
    if (v.subjects() < 1) throw InsufficientSample("influence_function needs at least one subject");

    InfluenceResult out;
    out.component = k;
    out.if_values = Eigen::VectorXd::Zero(t);

    const Eigen::VectorXd& w = v.grid.weights();
    const int n = v.subjects();
    // Per-subject differences D_i = V_i - v_z, their norms, and zeta_{ij}.
    const Eigen::MatrixXd diff = v.values.rowwise() - z_distance.transpose();
    const Eigen::VectorXd norms = (diff.array().square().rowwise() * w.transpose().array()).rowwise().sum().sqrt();
    int exceed = 0;
    for (int i = 0; i < n; ++i)
        if (norms(i) > cutoff.q_hat) ++exceed;
    out.p1 = static_cast<double>(exceed) / n;

    if ((z_distance.array() == 0.0).all()) return out;  // z is the center itself

    for (int j = 0; j < components; ++j) {
        if (j == k) continue;
        if (std::abs(es.eigenvalues(k) - es.eigenvalues(j)) <= 1e-12)
            throw IllConditioned("influence_function: retained eigenvalues tie");
    }

    const Eigen::MatrixXd proj = diff * w.asDiagonal() * es.eigenfunctions.topRows(components).transpose();
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) {
        const auto r = winsor_radius(norms(i), cutoff.q_hat);
        xi(i) = r ? *r : 0.0;
    }
    const Eigen::MatrixXd zeta = xi.asDiagonal() * proj;  // n x J
    for (int j = 0; j < components; ++j) {
        if (j == k) continue;
        const double cross = zeta.col(j).dot(zeta.col(k)) / n;
        out.if_values += 2.0 * cross / (es.eigenvalues(k) - es.eigenvalues(j)) * es.phi(j);
    }
    out.if_norm = l2_norm(out.if_values, v.grid);
    return out;
}

InfluenceResult influence_function(const ObjectTrajectorySample& sample, const CenterTrajectory& center,
                                   const EigenSystem& es, std::span<const Point> z, int k,
                                   const CutoffSpec& cutoff, int components) {
    const DistanceTrajectories v = distance_trajectories(sample, center);
    const Eigen::VectorXd vz = distance_trajectory(sample.space(), z, center);
    return influence_function(v, vz, es, k, cutoff, components);
}

double gross_error_sensitivity(const EigenSystem& es, int k, double q, double p1) {
    const int j_count = es.components();
    if (k < 0 || k >= j_count) throw InvalidInput("gross_error_sensitivity: k out of range");
    if (!(p1 >= 0.0 && p1 <= 1.0)) throw InvalidInput("gross_error_sensitivity: p1 must lie in [0, 1]");
    if (!(q >= 0.0)) throw InvalidInput("gross_error_sensitivity: cutoff must be non-negative");
    double c = es.eigenvalues(k);
    for (int j = 0; j < j_count; ++j)
        if (j != k) c = std::min(c, std::abs(es.eigenvalues(k) - es.eigenvalues(j)));
    if (!(c > 0.0)) throw IllConditioned("gross_error_sensitivity: c_k vanishes");
    return (p1 + q * (1.0 - p1)) / c;
}

double theoretical_breakdown(double psi) {
    if (!(psi >= 0.0 && psi <= 1.0)) throw InvalidInput("psi must lie in [0, 1]");
    return std::sqrt(1.0 - psi);
}

namespace {

void require_reference(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& reference,
                       const TimeGrid& grid) {
    if (reference.size() != grid.size() || estimates.cols() != grid.size())
        throw InvalidInput("eigenfunction estimates and reference must share the grid");
    if (estimates.rows() == 0) throw InsufficientSample("no eigenfunction estimates supplied");
    const double norm = l2_norm(reference, grid);
    if (std::abs(norm - 1.0) > 1e-6) throw InvalidInput("reference eigenfunction is not normalized");
}

}  // namespace

double mea(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& reference, const TimeGrid& grid) {
    require_reference(estimates, reference, grid);
    double total = 0.0;
    for (Eigen::Index r = 0; r < estimates.rows(); ++r) {
        const double c = std::clamp(l2_inner(estimates.row(r).transpose(), reference, grid), -1.0, 1.0);
        total += std::acos(std::abs(c));
    }
    return total / static_cast<double>(estimates.rows());
}

BiasMise bias_and_mise(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& reference,
                       const TimeGrid& grid) {
    require_reference(estimates, reference, grid);
    BiasMise out;
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(grid.size());
    for (Eigen::Index r = 0; r < estimates.rows(); ++r) {
        Eigen::VectorXd phi = estimates.row(r).transpose();
        if (l2_inner(phi, reference, grid) < 0.0) phi = -phi;
        avg += phi;
        const double e = l2_norm(phi - reference, grid);
        out.mise += e * e;
    }
    const auto r_count = static_cast<double>(estimates.rows());
    out.bias = avg / r_count - reference;
    out.mise /= r_count;
    return out;
}

RobustnessMetrics robustness_metrics(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& reference,
                                     const TimeGrid& grid) {
    RobustnessMetrics m;
    m.mea = mea(estimates, reference, grid);
    auto bm = bias_and_mise(estimates, reference, grid);
    m.bias = std::move(bm.bias);
    m.mise = bm.mise;
    m.replications = static_cast<int>(estimates.rows());
    return m;
}

Eigen::VectorXd monte_carlo_reference(const Eigen::MatrixXd& estimates, const TimeGrid& grid) {
    if (estimates.rows() == 0) throw InsufficientSample("no estimates for the Monte Carlo reference");
    const Eigen::VectorXd anchor = estimates.row(0).transpose();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.size());
    for (Eigen::Index r = 0; r < estimates.rows(); ++r) {
        const Eigen::VectorXd phi = estimates.row(r).transpose();
        sum += l2_inner(phi, anchor, grid) < 0.0 ? Eigen::VectorXd(-phi) : phi;
    }
    const double norm = l2_norm(sum, grid);
    if (!(norm > 0.0)) throw DegenerateSpectrum("Monte Carlo reference averages to zero");
    return sum / norm;
}

void BreakdownConfig::validate() const {
    generator.validate();
    if (reps < 1 || reference_reps < 1) throw ConfigError("breakdown needs at least one replication");
    if (levels.empty()) throw ConfigError("breakdown needs at least one contamination level");
    for (double l : levels)
        if (!(l >= 0.0 && l < 1.0)) throw ConfigError("contamination levels must lie in [0, 1)");
    if (methods.empty()) throw ConfigError("breakdown needs at least one method");
    if (component < 0) throw ConfigError("component index must be non-negative");
    if (pipeline.components != 0 && pipeline.components <= component)
        throw ConfigError("retained components must exceed the studied component index");
    if (!(pipeline.psi > 0.0 && pipeline.psi <= 1.0)) throw ConfigError("psi must lie in (0, 1]");
}

const MethodCurve& BreakdownResult::curve(Method m) const {
    for (const auto& c : curves)
        if (c.method == m) return c;
    throw InvalidInput("method not part of this breakdown result");
}

namespace {

std::uint64_t replicate_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    return splitmix64(seed ^ derive_stream(tag, {index}));
}

// k-th eigenfunction of every requested method on one sample. Centers are
// computed once per kind and shared.
struct CellOutcome {
    std::vector<std::optional<Eigen::VectorXd>> phi;  // per method
    std::vector<std::string> errors;
};

CellOutcome run_cell(const ObjectTrajectorySample& sample, const BreakdownConfig& cfg) {
    CellOutcome out;
    out.phi.resize(cfg.methods.size());
    std::optional<CenterTrajectory> median, mean;
    std::string median_error, mean_error;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const Method method = cfg.methods[m];
        try {
            auto& slot = center_kind_for(method) == CenterKind::Median ? median : mean;
            auto& slot_error = center_kind_for(method) == CenterKind::Median ? median_error : mean_error;
            if (!slot && slot_error.empty()) {
                try {
                    slot = compute_center_trajectory(sample, center_kind_for(method), cfg.pipeline.solver,
                                                     cfg.pipeline.center);
                } catch (const Error& e) {
                    slot_error = e.what();
                }
            }
            if (!slot) throw Error(slot_error);
            const PipelineResult res = run_fpca(sample, method, cfg.pipeline, slot);
            if (res.eigen.components() <= cfg.component)
                throw Error("fewer retained components than the studied index");
            out.phi[m] = res.eigen.phi(cfg.component);
        } catch (const Error& e) {
            out.errors.push_back(std::string(to_string(method)) + ": " + e.what());
        }
    }
    return out;
}

template <class Fn>
void for_each_index(int count, int threads, Fn&& fn) {
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(threads));
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (int i = w; i < count; i += threads) fn(i);
                } catch (...) {
                    failures[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
}

}  // namespace

BreakdownResult breakdown_experiment(const BreakdownConfig& config) {
    config.validate();
    const std::size_t n_methods = config.methods.size();
    const std::size_t n_levels = config.levels.size();
    BreakdownResult result;
    result.levels = config.levels;
    result.grid = TimeGrid::uniform(config.generator.grid_points);

    // Reference eigenfunctions from independent uncontaminated replications.
    std::vector<CellOutcome> ref_cells(static_cast<std::size_t>(config.reference_reps));
    for_each_index(config.reference_reps, config.threads, [&](int r) {
        const auto draw = gen_network_sample(config.generator,
                                             replicate_seed(config.seed, "reference", static_cast<std::uint64_t>(r)));
        ref_cells[static_cast<std::size_t>(r)] = run_cell(draw.sample, config);
    });

    // cells[r][level]
    std::vector<std::vector<CellOutcome>> cells(static_cast<std::size_t>(config.reps),
                                                std::vector<CellOutcome>(n_levels));
    for_each_index(config.reps, config.threads, [&](int r) {
        const auto draw = gen_network_sample(config.generator,
                                             replicate_seed(config.seed, "replicate", static_cast<std::uint64_t>(r)));
        for (std::size_t l = 0; l < n_levels; ++l) {
            const ContaminationSpec spec{config.levels[l], config.scheme, config.shift, config.scale};
            const std::uint64_t cseed =
                replicate_seed(config.seed, "contaminate", static_cast<std::uint64_t>(r) * 1000 + l);
            try {
                const Contaminated c = contaminate(draw, spec, cseed);
                cells[static_cast<std::size_t>(r)][l] = run_cell(c.sample, config);
            } catch (const Error& e) {
                cells[static_cast<std::size_t>(r)][l].phi.resize(n_methods);
                cells[static_cast<std::size_t>(r)][l].errors.push_back(std::string("contaminate: ") + e.what());
            }
        }
    });

    const int t = result.grid.size();
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodCurve curve;
        curve.method = config.methods[m];
        std::vector<Eigen::VectorXd> ref_rows;
        for (const auto& cell : ref_cells)
            if (cell.phi[m]) ref_rows.push_back(*cell.phi[m]);
        if (ref_rows.empty()) {
            result.errors.push_back(std::string(to_string(curve.method)) + ": no reference replications succeeded");
            curve.metrics.resize(n_levels);
            curve.failures.assign(n_levels, config.reps);
            result.curves.push_back(std::move(curve));
            continue;
        }
        Eigen::MatrixXd ref_est(static_cast<Eigen::Index>(ref_rows.size()), t);
        for (std::size_t r = 0; r < ref_rows.size(); ++r) ref_est.row(static_cast<Eigen::Index>(r)) = ref_rows[r].transpose();
        curve.reference = monte_carlo_reference(ref_est, result.grid);

        for (std::size_t l = 0; l < n_levels; ++l) {
            std::vector<Eigen::VectorXd> rows;
            int failures = 0;
            for (int r = 0; r < config.reps; ++r) {
                const auto& cell = cells[static_cast<std::size_t>(r)][l];
                if (m < cell.phi.size() && cell.phi[m])
                    rows.push_back(*cell.phi[m]);
                else
                    ++failures;
            }
            curve.failures.push_back(failures);
            if (rows.empty()) {
                curve.metrics.emplace_back();
                continue;
            }
            Eigen::MatrixXd est(static_cast<Eigen::Index>(rows.size()), t);
            for (std::size_t r = 0; r < rows.size(); ++r) est.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
            curve.metrics.push_back(robustness_metrics(est, curve.reference, result.grid));
        }
        result.curves.push_back(std::move(curve));
    }

    for (std::size_t r = 0; r < ref_cells.size(); ++r)
        for (const auto& e : ref_cells[r].errors)
            result.errors.push_back("reference rep " + std::to_string(r) + " " + e);
    for (int r = 0; r < config.reps; ++r)
        for (std::size_t l = 0; l < n_levels; ++l)
            for (const auto& e : cells[static_cast<std::size_t>(r)][l].errors) {
                std::ostringstream os;
                os << "level " << config.levels[l] << " rep " << r << " " << e;
                result.errors.push_back(os.str());
            }
    return result;
}

}  // namespace rfpca
