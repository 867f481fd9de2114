#include "rfpca/simgen.hpp"

#include "rfpca/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rfpca {

namespace {

enum class BumpShape { Unimodal, Bimodal };

std::vector<Point> gen_network_subject(const NetworkSimConfig& cfg, const TimeGrid& grid, int group,
                                       std::uint64_t seed, int subject, BumpShape shape) {
    Rng rng(seed, derive_stream("network-subject", {static_cast<std::uint64_t>(subject)}));
    const int p = cfg.nodes;
    const int c = cfg.groups[static_cast<std::size_t>(group)].communities;
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(grid.size()));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    for (int k = 0; k < grid.size(); ++k) {
        const double within = within_weight(cfg, group, grid[k], shape == BumpShape::Bimodal);
        const double between = cfg.base_weight / 4.0;
        for (int u = 0; u < p; ++u)
            for (int v = u + 1; v < p; ++v) {
                const bool same = community_of(u, p, c) == community_of(v, p, c);
                const double w = std::max(0.0, (same ? within : between) + cfg.noise_sd * rng.normal());
                a(u, v) = w;
                a(v, u) = w;
            }
        out.push_back(laplacian_from_adjacency(a));
    }
    return out;
}

std::vector<int> choose_outliers(int n, double fraction, std::uint64_t seed) {
    const auto count = static_cast<int>(std::lround(fraction * n));
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed, derive_stream("contaminate", {}));
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(count));
    std::sort(idx.begin(), idx.end());
    return idx;
}

Point shift_scale(const MetricSpace& space, const Point& laplacian, const ContaminationSpec& spec) {
    Eigen::MatrixXd a = adjacency_from_laplacian(space, laplacian);
    a = spec.scale * (a.array() + spec.shift).matrix();
    return laplacian_from_adjacency(a);
}

}  // namespace

void NetworkSimConfig::validate() const {
    if (nodes < 2) throw ConfigError("network simulation needs at least two nodes");
    if (grid_points < 2) throw ConfigError("network simulation needs at least two grid points");
    if (groups.empty()) throw ConfigError("network simulation needs at least one group");
    for (const auto& g : groups) {
        if (!(g.peak_time > 0.0 && g.peak_time < 1.0)) throw ConfigError("group peak time must lie in (0, 1)");
        if (g.communities < 1 || g.communities > nodes)
            throw ConfigError("group community count must lie in [1, nodes]");
        if (!std::isfinite(g.amplitude)) throw ConfigError("group amplitude must be finite");
    }
    if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be non-negative");
    if (!(base_weight >= 0.0)) throw ConfigError("base_weight must be non-negative");
    if (!(bump_variance > 0.0)) throw ConfigError("bump_variance must be positive");
    if (subjects_per_group < 1) throw ConfigError("subjects_per_group must be positive");
}

void ContaminationSpec::validate() const {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("contamination fraction must lie in [0, 1)");
    if (!std::isfinite(shift) || !(scale > 0.0)) throw ConfigError("contamination shift/scale invalid");
}

void SphereSimConfig::validate() const {
    if (grid_points < 2) throw ConfigError("sphere simulation needs at least two grid points");
    if (subjects < 1) throw ConfigError("sphere simulation needs at least one subject");
    if (!(noise_sd >= 0.0 && noise_sd < 0.3)) throw ConfigError("sphere noise_sd must lie in [0, 0.3)");
    if (std::abs(start.norm() - 1.0) > 1e-9) throw ConfigError("sphere start must be a unit vector");
    if ((direction - direction.dot(start) * start).norm() < 1e-9)
        throw ConfigError("sphere direction must not be parallel to start");
    if (max_attempts < 1) throw ConfigError("max_attempts must be positive");
}

void ScoreSimConfig::validate() const {
    if (grid_points < 2) throw ConfigError("score simulation needs at least two grid points");
    if (subjects < 1) throw ConfigError("score simulation needs at least one subject");
    if (eigenvalues.empty() || static_cast<int>(eigenvalues.size()) > grid_points)
        throw ConfigError("score simulation needs between 1 and T eigenvalues");
    for (double l : eigenvalues)
        if (!(l >= 0.0)) throw ConfigError("score eigenvalues must be non-negative");
}

std::string_view to_string(ContaminationScheme scheme) {
    switch (scheme) {
        case ContaminationScheme::ShiftScale: return "shift-scale";
        case ContaminationScheme::Bimodal: return "bimodal";
        case ContaminationScheme::ZeroWeight: return "zero-weight";
    }
    return "unknown";
}

ContaminationScheme contamination_scheme_from_string(std::string_view name) {
    if (name == "shift-scale") return ContaminationScheme::ShiftScale;
    if (name == "bimodal") return ContaminationScheme::Bimodal;
    if (name == "zero-weight") return ContaminationScheme::ZeroWeight;
    throw ConfigError("unknown contamination scheme '" + std::string(name) + "'");
}

int community_of(int node, int nodes, int communities) {
    return node * communities / nodes;
}

double within_weight(const NetworkSimConfig& config, int group, double t, bool bimodal) {
    const auto& g = config.groups[static_cast<std::size_t>(group)];
    auto bump = [&](double center) {
        const double z = t - center;
        return std::exp(-z * z / (2.0 * config.bump_variance));
    };
    const double shape = bimodal ? bump(g.peak_time - 0.2) + bump(g.peak_time + 0.2) : bump(g.peak_time);
    return config.base_weight + g.amplitude * shape;
}

NetworkDraw gen_network_sample(const NetworkSimConfig& config, std::uint64_t seed) {
    config.validate();
    const TimeGrid grid = TimeGrid::uniform(config.grid_points);
    const int n = config.subjects();
    std::vector<Point> points;
    points.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(grid.size()));
    std::vector<int> groups;
    groups.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int g = i / config.subjects_per_group;
        auto traj = gen_network_subject(config, grid, g, seed, i, BumpShape::Unimodal);
        std::move(traj.begin(), traj.end(), std::back_inserter(points));
        groups.push_back(g);
    }
    return {ObjectTrajectorySample(MetricSpace::laplacian(config.nodes), grid, std::move(points)),
            std::move(groups), config, seed};
}

Contaminated contaminate(const ObjectTrajectorySample& sample, const ContaminationSpec& spec,
                         std::uint64_t seed) {
    spec.validate();
    if (spec.scheme != ContaminationScheme::ShiftScale)
        throw ConfigError("contamination scheme '" + std::string(to_string(spec.scheme)) +
                          "' needs the generating network configuration");
    if (sample.space().kind != SpaceKind::Laplacian)
        throw ConfigError("contamination operators apply to Laplacian samples only");
    Contaminated out{sample, choose_outliers(sample.subjects(), spec.fraction, seed)};
    for (int i : out.outliers)
        for (int k = 0; k < sample.times(); ++k)
            out.sample.at(i, k) = shift_scale(sample.space(), sample.at(i, k), spec);
    return out;
}

Contaminated contaminate(const NetworkDraw& draw, const ContaminationSpec& spec, std::uint64_t seed) {
    if (spec.scheme == ContaminationScheme::ShiftScale) return contaminate(draw.sample, spec, seed);
    spec.validate();
    const auto& sample = draw.sample;
    if (static_cast<int>(draw.groups.size()) != sample.subjects())
        throw ConfigError("network draw group labels do not match its sample");
    Contaminated out{sample, choose_outliers(sample.subjects(), spec.fraction, seed)};
    const int p = draw.config.nodes;
    for (int i : out.outliers) {
        const int g = draw.groups[static_cast<std::size_t>(i)];
        if (spec.scheme == ContaminationScheme::Bimodal) {
            auto traj = gen_network_subject(draw.config, sample.grid(), g, draw.seed, i, BumpShape::Bimodal);
            for (int k = 0; k < sample.times(); ++k) out.sample.at(i, k) = std::move(traj[static_cast<std::size_t>(k)]);
        } else {
            const int c = draw.config.groups[static_cast<std::size_t>(g)].communities;
            for (int k = 0; k < sample.times(); ++k) {
                Eigen::MatrixXd a = adjacency_from_laplacian(sample.space(), sample.at(i, k));
                for (int u = 0; u < p; ++u)
                    for (int v = 0; v < p; ++v)
                        if (community_of(u, p, c) != community_of(v, p, c)) a(u, v) = 0.0;
                out.sample.at(i, k) = laplacian_from_adjacency(a);
            }
        }
    }
    return out;
}

Eigen::Vector3d sphere_base_point(const SphereSimConfig& config, double t) {
    const Eigen::Vector3d e1 = config.start;
    const Eigen::Vector3d e2 = (config.direction - config.direction.dot(e1) * e1).normalized();
    const double a = config.arc_length * t;
    return (std::cos(a) * e1 + std::sin(a) * e2).normalized();
}

ObjectTrajectorySample gen_sphere_sample(const SphereSimConfig& config, std::uint64_t seed) {
    config.validate();
    const TimeGrid grid = TimeGrid::uniform(config.grid_points);
    const Eigen::Vector3d e1 = config.start;
    const Eigen::Vector3d e2 = (config.direction - config.direction.dot(e1) * e1).normalized();
    const Eigen::Vector3d normal = e1.cross(e2);
    const auto n = static_cast<std::size_t>(config.subjects);
    const auto t = static_cast<std::size_t>(grid.size());

    for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
        std::vector<Point> points(n * t);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t source = config.antithetic ? i / 2 : i;
            const double sign = (config.antithetic && i % 2 == 1) ? -1.0 : 1.0;
            Rng rng(seed, derive_stream("sphere-subject", {static_cast<std::uint64_t>(attempt), source}));
            for (std::size_t k = 0; k < t; ++k) {
                const double a = config.arc_length * grid[static_cast<int>(k)];
                const Eigen::Vector3d base = sphere_base_point(config, grid[static_cast<int>(k)]);
                const Eigen::Vector3d heading = -std::sin(a) * e1 + std::cos(a) * e2;
                const double z1 = rng.normal(), z2 = rng.normal();
                const Eigen::Vector3d v = sign * config.noise_sd * (z1 * heading + z2 * normal);
                points[i * t + k] = sphere_exp(base, v);
            }
        }
        bool concentrated = true;
        for (std::size_t k = 0; k < t && concentrated; ++k)
            for (std::size_t i = 0; i < n && concentrated; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (distance(MetricSpace::sphere(), points[i * t + k], points[j * t + k]) >=
                        kSphereConcentrationMargin) {
                        concentrated = false;
                        break;
                    }
        if (concentrated) return ObjectTrajectorySample(MetricSpace::sphere(), grid, std::move(points));
    }
    throw ConcentrationError("sphere generator could not meet the concentration margin after " +
                             std::to_string(config.max_attempts) + " attempts");
}

Eigen::MatrixXd fourier_basis(const TimeGrid& grid, int count) {
    const int t = grid.size();
    if (count < 1 || count > t) throw InvalidInput("fourier_basis: count must lie in [1, T]");
    Eigen::MatrixXd basis(count, t);
    for (int j = 0; j < count; ++j) {
        const int freq = (j + 1) / 2;
        for (int k = 0; k < t; ++k) {
            const double x = 2.0 * std::numbers::pi * freq * grid[k];
            basis(j, k) = j == 0 ? 1.0 : (j % 2 == 1 ? std::sqrt(2.0) * std::sin(x) : std::sqrt(2.0) * std::cos(x));
        }
    }
    const Eigen::VectorXd& w = grid.weights();
    for (int j = 0; j < count; ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < j; ++i) {
                const double c = (basis.row(j).array() * basis.row(i).array() * w.transpose().array()).sum();
                basis.row(j) -= c * basis.row(i);
            }
        const double norm = std::sqrt((basis.row(j).array().square() * w.transpose().array()).sum());
        basis.row(j) /= norm;
    }
    return basis;
}

Eigen::VectorXd score_mean_function(const ScoreSimConfig& config, const TimeGrid& grid) {
    Eigen::VectorXd nu(grid.size());
    for (int k = 0; k < grid.size(); ++k)
        nu(k) = config.mean_level + std::sin(2.0 * std::numbers::pi * grid[k]);
    return nu;
}

DistanceTrajectories gen_score_trajectories(const ScoreSimConfig& config, std::uint64_t seed) {
    config.validate();
    const TimeGrid grid = TimeGrid::uniform(config.grid_points);
    const int j_count = static_cast<int>(config.eigenvalues.size());
    const Eigen::MatrixXd basis = fourier_basis(grid, j_count);
    const Eigen::VectorXd nu = score_mean_function(config, grid);
    DistanceTrajectories out;
    out.grid = grid;
    out.values.resize(config.subjects, grid.size());
    for (int i = 0; i < config.subjects; ++i) {
        Rng rng(seed, derive_stream("score-subject", {static_cast<std::uint64_t>(i)}));
        Eigen::VectorXd row = nu;
        for (int j = 0; j < j_count; ++j)
            row += std::sqrt(config.eigenvalues[static_cast<std::size_t>(j)]) * rng.normal() * basis.row(j).transpose();
        out.values.row(i) = row.transpose();
    }
    return out;
}

}  // namespace rfpca
