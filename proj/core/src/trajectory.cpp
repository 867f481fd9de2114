#include "rfpca/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>
#include <thread>

namespace rfpca {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    const auto t = points_.size();
    if (t < 2) throw InvalidInput("time grid needs at least two points");
    for (std::size_t k = 0; k < t; ++k) {
        if (!std::isfinite(points_[k]) || points_[k] < 0.0 || points_[k] > 1.0)
            throw InvalidInput("time grid points must lie in [0, 1]");
        if (k > 0 && !(points_[k] > points_[k - 1]))
            throw InvalidInput("time grid must be strictly increasing");
    }
    weights_.resize(static_cast<Eigen::Index>(t));
    weights_(0) = 0.5 * (points_[1] - points_[0]);
    weights_(static_cast<Eigen::Index>(t - 1)) = 0.5 * (points_[t - 1] - points_[t - 2]);
    for (std::size_t k = 1; k + 1 < t; ++k)
        weights_(static_cast<Eigen::Index>(k)) = 0.5 * (points_[k + 1] - points_[k - 1]);
}

TimeGrid TimeGrid::uniform(int count) {
    if (count < 2) throw InvalidInput("uniform grid needs at least two points");
    std::vector<double> pts(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) pts[static_cast<std::size_t>(k)] = static_cast<double>(k) / (count - 1);
    return TimeGrid(std::move(pts));
}

ObjectTrajectorySample::ObjectTrajectorySample(MetricSpace space, TimeGrid grid,
                                               std::vector<Point> points)
    : space_(space), grid_(std::move(grid)), points_(std::move(points)) {
    const auto t = static_cast<std::size_t>(grid_.size());
    if (t == 0 || points_.size() % t != 0)
        throw InvalidInput("sample point count is not a multiple of the grid size");
    n_ = static_cast<int>(points_.size() / t);
    for (const auto& p : points_)
        if (p.size() != space_.coord_size())
            throw InvalidInput("sample point has the wrong coordinate count for its space");
}

std::vector<Point> ObjectTrajectorySample::trajectory(int subject) const {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(times()));
    for (int k = 0; k < times(); ++k) out.push_back(at(subject, k));
    return out;
}

std::vector<Point> ObjectTrajectorySample::cross_section(int time) const {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) out.push_back(at(i, time));
    return out;
}

void ObjectTrajectorySample::validate() const {
    for (int i = 0; i < n_; ++i)
        for (int k = 0; k < times(); ++k) {
            const auto report = validate_point(space_, at(i, k));
            if (!report.ok()) {
                std::ostringstream os;
                os << "subject " << i << ", time index " << k << ": "
                   << report.violations.front().message;
                throw InvalidInput(os.str());
            }
        }
}

std::string_view to_string(CenterKind kind) {
    return kind == CenterKind::Median ? "median" : "mean";
}

std::string_view to_string(DistanceKind kind) {
    return kind == DistanceKind::MedianDistance ? "median-distance" : "dm-squared-distance";
}

namespace {

Point solve_at(const ObjectTrajectorySample& sample, int k, CenterKind kind,
               const MedianSolverConfig& config, const std::optional<Point>& init) {
    const auto section = sample.cross_section(k);
    try {
        return kind == CenterKind::Median
                   ? frechet_median_fit(sample.space(), section, config, init).point
                   : frechet_mean_fit(sample.space(), section, config, init).point;
    } catch (const ConvergenceError& e) {
        std::ostringstream os;
        os << "time index " << k << ": " << e.what();
        throw ConvergenceError(os.str(), e.last_iterate(), e.last_step(), k);
    } catch (const ConcentrationError& e) {
        throw ConcentrationError("time index " + std::to_string(k) + ": " + e.what());
    } catch (const InvalidInput& e) {
        throw InvalidInput("time index " + std::to_string(k) + ": " + e.what());
    }
}

}  // namespace

CenterTrajectory compute_center_trajectory(const ObjectTrajectorySample& sample, CenterKind kind,
                                           const MedianSolverConfig& config,
                                           const CenterOptions& options) {
    if (sample.subjects() < 1) throw InsufficientSample("center trajectory needs at least one subject");
    CenterTrajectory out{sample.space(), sample.grid(), {}, kind};
    const int t = sample.times();
    out.centers.resize(static_cast<std::size_t>(t));

    if (options.threads <= 1) {
        std::optional<Point> init;
        for (int k = 0; k < t; ++k) {
            out.centers[static_cast<std::size_t>(k)] = solve_at(sample, k, kind, config, init);
            if (options.warm_start) init = out.centers[static_cast<std::size_t>(k)];
        }
        return out;
    }

    // Cold starts; thread w handles time indices w, w + threads, ...
    const int workers = std::min(options.threads, t);
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (int k = w; k < t; k += workers)
                        out.centers[static_cast<std::size_t>(k)] =
                            solve_at(sample, k, kind, config, std::nullopt);
                } catch (...) {
                    failures[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return out;
}

Eigen::VectorXd distance_trajectory(const MetricSpace& space, std::span<const Point> trajectory,
                                    const CenterTrajectory& center) {
    if (!(space == center.space)) throw InvalidInput("trajectory and center live in different spaces");
    if (trajectory.size() != center.centers.size())
        throw InvalidInput("trajectory length does not match the center grid");
    Eigen::VectorXd v(static_cast<Eigen::Index>(trajectory.size()));
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        const double d = distance(space, trajectory[k], center.centers[k]);
        v(static_cast<Eigen::Index>(k)) = center.kind == CenterKind::Mean ? d * d : d;
    }
    return v;
}

DistanceTrajectories distance_trajectories(const ObjectTrajectorySample& sample,
                                           const CenterTrajectory& center) {
    if (!(center.grid == sample.grid()))
        throw InvalidInput("center trajectory grid differs from the sample grid");
    if (!(center.space == sample.space()))
        throw InvalidInput("center trajectory space differs from the sample space");
    DistanceTrajectories out;
    out.grid = sample.grid();
    out.kind = center.kind == CenterKind::Median ? DistanceKind::MedianDistance
                                                 : DistanceKind::DmSquared;
    out.values.resize(sample.subjects(), sample.times());
    for (int i = 0; i < sample.subjects(); ++i)
        for (int k = 0; k < sample.times(); ++k) {
            const double d =
                distance(sample.space(), sample.at(i, k), center.centers[static_cast<std::size_t>(k)]);
            out.values(i, k) = center.kind == CenterKind::Mean ? d * d : d;
        }
    return out;
}

double l2_norm(std::span<const double> values, const TimeGrid& grid) {
    if (static_cast<int>(values.size()) != grid.size())
        throw InvalidInput("l2_norm: length does not match the grid");
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k)
        s += grid.weights()(static_cast<Eigen::Index>(k)) * values[k] * values[k];
    return std::sqrt(s);
}

double l2_norm(const Eigen::Ref<const Eigen::VectorXd>& values, const TimeGrid& grid) {
    return l2_norm(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())), grid);
}

double l2_inner(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                const TimeGrid& grid) {
    if (a.size() != grid.size() || b.size() != grid.size())
        throw InvalidInput("l2_inner: length does not match the grid");
    return (grid.weights().array() * a.array() * b.array()).sum();
}

}  // namespace rfpca
