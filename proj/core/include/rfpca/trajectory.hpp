#pragma once

#include "rfpca/metric_core.hpp"

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

namespace rfpca {

/// Strictly increasing time points in [0, 1] with trapezoidal quadrature weights.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> points);

    /// T equispaced points from 0 to 1 inclusive.
    static TimeGrid uniform(int count);

    int size() const noexcept { return static_cast<int>(points_.size()); }
    const std::vector<double>& points() const noexcept { return points_; }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    double operator[](int k) const { return points_[static_cast<std::size_t>(k)]; }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) { return a.points_ == b.points_; }

private:
    std::vector<double> points_;
    Eigen::VectorXd weights_;
};

/// n subjects observed on a shared grid. Points are stored subject-major.
class ObjectTrajectorySample {
public:
    ObjectTrajectorySample(MetricSpace space, TimeGrid grid, std::vector<Point> points);

    const MetricSpace& space() const noexcept { return space_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    int subjects() const noexcept { return n_; }
    int times() const noexcept { return grid_.size(); }

    const Point& at(int subject, int time) const { return points_[index(subject, time)]; }
    Point& at(int subject, int time) { return points_[index(subject, time)]; }

    /// Points of one subject across time.
    std::vector<Point> trajectory(int subject) const;
    /// Points of all subjects at one time.
    std::vector<Point> cross_section(int time) const;

    const std::vector<Point>& data() const noexcept { return points_; }

    /// Throws InvalidInput listing the first invalid point, if any.
    void validate() const;

private:
    std::size_t index(int subject, int time) const {
        return static_cast<std::size_t>(subject) * static_cast<std::size_t>(grid_.size()) +
               static_cast<std::size_t>(time);
    }

    MetricSpace space_;
    TimeGrid grid_;
    int n_ = 0;
    std::vector<Point> points_;
};

enum class CenterKind { Median, Mean };

struct CenterTrajectory {
    MetricSpace space;
    TimeGrid grid;
    std::vector<Point> centers;
    CenterKind kind = CenterKind::Median;
};

/// median-distance: d(X_i(t), median(t)); dm-squared: d(X_i(t), mean(t))^2.
enum class DistanceKind { MedianDistance, DmSquared };

struct DistanceTrajectories {
    TimeGrid grid;
    Eigen::MatrixXd values;  ///< n x T
    DistanceKind kind = DistanceKind::MedianDistance;

    int subjects() const noexcept { return static_cast<int>(values.rows()); }
};

std::string_view to_string(CenterKind kind);
std::string_view to_string(DistanceKind kind);

struct CenterOptions {
    bool warm_start = true;  ///< initialize t_{k+1} from the solution at t_k
    int threads = 1;         ///< > 1 solves time points concurrently with cold starts
};

/// Pointwise Fréchet median (or mean) at every grid point. Solver failures are
/// rethrown with the failing time index.
CenterTrajectory compute_center_trajectory(const ObjectTrajectorySample& sample, CenterKind kind,
                                           const MedianSolverConfig& config = {},
                                           const CenterOptions& options = {});

/// Distances of every subject from the center; squared when the center is a mean.
DistanceTrajectories distance_trajectories(const ObjectTrajectorySample& sample,
                                           const CenterTrajectory& center);

/// Distance trajectory of a single object trajectory against the center.
Eigen::VectorXd distance_trajectory(const MetricSpace& space, std::span<const Point> trajectory,
                                    const CenterTrajectory& center);

/// Trapezoidal L2 norm sqrt(sum_k w_k x_k^2).
double l2_norm(std::span<const double> values, const TimeGrid& grid);
double l2_norm(const Eigen::Ref<const Eigen::VectorXd>& values, const TimeGrid& grid);
/// Trapezoidal inner product sum_k w_k a_k b_k.
double l2_inner(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                const TimeGrid& grid);

}  // namespace rfpca
