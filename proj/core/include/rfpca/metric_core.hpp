#pragma once

// Metric spaces and Fréchet center solvers.
//
// Points are stored as flat coordinate vectors whose layout depends on the space:
//   Laplacian  p*p entries, row-major (the full symmetric matrix)
//   Sphere     3 unit-sphere coordinates
//   Euclidean  d coordinates
//
// Laplacian distances are Frobenius norms. Internally the solvers work on the
// scaled half-vectorization (diagonal, sqrt(2) * strict upper triangle), whose
// Euclidean norm equals the Frobenius norm of the matrix.

#include "rfpca/errors.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfpca {

using Point = Eigen::VectorXd;

enum class SpaceKind { Laplacian, Sphere, Euclidean };

std::string_view to_string(SpaceKind kind);
SpaceKind space_kind_from_string(std::string_view name);

/// Declares which metric space points live in. `dim` is the node count p for
/// Laplacians, 3 for the sphere and the ambient dimension for Euclidean points.
struct MetricSpace {
    SpaceKind kind = SpaceKind::Euclidean;
    int dim = 1;

    static MetricSpace laplacian(int nodes) { return {SpaceKind::Laplacian, nodes}; }
    static MetricSpace sphere() { return {SpaceKind::Sphere, 3}; }
    static MetricSpace euclidean(int d) { return {SpaceKind::Euclidean, d}; }

    /// Number of stored coordinates per point.
    int coord_size() const noexcept { return kind == SpaceKind::Laplacian ? dim * dim : dim; }

    friend bool operator==(const MetricSpace&, const MetricSpace&) = default;
};

struct MedianSolverConfig {
    int max_iter = 200;
    double tol = 1e-8;         ///< stop once the step length falls below this
    double anchor_eps = 1e-10; ///< iterate closer than this to a data point counts as coincident
    bool record_costs = false; ///< keep the per-iteration objective in FrechetFit::cost_trace

    void validate() const;
};

/// Solver output with diagnostics.
struct FrechetFit {
    Point point;
    int iterations = 0;
    double final_step = 0.0;
    double cost = 0.0;               ///< objective at `point`
    std::vector<double> cost_trace;  ///< objective at each iterate, starting point first
};

double distance(const MetricSpace& space, const Point& a, const Point& b);

/// sum_i d(omega, x_i)
double median_cost(const MetricSpace& space, const Point& omega, std::span<const Point> points);
/// sum_i d(omega, x_i)^2
double mean_cost(const MetricSpace& space, const Point& omega, std::span<const Point> points);

/// Fréchet median. Weiszfeld with the Vardi-Zhang anchor step for Laplacian and
/// Euclidean points, Riemannian Weiszfeld (log/exp steps) on the sphere.
/// `init` overrides the coordinate-wise-median starting point.
FrechetFit frechet_median_fit(const MetricSpace& space, std::span<const Point> points,
                              const MedianSolverConfig& config = {},
                              const std::optional<Point>& init = std::nullopt);

Point frechet_median(const MetricSpace& space, std::span<const Point> points,
                     const MedianSolverConfig& config = {});

/// Fréchet mean. Arithmetic average for Laplacian and Euclidean points (exact),
/// Karcher-mean gradient descent on the sphere.
FrechetFit frechet_mean_fit(const MetricSpace& space, std::span<const Point> points,
                            const MedianSolverConfig& config = {},
                            const std::optional<Point>& init = std::nullopt);

Point frechet_mean(const MetricSpace& space, std::span<const Point> points,
                   const MedianSolverConfig& config = {});

/// Riemannian log map on S^2. Throws SingularityError for antipodal input.
Eigen::Vector3d sphere_log(const Eigen::Vector3d& base, const Eigen::Vector3d& q);
/// Riemannian exp map on S^2; the result is renormalized.
Eigen::Vector3d sphere_exp(const Eigen::Vector3d& base, const Eigen::Vector3d& v);

struct Violation {
    std::string code;     ///< machine-readable tag, e.g. "row_sum"
    std::string message;
};

struct ValidityReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(std::string_view code) const;
};

ValidityReport validate_point(const MetricSpace& space, const Point& candidate);

// Laplacian helpers.
Eigen::MatrixXd as_matrix(const MetricSpace& space, const Point& laplacian);
Point from_matrix(const Eigen::MatrixXd& m);
/// Laplacian L = D - A from a symmetric non-negative adjacency matrix (diagonal ignored).
Point laplacian_from_adjacency(const Eigen::MatrixXd& adjacency);
/// Adjacency weights -L_ij recovered from a Laplacian (zero diagonal).
Eigen::MatrixXd adjacency_from_laplacian(const MetricSpace& space, const Point& laplacian);
/// Scaled half-vectorization: diag entries, then sqrt(2) * L_ij for i < j (row-major).
Eigen::VectorXd scaled_half_vec(int nodes, const Point& laplacian);
Point from_scaled_half_vec(int nodes, const Eigen::VectorXd& h);

}  // namespace rfpca
