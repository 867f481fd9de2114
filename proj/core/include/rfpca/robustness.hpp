#pragma once

#include "rfpca/pipeline.hpp"
#include "rfpca/simgen.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rfpca {

struct InfluenceResult {
    int component = 0;          ///< 0-based index k
    Eigen::VectorXd if_values;  ///< IF_{phi_k}(z) on the grid
    double if_norm = 0.0;       ///< quadrature L2 norm of if_values
    double p1 = 0.0;            ///< empirical pr(||V - v_z|| > Q)
};

/// Influence of a point mass at z on the k-th eigenfunction of the WPU operator:
///   IF = 2 sum_{j != k, j < J} (lambda_k - lambda_j)^{-1} E[zeta_j zeta_k] phi_j,
///   zeta_j = <V - v_z, phi_j> xi(||V - v_z||),
/// with the expectation replaced by the average over the rows of `v`. A zero
/// distance trajectory (z equal to the center) returns the zero function.
/// Throws IllConditioned when two retained eigenvalues tie within 1e-12.
InfluenceResult influence_function(const DistanceTrajectories& v, const Eigen::VectorXd& z_distance,
                                   const EigenSystem& es, int k, const CutoffSpec& cutoff,
                                   int components);

/// Object-level form: distances of the sample and of z from `center`.
InfluenceResult influence_function(const ObjectTrajectorySample& sample, const CenterTrajectory& center,
                                   const EigenSystem& es, std::span<const Point> z, int k,
                                   const CutoffSpec& cutoff, int components);

/// {p1 + Q (1 - p1)} / c_k with c_k = min(lambda_k, min_{j != k} |lambda_k - lambda_j|)
/// over the retained components.
double gross_error_sensitivity(const EigenSystem& es, int k, double q, double p1);

/// (1 - psi)^{1/2}
double theoretical_breakdown(double psi);

/// Mean over estimates of arccos |<phi_hat, reference>| (quadrature inner product).
/// Rows of `estimates` are eigenfunctions on `grid`.
double mea(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& reference, const TimeGrid& grid);

struct BiasMise {
    Eigen::VectorXd bias;
    double mise = 0.0;
};

/// Sign-aligned bias(t) = mean_r s_r phi_r(t) - reference(t) and
/// MISE = mean_r ||s_r phi_r - reference||^2, s_r = sign <phi_r, reference>.
BiasMise bias_and_mise(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& reference,
                       const TimeGrid& grid);

struct RobustnessMetrics {
    double mea = 0.0;
    Eigen::VectorXd bias;
    double mise = 0.0;
    int replications = 0;
};

RobustnessMetrics robustness_metrics(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& reference,
                                     const TimeGrid& grid);

/// Normalized average of sign-aligned estimates (aligned to the first row).
Eigen::VectorXd monte_carlo_reference(const Eigen::MatrixXd& estimates, const TimeGrid& grid);

struct BreakdownConfig {
    NetworkSimConfig generator{};
    ContaminationScheme scheme = ContaminationScheme::ShiftScale;
    double shift = 0.5;
    double scale = 5.0;
    std::vector<double> levels{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
    int reps = 20;
    int reference_reps = 20;
    std::vector<Method> methods{Method::Wpu, Method::Dm, Method::SpatialSign, Method::Classical};
    int component = 0;  ///< 0-based eigenfunction index under study
    PipelineOptions pipeline{kDefaultPsi, {}, {}, 3};
    std::uint64_t seed = 1;
    int threads = 1;  ///< replications run concurrently when > 1

    void validate() const;
};

struct MethodCurve {
    Method method = Method::Wpu;
    Eigen::VectorXd reference;                ///< phi_bar from uncontaminated replications
    std::vector<RobustnessMetrics> metrics;   ///< one per level
    std::vector<int> failures;                ///< failed cells per level
};

struct BreakdownResult {
    std::vector<double> levels;
    TimeGrid grid;
    std::vector<MethodCurve> curves;
    std::vector<std::string> errors;  ///< per-cell failures, "method level rep: message"

    const MethodCurve& curve(Method m) const;
};

/// For every replication: draw a network sample, contaminate it at each level
/// (same base draw across levels), run each method and compare its k-th
/// eigenfunction with the method's Monte Carlo reference built from separate
/// uncontaminated replications. Per-cell errors are recorded, not thrown.
BreakdownResult breakdown_experiment(const BreakdownConfig& config);

}  // namespace rfpca
