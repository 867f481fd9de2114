#pragma once

// Seeded generators for synthetic samples.
//
// Networks: nodes are split into contiguous communities (per group). For a
// subject of group g the weight of edge (u, v) at time t is
//   within community:  w0 + a_g * exp(-(t - tau_g)^2 / (2 * bump_variance)) + noise
//   between:           w0 / 4 + noise
// with iid N(0, sigma^2) noise, truncated at 0, and X(t) = D(t) - A(t).

#include "rfpca/trajectory.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rfpca {

struct NetworkGroup {
    double peak_time = 0.5;  ///< tau_g
    double amplitude = 1.0;  ///< a_g
    int communities = 2;
};

struct NetworkSimConfig {
    int nodes = 20;
    int grid_points = 30;
    std::vector<NetworkGroup> groups{{0.3, 2.0, 2}, {0.4, 2.0, 2}, {0.75, 2.0, 5}};
    double base_weight = 4.0;
    double bump_variance = 0.02;
    double noise_sd = 0.3;
    int subjects_per_group = 100;

    void validate() const;
    int subjects() const noexcept { return subjects_per_group * static_cast<int>(groups.size()); }
};

struct NetworkDraw {
    ObjectTrajectorySample sample;
    std::vector<int> groups;  ///< group label per subject (subjects are group-major)
    NetworkSimConfig config;
    std::uint64_t seed = 0;
};

enum class ContaminationScheme { ShiftScale, Bimodal, ZeroWeight };
std::string_view to_string(ContaminationScheme scheme);
ContaminationScheme contamination_scheme_from_string(std::string_view name);

struct ContaminationSpec {
    double fraction = 0.0;
    ContaminationScheme scheme = ContaminationScheme::ShiftScale;
    double shift = 0.5;  ///< added to every edge weight first
    double scale = 5.0;  ///< then multiplied

    void validate() const;
};

struct Contaminated {
    ObjectTrajectorySample sample;
    std::vector<int> outliers;  ///< sorted subject indices that were replaced
};

/// Community index of `node` when `nodes` are split into `communities` contiguous blocks.
int community_of(int node, int nodes, int communities);

/// Noise-free within-community weight of group `g` at time t.
double within_weight(const NetworkSimConfig& config, int group, double t, bool bimodal = false);

NetworkDraw gen_network_sample(const NetworkSimConfig& config, std::uint64_t seed);

/// Replaces round(fraction * n) uniformly chosen subjects by outliers. Only the
/// shift-scale scheme is available without generator context.
Contaminated contaminate(const ObjectTrajectorySample& sample, const ContaminationSpec& spec,
                         std::uint64_t seed);
/// All schemes; bimodal and zero-weight outliers are regenerated from the draw's
/// configuration with the subject's own noise stream.
Contaminated contaminate(const NetworkDraw& draw, const ContaminationSpec& spec, std::uint64_t seed);

struct SphereSimConfig {
    int grid_points = 30;
    int subjects = 100;
    Eigen::Vector3d start{1.0, 0.0, 0.0};
    Eigen::Vector3d direction{0.0, 1.0, 0.0};  ///< initial heading (orthogonalized against start)
    double arc_length = 1.0;  ///< radians travelled along the great circle over [0, 1]
    double noise_sd = 0.1;    ///< per-axis sd of the tangent perturbation
    bool antithetic = false;  ///< subjects 2k and 2k+1 use opposite tangent perturbations
    int max_attempts = 10;

    void validate() const;
};

/// Point of the noiseless great-circle base curve at time t.
Eigen::Vector3d sphere_base_point(const SphereSimConfig& config, double t);

/// Subjects are exp_{base(t)}(tangent noise). Redraws (new stream) when a time
/// point violates the concentration margin; throws ConcentrationError after
/// `max_attempts`.
ObjectTrajectorySample gen_sphere_sample(const SphereSimConfig& config, std::uint64_t seed);

/// Max pairwise great-circle distance allowed in generated sphere samples.
inline constexpr double kSphereConcentrationMargin = 0.9 * 1.5707963267948966;

struct ScoreSimConfig {
    int grid_points = 50;
    int subjects = 300;
    std::vector<double> eigenvalues{4.0, 2.0, 1.0};
    double mean_level = 20.0;  ///< nu(t) = mean_level + sin(2 pi t)

    void validate() const;
};

/// Quadrature-orthonormal Fourier functions (1, sin 2pi t, cos 2pi t, sin 4pi t, ...)
/// as rows, Gram-Schmidt corrected for the trapezoidal weights.
Eigen::MatrixXd fourier_basis(const TimeGrid& grid, int count);

/// Mean function used by gen_score_trajectories.
Eigen::VectorXd score_mean_function(const ScoreSimConfig& config, const TimeGrid& grid);

/// V_i = nu + sum_j sqrt(lambda_j) Z_ij phi_j with iid standard normal Z and the
/// Fourier basis; coordinate-symmetric by construction.
DistanceTrajectories gen_score_trajectories(const ScoreSimConfig& config, std::uint64_t seed);

}  // namespace rfpca
