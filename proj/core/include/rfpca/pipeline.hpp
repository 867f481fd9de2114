#pragma once

#include "rfpca/covariance.hpp"
#include "rfpca/spectra.hpp"
#include "rfpca/trajectory.hpp"

#include <optional>
#include <string_view>

namespace rfpca {

/// FPCA variants compared throughout the library.
///   wpu           median center, distances, Winsorized pairwise covariance
///   dm            mean center, squared distances, classical covariance
///   spatial-sign  median center, distances, pairwise covariance with Q = 0
///   classical     median center, distances, classical covariance
enum class Method { Wpu, Dm, SpatialSign, Classical };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

struct PipelineOptions {
    double psi = kDefaultPsi;
    MedianSolverConfig solver{};
    CenterOptions center{};
    /// Retained components; 0 picks the smallest count reaching 90% explained variance.
    int components = 0;
};

struct PipelineResult {
    Method method = Method::Wpu;
    CenterTrajectory center;
    DistanceTrajectories distances;
    CutoffSpec cutoff;  ///< meaningful for wpu / spatial-sign
    CovarianceSurface surface;
    EigenSystem eigen;
    Eigen::MatrixXd scores;
};

CenterKind center_kind_for(Method method);

/// Covariance and spectrum stage, starting from already computed distances.
PipelineResult fpca_from_distances(const DistanceTrajectories& distances, Method method,
                                   const PipelineOptions& options);

/// center -> distance trajectories -> covariance -> spectrum -> scores.
/// A precomputed center of the right kind can be passed to skip the solver.
PipelineResult run_fpca(const ObjectTrajectorySample& sample, Method method,
                        const PipelineOptions& options,
                        const std::optional<CenterTrajectory>& center = std::nullopt);

}  // namespace rfpca
