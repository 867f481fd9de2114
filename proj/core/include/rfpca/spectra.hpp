#pragma once

#include "rfpca/covariance.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rfpca {

/// Leading eigenpairs of a covariance operator on a quadrature grid.
struct EigenSystem {
    TimeGrid grid;
    Eigen::VectorXd eigenvalues;     ///< J values, descending, clipped at 0
    Eigen::MatrixXd eigenfunctions;  ///< J x T; row j is phi_j on the grid
    Eigen::VectorXd gaps;            ///< delta_j = min_{l<=j} (lambda_l - lambda_{l+1})
    Eigen::VectorXd explained;       ///< lambda_j / trace, 0 when the trace vanishes
    Eigen::VectorXd mean_function;   ///< nu(t); empty unless built from trajectories
    double total_variance = 0.0;     ///< sum of all clipped eigenvalues
    int clip_count = 0;              ///< eigenvalues below the PSD slack that were clipped
    CovarianceKind kind = CovarianceKind::Classical;

    int components() const noexcept { return static_cast<int>(eigenvalues.size()); }
    Eigen::VectorXd phi(int j) const { return eigenfunctions.row(j).transpose(); }
};

/// Eigenvalues below -kPsdSlack * max(1, |lambda_max|) count as clip events.
inline constexpr double kPsdSlack = 1e-8;

/// Solves the W-symmetrized eigenproblem W^{1/2} C W^{1/2} u = lambda u and maps
/// back with phi = W^{-1/2} u. Signs are fixed so that sum_k w_k phi_j(t_k) >= 0
/// (first nonzero grid value positive when that integral is ~0). When `source`
/// is given its row mean becomes the mean function.
EigenSystem eigendecompose(const CovarianceSurface& surface, int components,
                           const DistanceTrajectories* source = nullptr);

/// Smallest number of leading components whose explained share reaches `threshold`.
int components_for_variance(const CovarianceSurface& surface, double threshold = 0.9);

/// scores(i, j) = sum_k w_k (V_i(t_k) - nu(t_k)) phi_j(t_k). Uses the row mean of
/// `d` when the system carries no mean function.
Eigen::MatrixXd fpc_scores(const DistanceTrajectories& d, const EigenSystem& es);

/// sum_{j<J} lambda_j phi_j(s) phi_j(t).
CovarianceSurface mercer_reconstruct(const EigenSystem& es, int components);

/// lambda_j / sum_l lambda_l over the full spectrum. Throws DegenerateSpectrum
/// when no eigenvalue is positive.
Eigen::VectorXd explained_variance(const EigenSystem& es);

/// Smallest eigenvalue of the quadrature-weighted operator (PSD diagnostic).
double min_operator_eigenvalue(const CovarianceSurface& surface);

/// Quadrature Gram matrix of the eigenfunctions (identity for a valid system).
Eigen::MatrixXd gram_matrix(const EigenSystem& es);

}  // namespace rfpca
