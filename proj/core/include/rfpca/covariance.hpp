#pragma once

#include "rfpca/trajectory.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace rfpca {

/// L2 distances between every pair of distance trajectories, stored for i < j
/// in row-major order: (0,1), (0,2), ..., (0,n-1), (1,2), ...
struct PairwiseDistanceSet {
    int n = 0;
    std::vector<double> dist;

    std::size_t size() const noexcept { return dist.size(); }
    std::size_t index(int i, int j) const;
    double at(int i, int j) const { return dist[index(i, j)]; }
};

/// Winsorization cutoff. q_hat = 0 selects the pairwise spatial-sign variant, where
/// each pair is weighted by 1 / r^2 (the Q -> 0 limit of xi^2 / Q^2);
/// q_hat = +inf disables Winsorization (xi == 1).
struct CutoffSpec {
    double psi = 0.84;
    double q_hat = 0.0;
    std::size_t rank = 0;  ///< 1-based order statistic q_hat was taken from (0 if supplied)

    static CutoffSpec spatial_sign() { return {0.0, 0.0, 0}; }
    static CutoffSpec unbounded();
};

inline constexpr double kDefaultPsi = 0.84;

enum class CovarianceKind { Classical, Wpu, OracleWpu, SpatialSign, Dm };
std::string_view to_string(CovarianceKind kind);

struct CovarianceSurface {
    TimeGrid grid;
    Eigen::MatrixXd values;  ///< T x T, symmetric
    CovarianceKind kind = CovarianceKind::Classical;
    /// Pairs whose distance is at rounding level relative to the largest pair
    /// distance. Only reported when q_hat = 0, where such pairs blow up xi.
    std::size_t degenerate_pairs = 0;
    /// Pairs with distance exactly 0 that were skipped (q_hat = 0 only).
    std::size_t skipped_pairs = 0;
    /// Every pair was degenerate (all rows identical); values are zero.
    bool degenerate_sample = false;
};

/// Relative threshold below which a pair distance counts as degenerate.
inline constexpr double kDegeneratePairRelTol = 1e-8;

PairwiseDistanceSet pairwise_l2_distances(const DistanceTrajectories& d);

/// q_hat = m-th smallest pair distance, m = ceil(psi * N) clamped to [1, N].
CutoffSpec estimate_cutoff(const PairwiseDistanceSet& pd, double psi = kDefaultPsi);

/// xi(r) = 1 for r <= q, q / r otherwise. Returns nullopt for the undefined
/// 0/0 case (q = 0 and r = 0); callers skip such pairs.
std::optional<double> winsor_radius(double r, double q);

/// Winsorized pairwise U-statistic covariance
///   (2 / (n(n-1))) sum_{j<k} xi^2(d_jk) (V_j(s) - V_k(s)) (V_j(t) - V_k(t)).
/// Pair distances are recomputed from `d` unless supplied.
CovarianceSurface wpu_covariance(const DistanceTrajectories& d, const CutoffSpec& cutoff,
                                 const PairwiseDistanceSet* pairs = nullptr);

/// Same estimator applied to distances from a known (population) center.
CovarianceSurface oracle_wpu_covariance(const DistanceTrajectories& v, const CutoffSpec& cutoff,
                                        const PairwiseDistanceSet* pairs = nullptr);

/// (1/n) sum_i V_i(s) V_i(t) - Vbar(s) Vbar(t). Tagged dm for squared-distance input.
CovarianceSurface classical_covariance(const DistanceTrajectories& d);

}  // namespace rfpca
