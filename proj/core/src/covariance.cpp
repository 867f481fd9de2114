#include "rfpca/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rfpca {

std::size_t PairwiseDistanceSet::index(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i == j || i < 0 || j >= n) throw InvalidInput("pair index out of range");
    // pairs before row i: sum_{r<i} (n - 1 - r)
    const auto ii = static_cast<std::size_t>(i);
    const auto nn = static_cast<std::size_t>(n);
    return ii * (2 * nn - ii - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

CutoffSpec CutoffSpec::unbounded() {
    return {1.0, std::numeric_limits<double>::infinity(), 0};
}

std::string_view to_string(CovarianceKind kind) {
    switch (kind) {
        case CovarianceKind::Classical: return "classical";
        case CovarianceKind::Wpu: return "wpu";
        case CovarianceKind::OracleWpu: return "oracle-wpu";
        case CovarianceKind::SpatialSign: return "spatial-sign";
        case CovarianceKind::Dm: return "dm";
    }
    return "unknown";
}

PairwiseDistanceSet pairwise_l2_distances(const DistanceTrajectories& d) {
    const int n = d.subjects();
    if (n < 2) throw InsufficientSample("pairwise distances need at least two subjects");
    if (d.values.cols() != d.grid.size()) throw InvalidInput("distance trajectories do not match their grid");
    // Rows scaled by sqrt(w) turn the quadrature norm into a Euclidean one.
    const Eigen::MatrixXd y = d.values * d.grid.weights().cwiseSqrt().asDiagonal();
    PairwiseDistanceSet out;
    out.n = n;
    out.dist.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.dist.push_back((y.row(i) - y.row(j)).norm());
    return out;
}

CutoffSpec estimate_cutoff(const PairwiseDistanceSet& pd, double psi) {
    if (pd.dist.empty()) throw InsufficientSample("cutoff estimation needs at least one pair");
    if (!(psi > 0.0 && psi <= 1.0)) throw InvalidInput("psi must lie in (0, 1]");
    const auto n_pairs = static_cast<double>(pd.dist.size());
    // The 1e-9 guard keeps psi * N that is integral in exact arithmetic from rounding up.
    auto m = static_cast<std::size_t>(std::ceil(psi * n_pairs - 1e-9));
    m = std::clamp<std::size_t>(m, 1, pd.dist.size());
    std::vector<double> sorted = pd.dist;
    const auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(m - 1);
    std::nth_element(sorted.begin(), nth, sorted.end());
    return {psi, *nth, m};
}

std::optional<double> winsor_radius(double r, double q) {
    if (r < 0.0 || q < 0.0 || std::isnan(r) || std::isnan(q))
        throw InvalidInput("winsor_radius arguments must be non-negative");
    if (r <= q) {
        if (q == 0.0) return std::nullopt;  // 0/0
        return 1.0;
    }
    return q / r;
}

namespace {

CovarianceSurface pairwise_u_statistic(const DistanceTrajectories& d, const CutoffSpec& cutoff,
                                       const PairwiseDistanceSet* pairs, CovarianceKind kind) {
    const int n = d.subjects();
    if (n < 2) throw InsufficientSample("WPU covariance needs at least two subjects");
    if (!(cutoff.q_hat >= 0.0)) throw InvalidInput("cutoff must be non-negative");
    PairwiseDistanceSet local;
    if (pairs == nullptr) {
        local = pairwise_l2_distances(d);
        pairs = &local;
    } else if (pairs->n != n) {
        throw InvalidInput("pair distance set does not match the trajectories");
    }

    const int t = d.grid.size();
    CovarianceSurface out;
    out.grid = d.grid;
    const bool sign_variant = cutoff.q_hat == 0.0;
    out.kind = sign_variant ? CovarianceKind::SpatialSign : kind;
    out.values = Eigen::MatrixXd::Zero(t, t);

    const double max_d = *std::max_element(pairs->dist.begin(), pairs->dist.end());
    if (max_d == 0.0) {
        out.degenerate_sample = true;
        out.skipped_pairs = sign_variant ? pairs->size() : 0;
        out.degenerate_pairs = sign_variant ? pairs->size() : 0;
        return out;
    }

    // sum_{j<k} w_jk (v_j - v_k)(v_j - v_k)^T = V^T (diag(W 1) - W) V, so the
    // pair sum reduces to a weighted graph Laplacian sandwiched by the data.
    // Pairs are visited in PairwiseDistanceSet order in a single chunk.
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    std::size_t p = 0;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k, ++p) {
            const double r = pairs->dist[p];
            if (sign_variant && r <= kDegeneratePairRelTol * max_d) ++out.degenerate_pairs;
            double w = 0.0;
            if (sign_variant) {
                // Q -> 0 limit of xi^2 / Q^2: each pair enters as a unit direction.
                if (r == 0.0) {
                    ++out.skipped_pairs;
                    continue;
                }
                w = 1.0 / (r * r);
            } else {
                const double xi = *winsor_radius(r, cutoff.q_hat);
                w = xi * xi;
            }
            lap(j, k) -= w;
            lap(k, j) -= w;
            lap(j, j) += w;
            lap(k, k) += w;
        }

    // Column centering is exact in theory (lap has zero row sums) and limits cancellation.
    const Eigen::MatrixXd centered = d.values.rowwise() - d.values.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * (lap * centered);
    const double scale = 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
    out.values = 0.5 * scale * (cov + cov.transpose());
    return out;
}

}  // namespace

CovarianceSurface wpu_covariance(const DistanceTrajectories& d, const CutoffSpec& cutoff,
                                 const PairwiseDistanceSet* pairs) {
    return pairwise_u_statistic(d, cutoff, pairs, CovarianceKind::Wpu);
}

CovarianceSurface oracle_wpu_covariance(const DistanceTrajectories& v, const CutoffSpec& cutoff,
                                        const PairwiseDistanceSet* pairs) {
    return pairwise_u_statistic(v, cutoff, pairs, CovarianceKind::OracleWpu);
}

CovarianceSurface classical_covariance(const DistanceTrajectories& d) {
    const int n = d.subjects();
    if (n < 2) throw InsufficientSample("classical covariance needs at least two subjects");
    if (d.values.cols() != d.grid.size()) throw InvalidInput("distance trajectories do not match their grid");
    if (!d.values.allFinite()) throw InvalidInput("distance trajectories contain non-finite values");
    CovarianceSurface out;
    out.grid = d.grid;
    out.kind = d.kind == DistanceKind::DmSquared ? CovarianceKind::Dm : CovarianceKind::Classical;
    const Eigen::MatrixXd centered = d.values.rowwise() - d.values.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
    out.values = 0.5 * (cov + cov.transpose());
    out.degenerate_sample = centered.cwiseAbs().maxCoeff() == 0.0;
    return out;
}

}  // namespace rfpca
