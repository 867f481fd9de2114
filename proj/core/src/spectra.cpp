#include "rfpca/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rfpca {

namespace {

void require_symmetric(const CovarianceSurface& s) {
    const auto t = s.grid.size();
    if (s.values.rows() != t || s.values.cols() != t)
        throw InvalidInput("covariance surface does not match its grid");
    if (!s.values.allFinite()) throw InvalidInput("covariance surface has non-finite entries");
    const double scale = std::max(1.0, s.values.cwiseAbs().maxCoeff());
    const double asym = (s.values - s.values.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) throw InvalidInput("covariance surface is not symmetric");
}

struct WeightedSpectrum {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // columns, W-orthonormal functions on the grid
};

WeightedSpectrum weighted_spectrum(const CovarianceSurface& s) {
    require_symmetric(s);
    const Eigen::VectorXd sw = s.grid.weights().cwiseSqrt();
    const Eigen::MatrixXd a = sw.asDiagonal() * s.values * sw.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (a + a.transpose()));
    if (solver.info() != Eigen::Success) throw InvalidInput("eigen-decomposition failed");
    // Eigen returns ascending order.
    WeightedSpectrum out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = sw.cwiseInverse().asDiagonal() * solver.eigenvectors().rowwise().reverse();
    return out;
}

}  // namespace

EigenSystem eigendecompose(const CovarianceSurface& surface, int components,
                           const DistanceTrajectories* source) {
    const int t = surface.grid.size();
    if (components < 1 || components > t) throw InvalidInput("component count must lie in [1, T]");
    const WeightedSpectrum ws = weighted_spectrum(surface);

    EigenSystem es;
    es.grid = surface.grid;
    es.kind = surface.kind;
    Eigen::VectorXd all = ws.values;
    const double slack = kPsdSlack * std::max(1.0, std::abs(all(0)));
    for (Eigen::Index i = 0; i < all.size(); ++i) {
        if (all(i) < -slack) ++es.clip_count;
        if (all(i) < 0.0) all(i) = 0.0;
    }
    es.total_variance = all.sum();

    es.eigenvalues = all.head(components);
    es.eigenfunctions = ws.vectors.leftCols(components).transpose();
    const Eigen::VectorXd& w = surface.grid.weights();
    for (int j = 0; j < components; ++j) {
        auto row = es.eigenfunctions.row(j);
        const double integral = row.dot(w.transpose());
        bool flip = integral < 0.0;
        if (std::abs(integral) <= 1e-10) {
            for (int k = 0; k < t; ++k)
                if (std::abs(row(k)) > 1e-12) {
                    flip = row(k) < 0.0;
                    break;
                }
        }
        if (flip) row *= -1.0;
    }

    es.gaps.resize(components);
    double running = std::numeric_limits<double>::infinity();
    for (int j = 0; j < components; ++j) {
        const double next = j + 1 < t ? all(j + 1) : 0.0;
        running = std::min(running, all(j) - next);
        es.gaps(j) = running;
    }
    es.explained = es.total_variance > 0.0 ? Eigen::VectorXd(es.eigenvalues / es.total_variance)
                                           : Eigen::VectorXd::Zero(components);
    if (source != nullptr) {
        if (!(source->grid == surface.grid)) throw InvalidInput("source trajectories use a different grid");
        es.mean_function = source->values.colwise().mean().transpose();
    }
    return es;
}

int components_for_variance(const CovarianceSurface& surface, double threshold) {
    const WeightedSpectrum ws = weighted_spectrum(surface);
    const Eigen::VectorXd clipped = ws.values.cwiseMax(0.0);
    const double total = clipped.sum();
    if (total <= 0.0) return 1;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < clipped.size(); ++j) {
        acc += clipped(j);
        if (acc >= threshold * total) return static_cast<int>(j + 1);
    }
    return static_cast<int>(clipped.size());
}

Eigen::MatrixXd fpc_scores(const DistanceTrajectories& d, const EigenSystem& es) {
    if (!(d.grid == es.grid)) throw InvalidInput("fpc_scores: trajectories and eigenfunctions use different grids");
    const Eigen::VectorXd nu =
        es.mean_function.size() == d.grid.size() ? es.mean_function
                                                 : Eigen::VectorXd(d.values.colwise().mean().transpose());
    const Eigen::MatrixXd centered = d.values.rowwise() - nu.transpose();
    return centered * es.grid.weights().asDiagonal() * es.eigenfunctions.transpose();
}

CovarianceSurface mercer_reconstruct(const EigenSystem& es, int components) {
    if (components < 0 || components > es.components())
        throw InvalidInput("mercer_reconstruct: more components requested than available");
    CovarianceSurface out;
    out.grid = es.grid;
    out.kind = es.kind;
    const auto phi = es.eigenfunctions.topRows(components);
    out.values = phi.transpose() * es.eigenvalues.head(components).asDiagonal() * phi;
    return out;
}

Eigen::VectorXd explained_variance(const EigenSystem& es) {
    if (!(es.total_variance > 0.0) || !(es.eigenvalues.maxCoeff() > 0.0))
        throw DegenerateSpectrum("spectrum has no positive eigenvalue");
    return es.eigenvalues / es.total_variance;
}

double min_operator_eigenvalue(const CovarianceSurface& surface) {
    return weighted_spectrum(surface).values.minCoeff();
}

Eigen::MatrixXd gram_matrix(const EigenSystem& es) {
    return es.eigenfunctions * es.grid.weights().asDiagonal() * es.eigenfunctions.transpose();
}

}  // namespace rfpca
