#include "rfpca/pipeline.hpp"

#include <algorithm>

namespace rfpca {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::Wpu: return "wpu";
        case Method::Dm: return "dm";
        case Method::SpatialSign: return "spatial-sign";
        case Method::Classical: return "classical";
    }
    return "unknown";
}

Method method_from_string(std::string_view name) {
    if (name == "wpu") return Method::Wpu;
    if (name == "dm") return Method::Dm;
    if (name == "spatial-sign") return Method::SpatialSign;
    if (name == "classical") return Method::Classical;
    throw ConfigError("unknown method '" + std::string(name) + "'");
}

CenterKind center_kind_for(Method method) {
    return method == Method::Dm ? CenterKind::Mean : CenterKind::Median;
}

PipelineResult fpca_from_distances(const DistanceTrajectories& distances, Method method,
                                   const PipelineOptions& options) {
    if (distances.subjects() < 2) throw InsufficientSample("FPCA needs at least two subjects");
    PipelineResult out;
    out.method = method;
    out.distances = distances;
    switch (method) {
        case Method::Wpu: {
            const PairwiseDistanceSet pairs = pairwise_l2_distances(distances);
            out.cutoff = estimate_cutoff(pairs, options.psi);
            out.surface = wpu_covariance(distances, out.cutoff, &pairs);
            break;
        }
        case Method::SpatialSign:
            out.cutoff = CutoffSpec::spatial_sign();
            out.surface = wpu_covariance(distances, out.cutoff);
            break;
        case Method::Dm:
        case Method::Classical:
            out.cutoff = CutoffSpec::unbounded();
            out.surface = classical_covariance(distances);
            break;
    }
    const int t = distances.grid.size();
    const int j = options.components > 0 ? std::min(options.components, t)
                                         : components_for_variance(out.surface, 0.9);
    out.eigen = eigendecompose(out.surface, j, &out.distances);
    out.scores = fpc_scores(out.distances, out.eigen);
    return out;
}

PipelineResult run_fpca(const ObjectTrajectorySample& sample, Method method,
                        const PipelineOptions& options, const std::optional<CenterTrajectory>& center) {
    if (sample.subjects() < 2) throw InsufficientSample("FPCA needs at least two subjects");
    CenterTrajectory c;
    if (center) {
        if (center->kind != center_kind_for(method))
            throw InvalidInput("supplied center kind does not match the FPCA method");
        c = *center;
    } else {
        c = compute_center_trajectory(sample, center_kind_for(method), options.solver, options.center);
    }
    PipelineResult out = fpca_from_distances(distance_trajectories(sample, c), method, options);
    out.center = std::move(c);
    return out;
}

}  // namespace rfpca
