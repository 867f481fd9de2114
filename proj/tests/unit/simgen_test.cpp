#include "rfpca/errors.hpp"
#include "rfpca/metric_core.hpp"
#include "rfpca/simgen.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace rfpca;

namespace {

bool identical(const ObjectTrajectorySample& a, const ObjectTrajectorySample& b) {
    if (a.data().size() != b.data().size()) return false;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        if (!(a.data()[i].array() == b.data()[i].array()).all()) return false;
    return true;
}

void expect_all_valid(const ObjectTrajectorySample& s) {
    for (const auto& p : s.data()) ASSERT_TRUE(validate_point(s.space(), p).ok());
}

double frobenius_trajectory_norm(const ObjectTrajectorySample& s, int i) {
    double acc = 0.0;
    for (int k = 0; k < s.times(); ++k) acc += s.grid().weights()(k) * s.at(i, k).squaredNorm();
    return std::sqrt(acc);
}

}  // namespace

TEST(CommunityOf, ContiguousBlocks) {
    EXPECT_EQ(community_of(0, 20, 2), 0);
    EXPECT_EQ(community_of(9, 20, 2), 0);
    EXPECT_EQ(community_of(10, 20, 2), 1);
    EXPECT_EQ(community_of(19, 20, 5), 4);
}

TEST(NetworkSim, NoiselessSubjectFollowsWeightCurves) {
    NetworkSimConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.subjects_per_group = 1;
    cfg.groups = {{0.4, 1.5, 2}};
    cfg.nodes = 6;
    cfg.grid_points = 7;
    const auto draw = gen_network_sample(cfg, 5);
    const auto space = draw.sample.space();
    for (int k = 0; k < 7; ++k) {
        const double t = draw.sample.grid()[k];
        const Eigen::MatrixXd a = adjacency_from_laplacian(space, draw.sample.at(0, k));
        const double within = cfg.base_weight + 1.5 * std::exp(-(t - 0.4) * (t - 0.4) / (2 * cfg.bump_variance));
        EXPECT_NEAR(within_weight(cfg, 0, t), within, 1e-14);
        for (int u = 0; u < 6; ++u)
            for (int v = u + 1; v < 6; ++v) {
                const bool same = community_of(u, 6, 2) == community_of(v, 6, 2);
                EXPECT_NEAR(a(u, v), same ? within : cfg.base_weight / 4, 1e-12);
            }
    }
}

TEST(NetworkSim, DefaultDesignShape) {
    const NetworkSimConfig cfg;
    const auto draw = gen_network_sample(cfg, 1);
    EXPECT_EQ(draw.sample.subjects(), 300);
    EXPECT_EQ(draw.sample.space(), MetricSpace::laplacian(20));
    EXPECT_EQ(draw.groups.size(), 300u);
    EXPECT_EQ(draw.groups.front(), 0);
    EXPECT_EQ(draw.groups.back(), 2);
    expect_all_valid(draw.sample);
}

TEST(NetworkSim, DeterministicPerSeed) {
    NetworkSimConfig cfg;
    cfg.subjects_per_group = 5;
    EXPECT_TRUE(identical(gen_network_sample(cfg, 3).sample, gen_network_sample(cfg, 3).sample));
    EXPECT_FALSE(identical(gen_network_sample(cfg, 3).sample, gen_network_sample(cfg, 4).sample));
}

TEST(NetworkSim, InvalidConfigRejected) {
    NetworkSimConfig cfg;
    cfg.nodes = 1;
    EXPECT_THROW(gen_network_sample(cfg, 1), ConfigError);
    cfg = {};
    cfg.groups[0].peak_time = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.noise_sd = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Contaminate, ZeroFractionIsIdentity) {
    NetworkSimConfig cfg;
    cfg.subjects_per_group = 5;
    const auto draw = gen_network_sample(cfg, 1);
    const auto c = contaminate(draw, ContaminationSpec{}, 2);
    EXPECT_TRUE(c.outliers.empty());
    EXPECT_TRUE(identical(c.sample, draw.sample));
}

TEST(Contaminate, ReplacesRoundedFraction) {
    const auto draw = gen_network_sample(NetworkSimConfig{}, 1);
    ContaminationSpec spec;
    spec.fraction = 0.1;
    const auto c = contaminate(draw, spec, 2);
    ASSERT_EQ(c.outliers.size(), 30u);
    EXPECT_TRUE(std::is_sorted(c.outliers.begin(), c.outliers.end()));
    EXPECT_EQ(std::set<int>(c.outliers.begin(), c.outliers.end()).size(), 30u);
    expect_all_valid(c.sample);
    const std::set<int> out(c.outliers.begin(), c.outliers.end());
    for (int i = 0; i < 300; ++i) {
        if (out.count(i)) continue;
        for (int k = 0; k < draw.sample.times(); ++k) ASSERT_TRUE((c.sample.at(i, k).array() == draw.sample.at(i, k).array()).all());
    }
}

TEST(Contaminate, ShiftScaleAppliesShiftThenScale) {
    NetworkSimConfig cfg;
    cfg.subjects_per_group = 4;
    const auto draw = gen_network_sample(cfg, 1);
    ContaminationSpec spec;
    spec.fraction = 0.5;
    const auto c = contaminate(draw.sample, spec, 3);
    const auto space = draw.sample.space();
    const int i = c.outliers.front();
    const Eigen::MatrixXd before = adjacency_from_laplacian(space, draw.sample.at(i, 2));
    const Eigen::MatrixXd after = adjacency_from_laplacian(space, c.sample.at(i, 2));
    for (int u = 0; u < space.dim; ++u)
        for (int v = u + 1; v < space.dim; ++v) EXPECT_NEAR(after(u, v), 5.0 * (before(u, v) + 0.5), 1e-9);
}

TEST(Contaminate, OutliersAreFarFromCleanSubjects) {
    NetworkSimConfig cfg;
    cfg.subjects_per_group = 20;
    const auto draw = gen_network_sample(cfg, 8);
    ContaminationSpec spec;
    spec.fraction = 0.1;
    const auto c = contaminate(draw, spec, 9);
    const std::set<int> out(c.outliers.begin(), c.outliers.end());
    const auto& s = c.sample;
    auto traj_dist = [&](int a, int b) {
        double acc = 0.0;
        for (int k = 0; k < s.times(); ++k)
            acc += s.grid().weights()(k) * std::pow(distance(s.space(), s.at(a, k), s.at(b, k)), 2);
        return std::sqrt(acc);
    };
    std::vector<double> clean_pairs;
    double out_sum = 0.0;
    int out_count = 0;
    for (int a = 0; a < s.subjects(); ++a)
        for (int b = a + 1; b < s.subjects(); ++b) {
            const bool oa = out.count(a), ob = out.count(b);
            if (!oa && !ob) clean_pairs.push_back(traj_dist(a, b));
            if (oa != ob) {
                out_sum += traj_dist(a, b);
                ++out_count;
            }
        }
    std::nth_element(clean_pairs.begin(), clean_pairs.begin() + clean_pairs.size() / 2, clean_pairs.end());
    EXPECT_GT(out_sum / out_count, clean_pairs[clean_pairs.size() / 2]);
}

TEST(Contaminate, ShiftScaleOutliersHaveLargerNorms) {
    NetworkSimConfig cfg;
    cfg.subjects_per_group = 10;
    cfg.grid_points = 10;
    int separated = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto draw = gen_network_sample(cfg, seed);
        ContaminationSpec spec;
        spec.fraction = 0.2;
        const auto c = contaminate(draw, spec, seed + 1000);
        const std::set<int> out(c.outliers.begin(), c.outliers.end());
        double max_clean = 0.0, min_out = 1e300;
        for (int i = 0; i < c.sample.subjects(); ++i) {
            const double n = frobenius_trajectory_norm(c.sample, i);
            if (out.count(i))
                min_out = std::min(min_out, n);
            else
                max_clean = std::max(max_clean, n);
        }
        if (min_out > max_clean) ++separated;
    }
    EXPECT_GE(separated, 99);
}

TEST(Contaminate, OtherSchemesNeedGeneratorContext) {
    NetworkSimConfig cfg;
    cfg.subjects_per_group = 4;
    const auto draw = gen_network_sample(cfg, 1);
    ContaminationSpec spec;
    spec.fraction = 0.25;
    spec.scheme = ContaminationScheme::Bimodal;
    EXPECT_THROW(contaminate(draw.sample, spec, 1), ConfigError);
    const auto bimodal = contaminate(draw, spec, 1);
    expect_all_valid(bimodal.sample);
    spec.scheme = ContaminationScheme::ZeroWeight;
    const auto zero = contaminate(draw, spec, 1);
    expect_all_valid(zero.sample);
    const auto space = draw.sample.space();
    const Eigen::MatrixXd a = adjacency_from_laplacian(space, zero.sample.at(zero.outliers[0], 0));
    const int g = draw.groups[static_cast<std::size_t>(zero.outliers[0])];
    const int comms = cfg.groups[static_cast<std::size_t>(g)].communities;
    for (int u = 0; u < space.dim; ++u)
        for (int v = u + 1; v < space.dim; ++v)
            if (community_of(u, space.dim, comms) != community_of(v, space.dim, comms)) EXPECT_EQ(a(u, v), 0.0);
}

TEST(Contaminate, SchemeNamesRoundTrip) {
    for (auto s : {ContaminationScheme::ShiftScale, ContaminationScheme::Bimodal, ContaminationScheme::ZeroWeight})
        EXPECT_EQ(contamination_scheme_from_string(to_string(s)), s);
    EXPECT_THROW(ContaminationSpec({1.0}).validate(), ConfigError);
}

TEST(SphereSim, ZeroNoiseFollowsBaseCurve) {
    SphereSimConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.subjects = 4;
    const auto s = gen_sphere_sample(cfg, 1);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < s.times(); ++k)
            EXPECT_LT((s.at(i, k) - Point(sphere_base_point(cfg, s.grid()[k]))).norm(), 1e-14);
    EXPECT_LT((sphere_base_point(cfg, 0.0) - cfg.start).norm(), 1e-15);
    EXPECT_NEAR(distance(MetricSpace::sphere(), sphere_base_point(cfg, 0.0), sphere_base_point(cfg, 1.0)),
                cfg.arc_length, 1e-12);
}

TEST(SphereSim, PointsAreValidConcentratedAndDeterministic) {
    SphereSimConfig cfg;
    cfg.noise_sd = 0.2;
    const auto s = gen_sphere_sample(cfg, 2);
    expect_all_valid(s);
    for (int k = 0; k < s.times(); ++k) {
        const auto xs = s.cross_section(k);
        for (std::size_t a = 0; a < xs.size(); ++a)
            for (std::size_t b = a + 1; b < xs.size(); ++b)
                ASSERT_LT(distance(s.space(), xs[a], xs[b]), kSphereConcentrationMargin);
    }
    EXPECT_TRUE(identical(s, gen_sphere_sample(cfg, 2)));
}

TEST(SphereSim, AntitheticPairMedianIsBaseCurve) {
    SphereSimConfig cfg;
    cfg.subjects = 2;
    cfg.antithetic = true;
    cfg.noise_sd = 0.15;
    const auto s = gen_sphere_sample(cfg, 3);
    MedianSolverConfig solver;
    solver.tol = 1e-12;
    solver.max_iter = 2000;
    const auto c = compute_center_trajectory(s, CenterKind::Median, solver);
    for (int k = 0; k < s.times(); ++k) {
        // Any point on the geodesic between the pair minimizes; the base point is its midpoint.
        const auto& a = s.at(0, k);
        const auto& b = s.at(1, k);
        const Point base = sphere_base_point(cfg, s.grid()[k]);
        EXPECT_NEAR(distance(s.space(), a, base), distance(s.space(), b, base), 1e-12);
        EXPECT_NEAR(distance(s.space(), a, c.centers[k]) + distance(s.space(), c.centers[k], b),
                    distance(s.space(), a, b), 1e-9);
    }
}

TEST(SphereSim, InvalidConfigRejected) {
    SphereSimConfig cfg;
    cfg.noise_sd = 0.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.direction = cfg.start;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ScoreSim, FourierBasisIsOrthonormal) {
    const TimeGrid g = TimeGrid::uniform(37);
    const Eigen::MatrixXd b = fourier_basis(g, 5);
    const Eigen::MatrixXd gram = b * g.weights().asDiagonal() * b.transpose();
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ScoreSim, SampleCovarianceApproachesModel) {
    const ScoreSimConfig cfg{40, 4000, {4.0, 2.0, 1.0}, 20.0};
    const auto d = gen_score_trajectories(cfg, 1);
    const Eigen::MatrixXd b = fourier_basis(d.grid, 3);
    const Eigen::MatrixXd centered = d.values.rowwise() - score_mean_function(cfg, d.grid).transpose();
    const Eigen::MatrixXd scores = centered * d.grid.weights().asDiagonal() * b.transpose();
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(scores.col(j).squaredNorm() / 4000, cfg.eigenvalues[j], 0.1 * cfg.eigenvalues[j]);
}
