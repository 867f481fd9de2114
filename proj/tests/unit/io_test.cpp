#include "rfpca/errors.hpp"
#include "rfpca/io.hpp"
#include "rfpca/rng.hpp"
#include "rfpca/simgen.hpp"
#include "rfpca/spectra.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

using namespace rfpca;
namespace fs = std::filesystem;

namespace {

bool same_sample(const ObjectTrajectorySample& a, const ObjectTrajectorySample& b) {
    if (!(a.space() == b.space()) || !(a.grid() == b.grid()) || a.subjects() != b.subjects()) return false;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        if (!(a.data()[i].array() == b.data()[i].array()).all()) return false;
    return true;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rfpca_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const char* kLaplacianSidecar = R"({"format_version": 1, "kind": "sample", "space": "laplacian", "dim": 2,
  "coordinates": "upper-triangle", "subjects": 1, "grid": [0.0, 1.0]})";

}  // namespace

TEST(Reals, SeventeenDigitRoundTrip) {
    Rng rng(1, 1);
    for (int i = 0; i < 2000; ++i) {
        const double x = std::ldexp(rng.normal(), static_cast<int>(rng.below(200)) - 100);
        EXPECT_EQ(io::parse_real(io::format_real(x), "x"), x);
    }
    EXPECT_EQ(io::parse_real(io::format_real(0.1), "x"), 0.1);
    EXPECT_THROW(io::parse_real("nan", "x"), InvalidInput);
    EXPECT_THROW(io::parse_real("1.5abc", "x"), InvalidInput);
    EXPECT_THROW(io::parse_real("", "x"), InvalidInput);
}

TEST(Sha256, KnownDigests) {
    EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Files, AtomicWriteAndRead) {
    const fs::path dir = scratch_dir("files");
    io::write_file_atomic(dir / "a.txt", "hello\n");
    EXPECT_EQ(io::read_file(dir / "a.txt"), "hello\n");
    EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
    EXPECT_THROW(io::read_file(dir / "missing.txt"), IoError);
    EXPECT_THROW(io::write_file_atomic(dir / "no" / "such" / "dir.txt", "x"), IoError);
}

TEST(Trajectories, LaplacianRoundTripIsExact) {
    NetworkSimConfig cfg;
    cfg.nodes = 6;
    cfg.grid_points = 5;
    cfg.subjects_per_group = 3;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = gen_network_sample(cfg, seed).sample;
        const auto text = io::format_trajectories(s);
        const auto back = io::parse_trajectories(text.csv, text.sidecar, "mem");
        EXPECT_TRUE(same_sample(s, back.sample));
        ASSERT_EQ(back.labels.size(), 9u);
        EXPECT_EQ(back.labels[4], "4");
        EXPECT_EQ(io::format_trajectories(back.sample, back.labels).csv, text.csv);
    }
}

TEST(Trajectories, SphereAndEuclideanRoundTrip) {
    SphereSimConfig sc;
    sc.subjects = 5;
    sc.grid_points = 7;
    const auto sphere = gen_sphere_sample(sc, 3);
    const auto ts = io::format_trajectories(sphere, {"s1", "s2", "s3", "s4", "s5"});
    const auto bs = io::parse_trajectories(ts.csv, ts.sidecar, "mem");
    EXPECT_TRUE(same_sample(sphere, bs.sample));
    EXPECT_EQ(bs.labels[2], "s3");

    Rng rng(4, 4);
    std::vector<Point> pts;
    for (int i = 0; i < 12; ++i) pts.push_back(Eigen::Vector2d(rng.normal(), 1e-300 * rng.normal()));
    ObjectTrajectorySample euc(MetricSpace::euclidean(2), TimeGrid({0.0, 0.1, 0.35, 1.0}), pts);
    const auto te = io::format_trajectories(euc);
    EXPECT_TRUE(same_sample(euc, io::parse_trajectories(te.csv, te.sidecar, "mem").sample));
}

TEST(Trajectories, RowOrderDoesNotMatter) {
    const std::string csv = "subject,time,c1,c2,c3\nx,1,1,-1,1\nx,0,2,-2,2\n";
    const auto f = io::parse_trajectories(csv, kLaplacianSidecar, "mem");
    EXPECT_EQ(f.sample.at(0, 0)(0), 2.0);
    EXPECT_EQ(f.sample.at(0, 1)(0), 1.0);
}

TEST(Trajectories, ErrorsCarrySourceAndLine) {
    auto message = [](const std::string& csv) {
        try {
            io::parse_trajectories(csv, kLaplacianSidecar, "in.csv");
        } catch (const InvalidInput& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    // Positive off-diagonal weight on line 3.
    EXPECT_NE(message("subject,time,c1,c2,c3\nx,0,1,-1,1\nx,1,1,1,1\n").find("in.csv:3"), std::string::npos);
    EXPECT_NE(message("subject,time,c1,c2,c3\nx,0,1,-1,1\nx,0,1,-1,1\n").find("in.csv:3"), std::string::npos);
    EXPECT_NE(message("subject,time,c1,c2,c3\nx,0,1,-1,1\nx,0.5,1,-1,1\n").find("in.csv:3"), std::string::npos);
    EXPECT_NE(message("subject,time,c1,c2,c3\nx,0,1,-1,1\n"), "no error");                  // missing time point
    EXPECT_NE(message("subject,time,c1,c2\nx,0,1,-1\nx,1,1,-1\n"), "no error");              // wrong width
    EXPECT_NE(message("subject,time,c1,c2,c3\nx,0,1,-1,inf\nx,1,1,-1,1\n").find("in.csv:2"), std::string::npos);
    EXPECT_NE(message("subj,time,c1,c2,c3\nx,0,1,-1,1\nx,1,1,-1,1\n"), "no error");          // bad header
    EXPECT_NE(message("subject,time,c1,c2,c3\nx,0,1,-1,1\nx,1,1,-1,1\ny,0,1,-1,1\ny,1,1,-1,1\n"), "no error");
}

TEST(Trajectories, SidecarValidation) {
    const std::string csv = "subject,time,c1,c2,c3\nx,0,1,-1,1\nx,1,1,-1,1\n";
    EXPECT_THROW(io::parse_trajectories(csv, "{not json", "mem"), InvalidInput);
    EXPECT_THROW(io::parse_trajectories(csv, R"({"format_version": 2, "kind": "sample", "space": "laplacian",
        "dim": 2, "coordinates": "upper-triangle", "subjects": 1, "grid": [0.0, 1.0]})", "mem"), InvalidInput);
    EXPECT_THROW(io::parse_trajectories(csv, R"({"format_version": 1, "kind": "sample", "space": "torus",
        "dim": 2, "subjects": 1, "grid": [0.0, 1.0]})", "mem"), Error);
}

TEST(Trajectories, LabelsMustBePlain) {
    ObjectTrajectorySample s(MetricSpace::euclidean(1), TimeGrid::uniform(2), std::vector<Point>(2, Point::Zero(1)));
    EXPECT_THROW(io::format_trajectories(s, {"a,b"}), InvalidInput);
    EXPECT_THROW(io::format_trajectories(s, {"a", "b"}), InvalidInput);
}

TEST(Trajectories, FileRoundTripUsesSidecar) {
    const fs::path dir = scratch_dir("traj");
    NetworkSimConfig cfg;
    cfg.nodes = 5;
    cfg.grid_points = 4;
    cfg.subjects_per_group = 2;
    const auto s = gen_network_sample(cfg, 1).sample;
    io::write_trajectories(dir / "s.csv", s);
    EXPECT_TRUE(fs::exists(dir / "s.csv.json"));
    EXPECT_TRUE(same_sample(io::read_trajectories(dir / "s.csv").sample, s));
    fs::remove(dir / "s.csv.json");
    EXPECT_THROW(io::read_trajectories(dir / "s.csv"), IoError);
}

TEST(Center, RoundTripKeepsKind) {
    NetworkSimConfig cfg;
    cfg.nodes = 5;
    cfg.grid_points = 4;
    cfg.subjects_per_group = 3;
    const auto s = gen_network_sample(cfg, 2).sample;
    for (auto kind : {CenterKind::Median, CenterKind::Mean}) {
        const auto c = compute_center_trajectory(s, kind);
        const auto text = io::format_center(c);
        const auto back = io::parse_center(text.csv, text.sidecar, "mem");
        EXPECT_EQ(back.kind, kind);
        EXPECT_TRUE(back.grid == c.grid);
        for (int k = 0; k < 4; ++k) EXPECT_TRUE((back.centers[k].array() == c.centers[k].array()).all());
        EXPECT_THROW(io::parse_trajectories(text.csv, text.sidecar, "mem"), InvalidInput);
    }
}

TEST(Outputs, EigenSpectrumScoresRoundTrip) {
    const auto d = gen_score_trajectories(ScoreSimConfig{20, 30, {4.0, 2.0, 1.0}, 5.0}, 6);
    const auto es = eigendecompose(classical_covariance(d), 3, &d);
    const auto ef = io::parse_eigenfunctions(io::format_eigenfunctions(es), "mem");
    EXPECT_EQ(ef.grid, es.grid.points());
    EXPECT_TRUE((ef.values.array() == es.eigenfunctions.array()).all());
    const auto sp = io::parse_spectrum(io::format_spectrum(es), "mem");
    EXPECT_TRUE((sp.eigenvalues.array() == es.eigenvalues.array()).all());
    EXPECT_TRUE((sp.explained.array() == es.explained.array()).all());
    EXPECT_TRUE((sp.gaps.array() == es.gaps.array()).all());
    const Eigen::MatrixXd scores = fpc_scores(d, es);
    const auto sc = io::parse_scores(io::format_scores(scores), "mem");
    EXPECT_TRUE((sc.values.array() == scores.array()).all());
    EXPECT_EQ(sc.labels.front(), "0");
    EXPECT_EQ(io::format_eigenfunctions(es).substr(0, 24), "time,phi_1,phi_2,phi_3\n0");
    EXPECT_EQ(io::format_spectrum(es).substr(0, 23), "j,lambda,explained,gap\n");
}

TEST(Csv, TrimsBlankLinesAndChecksWidth) {
    const auto t = io::parse_csv(" a , b \n\n1, 2\n  \n3,4\n", "mem");
    EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0][1], "2");
    EXPECT_EQ(t.lines[1], 5);
    EXPECT_THROW(io::parse_csv("a,b\n1,2,3\n", "mem"), InvalidInput);
    EXPECT_THROW(io::parse_csv("", "mem"), InvalidInput);
}

TEST(FileCoordinates, UpperTriangleLayout) {
    Eigen::MatrixXd a(3, 3);
    a << 0, 1, 2, 1, 0, 3, 2, 3, 0;
    const Point l = laplacian_from_adjacency(a);
    const auto space = MetricSpace::laplacian(3);
    EXPECT_EQ(io::file_coordinate_count(space), 6);
    Eigen::VectorXd expect(6);
    expect << 3, -1, -2, 4, -3, 5;
    EXPECT_TRUE((io::file_coordinates(space, l).array() == expect.array()).all());
    EXPECT_TRUE((io::point_from_file_coordinates(space, expect).array() == l.array()).all());
}
