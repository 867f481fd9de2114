#pragma once

// On-disk formats.
//
// Trajectory / center CSV, long form:
//   subject,time,c1,...,cm
// Laplacian points are stored as their upper triangle (row-major, diagonal
// included, unscaled entries); sphere and Euclidean points as ambient
// coordinates. A sidecar `<file>.json` records format_version, kind, space,
// dim, subjects and the time grid.
//
// Eigenfunctions:  time,phi_1,...,phi_J
// Spectrum:        j,lambda,explained,gap
// Scores:          subject,score_1,...,score_J
//
// Reals are written with 17 significant digits so that parsing restores the
// exact double.

#include "rfpca/spectra.hpp"
#include "rfpca/trajectory.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rfpca::io {

inline constexpr int kFormatVersion = 1;

std::string format_real(double value);
double parse_real(std::string_view text, std::string_view context);

/// Writes to a temporary file next to `path`, then renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

struct TrajectoryFile {
    ObjectTrajectorySample sample;
    std::vector<std::string> labels;  ///< one per subject
};

/// Coordinates written to file for one point.
Eigen::VectorXd file_coordinates(const MetricSpace& space, const Point& p);
Point point_from_file_coordinates(const MetricSpace& space, const Eigen::VectorXd& c);
int file_coordinate_count(const MetricSpace& space);

struct TextPair {
    std::string csv;
    std::string sidecar;
};

/// Empty `labels` means 0..n-1.
TextPair format_trajectories(const ObjectTrajectorySample& sample, const std::vector<std::string>& labels = {});
TrajectoryFile parse_trajectories(std::string_view csv, std::string_view sidecar, std::string_view source);

TextPair format_center(const CenterTrajectory& center);
CenterTrajectory parse_center(std::string_view csv, std::string_view sidecar, std::string_view source);

std::filesystem::path sidecar_path(const std::filesystem::path& csv);
void write_trajectories(const std::filesystem::path& path, const ObjectTrajectorySample& sample,
                        const std::vector<std::string>& labels = {});
TrajectoryFile read_trajectories(const std::filesystem::path& path);
void write_center(const std::filesystem::path& path, const CenterTrajectory& center);
CenterTrajectory read_center(const std::filesystem::path& path);

struct Eigenfunctions {
    std::vector<double> grid;
    Eigen::MatrixXd values;  ///< J x T
};
std::string format_eigenfunctions(const EigenSystem& es);
Eigenfunctions parse_eigenfunctions(std::string_view csv, std::string_view source);

struct Spectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::VectorXd explained;
    Eigen::VectorXd gaps;
};
std::string format_spectrum(const EigenSystem& es);
Spectrum parse_spectrum(std::string_view csv, std::string_view source);

struct Scores {
    std::vector<std::string> labels;
    Eigen::MatrixXd values;  ///< n x J
};
std::string format_scores(const Eigen::MatrixXd& scores, const std::vector<std::string>& labels = {});
Scores parse_scores(std::string_view csv, std::string_view source);

/// Minimal CSV reader for the formats above: comma separated, no quoting,
/// blank lines ignored. Fields are trimmed.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> lines;  ///< 1-based source line of each row
};
CsvTable parse_csv(std::string_view text, std::string_view source);

}  // namespace rfpca::io
