#include "rfpca/io.hpp"

#include "rfpca/errors.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace rfpca::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string at_line(std::string_view source, int line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

void check_label(const std::string& label) {
    if (label.empty() || label.find_first_of(",\n\r\"") != std::string::npos)
        throw InvalidInput("subject label '" + label + "' is empty or contains a comma, quote or newline");
}

std::vector<std::string> default_labels(int n) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
}

int parse_int(std::string_view text, std::string_view context) {
    int value = 0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw InvalidInput(std::string(context) + "expected an integer, got '" + std::string(t) + "'");
    return value;
}

void expect_header(const CsvTable& table, const std::vector<std::string>& expected, std::string_view source) {
    if (table.header != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + expected[i];
        throw InvalidInput(std::string(source) + ":1: expected header '" + want + "'");
    }
}

json sidecar_json(std::string_view kind, const MetricSpace& space, const TimeGrid& grid, int subjects) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = kind;
    j["space"] = to_string(space.kind);
    j["dim"] = space.dim;
    j["coordinates"] = space.kind == SpaceKind::Laplacian ? "upper-triangle" : "ambient";
    j["subjects"] = subjects;
    j["grid"] = grid.points();
    return j;
}

struct Sidecar {
    std::string kind;
    MetricSpace space;
    TimeGrid grid;
    int subjects = 0;
};

Sidecar parse_sidecar(std::string_view text, std::string_view source) {
    const std::string ctx = std::string(source) + ".json: ";
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidInput(ctx + "malformed JSON: " + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw InvalidInput(ctx + "unsupported format_version " + j.at("format_version").dump());
        Sidecar s;
        s.kind = j.at("kind").get<std::string>();
        const SpaceKind kind = space_kind_from_string(j.at("space").get<std::string>());
        const int dim = j.at("dim").get<int>();
        if (dim < 1) throw InvalidInput(ctx + "dim must be positive");
        if (kind == SpaceKind::Sphere && dim != 3) throw InvalidInput(ctx + "sphere points have dim 3");
        s.space = {kind, dim};
        s.grid = TimeGrid(j.at("grid").get<std::vector<double>>());
        s.subjects = j.at("subjects").get<int>();
        return s;
    } catch (const json::exception& e) {
        throw InvalidInput(ctx + "missing or mistyped field: " + e.what());
    } catch (const InvalidInput& e) {
        const std::string what = e.what();
        if (what.rfind(ctx, 0) == 0) throw;
        throw InvalidInput(ctx + what);
    } catch (const ConfigError& e) {
        throw InvalidInput(ctx + e.what());
    }
}

std::vector<std::string> trajectory_header(const MetricSpace& space) {
    std::vector<std::string> h{"subject", "time"};
    for (int c = 1; c <= file_coordinate_count(space); ++c) h.push_back("c" + std::to_string(c));
    return h;
}

std::string format_rows(const MetricSpace& space, const TimeGrid& grid, const std::vector<std::string>& labels,
                        const std::vector<Point>& points) {
    std::string out;
    const auto header = trajectory_header(space);
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    const auto t = static_cast<std::size_t>(grid.size());
    for (std::size_t idx = 0; idx < points.size(); ++idx) {
        const std::size_t i = idx / t;
        const int k = static_cast<int>(idx % t);
        out += labels[i];
        out += ',';
        out += format_real(grid[k]);
        const Eigen::VectorXd c = file_coordinates(space, points[idx]);
        for (Eigen::Index m = 0; m < c.size(); ++m) {
            out += ',';
            out += format_real(c(m));
        }
        out += '\n';
    }
    return out;
}

struct ParsedRows {
    std::vector<std::string> labels;
    std::vector<Point> points;  // subject-major
};

ParsedRows parse_rows(std::string_view csv, const Sidecar& meta, std::string_view source) {
    const CsvTable table = parse_csv(csv, source);
    expect_header(table, trajectory_header(meta.space), source);
    const int t = meta.grid.size();
    const auto& grid = meta.grid.points();

    std::map<std::string, int> index_of;
    ParsedRows out;
    std::vector<std::vector<std::optional<Point>>> slots;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string ctx = at_line(source, table.lines[r]);
        const std::string& label = row[0];
        if (label.empty()) throw InvalidInput(ctx + "empty subject label");
        auto [it, inserted] = index_of.try_emplace(label, static_cast<int>(out.labels.size()));
        if (inserted) {
            out.labels.push_back(label);
            slots.emplace_back(static_cast<std::size_t>(t));
        }
        const double time = parse_real(row[1], ctx);
        const auto pos = std::lower_bound(grid.begin(), grid.end(), time - 1e-12 * std::max(1.0, std::abs(time)));
        if (pos == grid.end() || std::abs(*pos - time) > 1e-12 * std::max(1.0, std::abs(time)))
            throw InvalidInput(ctx + "time " + std::string(row[1]) + " is not on the declared grid");
        const auto k = static_cast<std::size_t>(pos - grid.begin());
        Eigen::VectorXd c(static_cast<Eigen::Index>(row.size() - 2));
        for (std::size_t m = 2; m < row.size(); ++m) c(static_cast<Eigen::Index>(m - 2)) = parse_real(row[m], ctx);
        auto& slot = slots[static_cast<std::size_t>(it->second)][k];
        if (slot) throw InvalidInput(ctx + "duplicate row for subject '" + label + "'");
        Point p = point_from_file_coordinates(meta.space, c);
        const auto report = validate_point(meta.space, p);
        if (!report.ok()) throw InvalidInput(ctx + report.violations.front().message);
        slot = std::move(p);
    }
    if (static_cast<int>(out.labels.size()) != meta.subjects)
        throw InvalidInput(std::string(source) + ": sidecar declares " + std::to_string(meta.subjects) +
                           " subjects, file has " + std::to_string(out.labels.size()));
    out.points.reserve(out.labels.size() * static_cast<std::size_t>(t));
    for (std::size_t i = 0; i < slots.size(); ++i)
        for (int k = 0; k < t; ++k) {
            auto& slot = slots[i][static_cast<std::size_t>(k)];
            if (!slot)
                throw InvalidInput(std::string(source) + ": subject '" + out.labels[i] + "' has no row at time " +
                                   format_real(grid[static_cast<std::size_t>(k)]));
            out.points.push_back(std::move(*slot));
        }
    return out;
}

std::string center_kind_name(CenterKind kind) { return kind == CenterKind::Median ? "median-center" : "mean-center"; }

}  // namespace

std::string format_real(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    if (ec != std::errc()) throw InvalidInput("cannot format value");
    return {buf, ptr};
}

double parse_real(std::string_view text, std::string_view context) {
    const auto t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value))
        throw InvalidInput(std::string(context) + "expected a finite number, got '" + std::string(t) + "'");
    return value;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read from '" + path.string() + "' failed");
    return std::move(ss).str();
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xf];
    }
    return out;
}

int file_coordinate_count(const MetricSpace& space) {
    return space.kind == SpaceKind::Laplacian ? space.dim * (space.dim + 1) / 2 : space.dim;
}

Eigen::VectorXd file_coordinates(const MetricSpace& space, const Point& p) {
    if (space.kind != SpaceKind::Laplacian) return p;
    const Eigen::MatrixXd m = as_matrix(space, p);
    Eigen::VectorXd out(file_coordinate_count(space));
    Eigen::Index c = 0;
    for (int i = 0; i < space.dim; ++i)
        for (int j = i; j < space.dim; ++j) out(c++) = m(i, j);
    return out;
}

Point point_from_file_coordinates(const MetricSpace& space, const Eigen::VectorXd& c) {
    if (c.size() != file_coordinate_count(space)) throw InvalidInput("wrong coordinate count");
    if (space.kind != SpaceKind::Laplacian) return c;
    Eigen::MatrixXd m(space.dim, space.dim);
    Eigen::Index k = 0;
    for (int i = 0; i < space.dim; ++i)
        for (int j = i; j < space.dim; ++j) {
            m(i, j) = c(k);
            m(j, i) = c(k);
            ++k;
        }
    return from_matrix(m);
}

TextPair format_trajectories(const ObjectTrajectorySample& sample, const std::vector<std::string>& labels) {
    const auto names = labels.empty() ? default_labels(sample.subjects()) : labels;
    if (static_cast<int>(names.size()) != sample.subjects())
        throw InvalidInput("label count does not match the subject count");
    for (const auto& l : names) check_label(l);
    TextPair out;
    out.csv = format_rows(sample.space(), sample.grid(), names, sample.data());
    out.sidecar = sidecar_json("sample", sample.space(), sample.grid(), sample.subjects()).dump(2) + "\n";
    return out;
}

TrajectoryFile parse_trajectories(std::string_view csv, std::string_view sidecar, std::string_view source) {
    const Sidecar meta = parse_sidecar(sidecar, source);
    if (meta.kind != "sample")
        throw InvalidInput(std::string(source) + ".json: expected kind 'sample', found '" + meta.kind + "'");
    ParsedRows rows = parse_rows(csv, meta, source);
    return {ObjectTrajectorySample(meta.space, meta.grid, std::move(rows.points)), std::move(rows.labels)};
}

TextPair format_center(const CenterTrajectory& center) {
    TextPair out;
    out.csv = format_rows(center.space, center.grid, {"center"}, center.centers);
    out.sidecar = sidecar_json(center_kind_name(center.kind), center.space, center.grid, 1).dump(2) + "\n";
    return out;
}

CenterTrajectory parse_center(std::string_view csv, std::string_view sidecar, std::string_view source) {
    const Sidecar meta = parse_sidecar(sidecar, source);
    CenterTrajectory c;
    if (meta.kind == "median-center")
        c.kind = CenterKind::Median;
    else if (meta.kind == "mean-center")
        c.kind = CenterKind::Mean;
    else
        throw InvalidInput(std::string(source) + ".json: expected a center kind, found '" + meta.kind + "'");
    if (meta.subjects != 1) throw InvalidInput(std::string(source) + ".json: a center file holds one trajectory");
    ParsedRows rows = parse_rows(csv, meta, source);
    c.space = meta.space;
    c.grid = meta.grid;
    c.centers = std::move(rows.points);
    return c;
}

fs::path sidecar_path(const fs::path& csv) {
    fs::path p = csv;
    p += ".json";
    return p;
}

void write_trajectories(const fs::path& path, const ObjectTrajectorySample& sample,
                        const std::vector<std::string>& labels) {
    const TextPair text = format_trajectories(sample, labels);
    write_file_atomic(sidecar_path(path), text.sidecar);
    write_file_atomic(path, text.csv);
}

TrajectoryFile read_trajectories(const fs::path& path) {
    return parse_trajectories(read_file(path), read_file(sidecar_path(path)), path.string());
}

void write_center(const fs::path& path, const CenterTrajectory& center) {
    const TextPair text = format_center(center);
    write_file_atomic(sidecar_path(path), text.sidecar);
    write_file_atomic(path, text.csv);
}

CenterTrajectory read_center(const fs::path& path) {
    return parse_center(read_file(path), read_file(sidecar_path(path)), path.string());
}

std::string format_eigenfunctions(const EigenSystem& es) {
    std::string out = "time";
    for (int j = 1; j <= es.components(); ++j) out += ",phi_" + std::to_string(j);
    out += '\n';
    for (int k = 0; k < es.grid.size(); ++k) {
        out += format_real(es.grid[k]);
        for (int j = 0; j < es.components(); ++j) out += "," + format_real(es.eigenfunctions(j, k));
        out += '\n';
    }
    return out;
}

Eigenfunctions parse_eigenfunctions(std::string_view csv, std::string_view source) {
    const CsvTable table = parse_csv(csv, source);
    const auto cols = table.header.size();
    if (cols < 2 || table.header[0] != "time")
        throw InvalidInput(std::string(source) + ":1: expected header 'time,phi_1,...'");
    for (std::size_t j = 1; j < cols; ++j)
        if (table.header[j] != "phi_" + std::to_string(j))
            throw InvalidInput(std::string(source) + ":1: expected column 'phi_" + std::to_string(j) + "'");
    Eigenfunctions out;
    out.values.resize(static_cast<Eigen::Index>(cols - 1), static_cast<Eigen::Index>(table.rows.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string ctx = at_line(source, table.lines[r]);
        out.grid.push_back(parse_real(table.rows[r][0], ctx));
        for (std::size_t j = 1; j < cols; ++j)
            out.values(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(r)) =
                parse_real(table.rows[r][j], ctx);
    }
    return out;
}

std::string format_spectrum(const EigenSystem& es) {
    std::string out = "j,lambda,explained,gap\n";
    for (int j = 0; j < es.components(); ++j) {
        out += std::to_string(j + 1) + "," + format_real(es.eigenvalues(j)) + "," + format_real(es.explained(j)) +
               "," + format_real(es.gaps(j)) + "\n";
    }
    return out;
}

Spectrum parse_spectrum(std::string_view csv, std::string_view source) {
    const CsvTable table = parse_csv(csv, source);
    expect_header(table, {"j", "lambda", "explained", "gap"}, source);
    const auto n = static_cast<Eigen::Index>(table.rows.size());
    Spectrum out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = table.rows[static_cast<std::size_t>(r)];
        const std::string ctx = at_line(source, table.lines[static_cast<std::size_t>(r)]);
        if (parse_int(row[0], ctx) != r + 1) throw InvalidInput(ctx + "component indices must run 1..J");
        out.eigenvalues(r) = parse_real(row[1], ctx);
        out.explained(r) = parse_real(row[2], ctx);
        out.gaps(r) = parse_real(row[3], ctx);
    }
    return out;
}

std::string format_scores(const Eigen::MatrixXd& scores, const std::vector<std::string>& labels) {
    const auto names = labels.empty() ? default_labels(static_cast<int>(scores.rows())) : labels;
    if (static_cast<Eigen::Index>(names.size()) != scores.rows())
        throw InvalidInput("label count does not match the score rows");
    std::string out = "subject";
    for (Eigen::Index j = 1; j <= scores.cols(); ++j) out += ",score_" + std::to_string(j);
    out += '\n';
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        check_label(names[static_cast<std::size_t>(i)]);
        out += names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < scores.cols(); ++j) out += "," + format_real(scores(i, j));
        out += '\n';
    }
    return out;
}

Scores parse_scores(std::string_view csv, std::string_view source) {
    const CsvTable table = parse_csv(csv, source);
    const auto cols = table.header.size();
    if (cols < 2 || table.header[0] != "subject")
        throw InvalidInput(std::string(source) + ":1: expected header 'subject,score_1,...'");
    for (std::size_t j = 1; j < cols; ++j)
        if (table.header[j] != "score_" + std::to_string(j))
            throw InvalidInput(std::string(source) + ":1: expected column 'score_" + std::to_string(j) + "'");
    Scores out;
    out.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols - 1));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string ctx = at_line(source, table.lines[r]);
        out.labels.push_back(table.rows[r][0]);
        for (std::size_t j = 1; j < cols; ++j)
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j - 1)) =
                parse_real(table.rows[r][j], ctx);
    }
    return out;
}

CsvTable parse_csv(std::string_view text, std::string_view source) {
    CsvTable table;
    int line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(pos, end - pos));
        ++line_no;
        pos = end + 1;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
        } else {
            if (fields.size() != table.header.size())
                throw InvalidInput(at_line(source, line_no) + "expected " + std::to_string(table.header.size()) +
                                   " fields, found " + std::to_string(fields.size()));
            table.rows.push_back(std::move(fields));
            table.lines.push_back(line_no);
        }
        if (end == text.size()) break;
    }
    if (!have_header) throw InvalidInput(std::string(source) + ": empty file, header expected");
    return table;
}

}  // namespace rfpca::io
