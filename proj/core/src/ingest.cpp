#include "rfpca/ingest.hpp"

#include "rfpca/errors.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace rfpca {

namespace {

constexpr std::int64_t kDay = 86400;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    const std::int64_t q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::int64_t parse_iso(std::string_view s) {
    // YYYY-MM-DD[T ]HH:MM:SS[.fff][Z]
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
        s[16] != ':')
        throw InvalidInput("unrecognized timestamp '" + std::string(s) + "'");
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, se = 0;
    if (!parse_number(s.substr(0, 4), y) || !parse_number(s.substr(5, 2), mo) || !parse_number(s.substr(8, 2), d) ||
        !parse_number(s.substr(11, 2), h) || !parse_number(s.substr(14, 2), mi) || !parse_number(s.substr(17, 2), se))
        throw InvalidInput("unrecognized timestamp '" + std::string(s) + "'");
    std::string_view rest = s.substr(19);
    if (!rest.empty() && rest.front() == '.') {
        std::size_t k = 1;
        while (k < rest.size() && rest[k] >= '0' && rest[k] <= '9') ++k;
        if (k == 1) throw InvalidInput("unrecognized timestamp '" + std::string(s) + "'");
        rest = rest.substr(k);
    }
    if (rest == "Z") rest = {};
    if (!rest.empty()) throw InvalidInput("unsupported timestamp suffix in '" + std::string(s) + "'");
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 59) throw InvalidInput("invalid date or time in '" + std::string(s) + "'");
    const std::int64_t days_since = sys_days{ymd}.time_since_epoch().count();
    return days_since * kDay + static_cast<std::int64_t>(h) * 3600 + static_cast<std::int64_t>(mi) * 60 + se;
}

}  // namespace

void IngestConfig::validate() const {
    if (nodes.size() < 2) throw ConfigError("ingest needs at least two nodes");
    std::unordered_map<std::string, int> seen;
    for (const auto& n : nodes)
        if (n.empty() || !seen.emplace(n, 0).second) throw ConfigError("node ids must be non-empty and distinct");
    if (bin_seconds < 1 || kDay % bin_seconds != 0 || kDay / bin_seconds < 2)
        throw ConfigError("bin_seconds must divide a day into at least two bins");
}

std::int64_t parse_timestamp(std::string_view text) {
    const auto s = trim(text);
    if (s.empty()) throw InvalidInput("empty timestamp");
    if (s.size() >= 10 && s[4] == '-') return parse_iso(s);
    std::int64_t whole = 0;
    if (parse_number(s, whole)) return whole;
    double value = 0.0;
    if (parse_number(s, value) && std::isfinite(value) && std::abs(value) < 9e15)
        return static_cast<std::int64_t>(std::floor(value));
    throw InvalidInput("unrecognized timestamp '" + std::string(s) + "'");
}

std::string utc_day_label(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{floor_div(epoch_seconds, kDay)}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

IngestResult ingest_event_records(std::istream& events, const IngestConfig& config, std::string_view source) {
    config.validate();
    const int p = static_cast<int>(config.nodes.size());
    const int bins = config.bins_per_day();
    std::unordered_map<std::string, int> node_index;
    for (int i = 0; i < p; ++i) node_index.emplace(config.nodes[static_cast<std::size_t>(i)], i);

    // day -> bin -> symmetric count matrix
    std::map<std::int64_t, std::vector<Eigen::MatrixXd>> counts;
    IngestResult result{ObjectTrajectorySample(MetricSpace::laplacian(p), TimeGrid::uniform(2), {}), {}, {}, 0, 0, 0, 0};

    std::string line;
    int line_no = 0;
    bool header = false;
    while (std::getline(events, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty()) continue;
        const std::string ctx = std::string(source) + ":" + std::to_string(line_no) + ": ";
        std::vector<std::string_view> f;
        std::size_t start = 0;
        while (true) {
            const auto comma = t.find(',', start);
            f.push_back(trim(t.substr(start, comma == std::string_view::npos ? comma : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!header) {
            if (f.size() != 3 || f[0] != "timestamp" || f[1] != "origin" || f[2] != "destination")
                throw InvalidInput(ctx + "expected header 'timestamp,origin,destination'");
            header = true;
            continue;
        }
        if (f.size() != 3) throw InvalidInput(ctx + "expected 3 fields, found " + std::to_string(f.size()));
        std::int64_t ts = 0;
        try {
            ts = parse_timestamp(f[0]);
        } catch (const InvalidInput& e) {
            throw InvalidInput(ctx + e.what());
        }
        ++result.records;
        const std::int64_t day = floor_div(ts, kDay);
        auto& day_counts = counts[day];
        if (day_counts.empty()) day_counts.assign(static_cast<std::size_t>(bins), Eigen::MatrixXd::Zero(p, p));

        const auto u = node_index.find(std::string(f[1]));
        const auto v = node_index.find(std::string(f[2]));
        if (u == node_index.end() || v == node_index.end()) {
            if (u == node_index.end()) ++result.unknown_nodes[std::string(f[1])];
            if (v == node_index.end()) ++result.unknown_nodes[std::string(f[2])];
            ++result.unknown_records;
            continue;
        }
        if (u->second == v->second) {
            ++result.self_loops;
            continue;
        }
        const auto bin = static_cast<std::size_t>((ts - day * kDay) / config.bin_seconds);
        auto& m = day_counts[bin];
        m(u->second, v->second) += 1.0;
        m(v->second, u->second) += 1.0;
        ++result.counted;
    }
    if (!header) throw InvalidInput(std::string(source) + ": empty input, header expected");
    if (counts.empty()) throw InsufficientSample(std::string(source) + ": no event records");

    std::vector<double> grid(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) grid[static_cast<std::size_t>(k)] = (k + 0.5) / bins;
    std::vector<Point> points;
    points.reserve(counts.size() * static_cast<std::size_t>(bins));
    for (const auto& [day, mats] : counts) {
        result.days.push_back(utc_day_label(day * kDay));
        for (const auto& a : mats) points.push_back(laplacian_from_adjacency(a));
    }
    result.sample = ObjectTrajectorySample(MetricSpace::laplacian(p), TimeGrid(std::move(grid)), std::move(points));
    return result;
}

}  // namespace rfpca
