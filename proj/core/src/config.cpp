#include "rfpca/config.hpp"

#include "rfpca/errors.hpp"
#include "rfpca/io.hpp"

#include <charconv>
#include <functional>
#include <set>
#include <sstream>

namespace rfpca {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T to_integer(std::string_view s) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("expected an integer, got '" + std::string(s) + "'");
    return v;
}

double to_real(std::string_view s) {
    try {
        return io::parse_real(s, "");
    } catch (const InvalidInput&) {
        throw ConfigError("expected a finite number, got '" + std::string(s) + "'");
    }
}

bool to_bool(std::string_view s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError("expected true or false, got '" + std::string(s) + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::vector<double> to_reals(std::string_view s) {
    std::vector<double> out;
    for (auto item : split(s, ',')) out.push_back(to_real(item));
    return out;
}

std::string reals_text(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + io::format_real(v[i]);
    return out;
}

Eigen::Vector3d to_vec3(std::string_view s) {
    const auto v = to_reals(s);
    if (v.size() != 3) throw ConfigError("expected three comma separated numbers");
    return {v[0], v[1], v[2]};
}

std::string vec3_text(const Eigen::Vector3d& v) { return reals_text({v(0), v(1), v(2)}); }

std::vector<NetworkGroup> to_groups(std::string_view s) {
    std::vector<NetworkGroup> out;
    for (auto item : split(s, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 3) throw ConfigError("group '" + std::string(item) + "' must be tau:amplitude:communities");
        out.push_back({to_real(parts[0]), to_real(parts[1]), to_integer<int>(parts[2])});
    }
    return out;
}

std::string groups_text(const std::vector<NetworkGroup>& groups) {
    std::string out;
    for (std::size_t i = 0; i < groups.size(); ++i)
        out += (i ? ", " : "") + io::format_real(groups[i].peak_time) + ":" + io::format_real(groups[i].amplitude) +
               ":" + std::to_string(groups[i].communities);
    return out;
}

std::vector<Method> to_methods(std::string_view s) {
    std::vector<Method> out;
    for (auto item : split(s, ',')) out.push_back(method_from_string(item));
    return out;
}

std::string methods_text(const std::vector<Method>& methods) {
    std::string out;
    for (std::size_t i = 0; i < methods.size(); ++i) out += (i ? ", " : "") + std::string(to_string(methods[i]));
    return out;
}

std::vector<std::string> to_names(std::string_view s) {
    std::vector<std::string> out;
    for (auto item : split(s, ',')) out.emplace_back(item);
    return out;
}

std::string names_text(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
    return out;
}

ContaminationScheme to_scheme(std::string_view s) {
    try {
        return contamination_scheme_from_string(s);
    } catch (const Error&) {
        throw ConfigError("unknown contamination scheme '" + std::string(s) + "'");
    }
}

struct KeySpec {
    std::string_view section;
    std::string_view name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define RFPCA_REAL(sec, key, field)                                                           \
    KeySpec{sec, key, [](RunConfig& c, std::string_view v) { c.field = to_real(v); },         \
            [](const RunConfig& c) { return io::format_real(c.field); }}
#define RFPCA_INT(sec, key, field)                                                            \
    KeySpec{sec, key, [](RunConfig& c, std::string_view v) { c.field = to_integer<int>(v); }, \
            [](const RunConfig& c) { return std::to_string(c.field); }}
#define RFPCA_U64(sec, key, field)                                                                      \
    KeySpec{sec, key, [](RunConfig& c, std::string_view v) { c.field = to_integer<std::uint64_t>(v); }, \
            [](const RunConfig& c) { return std::to_string(c.field); }}
#define RFPCA_BOOL(sec, key, field)                                                   \
    KeySpec{sec, key, [](RunConfig& c, std::string_view v) { c.field = to_bool(v); }, \
            [](const RunConfig& c) { return bool_text(c.field); }}

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table{
        KeySpec{"fpca", "method", [](RunConfig& c, std::string_view v) { c.method = method_from_string(v); },
                [](const RunConfig& c) { return std::string(to_string(c.method)); }},
        RFPCA_REAL("fpca", "psi", pipeline.psi),
        RFPCA_INT("fpca", "components", pipeline.components),

        RFPCA_INT("solver", "max_iter", pipeline.solver.max_iter),
        RFPCA_REAL("solver", "tol", pipeline.solver.tol),
        RFPCA_REAL("solver", "anchor_eps", pipeline.solver.anchor_eps),
        RFPCA_BOOL("solver", "warm_start", pipeline.center.warm_start),
        RFPCA_INT("solver", "threads", pipeline.center.threads),

        KeySpec{"simulate", "generator", [](RunConfig& c, std::string_view v) { c.generator = std::string(v); },
                [](const RunConfig& c) { return c.generator; }},
        RFPCA_U64("simulate", "seed", seed),
        RFPCA_REAL("simulate", "contamination", contamination.fraction),
        KeySpec{"simulate", "scheme", [](RunConfig& c, std::string_view v) { c.contamination.scheme = to_scheme(v); },
                [](const RunConfig& c) { return std::string(to_string(c.contamination.scheme)); }},
        RFPCA_REAL("simulate", "shift", contamination.shift),
        RFPCA_REAL("simulate", "scale", contamination.scale),

        RFPCA_INT("network", "nodes", network.nodes),
        RFPCA_INT("network", "grid_points", network.grid_points),
        RFPCA_INT("network", "subjects_per_group", network.subjects_per_group),
        RFPCA_REAL("network", "base_weight", network.base_weight),
        RFPCA_REAL("network", "bump_variance", network.bump_variance),
        RFPCA_REAL("network", "noise_sd", network.noise_sd),
        KeySpec{"network", "groups", [](RunConfig& c, std::string_view v) { c.network.groups = to_groups(v); },
                [](const RunConfig& c) { return groups_text(c.network.groups); }},

        RFPCA_INT("sphere", "grid_points", sphere.grid_points),
        RFPCA_INT("sphere", "subjects", sphere.subjects),
        KeySpec{"sphere", "start", [](RunConfig& c, std::string_view v) { c.sphere.start = to_vec3(v); },
                [](const RunConfig& c) { return vec3_text(c.sphere.start); }},
        KeySpec{"sphere", "direction", [](RunConfig& c, std::string_view v) { c.sphere.direction = to_vec3(v); },
                [](const RunConfig& c) { return vec3_text(c.sphere.direction); }},
        RFPCA_REAL("sphere", "arc_length", sphere.arc_length),
        RFPCA_REAL("sphere", "noise_sd", sphere.noise_sd),
        RFPCA_BOOL("sphere", "antithetic", sphere.antithetic),

        KeySpec{"breakdown", "levels", [](RunConfig& c, std::string_view v) { c.breakdown.levels = to_reals(v); },
                [](const RunConfig& c) { return reals_text(c.breakdown.levels); }},
        RFPCA_INT("breakdown", "reps", breakdown.reps),
        RFPCA_INT("breakdown", "reference_reps", breakdown.reference_reps),
        KeySpec{"breakdown", "methods", [](RunConfig& c, std::string_view v) { c.breakdown.methods = to_methods(v); },
                [](const RunConfig& c) { return methods_text(c.breakdown.methods); }},
        RFPCA_INT("breakdown", "component", breakdown.component),
        RFPCA_INT("breakdown", "components", breakdown.pipeline.components),
        KeySpec{"breakdown", "scheme", [](RunConfig& c, std::string_view v) { c.breakdown.scheme = to_scheme(v); },
                [](const RunConfig& c) { return std::string(to_string(c.breakdown.scheme)); }},
        RFPCA_REAL("breakdown", "shift", breakdown.shift),
        RFPCA_REAL("breakdown", "scale", breakdown.scale),
        RFPCA_U64("breakdown", "seed", breakdown.seed),
        RFPCA_INT("breakdown", "threads", breakdown.threads),

        KeySpec{"ingest", "nodes", [](RunConfig& c, std::string_view v) { c.ingest.nodes = to_names(v); },
                [](const RunConfig& c) { return names_text(c.ingest.nodes); }},
        RFPCA_INT("ingest", "bin_seconds", ingest.bin_seconds),
    };
    return table;
}

#undef RFPCA_REAL
#undef RFPCA_INT
#undef RFPCA_U64
#undef RFPCA_BOOL

}  // namespace

BreakdownConfig RunConfig::breakdown_config() const {
    BreakdownConfig b = breakdown;
    b.generator = network;
    b.pipeline.psi = pipeline.psi;
    b.pipeline.solver = pipeline.solver;
    b.pipeline.center = pipeline.center;
    return b;
}

void RunConfig::validate() const {
    if (format_version != kConfigFormatVersion)
        throw ConfigError("unsupported config format_version " + std::to_string(format_version));
    if (!(pipeline.psi > 0.0 && pipeline.psi <= 1.0)) throw ConfigError("fpca.psi must lie in (0, 1]");
    if (pipeline.components < 0) throw ConfigError("fpca.components must be >= 0 (0 = 90% rule)");
    if (pipeline.center.threads < 1) throw ConfigError("solver.threads must be >= 1");
    if (generator != "network" && generator != "sphere")
        throw ConfigError("simulate.generator must be 'network' or 'sphere'");
    if (generator == "sphere" && contamination.fraction > 0.0)
        throw ConfigError("contamination applies to the network generator only");
    try {
        pipeline.solver.validate();
        contamination.validate();
        network.validate();
        sphere.validate();
        breakdown_config().validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
    RunConfig cfg;
    std::string section;
    std::set<std::string> seen;
    std::set<std::string> known_sections;
    for (const auto& k : key_table()) known_sections.emplace(k.section);

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        const std::string ctx = std::string(source) + ":" + std::to_string(line_no) + ": ";
        if (!line.empty() && line.front() != '#' && line.front() != ';') {
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(ctx + "malformed section header");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                if (!known_sections.contains(section)) throw ConfigError(ctx + "unknown section [" + section + "]");
            } else {
                const auto eq = line.find('=');
                if (eq == std::string_view::npos) throw ConfigError(ctx + "expected 'key = value'");
                const std::string key(trim(line.substr(0, eq)));
                const auto value = trim(line.substr(eq + 1));
                const std::string qualified = section.empty() ? key : section + "." + key;
                if (!seen.insert(qualified).second) throw ConfigError(ctx + "duplicate key '" + qualified + "'");
                try {
                    if (section.empty()) {
                        if (key != "format_version") throw ConfigError("unknown top-level key '" + key + "'");
                        cfg.format_version = to_integer<int>(value);
                        if (cfg.format_version != kConfigFormatVersion)
                            throw ConfigError("unsupported format_version " + std::string(value));
                    } else {
                        const KeySpec* spec = nullptr;
                        for (const auto& k : key_table())
                            if (k.section == section && k.name == key) spec = &k;
                        if (spec == nullptr) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
                        spec->set(cfg, value);
                    }
                } catch (const Error& e) {
                    throw ConfigError(ctx + qualified + ": " + e.what());
                }
            }
        }
        if (end == text.size()) break;
    }
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string(source) + ": " + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(io::read_file(path), path.string());
}

std::string format_run_config(const RunConfig& config) {
    std::ostringstream os;
    os << "format_version = " << config.format_version << "\n";
    std::string_view current;
    for (const auto& k : key_table()) {
        if (k.section != current) {
            current = k.section;
            os << "\n[" << current << "]\n";
        }
        os << k.name << " = " << k.get(config) << "\n";
    }
    return os.str();
}

}  // namespace rfpca
