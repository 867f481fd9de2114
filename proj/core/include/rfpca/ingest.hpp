#pragma once

// Event records -> per-day Laplacian trajectories.
//
// Input is CSV with header `timestamp,origin,destination`. Timestamps are
// epoch seconds (integer or decimal) or ISO-8601 `YYYY-MM-DDTHH:MM:SS[.fff][Z]`
// (a space may replace the `T`), interpreted as UTC. Each UTC day with at least
// one record becomes a subject; the day is split into bins of `bin_seconds`,
// and bin k sits at time (k + 0.5) / bins on [0, 1]. Counts are symmetrized
// (u -> v and v -> u add to the same edge) and L = D - A per bin.

#include "rfpca/trajectory.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rfpca {

struct IngestConfig {
    std::vector<std::string> nodes;  ///< fixed node universe, in Laplacian order
    int bin_seconds = 1200;

    void validate() const;
    int bins_per_day() const { return 86400 / bin_seconds; }
};

struct IngestResult {
    ObjectTrajectorySample sample;
    std::vector<std::string> days;  ///< subject labels, YYYY-MM-DD
    std::map<std::string, std::size_t> unknown_nodes;  ///< id -> occurrences
    std::size_t records = 0;
    std::size_t counted = 0;
    std::size_t unknown_records = 0;
    std::size_t self_loops = 0;
};

/// Epoch seconds (floored) of a timestamp field.
std::int64_t parse_timestamp(std::string_view text);

/// YYYY-MM-DD of the UTC day containing `epoch_seconds`.
std::string utc_day_label(std::int64_t epoch_seconds);

IngestResult ingest_event_records(std::istream& events, const IngestConfig& config,
                                  std::string_view source = "events");

}  // namespace rfpca
