#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aqua {

// One weekly report row from the public lice-count export.
struct LiceRecord {
    long long locality_id = 0;
    int year = 0;
    int week = 0;  // ISO week, 1..53
    std::optional<double> adult_female_lpf;  // lice per fish
    std::optional<double> moving_lpf;        // parsed for completeness
    std::optional<double> stuck_lpf;
    bool mechanical_flag = false;
    bool medicinal_flag = false;
    bool cleanerfish_flag = false;
    std::string region;
};

// Logical field -> header spellings accepted for it (case-insensitive).
// The defaults cover the canonical English names and the common Norwegian
// export headers; a JSON file {"logical": "header", ...} overrides entries,
// which is the adaptation point when the export format shifts.
struct SchemaMap {
    std::map<std::string, std::vector<std::string>> candidates;

    static SchemaMap defaults();
    static SchemaMap from_json_file(const std::string& path);
};

struct ParseReport {
    std::vector<LiceRecord> records;
    long long skipped_rows = 0;
    std::vector<std::string> warnings;  // capped; see skipped_rows for the total
};

// Delimiter-sniffing parse (';', tab or ',') with a header row.  Rows that
// fail to parse are skipped and counted; a missing required column rejects
// the whole file with the expected schema in the message.
ParseReport parse_lice_file(const std::string& path,
                            const SchemaMap& schema = SchemaMap::defaults());

// County names show up in several spellings; this folds case, the Norwegian
// vowels and the pre-2018 Sør-/Nord- split, so "Sør-Trøndelag" and
// "Trondelag" compare equal.
std::string normalize_region(const std::string& region);

// A contiguous farming stretch at one locality.  Week offsets are 0-based
// from the start week; one week counts as 1/52 year throughout.
struct FarmingPeriod {
    long long locality_id = 0;
    int start_year = 0, start_week = 0;
    int end_year = 0, end_week = 0;
    std::vector<LiceRecord> records;       // ordered by week
    std::vector<int> mechanical_offsets;   // weeks with a mechanical removal
};

// Periods in a region whose only treatment is mechanical removal.  Records
// group by locality, split where lpf reporting pauses for at least
// `gap_weeks` weeks, and any period touched by a medicinal or cleaner-fish
// event is discarded.
std::vector<FarmingPeriod> select_mechanical_only_periods(
    const std::vector<LiceRecord>& records, const std::string& region,
    int gap_weeks = 4);

// lpf observations strictly before the first mechanical removal of a period.
struct GreenSegment {
    long long locality_id = 0;
    std::vector<double> times;  // years from period start
    std::vector<double> lpf;
};

// One segment per period that has a removal later than its first week;
// weeks lacking an lpf value inside the prefix are skipped.
std::vector<GreenSegment> extract_green_segments(
    const std::vector<FarmingPeriod>& periods);

// Cumulative removal counts across periods at elapsed time t (years).
struct RemovalDistribution {
    double t = 0.0;
    std::vector<int> counts;  // one entry per period
    double mean = 0.0;
    double stddev = 0.0;
};

RemovalDistribution removal_distribution_at(const std::vector<FarmingPeriod>& periods,
                                            double t);

// Round trips used by the CLI and the calibration fixtures.
void write_green_segments_csv(const std::string& path,
                              const std::vector<GreenSegment>& segments);
std::vector<GreenSegment> read_green_segments_csv(const std::string& path);

}  // namespace aqua
