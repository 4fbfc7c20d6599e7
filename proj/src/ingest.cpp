#include "aqua/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace aqua {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == delim && !quoted) {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

char sniff_delimiter(const std::string& header) {
    const char cands[] = {';', '\t', ','};
    char best = ';';
    std::size_t best_n = 0;
    for (char c : cands) {
        const std::size_t n =
            static_cast<std::size_t>(std::count(header.begin(), header.end(), c));
        if (n > best_n) {
            best_n = n;
            best = c;
        }
    }
    if (best_n == 0)
        throw std::runtime_error("parse_lice_file: no delimiter found in header");
    return best;
}

bool is_missing(const std::string& v) {
    const std::string t = lower(trim(v));
    return t.empty() || t == "na" || t == "nan" || t == "null" || t == "-";
}

double parse_number(const std::string& v, char delim) {
    std::string t = trim(v);
    if (delim != ',')  // Norwegian exports write decimal commas
        std::replace(t.begin(), t.end(), ',', '.');
    std::size_t pos = 0;
    const double x = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument("trailing characters in number");
    return x;
}

bool parse_flag(const std::string& v) {
    const std::string t = lower(trim(v));
    if (t.empty() || t == "0" || t == "false" || t == "no" || t == "nei") return false;
    if (t == "1" || t == "true" || t == "yes" || t == "ja") return true;
    throw std::invalid_argument("unrecognized boolean value");
}

// Absolute week index for gap/offset arithmetic; 52 weeks per year by the
// fixed 1 week = 1/52 year convention (week 53 folds into the next year).
long long absolute_week(int year, int week) {
    return static_cast<long long>(year) * 52 + (week - 1);
}

}  // namespace

SchemaMap SchemaMap::defaults() {
    SchemaMap m;
    m.candidates = {
        {"locality_id", {"locality_id", "lokalitetsnummer", "loknr"}},
        {"year", {"year", "ar", "aar", "år"}},
        {"week", {"week", "uke"}},
        {"adult_female_lpf",
         {"adult_female_lpf", "voksne hunnlus", "voksne_hunnlus"}},
        {"moving_lpf", {"moving_lpf", "lus i bevegelige stadier", "bevegelige lus"}},
        {"stuck_lpf", {"stuck_lpf", "fastsittende lus", "fastsittende_lus"}},
        {"mechanical_flag",
         {"mechanical_flag", "mekanisk fjerning", "mekanisk_fjerning"}},
        {"medicinal_flag",
         {"medicinal_flag", "medikamentell behandling", "medikamentell_behandling"}},
        {"cleanerfish_flag",
         {"cleanerfish_flag", "utsett av rensefisk", "rensefisk"}},
        {"region", {"region", "fylke", "produksjonsomrade"}},
    };
    return m;
}

SchemaMap SchemaMap::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("SchemaMap: cannot open " + path);
    nlohmann::json j;
    in >> j;
    SchemaMap m = defaults();
    for (const auto& [key, val] : j.items()) {
        if (m.candidates.find(key) == m.candidates.end())
            throw std::runtime_error("SchemaMap: unknown logical field '" + key + "'");
        m.candidates[key] = {lower(val.get<std::string>())};
    }
    return m;
}

ParseReport parse_lice_file(const std::string& path, const SchemaMap& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_lice_file: cannot open " + path);

    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("parse_lice_file: empty file " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const char delim = sniff_delimiter(header);

    std::vector<std::string> cols;
    for (const std::string& c : split(header, delim)) cols.push_back(lower(trim(c)));

    const auto find_col = [&](const std::string& logical) -> int {
        const auto it = schema.candidates.find(logical);
        if (it == schema.candidates.end()) return -1;
        for (const std::string& cand : it->second) {
            const std::string lc = lower(cand);
            const auto pos = std::find(cols.begin(), cols.end(), lc);
            if (pos != cols.end()) return static_cast<int>(pos - cols.begin());
        }
        return -1;
    };

    const char* required[] = {"locality_id", "year",           "week",
                              "adult_female_lpf", "mechanical_flag", "medicinal_flag",
                              "cleanerfish_flag", "region"};
    std::map<std::string, int> col_of;
    std::string missing;
    for (const char* f : required) {
        const int c = find_col(f);
        if (c < 0) missing += std::string(missing.empty() ? "" : ", ") + f;
        col_of[f] = c;
    }
    if (!missing.empty()) {
        std::string expected;
        for (const auto& [k, v] : schema.candidates)
            expected += k + " (" + v.front() + "), ";
        throw std::runtime_error("parse_lice_file: missing required column(s): " +
                                 missing + "; expected schema: " + expected);
    }
    col_of["moving_lpf"] = find_col("moving_lpf");
    col_of["stuck_lpf"] = find_col("stuck_lpf");

    ParseReport report;
    std::string line;
    long long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split(line, delim);
        const auto get = [&](const char* name) -> const std::string& {
            static const std::string empty;
            const int c = col_of[name];
            if (c < 0 || c >= static_cast<int>(f.size())) return empty;
            return f[static_cast<std::size_t>(c)];
        };
        try {
            LiceRecord rec;
            rec.locality_id = std::stoll(trim(get("locality_id")));
            rec.year = static_cast<int>(std::stol(trim(get("year"))));
            rec.week = static_cast<int>(std::stol(trim(get("week"))));
            if (rec.week < 1 || rec.week > 53 || rec.year < 1900 || rec.year > 2200)
                throw std::invalid_argument("year/week out of range");
            const auto opt_lpf = [&](const char* name) -> std::optional<double> {
                const std::string& v = get(name);
                if (col_of[name] < 0 || is_missing(v)) return std::nullopt;
                const double x = parse_number(v, delim);
                if (!(x >= 0.0) || !std::isfinite(x))
                    throw std::invalid_argument("negative lpf");
                return x;
            };
            rec.adult_female_lpf = opt_lpf("adult_female_lpf");
            rec.moving_lpf = opt_lpf("moving_lpf");
            rec.stuck_lpf = opt_lpf("stuck_lpf");
            const auto flag = [&](const char* name) {
                const std::string& v = get(name);
                return is_missing(v) ? false : parse_flag(v);
            };
            rec.mechanical_flag = flag("mechanical_flag");
            rec.medicinal_flag = flag("medicinal_flag");
            rec.cleanerfish_flag = flag("cleanerfish_flag");
            rec.region = trim(get("region"));
            report.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            ++report.skipped_rows;
            if (report.warnings.size() < 20)
                report.warnings.push_back("line " + std::to_string(line_no) + ": " +
                                          e.what());
        }
    }
    return report;
}

std::string normalize_region(const std::string& region) {
    // Lowercase, fold the Norwegian vowels to ASCII, drop punctuation.
    std::string out;
    const std::string s = trim(region);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        if (c == 0xc3 && i + 1 < s.size()) {
            const unsigned char d = static_cast<unsigned char>(s[i + 1]);
            ++i;
            switch (d) {
                case 0xb8: case 0x98: out += 'o'; break;  // ø Ø
                case 0xa5: case 0x85: out += 'a'; break;  // å Å
                case 0xa6: case 0x86: out += "ae"; break; // æ Æ
                case 0xb6: case 0x96: out += 'o'; break;  // ö Ö
                case 0xa4: case 0x84: out += 'a'; break;  // ä Ä
                case 0xa9: case 0x89: out += 'e'; break;  // é É
                default: break;
            }
            continue;
        }
        if (std::isalnum(c))
            out += static_cast<char>(std::tolower(c));
        else if (c == ' ' || c == '-' || c == '_')
            out += ' ';
    }
    // collapse spaces
    std::string collapsed;
    bool prev_space = true;
    for (char c : out) {
        if (c == ' ') {
            if (!prev_space) collapsed += ' ';
            prev_space = true;
        } else {
            collapsed += c;
            prev_space = false;
        }
    }
    while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();

    // The 2018 county merge: both halves read as the merged county.
    if (collapsed == "sor trondelag" || collapsed == "nord trondelag" ||
        collapsed == "soer trondelag" || collapsed == "troendelag")
        return "trondelag";
    if (collapsed == "more og romsdal" || collapsed == "moere og romsdal")
        return "more og romsdal";
    return collapsed;
}

std::vector<FarmingPeriod> select_mechanical_only_periods(
    const std::vector<LiceRecord>& records, const std::string& region,
    int gap_weeks) {
    if (gap_weeks < 1)
        throw std::invalid_argument("select_mechanical_only_periods: gap_weeks < 1");
    const std::string want = normalize_region(region);

    // Group by locality, order by week, drop duplicate weeks.
    std::map<long long, std::vector<LiceRecord>> by_farm;
    for (const LiceRecord& r : records)
        if (normalize_region(r.region) == want) by_farm[r.locality_id].push_back(r);

    std::vector<FarmingPeriod> out;
    for (auto& [farm, rows] : by_farm) {
        std::sort(rows.begin(), rows.end(), [](const LiceRecord& a, const LiceRecord& b) {
            return absolute_week(a.year, a.week) < absolute_week(b.year, b.week);
        });
        rows.erase(std::unique(rows.begin(), rows.end(),
                               [](const LiceRecord& a, const LiceRecord& b) {
                                   return absolute_week(a.year, a.week) ==
                                          absolute_week(b.year, b.week);
                               }),
                   rows.end());

        // A week is active when it reports lpf or any treatment.
        std::vector<const LiceRecord*> active;
        for (const LiceRecord& r : rows)
            if (r.adult_female_lpf.has_value() || r.mechanical_flag ||
                r.medicinal_flag || r.cleanerfish_flag)
                active.push_back(&r);
        if (active.empty()) continue;

        std::size_t begin = 0;
        for (std::size_t i = 1; i <= active.size(); ++i) {
            const bool cut =
                i == active.size() ||
                absolute_week(active[i]->year, active[i]->week) -
                        absolute_week(active[i - 1]->year, active[i - 1]->week) >=
                    gap_weeks;
            if (!cut) continue;

            FarmingPeriod p;
            p.locality_id = farm;
            p.start_year = active[begin]->year;
            p.start_week = active[begin]->week;
            p.end_year = active[i - 1]->year;
            p.end_week = active[i - 1]->week;
            const long long w0 = absolute_week(p.start_year, p.start_week);
            bool tainted = false;
            for (std::size_t k = begin; k < i; ++k) {
                const LiceRecord& r = *active[k];
                if (r.medicinal_flag || r.cleanerfish_flag) tainted = true;
                p.records.push_back(r);
                if (r.mechanical_flag)
                    p.mechanical_offsets.push_back(
                        static_cast<int>(absolute_week(r.year, r.week) - w0));
            }
            if (!tainted) out.push_back(std::move(p));
            begin = i;
        }
    }
    return out;
}

std::vector<GreenSegment> extract_green_segments(
    const std::vector<FarmingPeriod>& periods) {
    std::vector<GreenSegment> out;
    for (const FarmingPeriod& p : periods) {
        if (p.mechanical_offsets.empty()) continue;
        const int first = *std::min_element(p.mechanical_offsets.begin(),
                                            p.mechanical_offsets.end());
        if (first <= 0) continue;
        GreenSegment seg;
        seg.locality_id = p.locality_id;
        const long long w0 = absolute_week(p.start_year, p.start_week);
        for (const LiceRecord& r : p.records) {
            const long long off = absolute_week(r.year, r.week) - w0;
            if (off >= first) break;
            if (!r.adult_female_lpf.has_value()) continue;
            seg.times.push_back(static_cast<double>(off) / 52.0);
            seg.lpf.push_back(*r.adult_female_lpf);
        }
        if (!seg.times.empty()) out.push_back(std::move(seg));
    }
    return out;
}

RemovalDistribution removal_distribution_at(const std::vector<FarmingPeriod>& periods,
                                            double t) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("removal_distribution_at: t must be >= 0");
    RemovalDistribution d;
    d.t = t;
    const double limit = t * 52.0 + 1e-9;
    double sum = 0.0, sumsq = 0.0;
    for (const FarmingPeriod& p : periods) {
        int n = 0;
        for (int off : p.mechanical_offsets)
            if (static_cast<double>(off) <= limit) ++n;
        d.counts.push_back(n);
        sum += n;
        sumsq += static_cast<double>(n) * n;
    }
    if (!d.counts.empty()) {
        const double m = sum / static_cast<double>(d.counts.size());
        d.mean = m;
        d.stddev = d.counts.size() > 1
                       ? std::sqrt((sumsq - d.counts.size() * m * m) /
                                   (static_cast<double>(d.counts.size()) - 1.0))
                       : 0.0;
    }
    return d;
}

void write_green_segments_csv(const std::string& path,
                              const std::vector<GreenSegment>& segments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_green_segments_csv: cannot open " + path);
    out << "segment_id,locality_id,time_years,lpf\n";
    char buf[96];
    for (std::size_t k = 0; k < segments.size(); ++k)
        for (std::size_t i = 0; i < segments[k].times.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%lld,%.17g,%.17g\n", k,
                          segments[k].locality_id, segments[k].times[i],
                          segments[k].lpf[i]);
            out << buf;
        }
}

std::vector<GreenSegment> read_green_segments_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_green_segments_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_green_segments_csv: empty file");
    std::vector<GreenSegment> out;
    long long prev_seg = -1;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 4)
            throw std::runtime_error("read_green_segments_csv: malformed row");
        const long long seg = std::stoll(f[0]);
        if (out.empty() || seg != prev_seg) {
            GreenSegment s;
            s.locality_id = std::stoll(f[1]);
            out.push_back(s);
            prev_seg = seg;
        }
        out.back().times.push_back(std::stod(f[2]));
        out.back().lpf.push_back(std::stod(f[3]));
    }
    return out;
}

}  // namespace aqua
