#include "aqua/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "aqua/calibrate.hpp"

namespace aqua {

void GlobalConfig::validate() const {
    if (!std::isfinite(r)) throw std::invalid_argument("[global] r must be finite");
    if (!(horizon > 0.0)) throw std::invalid_argument("[global] horizon must be > 0");
    if (n_dates < 1) throw std::invalid_argument("[global] dates must be >= 1");
    if (train_paths < 2) throw std::invalid_argument("[global] train_paths must be >= 2");
    if (eval_paths < 2) throw std::invalid_argument("[global] eval_paths must be >= 2");
    if (block_paths < 1) throw std::invalid_argument("[global] block_paths must be >= 1");
}

void CalibrationConfig::validate() const {
    if (!(zeta > 0.0)) throw std::invalid_argument("[calibration] zeta must be > 0");
    if (!(t_match > 0.0)) throw std::invalid_argument("[calibration] t_match must be > 0");
    if (n_paths < 2) throw std::invalid_argument("[calibration] paths must be >= 2");
    if (!(lambda_lo > 0.0) || !(lambda_hi > lambda_lo))
        throw std::invalid_argument("[calibration] need 0 < lambda_lo < lambda_hi");
    if (!(beta_lo > 0.0) || !(beta_hi > beta_lo))
        throw std::invalid_argument("[calibration] need 0 < beta_lo < beta_hi");
}

void IngestConfig::validate() const {
    if (region.empty()) throw std::invalid_argument("[ingest] region must be set");
    if (gap_weeks < 1) throw std::invalid_argument("[ingest] gap_weeks must be >= 1");
}

FarmConfig FarmConfig::defaults() {
    FarmConfig c;

    c.costs = CostParams::scaled_from(95.0);
    c.costs.treatment_rate = 0.015;

    c.salmon.s0 = adjusted_initial_spot(c.costs);
    c.salmon.delta0 = 0.57;
    c.salmon.spot_vol = 0.23;
    c.salmon.yield_vol = 0.75;
    c.salmon.kappa = 2.6;
    c.salmon.alpha = 0.02;
    c.salmon.risk_premium = 0.2;
    c.salmon.rho = 0.9;

    c.soy.s0 = 1.0;  // enters only through the relative price
    c.soy.delta0 = 0.0;
    c.soy.spot_vol = 1.0;
    c.soy.yield_vol = 0.4;
    c.soy.kappa = 1.2;
    c.soy.alpha = 0.06;
    c.soy.risk_premium = 0.14;
    c.soy.rho = 0.44;

    return c;
}

void FarmConfig::validate() const {
    global.validate();
    salmon.validate();
    soy.validate();
    growth.validate();
    bio.validate();
    threshold.validate();
    costs.validate();
    solver.validate();
    calibration.validate();
    ingest.validate();
    if (!(bio.lpf0 < threshold(0.0)))
        throw std::invalid_argument("initial lice per fish must sit below the threshold");
}

Eigen::VectorXd FarmConfig::fine_grid() const {
    return euler_grid(global.horizon, global.n_dates);
}

std::vector<Eigen::Index> FarmConfig::exercise_indices() const {
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<std::size_t>(global.n_dates));
    for (int k = 1; k <= global.n_dates; ++k) idx.push_back(10 * k - 1);
    return idx;
}

Eigen::VectorXd FarmConfig::exercise_dates() const {
    const Eigen::VectorXd g = fine_grid();
    const std::vector<Eigen::Index> idx = exercise_indices();
    Eigen::VectorXd d(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) d[k] = g[idx[k]];
    return d;
}

IniDoc IniDoc::parse_string(const std::string& text) {
    IniDoc doc;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        if (line[b] == '#' || line[b] == ';') continue;
        std::size_t e = line.find_last_not_of(" \t");
        const std::string t = line.substr(b, e - b + 1);
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": unterminated section header");
            section = t.substr(1, t.size() - 2);
            doc.values[section];  // empty sections are allowed
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        const auto strip = [](std::string s) {
            const std::size_t x = s.find_first_not_of(" \t");
            if (x == std::string::npos) return std::string();
            const std::size_t y = s.find_last_not_of(" \t");
            return s.substr(x, y - x + 1);
        };
        const std::string key = strip(t.substr(0, eq));
        const std::string val = strip(t.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": empty key");
        if (section.empty())
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": key outside any section");
        doc.values[section][key] = val;
    }
    return doc;
}

IniDoc IniDoc::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

namespace {

class SectionReader {
  public:
    SectionReader(const IniDoc& doc, const std::string& section) : section_(section) {
        const auto it = doc.values.find(section);
        if (it != doc.values.end()) kv_ = &it->second;
    }

    bool has(const std::string& key) const {
        return kv_ && kv_->find(key) != kv_->end();
    }

    void number(const std::string& key, double& out) {
        if (!has(key)) return;
        touch(key);
        const std::string& v = kv_->at(key);
        try {
            std::size_t pos = 0;
            out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            fail(key, "a number");
        }
    }

    void integer(const std::string& key, int& out) {
        if (!has(key)) return;
        touch(key);
        const std::string& v = kv_->at(key);
        try {
            std::size_t pos = 0;
            const long x = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            out = static_cast<int>(x);
        } catch (const std::exception&) {
            fail(key, "an integer");
        }
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (!has(key)) return;
        touch(key);
        const std::string& v = kv_->at(key);
        try {
            std::size_t pos = 0;
            out = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            fail(key, "an unsigned integer");
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        touch(key);
        std::string v = kv_->at(key);
        std::transform(v.begin(), v.end(), v.begin(), ::tolower);
        if (v == "1" || v == "true" || v == "yes")
            out = true;
        else if (v == "0" || v == "false" || v == "no")
            out = false;
        else
            fail(key, "a boolean");
    }

    void text(const std::string& key, std::string& out) {
        if (!has(key)) return;
        touch(key);
        out = kv_->at(key);
    }

    void number_list(const std::string& key, std::vector<double>& out) {
        if (!has(key)) return;
        touch(key);
        std::string v = kv_->at(key);
        std::replace(v.begin(), v.end(), ',', ' ');
        std::istringstream ss(v);
        std::vector<double> xs;
        double x;
        while (ss >> x) xs.push_back(x);
        if (!ss.eof()) fail(key, "a list of numbers");
        if (xs.empty()) fail(key, "a non-empty list of numbers");
        out = std::move(xs);
    }

    void finish() const {
        if (!kv_) return;
        for (const auto& [k, v] : *kv_)
            if (used_.find(k) == used_.end())
                throw std::runtime_error("config: unknown key '" + k + "' in [" +
                                         section_ + "]");
    }

  private:
    void touch(const std::string& key) { used_.insert(key); }
    [[noreturn]] void fail(const std::string& key, const char* what) const {
        throw std::runtime_error("config: [" + section_ + "] " + key + " must be " +
                                 what);
    }

    std::string section_;
    const std::map<std::string, std::string>* kv_ = nullptr;
    std::set<std::string> used_;
};

void read_commodity(const IniDoc& doc, const std::string& section, CommodityParams& p,
                    bool* s0_given) {
    SectionReader r(doc, section);
    if (s0_given) *s0_given = r.has("s0");
    r.number("s0", p.s0);
    r.number("delta0", p.delta0);
    r.number("spot_vol", p.spot_vol);
    r.number("yield_vol", p.yield_vol);
    r.number("kappa", p.kappa);
    r.number("alpha", p.alpha);
    r.number("risk_premium", p.risk_premium);
    r.number("rho", p.rho);
    r.finish();
}

}  // namespace

FarmConfig FarmConfig::from_ini(const std::string& path) {
    const IniDoc doc = IniDoc::parse_file(path);

    static const std::set<std::string> known = {
        "global",   "commodity.salmon", "commodity.soy", "growth",      "biology",
        "threshold", "costs",           "stopping",      "calibration", "ingest"};
    for (const auto& [sec, kv] : doc.values)
        if (known.find(sec) == known.end())
            throw std::runtime_error("config: unknown section [" + sec + "]");

    FarmConfig c = defaults();

    {
        SectionReader r(doc, "global");
        r.number("r", c.global.r);
        r.number("horizon", c.global.horizon);
        r.integer("dates", c.global.n_dates);
        r.integer("train_paths", c.global.train_paths);
        r.integer("eval_paths", c.global.eval_paths);
        r.integer("block_paths", c.global.block_paths);
        r.unsigned64("seed", c.global.seed);
        r.finish();
    }
    {
        SectionReader r(doc, "costs");
        double ref = c.costs.spot_ref;
        r.number("spot_ref", ref);
        if (ref != c.costs.spot_ref) {
            const double rate = c.costs.treatment_rate;
            c.costs = CostParams::scaled_from(ref);
            c.costs.treatment_rate = rate;
        }
        r.number("production", c.costs.production);
        r.number("harvest", c.costs.harvest);
        r.number("feed_base", c.costs.feed_base);
        r.number("setup", c.costs.setup);
        r.number("feed_conversion", c.costs.feed_conversion);
        r.number("treatment_rate", c.costs.treatment_rate);
        r.finish();
    }

    bool salmon_s0_given = false;
    read_commodity(doc, "commodity.salmon", c.salmon, &salmon_s0_given);
    if (!salmon_s0_given) c.salmon.s0 = adjusted_initial_spot(c.costs);
    read_commodity(doc, "commodity.soy", c.soy, nullptr);

    {
        SectionReader r(doc, "growth");
        r.number("a", c.growth.a);
        r.number("b", c.growth.b);
        r.number("c", c.growth.c);
        r.number("w_inf", c.growth.w_inf);
        r.finish();
    }
    {
        SectionReader r(doc, "biology");
        r.number("mu", c.bio.mu);
        r.number("alpha", c.bio.alpha);
        r.number("b", c.bio.b);
        r.number("lambda", c.bio.lambda);
        r.number("h0", c.bio.h0);
        r.number("lpf0", c.bio.lpf0);
        r.number("x_low", c.bio.x_low);
        r.number("y_floor", c.bio.y_floor);
        r.number("y_range", c.bio.y_range);
        r.number("beta1", c.bio.beta1);
        r.number("beta2", c.bio.beta2);
        r.finish();
    }
    {
        SectionReader r(doc, "threshold");
        std::vector<double> times = c.threshold.times;
        std::vector<double> levels = c.threshold.levels;
        r.number_list("times", times);
        r.number_list("levels", levels);
        r.finish();
        c.threshold.times = times;
        c.threshold.levels = levels;
    }
    {
        SectionReader r(doc, "stopping");
        r.number("svd_threshold", c.solver.svd_threshold);
        r.number("ridge", c.solver.ridge);
        r.boolean("payoff_feature", c.solver.payoff_feature);
        r.finish();
    }
    {
        SectionReader r(doc, "calibration");
        r.number("zeta", c.calibration.zeta);
        r.number("t_match", c.calibration.t_match);
        r.integer("paths", c.calibration.n_paths);
        r.number("lambda_lo", c.calibration.lambda_lo);
        r.number("lambda_hi", c.calibration.lambda_hi);
        r.number("beta_lo", c.calibration.beta_lo);
        r.number("beta_hi", c.calibration.beta_hi);
        r.finish();
    }
    {
        SectionReader r(doc, "ingest");
        r.text("region", c.ingest.region);
        r.integer("gap_weeks", c.ingest.gap_weeks);
        r.finish();
    }

    c.validate();
    return c;
}

}  // namespace aqua
