#include "hald/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hald/binio.hpp"

namespace hald {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(IoErrorKind::open_failed, "config: cannot open " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config: line " + std::to_string(line_no) +
                                     " is not key=value: " + stripped);
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error("config: empty key on line " + std::to_string(line_no));
        }
        if (cfg.entries_.count(key) != 0) {
            throw std::runtime_error("config: duplicate key '" + key + "' on line " +
                                     std::to_string(line_no));
        }
        cfg.entries_[key] = value;
    }
    return cfg;
}

bool ExperimentConfig::has(const std::string& key) const { return entries_.count(key) != 0; }

void ExperimentConfig::set(const std::string& key, std::string value) {
    entries_[key] = std::move(value);
}

std::string ExperimentConfig::get_str(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

std::int64_t ExperimentConfig::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    std::size_t used = 0;
    std::int64_t out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not an integer: " + v);
    }
    if (used != v.size()) {
        throw std::runtime_error("config: key '" + key + "' is not an integer: " + v);
    }
    return out;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not a number: " + v);
    }
    if (used != v.size()) {
        throw std::runtime_error("config: key '" + key + "' is not a number: " + v);
    }
    return out;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config: key '" + key + "' is not a boolean: " + v);
}

std::vector<int> ExperimentConfig::get_int_list(const std::string& key,
                                                const std::vector<int>& fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<int> out;
    std::string item;
    std::istringstream in(it->second);
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) {
            throw std::runtime_error("config: key '" + key + "' has an empty list entry");
        }
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(t, &used);
        } catch (const std::exception&) {
            throw std::runtime_error("config: key '" + key + "' has a non-integer entry: " + t);
        }
        if (used != t.size()) {
            throw std::runtime_error("config: key '" + key + "' has a non-integer entry: " + t);
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw std::runtime_error("config: key '" + key + "' is an empty list");
    }
    return out;
}

const std::vector<std::string>& ExperimentConfig::known_keys() {
    static const std::vector<std::string> keys = {
        // dataset
        "num_classes", "image_side", "glyph_side", "train_per_class", "test_per_class",
        "distractor_count", "noise_std",
        // teacher
        "teacher_hidden", "teacher_epochs", "teacher_batch", "teacher_lr",
        "teacher_weight_decay",
        // shared view geometry
        "crop_side", "scale_lo", "scale_hi", "aspect_lo", "aspect_hi",
        // soft-label pool
        "sli", "tau", "bits",
        // student training
        "trainer", "n_total", "n_soft", "lambda", "hidden", "batch", "steps_per_epoch", "lr",
        "optimizer", "weight_decay", "momentum", "alpha", "cutmix_beta", "probe_size",
        "estimate_tol", "estimate_patience", "estimate_max_epochs",
        // diagnostics
        "n_crops_cov", "n_crops_consistency", "lvsd_images", "epsilon",
        // artifact paths (relative paths resolve against --out)
        "train_data", "test_data", "teacher_file", "pool_file", "model_file", "reference_file",
        "runlog_file",
        // misc
        "seed", "workers",
    };
    return keys;
}

void ExperimentConfig::validate_keys() const {
    const std::vector<std::string>& known = known_keys();
    for (const auto& [key, value] : entries_) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw std::runtime_error("config: unknown key '" + key + "'");
        }
    }
}

std::string ExperimentConfig::canonical() const {
    std::string out;
    for (const auto& [key, value] : entries_) {  // std::map iterates key-sorted
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

}  // namespace hald
