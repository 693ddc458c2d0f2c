#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hald {

/// Flat key=value experiment configuration.
///
/// One decision per line: `key = value`, blank lines and '#' comments
/// ignored.  Keys are validated against a fixed schema so a typo fails
/// the run instead of silently using a default.  `hash()` digests the
/// canonical key-sorted rendering; artifacts carry it in their sidecars
/// so outputs can be traced back to the exact configuration.
class ExperimentConfig {
public:
    ExperimentConfig() = default;

    static ExperimentConfig parse_file(const std::filesystem::path& path);
    static ExperimentConfig parse_string(const std::string& text);

    bool has(const std::string& key) const;
    void set(const std::string& key, std::string value);

    std::string get_str(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Comma-separated integer list, e.g. hidden layer sizes "128" or "64,64".
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

    /// Throws std::runtime_error naming the first key outside the schema.
    void validate_keys() const;

    /// Key-sorted "key=value" lines; the input to hash().
    std::string canonical() const;
    std::uint64_t hash() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

    /// The full key schema (shared across subcommands so one experiment
    /// file can drive the whole pipeline).
    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace hald
