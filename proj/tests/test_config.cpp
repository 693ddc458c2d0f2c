#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hald/binio.hpp"
#include "hald/config.hpp"

using namespace hald;
namespace fs = std::filesystem;

TEST_CASE("parse_string: comments, blanks, and whitespace trimming") {
    ExperimentConfig cfg = ExperimentConfig::parse_string(
        "# experiment\n"
        "\n"
        "  seed = 42  \n"
        "tau=3.0\n"
        "\t# trailing comment line\n"
        "hidden = 64,64\n");
    CHECK(cfg.entries().size() == 3);
    CHECK(cfg.has("seed"));
    CHECK(cfg.get_str("tau", "") == "3.0");
    CHECK_FALSE(cfg.has("lr"));
}

TEST_CASE("parse_string rejects malformed lines") {
    CHECK_THROWS_AS(ExperimentConfig::parse_string("seed 42\n"), std::runtime_error);
    CHECK_THROWS_AS(ExperimentConfig::parse_string(" = 42\n"), std::runtime_error);
    CHECK_THROWS_AS(ExperimentConfig::parse_string("seed=1\nseed=2\n"), std::runtime_error);
}

TEST_CASE("typed getters: fallbacks, conversions, and strictness") {
    ExperimentConfig cfg = ExperimentConfig::parse_string(
        "seed = -5\n"
        "tau = 2.5\n"
        "bits = 16\n"
        "sli = yes\n"
        "alpha = off\n"
        "hidden = 128, 64 ,32\n"
        "optimizer = adamw\n"
        "lr = 1e-3\n"
        "steps_per_epoch = 12x\n"
        "batch = 3.5\n"
        "momentum = nope\n"
        "n_total = 1,,2\n"
        "n_soft = a,b\n");

    CHECK(cfg.get_int("seed", 0) == -5);
    CHECK(cfg.get_int("missing", 77) == 77);
    CHECK(cfg.get_double("tau", 0.0) == 2.5);
    CHECK(cfg.get_double("lr", 0.0) == 1e-3);
    CHECK(cfg.get_double("missing", 1.5) == 1.5);
    CHECK(cfg.get_bool("sli", false));
    CHECK_FALSE(cfg.get_bool("alpha", true));
    CHECK(cfg.get_bool("missing", true));
    CHECK(cfg.get_int_list("hidden", {}) == std::vector<int>{128, 64, 32});
    CHECK(cfg.get_int_list("missing", {7}) == std::vector<int>{7});
    // Integer values parse as doubles but not vice versa.
    CHECK(cfg.get_double("bits", 0.0) == 16.0);

    CHECK_THROWS_AS(cfg.get_int("steps_per_epoch", 0), std::runtime_error);
    CHECK_THROWS_AS(cfg.get_int("batch", 0), std::runtime_error);
    CHECK_THROWS_AS(cfg.get_double("momentum", 0.0), std::runtime_error);
    CHECK_THROWS_AS(cfg.get_bool("tau", false), std::runtime_error);
    CHECK_THROWS_AS(cfg.get_int_list("n_total", {}), std::runtime_error);
    CHECK_THROWS_AS(cfg.get_int_list("n_soft", {}), std::runtime_error);
}

TEST_CASE("validate_keys accepts the schema and names the first stray key") {
    ExperimentConfig ok = ExperimentConfig::parse_string("seed=1\nnum_classes=10\nlr=0.001\n");
    CHECK_NOTHROW(ok.validate_keys());

    ExperimentConfig bad = ExperimentConfig::parse_string("seed=1\nsed=2\n");
    CHECK_THROWS_WITH_AS(bad.validate_keys(), "config: unknown key 'sed'", std::runtime_error);

    // Every documented key passes validation.
    ExperimentConfig all;
    for (const std::string& key : ExperimentConfig::known_keys()) all.set(key, "1");
    CHECK_NOTHROW(all.validate_keys());
}

TEST_CASE("canonical rendering is key-sorted and drives the hash") {
    ExperimentConfig a = ExperimentConfig::parse_string("tau=2\nseed=1\n");
    ExperimentConfig b = ExperimentConfig::parse_string("seed=1\ntau=2\n");
    CHECK(a.canonical() == "seed=1\ntau=2\n");
    CHECK(a.canonical() == b.canonical());
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() == fnv1a64(a.canonical()));

    b.set("tau", "3");
    CHECK(a.hash() != b.hash());
    // set() overwrites, unlike duplicate lines in a file.
    CHECK(b.get_str("tau", "") == "3");
}

TEST_CASE("parse_file round-trips and reports missing files as IO errors") {
    const fs::path dir = fs::temp_directory_path() / "hald_config_test";
    fs::create_directories(dir);
    const fs::path path = dir / "exp.cfg";
    {
        std::ofstream out(path);
        out << "# run\nseed = 9\nhidden = 32,16\n";
    }
    ExperimentConfig cfg = ExperimentConfig::parse_file(path);
    CHECK(cfg.get_int("seed", 0) == 9);
    CHECK(cfg.get_int_list("hidden", {}) == std::vector<int>{32, 16});

    try {
        ExperimentConfig::parse_file(dir / "nope.cfg");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(e.kind() == IoErrorKind::open_failed);
    }
    fs::remove_all(dir);
}
