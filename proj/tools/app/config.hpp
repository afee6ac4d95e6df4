#pragma once

#include "pathflow/functionals.hpp"
#include "pathflow/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathflow::app {

using Json = nlohmann::ordered_json;

// Invalid configuration; field() is the dotted path of the offending entry.
class config_error : public std::runtime_error {
public:
    config_error(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// JSON or TOML by extension.
Json load_config_file(const std::filesystem::path& file);

// Typed access by dotted path; remembers which leaves were read.
class Reader {
public:
    explicit Reader(const Json& root) : root_(root) {}

    bool has(const std::string& path) const;
    double real(const std::string& path) const;
    double real(const std::string& path, double fallback) const;
    std::int64_t integer(const std::string& path, std::int64_t fallback) const;
    std::size_t count(const std::string& path, std::size_t fallback, std::size_t min = 1) const;
    bool flag(const std::string& path, bool fallback) const;
    std::string text(const std::string& path, const std::string& fallback) const;
    std::vector<double> reals(const std::string& path) const;
    std::vector<std::size_t> counts(const std::string& path) const;
    const Json& raw(const std::string& path) const;

    // Throws config_error for the first leaf never read.
    void reject_unknown() const;
    [[noreturn]] static void fail(const std::string& path, const std::string& what) { throw config_error(path, what); }

private:
    const Json* find(const std::string& path) const;
    const Json& need(const std::string& path) const;

    const Json& root_;
    mutable std::set<std::string> used_;
};

enum class Subcommand { simulate, localtime, variation, verify };

std::string to_string(Subcommand s);
Subcommand subcommand_from_string(const std::string& s);

struct Gates {
    std::map<std::string, double> limits;
    std::map<std::string, bool> switches;
};

struct LocaltimeSettings {
    std::string estimator = "occupation";  // occupation | time_weighted | downcrossings
    std::vector<std::string> test_functions{"one"};
    bool holder = false;
    std::size_t per_eps = 4;
    double margin_eps = 3.0;
    std::size_t max_levels = 8192;
    std::size_t max_time_points = 4096;
    bool field_csv = true;
};

struct VariationSettings {
    std::size_t pair_budget = 1000000;
    std::size_t rectangle_budget = 50000000;
    bool joint = true;
};

struct ExperimentConfig {
    Subcommand subcommand = Subcommand::verify;
    ProcessSpec process;
    std::size_t n_steps = 1024;
    std::uint64_t seed0 = 0;
    std::size_t n_paths = 1;
    std::vector<std::size_t> ladder;
    double eps_c = 1.0;
    double eps_exponent = 0.4;
    Json functional_block;
    std::function<FunctionalSpec()> functional;
    EnsembleConfig ensemble;
    std::optional<Formula> compare_with;
    LocaltimeSettings localtime;
    VariationSettings variation;
    Gates gates;
    bool write_path_csv = true;
    bool write_path_binary = false;
    std::size_t max_path_files = 16;
};

// Registry by name with a parameter block such as {"name": "partial_lookback", "lambda": 1.2}.
std::function<FunctionalSpec()> functional_from(const Reader& r, const std::string& prefix);

// subcommand: the CLI choice, checked against the file when the file names one.
ExperimentConfig parse_config(const Json& doc, std::optional<Subcommand> subcommand = std::nullopt);

}  // namespace pathflow::app
