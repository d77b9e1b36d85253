// Declarative experiment configuration: a line-oriented key-value document
// with repeated 'strategy =' lines that expand into a cartesian grid.
#pragma once

#include "rinfer/gbt.hpp"
#include "rinfer/kickout_protocol.hpp"
#include "rinfer/strategies.hpp"
#include "rinfer/synthgen.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rinfer {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& source, int line_number, const std::string& message);
    int line = 0;
};

struct DataSourceConfig {
    enum class Kind { Synthetic, Csv };
    Kind kind = Kind::Synthetic;
    GeneratorConfig synthetic;
    std::filesystem::path accepts_csv;
    std::filesystem::path rejects_csv;
    std::filesystem::path unbiased_csv;
    std::string label_column = "label";
    std::string id_column = "id";
};

struct ExperimentConfig {
    DataSourceConfig data;
    std::vector<StrategySpec> strategies;
    int k_folds = 4;
    int n_bootstraps = 50;
    KickoutProtocolConfig kickout;
    GbtParams scorer;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 1;

    /// Sets the master seed and re-derives the generator seed from it.
    void reseed(std::uint64_t master);
    void validate() const;
};

/// Parses a config document; errors carry source name and line number.
ExperimentConfig parse_experiment_config(std::string_view text, const std::string& source_name);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Expands one 'strategy =' value ("kind key=v1,v2 ...") into concrete specs.
std::vector<StrategySpec> expand_strategy_grid(std::string_view value);

/// A fully commented config with every recognized key at its default; also
/// serves as the built-in default experiment.
std::string experiment_config_template();

}  // namespace rinfer
