#include "rinfer/config.hpp"

#include "rinfer/rng.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rinfer {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    while (true) {
        const std::size_t pos = s.find(sep);
        if (pos == std::string_view::npos) {
            parts.push_back(s);
            return parts;
        }
        parts.push_back(s.substr(0, pos));
        s.remove_prefix(pos + 1);
    }
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) tokens.push_back(s.substr(i, j - i));
        i = j;
    }
    return tokens;
}

bool to_scalar(std::string_view s, Scalar& out) {
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

bool to_i64(std::string_view s, long long& out) {
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

bool to_u64(std::string_view s, std::uint64_t& out) {
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line_number, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line_number) + ": " + message),
      line(line_number) {}

std::vector<StrategySpec> expand_strategy_grid(std::string_view value) {
    const std::vector<std::string_view> tokens = split_whitespace(value);
    if (tokens.empty()) throw std::invalid_argument("strategy line is empty");
    const StrategyKind kind = strategy_kind_from_string(std::string(tokens[0]));

    std::vector<std::pair<std::string, std::vector<Scalar>>> axes;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
        const std::size_t eq = tokens[t].find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("expected 'name=value[,value...]' but got '" +
                                        std::string(tokens[t]) + "'");
        }
        const std::string key{trim(tokens[t].substr(0, eq))};
        const std::string_view list = tokens[t].substr(eq + 1);
        for (const auto& [existing, values] : axes) {
            if (existing == key) {
                throw std::invalid_argument("parameter '" + key + "' listed twice");
            }
        }
        std::vector<Scalar> values;
        for (const std::string_view item : split_on(list, ',')) {
            Scalar v = 0;
            if (!to_scalar(trim(item), v)) {
                throw std::invalid_argument("bad number '" + std::string(item) +
                                            "' in parameter '" + key + "'");
            }
            values.push_back(v);
        }
        if (values.empty()) throw std::invalid_argument("parameter '" + key + "' has no values");
        axes.emplace_back(key, std::move(values));
    }

    std::vector<StrategySpec> grid(1);
    grid[0].kind = kind;
    for (const auto& [key, values] : axes) {
        std::vector<StrategySpec> next;
        next.reserve(grid.size() * values.size());
        for (const StrategySpec& base : grid) {
            for (const Scalar v : values) {
                StrategySpec spec = base;
                if (key == "filter_beta") {  // shorthand: same band on both tails
                    spec.params["filter_beta_bottom"] = v;
                    spec.params["filter_beta_top"] = v;
                } else {
                    spec.params[key] = v;
                }
                next.push_back(std::move(spec));
            }
        }
        grid = std::move(next);
    }
    for (const StrategySpec& spec : grid) spec.validate();
    return grid;
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& source_name) {
    ExperimentConfig cfg;
    std::uint64_t master = cfg.seed;
    std::set<std::string> seen;
    std::map<std::string, int> key_lines;

    int line_no = 0;
    std::size_t cursor = 0;
    while (cursor <= text.size()) {
        const std::size_t nl = text.find('\n', cursor);
        std::string_view raw = text.substr(
            cursor, nl == std::string_view::npos ? text.size() - cursor : nl - cursor);
        cursor = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const std::size_t hash = raw.find('#'); hash != std::string_view::npos) {
            raw = raw.substr(0, hash);
        }
        const std::string_view line = trim(raw);
        if (line.empty()) continue;

        const auto fail = [&](const std::string& msg) {
            return ConfigError(source_name, line_no, msg);
        };

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw fail("expected 'key = value'");
        const std::string key{trim(line.substr(0, eq))};
        const std::string value{trim(line.substr(eq + 1))};
        if (key.empty()) throw fail("missing key before '='");
        if (value.empty()) throw fail("empty value for '" + key + "'");

        if (key == "strategy") {
            try {
                auto specs = expand_strategy_grid(value);
                cfg.strategies.insert(cfg.strategies.end(), specs.begin(), specs.end());
            } catch (const std::invalid_argument& e) {
                throw fail(e.what());
            }
            continue;
        }
        if (!seen.insert(key).second) throw fail("duplicate key '" + key + "'");
        key_lines[key] = line_no;

        const auto scalar = [&]() {
            Scalar v = 0;
            if (!to_scalar(value, v)) throw fail("expected a number for '" + key + "'");
            return v;
        };
        const auto integer = [&](long long lo) {
            long long v = 0;
            if (!to_i64(value, v)) throw fail("expected an integer for '" + key + "'");
            if (v < lo) {
                throw fail("'" + key + "' must be at least " + std::to_string(lo));
            }
            return v;
        };
        const auto rate = [&]() {
            const Scalar v = scalar();
            if (!(v > 0 && v < 1)) throw fail("'" + key + "' must lie in (0,1)");
            return v;
        };

        GeneratorConfig& synth = cfg.data.synthetic;
        if (key == "data") {
            if (value == "synthetic") {
                cfg.data.kind = DataSourceConfig::Kind::Synthetic;
            } else if (value == "csv") {
                cfg.data.kind = DataSourceConfig::Kind::Csv;
            } else {
                throw fail("'data' must be 'synthetic' or 'csv'");
            }
        } else if (key == "n_population") {
            synth.n_population = static_cast<Index>(integer(20));
        } else if (key == "n_features") {
            synth.n_features = static_cast<Index>(integer(1));
        } else if (key == "n_informative") {
            synth.n_informative = static_cast<Index>(integer(1));
        } else if (key == "noise_scale") {
            const Scalar v = scalar();
            if (v < 0) throw fail("'noise_scale' must be non-negative");
            synth.noise_scale = v;
        } else if (key == "legacy_feature_subset") {
            synth.legacy_feature_subset = static_cast<Index>(integer(1));
        } else if (key == "acceptance_rate") {
            synth.acceptance_rate = rate();
        } else if (key == "unbiased_fraction") {
            synth.unbiased_fraction = rate();
        } else if (key == "target_accept_bad_rate") {
            synth.target_accept_bad_rate = rate();
        } else if (key == "accepts_csv") {
            cfg.data.accepts_csv = value;
        } else if (key == "rejects_csv") {
            cfg.data.rejects_csv = value;
        } else if (key == "unbiased_csv") {
            cfg.data.unbiased_csv = value;
        } else if (key == "label_column") {
            cfg.data.label_column = value;
        } else if (key == "id_column") {
            cfg.data.id_column = value;
        } else if (key == "k_folds") {
            cfg.k_folds = static_cast<int>(integer(2));
        } else if (key == "n_bootstraps") {
            cfg.n_bootstraps = static_cast<int>(integer(1));
        } else if (key == "seed") {
            if (!to_u64(value, master)) throw fail("expected an unsigned integer for 'seed'");
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "kickout_mu") {
            cfg.kickout.mu = rate();
        } else if (key == "kickout_accept_split") {
            cfg.kickout.accept_split = rate();
        } else if (key == "kickout_reject_split") {
            cfg.kickout.reject_split = rate();
        } else if (key == "scorer_max_trees") {
            cfg.scorer.max_trees = static_cast<int>(integer(1));
        } else if (key == "scorer_early_stopping_rounds") {
            cfg.scorer.early_stopping_rounds = static_cast<int>(integer(0));
        } else if (key == "scorer_learning_rate") {
            const Scalar v = scalar();
            if (!(v > 0)) throw fail("'scorer_learning_rate' must be positive");
            cfg.scorer.learning_rate = v;
        } else if (key == "scorer_max_depth") {
            cfg.scorer.max_depth = static_cast<int>(integer(1));
        } else if (key == "scorer_min_child_weight") {
            const Scalar v = scalar();
            if (v < 0) throw fail("'scorer_min_child_weight' must be non-negative");
            cfg.scorer.min_child_weight = v;
        } else if (key == "scorer_subsample") {
            const Scalar v = scalar();
            if (!(v > 0 && v <= 1)) throw fail("'scorer_subsample' must lie in (0,1]");
            cfg.scorer.subsample = v;
        } else if (key == "scorer_reg_lambda") {
            const Scalar v = scalar();
            if (v < 0) throw fail("'scorer_reg_lambda' must be non-negative");
            cfg.scorer.reg_lambda = v;
        } else {
            throw fail("unknown key '" + key + "'");
        }
    }

    const auto line_of = [&key_lines](const std::string& key) {
        const auto it = key_lines.find(key);
        return it == key_lines.end() ? 1 : it->second;
    };
    const GeneratorConfig& synth = cfg.data.synthetic;
    if (synth.n_informative > synth.n_features) {
        throw ConfigError(source_name, line_of("n_informative"),
                          "n_informative exceeds n_features");
    }
    if (synth.legacy_feature_subset > synth.n_informative) {
        throw ConfigError(source_name, line_of("legacy_feature_subset"),
                          "legacy_feature_subset exceeds n_informative");
    }
    if (cfg.data.kind == DataSourceConfig::Kind::Csv) {
        const auto need = [&](const char* name, const std::filesystem::path& path) {
            if (path.empty()) {
                throw ConfigError(source_name, line_of("data"),
                                  std::string("data = csv requires '") + name + "'");
            }
        };
        need("accepts_csv", cfg.data.accepts_csv);
        need("rejects_csv", cfg.data.rejects_csv);
        need("unbiased_csv", cfg.data.unbiased_csv);
    }
    cfg.reseed(master);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str(), path.string());
}

void ExperimentConfig::reseed(std::uint64_t master) {
    seed = master;
    data.synthetic.seed = derive_seed(master, "synth");
}

void ExperimentConfig::validate() const {
    if (k_folds < 2) throw std::invalid_argument("k_folds must be at least 2");
    if (n_bootstraps < 1) throw std::invalid_argument("n_bootstraps must be at least 1");
    kickout.validate();
    scorer.validate();
    if (data.kind == DataSourceConfig::Kind::Synthetic) {
        data.synthetic.validate();
    } else if (data.accepts_csv.empty() || data.rejects_csv.empty() ||
               data.unbiased_csv.empty()) {
        throw std::invalid_argument("csv data source requires all three csv paths");
    }
    for (const StrategySpec& spec : strategies) spec.validate();
}

std::string experiment_config_template() {
    return R"(# Experiment configuration. Lines are 'key = value'; '#' starts a comment.

# --- data source -------------------------------------------------------------
data = synthetic                # synthetic | csv
n_population = 6000
n_features = 30
n_informative = 12
noise_scale = 0.25
legacy_feature_subset = 8
acceptance_rate = 0.66
unbiased_fraction = 0.05
target_accept_bad_rate = 0.39

# For data = csv, supply instead:
# accepts_csv = data/accepts.csv
# rejects_csv = data/rejects.csv
# unbiased_csv = data/unbiased.csv
# label_column = label
# id_column = id

# --- evaluation protocol -----------------------------------------------------
k_folds = 4
n_bootstraps = 50
seed = 1
out_dir = out

kickout_mu = 0.5
kickout_accept_split = 0.5
kickout_reject_split = 0.5

# --- scorer ------------------------------------------------------------------
scorer_max_trees = 500
scorer_early_stopping_rounds = 25
scorer_learning_rate = 0.1
scorer_max_depth = 3
scorer_min_child_weight = 1
scorer_subsample = 1
scorer_reg_lambda = 1

# --- strategy grid -----------------------------------------------------------
# Repeated 'strategy =' lines. Comma lists expand to a cartesian grid;
# 'filter_beta' is shorthand for equal bottom and top filtering bands.
strategy = ignore_rejects
strategy = label_all_bad
strategy = hard_cutoff threshold=0.3,0.4,0.5
strategy = parcelling multiplier=1,2,3 n_batches=10
strategy = cv_voting n_folds=2,5,10 threshold=0.3
strategy = self_learning percentage=0.005,0.01,0.02 max_iterations=1
strategy = shallow_self_learning alpha=0.02 theta=1,5,10,20 filter_beta=0,2 max_iterations=1
strategy = shallow_self_learning alpha=0.01 theta=10,20 filter_beta=2 max_iterations=1
strategy = shallow_self_learning alpha=0.03 theta=1,15 filter_beta=2 max_iterations=1
)";
}

}  // namespace rinfer
