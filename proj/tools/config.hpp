#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shred/data_manager.hpp"
#include "shred/model.hpp"
#include "shred/synthetic.hpp"
#include "shred/training.hpp"

namespace shred::cli {

/// Sensors as written in a config; resolved against the data at load time.
struct CircularPath {
    std::vector<double> center; // row, col
    double radius = 0.0;
    double step = 0.0;          // radians per time step
};

struct SensorConfig {
    enum class Kind { None, Random, Explicit, Measured } kind = Kind::None;
    Index random_count = 0;
    std::optional<std::uint64_t> random_seed;
    std::vector<Coordinate> stationary;
    std::vector<std::vector<Coordinate>> mobile;
    std::vector<CircularPath> circular;
    std::filesystem::path measurements;
};

struct FieldConfig {
    std::filesystem::path path;
    std::string id;
    SensorConfig sensors;
    Compression compress;
};

struct GenerateConfig {
    std::string kind = "traveling_wave"; // or "double_gyre"
    Index rows = 64;
    Index cols = 64;
    Index timesteps = 500;
    double speed = 0.5;
    double wavelength = 32.0;
    std::string id = "X";
    std::string file = "X.shdf";

    DoubleGyreParams gyre;
    Index trajectories = 0; // 0: a single trajectory with gyre.epsilon / gyre.omega
    std::pair<double, double> epsilon_range = kDefaultEpsilonRange;
    std::pair<double, double> omega_range = kDefaultOmegaRange;
    std::string u_file = "U.shdf";
    std::string v_file = "V.shdf";
    std::string parameters_file = "mu.shdf";
    bool csv = false;
};

struct RunConfig {
    std::uint64_t seed = 0;
    ManagerOptions manager;
    double noise_std = 0.0;
    std::optional<std::uint64_t> noise_seed;
    std::vector<FieldConfig> fields;
    ModelConfig model;
    TrainConfig training;
    GenerateConfig generate;
    bool has_generate = false;
    Split evaluate_split = Split::Test;
    std::optional<double> max_relative_error;
    Split reconstruct_split = Split::Test;
    Index forecast_horizon = 50;
    Split forecast_seed_split = Split::Val;
    std::filesystem::path base_dir;

    /// Applies a top-level seed to every seeded component.
    void set_seed(std::uint64_t value);
    [[nodiscard]] std::uint64_t effective_noise_seed() const { return noise_seed.value_or(seed + 1); }
};

/// Validates and converts a parsed config. Unknown keys and ill-typed values
/// raise config errors naming the offending path (e.g. "training.lr").
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

} // namespace shred::cli
