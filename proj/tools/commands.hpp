#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "shred/engine.hpp"

namespace shred::cli {

struct Paths {
    std::filesystem::path out = ".";
    std::optional<std::filesystem::path> checkpoint;

    [[nodiscard]] std::filesystem::path checkpoint_path() const { return checkpoint.value_or(out / "model.shrd"); }
    [[nodiscard]] std::filesystem::path codec_path() const;
};

/// Loads every configured field, places sensors, injects noise and prepares
/// the datasets. `truth` receives the raw arrays keyed by field id.
DataManager build_manager(const RunConfig& cfg, PreparedDatasets& data,
                          std::map<std::string, FieldArray>* truth = nullptr);

std::vector<std::filesystem::path> cmd_generate(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                                std::ostream& log);
TrainReport cmd_train(const RunConfig& cfg, const Paths& paths, std::ostream& log);
EvaluationReport cmd_evaluate(const RunConfig& cfg, const Paths& paths, std::ostream& log);
void cmd_reconstruct(const RunConfig& cfg, const Paths& paths, std::ostream& log);
void cmd_forecast(const RunConfig& cfg, const Paths& paths, std::ostream& log);
void cmd_export_equations(const Paths& paths, std::ostream& log);

int exit_code(ErrorKind kind);

/// Parses arguments and runs one subcommand; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace shred::cli
