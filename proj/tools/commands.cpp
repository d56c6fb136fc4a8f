#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "CLI11.hpp"
#include "shred/error.hpp"
#include "shred/io.hpp"
#include "shred/synthetic.hpp"

namespace shred::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec && fs::is_directory(dir), ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
}

void write_text(const fs::path& path, const std::string& text)
{
    write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string hex(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void announce(std::ostream& log, const fs::path& path, const std::string& id, const FieldArray& array)
{
    log << "wrote " << path.string() << "  id=" << id << "  shape=" << array.shape_string()
        << "  fnv1a=" << hex(fnv1a(serialize_dataset(id, array))) << '\n';
}

std::vector<Sensor> resolve_sensors(const SensorConfig& sc, Index timesteps)
{
    std::vector<Sensor> out;
    for (const auto& c : sc.stationary) out.emplace_back(StationarySensor{c});
    for (const auto& p : sc.mobile) out.emplace_back(MobileSensor{p});
    for (const auto& c : sc.circular) {
        MobileSensor m;
        for (Index t = 0; t < timesteps; ++t) {
            const double angle = static_cast<double>(t) * c.step;
            // truncation toward zero, as an integer cast of the float path
            const auto row = static_cast<long long>(c.center[0] + c.radius * std::sin(angle));
            const auto col = static_cast<long long>(c.center[1] + c.radius * std::sin(angle + std::numbers::pi / 2));
            require(row >= 0 && col >= 0, ErrorKind::Data, "circular sensor path leaves the grid at t=" + std::to_string(t));
            m.path.push_back({static_cast<Index>(row), static_cast<Index>(col)});
        }
        out.emplace_back(std::move(m));
    }
    return out;
}

struct Trained {
    ShredModel model;
    DataManager manager{ManagerOptions{}};
    PreparedDatasets data;
    std::map<std::string, FieldArray> truth;
};

/// Loads checkpoint and codecs, rebuilds the manager and checks that all
/// three agree before anything is computed with them.
void load_trained(const RunConfig& cfg, const Paths& paths, Trained& t)
{
    t.model = load_checkpoint(paths.checkpoint_path());
    const CodecState saved = load_codecs(paths.codec_path());
    t.manager = build_manager(cfg, t.data, &t.truth);
    require(t.model.input_size() == t.manager.sensor_count(), ErrorKind::Data,
            "checkpoint expects " + std::to_string(t.model.input_size()) + " sensor inputs but the config yields " +
                std::to_string(t.manager.sensor_count()));
    require(t.model.output_size() == t.manager.target_width(), ErrorKind::Data,
            "checkpoint outputs " + std::to_string(t.model.output_size()) +
                " target values but the config yields target width " + std::to_string(t.manager.target_width()));
    require(saved.fields.size() == t.manager.fields().size(), ErrorKind::Data,
            "codec file lists " + std::to_string(saved.fields.size()) + " fields, config has " +
                std::to_string(t.manager.fields().size()));
    for (std::size_t i = 0; i < saved.fields.size(); ++i) {
        const auto& a = saved.fields[i];
        const auto& b = t.manager.fields()[i];
        require(a.id == b.id && a.codec.width() == b.codec.width() && a.spatial_shape == b.spatial_shape,
                ErrorKind::Data, "codec for field '" + a.id + "' does not match config field '" + b.id + "'");
    }
    require(serialize_codecs(saved) == serialize_codecs(codec_state(t.manager)), ErrorKind::Data,
            "codec state in '" + paths.codec_path().string() + "' differs from the one rebuilt from the config");
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

fs::path Paths::codec_path() const
{
    fs::path p = checkpoint_path();
    p += ".codecs";
    return p;
}

DataManager build_manager(const RunConfig& cfg, PreparedDatasets& data, std::map<std::string, FieldArray>* truth)
{
    require(!cfg.fields.empty(), ErrorKind::Config, "config: fields: at least one field is required");
    DataManager manager(cfg.manager);
    const Index lead = cfg.manager.parametric ? 2 : 1;
    for (const auto& fc : cfg.fields) {
        DatasetFile file = read_dataset(fc.path);
        const FieldArray& array = file.array;
        require(array.rank() > lead, ErrorKind::Data,
                "field '" + fc.id + "' (" + fc.path.string() + "): shape " + array.shape_string() + " has no spatial axes");
        SensorSource source = NoSensors{};
        switch (fc.sensors.kind) {
        case SensorConfig::Kind::None: break;
        case SensorConfig::Kind::Random: source = RandomSensors{fc.sensors.random_count, fc.sensors.random_seed}; break;
        case SensorConfig::Kind::Explicit:
            source = ExplicitSensors{resolve_sensors(fc.sensors, array.shape()[static_cast<std::size_t>(lead - 1)])};
            break;
        case SensorConfig::Kind::Measured: {
            const DatasetFile m = read_dataset(fc.sensors.measurements);
            require(m.array.rank() == lead + 1, ErrorKind::Data,
                    "measurement file '" + fc.sensors.measurements.string() + "' must have " +
                        std::to_string(lead + 1) + " axes, got " + m.array.shape_string());
            source = MeasuredSensors{m.array.as_matrix(lead)};
            break;
        }
        }
        try {
            manager.add_data(array, fc.id, source, fc.compress);
        } catch (const Error& e) {
            fail(e.kind(), "field '" + fc.id + "': " + e.what());
        }
        if (truth) truth->emplace(fc.id, std::move(file.array));
    }
    if (cfg.noise_std > 0.0) manager.inject_noise(cfg.noise_std, cfg.effective_noise_seed());
    data = manager.prepare();
    return manager;
}

std::vector<fs::path> cmd_generate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log)
{
    require(cfg.has_generate, ErrorKind::Config, "config: generate: section required for the generate command");
    ensure_dir(out_dir);
    const GenerateConfig& g = cfg.generate;
    std::vector<fs::path> written;
    auto emit = [&](const std::string& name, const std::string& id, const FieldArray& array) {
        const fs::path path = out_dir / name;
        write_dataset(path, id, array);
        announce(log, path, id, array);
        written.push_back(path);
        if (g.csv && array.rank() >= 2) {
            fs::path csv = path;
            csv.replace_extension(".csv");
            write_csv(csv, array.as_matrix(array.rank() - 1));
            written.push_back(csv);
        }
    };
    if (g.kind == "traveling_wave") {
        emit(g.file, g.id, traveling_wave(g.rows, g.cols, g.timesteps, g.speed, g.wavelength));
    } else if (g.trajectories == 0) {
        const VelocityField f = double_gyre(g.gyre);
        emit(g.u_file, "U", f.u);
        emit(g.v_file, "V", f.v);
    } else {
        const ParameterSample sample = sample_parameters(g.trajectories, g.epsilon_range, g.omega_range, cfg.seed);
        const ParametricVelocityField f = double_gyre_ensemble(g.gyre, sample);
        emit(g.u_file, "U", f.u);
        emit(g.v_file, "V", f.v);
        emit(g.parameters_file, "mu", f.parameters);
    }
    return written;
}

TrainReport cmd_train(const RunConfig& cfg, const Paths& paths, std::ostream& log)
{
    PreparedDatasets data;
    const DataManager manager = build_manager(cfg, data);
    ShredModel model(cfg.model, manager.sensor_count(), manager.target_width(), cfg.seed);
    const TrainReport report = fit(model, data.train, data.val, cfg.training);

    ensure_dir(paths.out);
    if (paths.checkpoint) ensure_dir(paths.checkpoint->parent_path().empty() ? "." : paths.checkpoint->parent_path());
    save_checkpoint(paths.checkpoint_path(), model);
    save_codecs(paths.codec_path(), codec_state(manager));

    std::string lines;
    for (std::size_t i = 0; i < report.val_errors.size(); ++i)
        lines += ojson{{"epoch", i + 1}, {"val_mse", report.val_errors[i]}}.dump() + '\n';
    lines += ojson{{"best_epoch", report.best_epoch},
                   {"epochs_run", report.val_errors.size()},
                   {"train_mse", report.train_mse},
                   {"val_mse", report.val_mse}}
                 .dump() +
             '\n';
    write_text(paths.out / "train_report.jsonl", lines);

    log << "trained " << report.val_errors.size() << " epochs, best epoch " << report.best_epoch
        << ", val mse " << fmt(report.val_mse) << '\n';
    log << "wrote " << paths.checkpoint_path().string() << "  fnv1a=" << hex(fnv1a(serialize_checkpoint(model)))
        << '\n';
    if (model.sindy()) {
        write_text(paths.out / "equations.txt", format_equations(*model.sindy()));
        write_text(paths.out / "equations.csv", coefficient_csv(*model.sindy()));
        log << format_equations(*model.sindy());
    }
    return report;
}

EvaluationReport cmd_evaluate(const RunConfig& cfg, const Paths& paths, std::ostream& log)
{
    Trained t;
    load_trained(cfg, paths, t);
    const Engine engine(t.manager, t.model);
    const EvaluationReport report = engine.evaluate(t.truth, cfg.evaluate_split);

    ojson doc{{"split", to_string(report.split)}, {"fields", ojson::array()}};
    log << "split " << to_string(report.split) << '\n';
    log << "field        mse          mean_rel_err  snapshots\n";
    for (const auto& [id, m] : report.fields) {
        doc["fields"].push_back({{"id", id},
                                 {"mse", m.mse},
                                 {"mean_relative_error", m.mean_relative_error},
                                 {"snapshots", m.snapshots},
                                 {"zero_norm_excluded", m.zero_norm_excluded}});
        char line[160];
        std::snprintf(line, sizeof line, "%-12s %-12.6g %-13.6g %lld\n", id.c_str(), m.mse, m.mean_relative_error,
                      static_cast<long long>(m.snapshots));
        log << line;
    }
    ensure_dir(paths.out);
    write_text(paths.out / "evaluation.json", doc.dump(2) + '\n');
    if (cfg.max_relative_error)
        for (const auto& [id, m] : report.fields)
            require(m.mean_relative_error <= *cfg.max_relative_error, ErrorKind::Numeric,
                    "field '" + id + "': mean relative error " + fmt(m.mean_relative_error) +
                        " exceeds evaluate.max_relative_error " + fmt(*cfg.max_relative_error));
    return report;
}

void cmd_reconstruct(const RunConfig& cfg, const Paths& paths, std::ostream& log)
{
    Trained t;
    load_trained(cfg, paths, t);
    const Engine engine(t.manager, t.model);
    const FieldReconstruction recon = engine.reconstruct(cfg.reconstruct_split);
    ensure_dir(paths.out);
    for (const auto& f : t.manager.fields()) {
        const fs::path path = paths.out / ("reconstruction_" + f.id + ".shdf");
        write_dataset(path, f.id, recon.at(f.id));
        announce(log, path, f.id, recon.at(f.id));
    }
}

void cmd_forecast(const RunConfig& cfg, const Paths& paths, std::ostream& log)
{
    Trained t;
    load_trained(cfg, paths, t);
    require(!t.manager.parametric(), ErrorKind::Data, "forecasting unsupported in parametric regime");
    require(cfg.forecast_horizon >= 0, ErrorKind::Config, "config: forecast.horizon: must be >= 0");
    const Engine engine(t.manager, t.model);

    const Index start = t.manager.split_times(cfg.forecast_seed_split).second;
    const Matrix seed = engine.sensor_to_latent(t.manager.trajectory_measurements(0).topRows(start));
    const Matrix latent = engine.forecast_latent(seed, cfg.forecast_horizon);
    const FieldReconstruction decoded = engine.decode(latent);

    ensure_dir(paths.out);
    const FieldArray latent_array = FieldArray::from_matrix(latent, {latent.rows(), latent.cols()});
    write_dataset(paths.out / "forecast_latent.shdf", "latent", latent_array);
    announce(log, paths.out / "forecast_latent.shdf", "latent", latent_array);

    ojson doc{{"start", start}, {"horizon", cfg.forecast_horizon}, {"fields", ojson::array()}};
    for (const auto& f : t.manager.fields()) {
        const fs::path path = paths.out / ("forecast_" + f.id + ".shdf");
        write_dataset(path, f.id, decoded.at(f.id));
        announce(log, path, f.id, decoded.at(f.id));
        const Index overlap = std::min(cfg.forecast_horizon, t.manager.timesteps() - start);
        if (overlap > 0) {
            const Matrix truth = t.truth.at(f.id).as_matrix(1).middleRows(start, overlap);
            const FieldMetrics m = snapshot_errors(truth, decoded.at(f.id).as_matrix(1).topRows(overlap));
            doc["fields"].push_back({{"id", f.id},
                                     {"steps_compared", overlap},
                                     {"mse", m.mse},
                                     {"mean_relative_error", m.mean_relative_error}});
            log << "forecast " << f.id << ": mean relative error " << fmt(m.mean_relative_error) << " over "
                << overlap << " steps\n";
        }
    }
    write_text(paths.out / "forecast.json", doc.dump(2) + '\n');
}

void cmd_export_equations(const Paths& paths, std::ostream& log)
{
    const ShredModel model = load_checkpoint(paths.checkpoint_path());
    require(model.forecaster_kind() == ForecasterKind::Sindy && model.sindy().has_value(), ErrorKind::Data,
            "checkpoint '" + paths.checkpoint_path().string() + "' has no fitted SINDy forecaster");
    ensure_dir(paths.out);
    write_text(paths.out / "equations.txt", format_equations(*model.sindy()));
    write_text(paths.out / "equations.csv", coefficient_csv(*model.sindy()));
    log << format_equations(*model.sindy());
}

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::Numeric: return 4;
    case ErrorKind::Io: return 5;
    }
    return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Shallow recurrent decoder: sparse-sensor reconstruction and latent forecasting"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string checkpoint;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "JSON run configuration");
        if (needs_config) c->required();
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--checkpoint", checkpoint, "checkpoint path (default OUT/model.shrd)");
    };
    add_common(app.add_subcommand("generate", "write synthetic dataset files"), true);
    add_common(app.add_subcommand("train", "fit a model and write checkpoint, codecs and report"), true);
    add_common(app.add_subcommand("evaluate", "per-field error of a trained model on a split"), true);
    add_common(app.add_subcommand("reconstruct", "write full-state reconstructions of a split"), true);
    add_common(app.add_subcommand("forecast", "roll the latent forecaster forward and decode"), true);
    add_common(app.add_subcommand("export-equations", "write the learned SINDy equations"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        Paths paths;
        paths.out = out_dir;
        if (!checkpoint.empty()) paths.checkpoint = checkpoint;
        if (name == "export-equations") {
            cmd_export_equations(paths, out);
            return 0;
        }
        RunConfig cfg = load_config(config_path);
        if (seed) cfg.set_seed(*seed);
        if (name == "generate") cmd_generate(cfg, out_dir, out);
        else if (name == "train") cmd_train(cfg, paths, out);
        else if (name == "evaluate") cmd_evaluate(cfg, paths, out);
        else if (name == "reconstruct") cmd_reconstruct(cfg, paths, out);
        else if (name == "forecast") cmd_forecast(cfg, paths, out);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace shred::cli
