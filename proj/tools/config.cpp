#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "shred/error.hpp"

namespace shred::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

[[noreturn]] void bad(const std::string& path, const std::string& msg)
{
    fail(ErrorKind::Config, "config: " + (path.empty() ? std::string("<root>") : path) + ": " + msg);
}

Index to_index(const json& j, const std::string& path, Index min = 0)
{
    if (!j.is_number_integer()) bad(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < min) bad(path, "must be >= " + std::to_string(min));
    return static_cast<Index>(v);
}

std::uint64_t to_seed(const json& j, const std::string& path)
{
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
    bad(path, "expected a non-negative integer seed");
}

double to_double(const json& j, const std::string& path)
{
    if (!j.is_number()) bad(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(path, "must be finite");
    return v;
}

std::pair<double, double> to_range(const json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 2) bad(path, "expected [low, high]");
    const double lo = to_double(j[0], path + "[0]");
    const double hi = to_double(j[1], path + "[1]");
    if (lo > hi) bad(path, "low exceeds high");
    return {lo, hi};
}

Coordinate to_coordinate(const json& j, const std::string& path)
{
    if (!j.is_array() || j.empty()) bad(path, "expected a coordinate array such as [row, col]");
    Coordinate c;
    for (std::size_t i = 0; i < j.size(); ++i) c.push_back(to_index(j[i], path + "[" + std::to_string(i) + "]"));
    return c;
}

Split to_split(const json& j, const std::string& path)
{
    if (!j.is_string()) bad(path, "expected \"train\", \"val\" or \"test\"");
    try {
        return split_from_string(j.get<std::string>());
    } catch (const Error& e) {
        bad(path, e.what());
    }
}

/// A JSON object whose keys are consumed one by one; finish() rejects
/// anything left over.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j.is_object()) bad(path_, "expected an object");
    }

    const json* find(const std::string& key)
    {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }
    [[nodiscard]] std::string at(const std::string& key) const { return join(path_, key); }

    Index integer(const std::string& key, Index def, Index min = 0)
    {
        const json* v = find(key);
        return v ? to_index(*v, at(key), min) : def;
    }
    double number(const std::string& key, double def)
    {
        const json* v = find(key);
        return v ? to_double(*v, at(key)) : def;
    }
    bool flag(const std::string& key, bool def)
    {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_boolean()) bad(at(key), "expected true or false");
        return v->get<bool>();
    }
    std::string text(const std::string& key, const std::string& def)
    {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_string()) bad(at(key), "expected a string");
        return v->get<std::string>();
    }

    void finish() const
    {
        for (const auto& item : j_.items())
            if (!used_.count(item.key())) bad(at(item.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

SensorConfig parse_sensors(const json& j, const std::string& path, const std::filesystem::path& base)
{
    SensorConfig out;
    if (j.is_number_integer()) {
        out.kind = SensorConfig::Kind::Random;
        out.random_count = to_index(j, path, 1);
        return out;
    }
    Section s(j, path);
    if (const json* r = s.find("random")) {
        out.kind = SensorConfig::Kind::Random;
        out.random_count = to_index(*r, s.at("random"), 1);
        if (const json* seed = s.find("seed")) out.random_seed = to_seed(*seed, s.at("seed"));
        s.finish();
        return out;
    }
    if (const json* m = s.find("measurements")) {
        if (!m->is_string()) bad(s.at("measurements"), "expected a dataset file path");
        out.kind = SensorConfig::Kind::Measured;
        out.measurements = base / m->get<std::string>();
        s.finish();
        return out;
    }
    out.kind = SensorConfig::Kind::Explicit;
    if (const json* st = s.find("stationary")) {
        if (!st->is_array()) bad(s.at("stationary"), "expected a list of coordinates");
        for (std::size_t i = 0; i < st->size(); ++i)
            out.stationary.push_back(to_coordinate((*st)[i], s.at("stationary") + "[" + std::to_string(i) + "]"));
    }
    if (const json* mo = s.find("mobile")) {
        if (!mo->is_array()) bad(s.at("mobile"), "expected a list of coordinate paths");
        for (std::size_t i = 0; i < mo->size(); ++i) {
            const std::string p = s.at("mobile") + "[" + std::to_string(i) + "]";
            if (!(*mo)[i].is_array() || (*mo)[i].empty()) bad(p, "expected a non-empty list of coordinates");
            std::vector<Coordinate> path_coords;
            for (std::size_t t = 0; t < (*mo)[i].size(); ++t)
                path_coords.push_back(to_coordinate((*mo)[i][t], p + "[" + std::to_string(t) + "]"));
            out.mobile.push_back(std::move(path_coords));
        }
    }
    if (const json* ci = s.find("circular")) {
        if (!ci->is_array()) bad(s.at("circular"), "expected a list of circular paths");
        for (std::size_t i = 0; i < ci->size(); ++i) {
            Section c((*ci)[i], s.at("circular") + "[" + std::to_string(i) + "]");
            CircularPath cp;
            const json* center = c.find("center");
            if (!center || !center->is_array() || center->size() != 2) bad(c.at("center"), "expected [row, col]");
            cp.center = {to_double((*center)[0], c.at("center") + "[0]"), to_double((*center)[1], c.at("center") + "[1]")};
            cp.radius = c.number("radius", 0.0);
            cp.step = c.number("step", 0.5);
            c.finish();
            out.circular.push_back(std::move(cp));
        }
    }
    s.finish();
    if (out.stationary.empty() && out.mobile.empty() && out.circular.empty())
        bad(path, "no sensors listed (use \"random\", \"measurements\", \"stationary\", \"mobile\" or \"circular\")");
    return out;
}

Compression parse_compress(const json& j, const std::string& path)
{
    if (j.is_boolean()) {
        if (j.get<bool>()) bad(path, "true is ambiguous; give {\"svd\": modes} or {\"fourier\": [cx, cy]}");
        return NoCompression{};
    }
    if (j.is_number_integer()) return SvdCompression{to_index(j, path, 1)};
    Section s(j, path);
    const json* svd = s.find("svd");
    const json* fourier = s.find("fourier");
    s.finish();
    if ((svd != nullptr) == (fourier != nullptr)) bad(path, "give exactly one of \"svd\" or \"fourier\"");
    if (svd) return SvdCompression{to_index(*svd, s.at("svd"), 1)};
    if (!fourier->is_array() || fourier->size() != 2) bad(s.at("fourier"), "expected [cutoff_x, cutoff_y]");
    return FourierCompression{static_cast<int>(to_index((*fourier)[0], s.at("fourier") + "[0]")),
                              static_cast<int>(to_index((*fourier)[1], s.at("fourier") + "[1]"))};
}

void parse_training(Section& s, TrainConfig& t)
{
    t.epochs = s.integer("epochs", t.epochs, 1);
    t.batch_size = s.integer("batch_size", t.batch_size, 1);
    t.learning_rate = s.number("lr", t.learning_rate);
    t.patience = s.integer("patience", t.patience, 1);
}

template <class F>
void checked(const std::string& path, F&& validate)
{
    try {
        validate();
    } catch (const Error& e) {
        bad(path, e.what());
    }
}

} // namespace

void RunConfig::set_seed(std::uint64_t value)
{
    seed = value;
    manager.seed = value;
    training.seed = value;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir)
{
    RunConfig cfg;
    cfg.base_dir = base_dir;
    Section root(doc, "");

    std::uint64_t seed = 0;
    if (const json* v = root.find("seed")) seed = to_seed(*v, "seed");

    if (const json* m = root.find("manager")) {
        Section s(*m, "manager");
        cfg.manager.lags = s.integer("lags", cfg.manager.lags, 1);
        cfg.manager.train_size = s.number("train_size", cfg.manager.train_size);
        cfg.manager.val_size = s.number("val_size", cfg.manager.val_size);
        cfg.manager.test_size = s.number("test_size", cfg.manager.test_size);
        cfg.manager.parametric = s.flag("parametric", false);
        cfg.noise_std = s.number("noise_std", 0.0);
        if (cfg.noise_std < 0.0) bad(s.at("noise_std"), "must be >= 0");
        if (const json* ns = s.find("noise_seed")) cfg.noise_seed = to_seed(*ns, s.at("noise_seed"));
        s.finish();
        checked("manager", [&] { cfg.manager.validate(); });
    }

    if (const json* f = root.find("fields")) {
        if (!f->is_array()) bad("fields", "expected a list of field entries");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < f->size(); ++i) {
            const std::string path = "fields[" + std::to_string(i) + "]";
            Section s((*f)[i], path);
            FieldConfig fc;
            const json* p = s.find("path");
            if (!p || !p->is_string()) bad(s.at("path"), "expected a dataset file path");
            fc.path = base_dir / p->get<std::string>();
            fc.id = s.text("id", "");
            if (fc.id.empty()) bad(s.at("id"), "required, non-empty");
            if (!ids.insert(fc.id).second) bad(s.at("id"), "duplicate field id '" + fc.id + "'");
            if (const json* sensors = s.find("sensors")) fc.sensors = parse_sensors(*sensors, s.at("sensors"), base_dir);
            if (const json* compress = s.find("compress")) fc.compress = parse_compress(*compress, s.at("compress"));
            s.finish();
            cfg.fields.push_back(std::move(fc));
        }
    }

    if (const json* m = root.find("model")) {
        Section s(*m, "model");
        checked(s.at("sequence_model"), [&] { cfg.model.cell = cell_kind_from_string(s.text("sequence_model", "LSTM")); });
        cfg.model.hidden_size = s.integer("hidden_size", 0, 1);
        cfg.model.num_layers = s.integer("num_layers", cfg.model.num_layers, 1);
        if (const json* d = s.find("decoder_layers")) {
            if (!d->is_array()) bad(s.at("decoder_layers"), "expected a list of layer widths");
            cfg.model.decoder_layers.clear();
            for (std::size_t i = 0; i < d->size(); ++i)
                cfg.model.decoder_layers.push_back(
                    to_index((*d)[i], s.at("decoder_layers") + "[" + std::to_string(i) + "]", 1));
        }
        s.finish();
    }

    if (const json* fo = root.find("forecaster")) {
        Section s(*fo, "forecaster");
        const std::string type = s.text("type", "none");
        if (type == "sindy") {
            SindyForecasterSpec spec;
            spec.poly_order = static_cast<int>(s.integer("poly_order", spec.poly_order));
            spec.include_sine = s.flag("include_sine", spec.include_sine);
            spec.dt = s.number("dt", spec.dt);
            if (spec.dt <= 0.0) bad(s.at("dt"), "must be positive");
            cfg.model.forecaster = spec;
        } else if (type == "lstm" || type == "gru") {
            RecurrentForecasterSpec spec;
            spec.cell = type == "lstm" ? CellKind::Lstm : CellKind::Gru;
            spec.window = s.integer("window", spec.window, 1);
            spec.hidden_size = s.integer("hidden_size", spec.hidden_size, 1);
            spec.num_layers = s.integer("num_layers", spec.num_layers, 1);
            parse_training(s, spec.training);
            cfg.model.forecaster = spec;
        } else if (type != "none") {
            bad(s.at("type"), "expected \"none\", \"sindy\", \"lstm\" or \"gru\", got \"" + type + "\"");
        }
        s.finish();
    }

    if (const json* t = root.find("training")) {
        Section s(*t, "training");
        parse_training(s, cfg.training);
        cfg.training.sindy_regularization = s.number("sindy_regularization", cfg.training.sindy_regularization);
        cfg.training.sindy_thres_epoch = s.integer("sindy_thres_epoch", cfg.training.sindy_thres_epoch, 1);
        cfg.training.sindy_threshold = s.number("sindy_threshold", cfg.training.sindy_threshold);
        cfg.training.sindy_ridge = s.number("sindy_ridge", cfg.training.sindy_ridge);
        cfg.training.verbose = s.flag("verbose", false);
        s.finish();
        checked("training", [&] { cfg.training.validate(); });
    }

    if (const json* g = root.find("generate")) {
        Section s(*g, "generate");
        GenerateConfig& gen = cfg.generate;
        cfg.has_generate = true;
        gen.kind = s.text("kind", gen.kind);
        gen.csv = s.flag("csv", false);
        if (gen.kind == "traveling_wave") {
            gen.rows = s.integer("rows", gen.rows, 1);
            gen.cols = s.integer("cols", gen.cols, 1);
            gen.timesteps = s.integer("timesteps", gen.timesteps, 1);
            gen.speed = s.number("speed", gen.speed);
            gen.wavelength = s.number("wavelength", gen.wavelength);
            gen.id = s.text("id", gen.id);
            gen.file = s.text("file", gen.file);
        } else if (gen.kind == "double_gyre") {
            DoubleGyreParams& p = gen.gyre;
            p.nx = s.integer("nx", p.nx, 2);
            p.ny = s.integer("ny", p.ny, 2);
            p.dt = s.number("dt", p.dt);
            p.t_end = s.number("t_end", p.t_end);
            p.length_x = s.number("length_x", p.length_x);
            p.length_y = s.number("length_y", p.length_y);
            p.intensity = s.number("intensity", p.intensity);
            p.epsilon = s.number("epsilon", p.epsilon);
            p.omega = s.number("omega", p.omega);
            gen.trajectories = s.integer("trajectories", 0);
            if (const json* r = s.find("epsilon_range")) gen.epsilon_range = to_range(*r, s.at("epsilon_range"));
            if (const json* r = s.find("omega_range")) gen.omega_range = to_range(*r, s.at("omega_range"));
            gen.u_file = s.text("u_file", gen.u_file);
            gen.v_file = s.text("v_file", gen.v_file);
            gen.parameters_file = s.text("parameters_file", gen.parameters_file);
            checked("generate", [&] { p.validate(); });
        } else {
            bad(s.at("kind"), "expected \"traveling_wave\" or \"double_gyre\", got \"" + gen.kind + "\"");
        }
        s.finish();
    }

    if (const json* e = root.find("evaluate")) {
        Section s(*e, "evaluate");
        if (const json* v = s.find("split")) cfg.evaluate_split = to_split(*v, s.at("split"));
        if (const json* v = s.find("max_relative_error")) cfg.max_relative_error = to_double(*v, s.at("max_relative_error"));
        s.finish();
    }
    if (const json* r = root.find("reconstruct")) {
        Section s(*r, "reconstruct");
        if (const json* v = s.find("split")) cfg.reconstruct_split = to_split(*v, s.at("split"));
        s.finish();
    }
    if (const json* f = root.find("forecast")) {
        Section s(*f, "forecast");
        cfg.forecast_horizon = s.integer("horizon", cfg.forecast_horizon);
        if (const json* v = s.find("seed_split")) cfg.forecast_seed_split = to_split(*v, s.at("seed_split"));
        s.finish();
    }
    root.finish();
    cfg.set_seed(seed);
    return cfg;
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Config, std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(doc, base_dir);
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open config '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config_text(buffer.str(), path.parent_path().empty() ? "." : path.parent_path());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) fail(ErrorKind::Config, path.string() + ": " + e.what());
        throw;
    }
}

} // namespace shred::cli
