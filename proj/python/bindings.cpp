#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <memory>

#include "shred/engine.hpp"
#include "shred/error.hpp"
#include "shred/io.hpp"
#include "shred/synthetic.hpp"

namespace py = pybind11;
using namespace shred;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

FieldArray to_field(const DoubleArray& a)
{
    std::vector<Index> shape(a.shape(), a.shape() + a.ndim());
    FieldArray out = FieldArray::zeros(std::move(shape));
    if (out.size() > 0) std::memcpy(out.data(), a.data(), static_cast<std::size_t>(out.size()) * sizeof(double));
    return out;
}

py::array_t<double> to_numpy(const FieldArray& f)
{
    std::vector<py::ssize_t> shape(f.shape().begin(), f.shape().end());
    py::array_t<double> out(shape);
    if (f.size() > 0) std::memcpy(out.mutable_data(), f.data(), static_cast<std::size_t>(f.size()) * sizeof(double));
    return out;
}

py::dict to_dict(const FieldReconstruction& r)
{
    py::dict d;
    for (const auto& [id, array] : r) d[py::str(id)] = to_numpy(array);
    return d;
}

Coordinate to_coordinate(const py::handle& h)
{
    Coordinate c;
    for (const auto& v : h) c.push_back(v.cast<Index>());
    return c;
}

Compression to_compression(const py::object& c)
{
    if (c.is_none() || py::isinstance<py::bool_>(c)) {
        if (!c.is_none() && c.cast<bool>()) fail(ErrorKind::Config, "compress=True is ambiguous; give a mode count");
        return NoCompression{};
    }
    if (py::isinstance<py::int_>(c)) return SvdCompression{c.cast<Index>()};
    const auto cut = c.cast<std::vector<int>>();
    require(cut.size() == 2, ErrorKind::Config, "compress: expected a mode count or (cutoff_x, cutoff_y)");
    return FourierCompression{cut[0], cut[1]};
}

Split to_split(const std::string& name) { return split_from_string(name); }

struct BoundManager {
    explicit BoundManager(ManagerOptions options) : manager(options) {}

    DataManager manager;
    std::optional<PreparedDatasets> data;
};

struct BoundParametricManager : BoundManager {
    using BoundManager::BoundManager;
};

struct BoundSindy {
    SindyForecasterSpec spec;
};

struct BoundShred {
    ModelConfig config;
    std::uint64_t seed = 0;
    std::optional<ShredModel> model;
    TrainReport report;

    [[nodiscard]] const ShredModel& trained() const
    {
        require(model.has_value(), ErrorKind::Data, "SHRED: model has not been fitted");
        return *model;
    }
};

struct BoundEngine {
    BoundEngine(std::shared_ptr<BoundManager> m, std::shared_ptr<BoundShred> s, bool parametric)
        : manager(std::move(m)), shred(std::move(s)), engine(manager->manager, shred->trained())
    {
        require(manager->manager.parametric() == parametric, ErrorKind::Config,
                parametric ? "ParametricSHREDEngine needs a ParametricDataManager"
                           : "SHREDEngine needs a DataManager; use ParametricSHREDEngine for parametric data");
    }

    std::shared_ptr<BoundManager> manager;
    std::shared_ptr<BoundShred> shred;
    Engine engine;
};

struct BoundParametricEngine : BoundEngine {
    using BoundEngine::BoundEngine;
};

template <class T>
std::shared_ptr<T> make_manager(Index lags, double train_size, double val_size, double test_size, std::uint64_t seed)
{
    ManagerOptions o{lags, train_size, val_size, test_size, std::is_same_v<T, BoundParametricManager>, seed};
    o.validate();
    return std::make_shared<T>(o);
}

void add_data(BoundManager& self, const DoubleArray& data, const std::string& id, const py::object& random,
              const py::object& stationary, const py::object& mobile, const py::object& measurements,
              const py::object& compress, const py::object& seed)
{
    SensorSource source = NoSensors{};
    if (!random.is_none()) {
        RandomSensors r{random.cast<Index>(), std::nullopt};
        if (!seed.is_none()) r.seed = seed.cast<std::uint64_t>();
        source = r;
    }
    if (!stationary.is_none() || !mobile.is_none()) {
        require(random.is_none(), ErrorKind::Config, "add_data: give random or explicit sensor locations, not both");
        ExplicitSensors e;
        if (!stationary.is_none())
            for (const auto& s : stationary) e.sensors.emplace_back(StationarySensor{to_coordinate(s)});
        if (!mobile.is_none())
            for (const auto& path : mobile) {
                MobileSensor m;
                for (const auto& c : path) m.path.push_back(to_coordinate(c));
                e.sensors.emplace_back(std::move(m));
            }
        source = std::move(e);
    }
    if (!measurements.is_none()) {
        require(std::holds_alternative<NoSensors>(source), ErrorKind::Config,
                "add_data: measurements cannot be combined with sensor locations");
        const FieldArray table = to_field(measurements.cast<DoubleArray>());
        require(table.rank() >= 2, ErrorKind::Data, "add_data: measurements must be (T, s) or (R, T, s)");
        source = MeasuredSensors{table.as_matrix(table.rank() - 1)};
    }
    self.manager.add_data(to_field(data), id, source, to_compression(compress));
}

TrainConfig train_config(std::uint64_t seed, Index num_epochs, Index batch_size, double lr, Index patience,
                         bool verbose, Index sindy_thres_epoch, double sindy_regularization, double sindy_threshold)
{
    TrainConfig cfg;
    cfg.epochs = num_epochs;
    cfg.batch_size = batch_size;
    cfg.learning_rate = lr;
    cfg.patience = patience;
    cfg.seed = seed;
    cfg.verbose = verbose;
    cfg.sindy_thres_epoch = sindy_thres_epoch;
    cfg.sindy_regularization = sindy_regularization;
    cfg.sindy_threshold = sindy_threshold;
    cfg.validate();
    return cfg;
}

std::shared_ptr<BoundShred> make_shred(const std::string& sequence_model, const std::string& decoder_model,
                                       const py::object& latent_forecaster, Index hidden_size, Index num_layers,
                                       std::vector<Index> decoder_layers, std::uint64_t seed)
{
    require(decoder_model == "MLP", ErrorKind::Config, "SHRED: decoder_model must be \"MLP\", got \"" + decoder_model + "\"");
    auto s = std::make_shared<BoundShred>();
    s->config.cell = cell_kind_from_string(sequence_model);
    s->config.hidden_size = hidden_size;
    s->config.num_layers = num_layers;
    s->config.decoder_layers = std::move(decoder_layers);
    s->seed = seed;
    if (latent_forecaster.is_none()) {
        s->config.forecaster = std::monostate{};
    } else if (py::isinstance<BoundSindy>(latent_forecaster)) {
        s->config.forecaster = latent_forecaster.cast<const BoundSindy&>().spec;
    } else {
        const auto name = latent_forecaster.cast<std::string>();
        RecurrentForecasterSpec spec;
        if (name == "LSTM_Forecaster") spec.cell = CellKind::Lstm;
        else if (name == "GRU_Forecaster") spec.cell = CellKind::Gru;
        else fail(ErrorKind::Config, "SHRED: unknown latent_forecaster \"" + name + "\"");
        s->config.forecaster = spec;
    }
    return s;
}

py::dict metrics_dict(const EvaluationReport& report)
{
    py::dict d;
    for (const auto& [id, m] : report.fields) {
        py::dict f;
        f["mse"] = m.mse;
        f["mean_relative_error"] = m.mean_relative_error;
        f["snapshots"] = m.snapshots;
        f["zero_norm_excluded"] = m.zero_norm_excluded;
        d[py::str(id)] = f;
    }
    return d;
}

void bind_manager_methods(py::class_<BoundManager, std::shared_ptr<BoundManager>>& c)
{
    c.def("add_data", &add_data, py::arg("data"), py::arg("id"), py::arg("random") = py::none(),
          py::arg("stationary") = py::none(), py::arg("mobile") = py::none(), py::arg("measurements") = py::none(),
          py::arg("compress") = py::none(), py::arg("seed") = py::none())
        .def("prepare",
             [](BoundManager& self) {
                 self.data = self.manager.prepare();
                 return py::make_tuple(self.data->train, self.data->val, self.data->test);
             })
        .def("inject_noise", [](BoundManager& self, double std, std::uint64_t seed) { self.manager.inject_noise(std, seed); },
             py::arg("std"), py::arg("seed"))
        .def_property(
            "sensor_measurements_df", [](const BoundManager& self) { return self.manager.sensor_measurements(); },
            [](BoundManager& self, const Matrix& m) {
                const Matrix& cur = self.manager.sensor_measurements();
                require(m.rows() == cur.rows() && m.cols() == cur.cols(), ErrorKind::Data,
                        "sensor_measurements_df: shape must stay " + std::to_string(cur.rows()) + " x " +
                            std::to_string(cur.cols()));
                self.manager.sensor_measurements() = m;
            })
        .def_property_readonly("test_sensor_measurements",
                               [](const BoundManager& self) { return self.manager.test_sensor_measurements(); })
        .def("split_measurements",
             [](const BoundManager& self, const std::string& split) { return self.manager.split_measurements(to_split(split)); },
             py::arg("split"))
        .def("trajectory_measurements",
             [](const BoundManager& self, Index r) { return self.manager.trajectory_measurements(r); },
             py::arg("trajectory"))
        .def_property_readonly("lags", [](const BoundManager& self) { return self.manager.lags(); })
        .def_property_readonly("sensor_count", [](const BoundManager& self) { return self.manager.sensor_count(); })
        .def_property_readonly("target_width", [](const BoundManager& self) { return self.manager.target_width(); })
        .def_property_readonly("field_ids", [](const BoundManager& self) {
            std::vector<std::string> ids;
            for (const auto& f : self.manager.fields()) ids.push_back(f.id);
            return ids;
        });
}

} // namespace

PYBIND11_MODULE(_shred, m)
{
    m.doc() = "Shallow recurrent decoder networks for sparse-sensor reconstruction";

    py::register_exception<Error>(m, "ShredError", PyExc_RuntimeError);

    py::class_<SequenceDataset>(m, "SequenceDataset")
        .def_readonly("lags", &SequenceDataset::lags)
        .def_readonly("width", &SequenceDataset::width)
        .def_readonly("inputs", &SequenceDataset::inputs)
        .def_readonly("targets", &SequenceDataset::targets)
        .def("sequence", &SequenceDataset::sequence, py::arg("n"))
        .def("__len__", &SequenceDataset::size);

    py::class_<BoundManager, std::shared_ptr<BoundManager>> dm(m, "DataManager");
    dm.def(py::init(&make_manager<BoundManager>), py::arg("lags") = 52, py::arg("train_size") = 0.8,
           py::arg("val_size") = 0.1, py::arg("test_size") = 0.1, py::arg("seed") = 0);
    bind_manager_methods(dm);
    py::class_<BoundParametricManager, BoundManager, std::shared_ptr<BoundParametricManager>>(m, "ParametricDataManager")
        .def(py::init(&make_manager<BoundParametricManager>), py::arg("lags") = 52, py::arg("train_size") = 0.8,
             py::arg("val_size") = 0.1, py::arg("test_size") = 0.1, py::arg("seed") = 0);

    py::class_<BoundSindy>(m, "SINDy_Forecaster")
        .def(py::init([](int poly_order, bool include_sine, double dt) {
                 return BoundSindy{{poly_order, include_sine, dt}};
             }),
             py::arg("poly_order") = 1, py::arg("include_sine") = false, py::arg("dt") = 1.0)
        .def_property_readonly("poly_order", [](const BoundSindy& s) { return s.spec.poly_order; })
        .def_property_readonly("include_sine", [](const BoundSindy& s) { return s.spec.include_sine; })
        .def_property_readonly("dt", [](const BoundSindy& s) { return s.spec.dt; });

    py::class_<BoundShred, std::shared_ptr<BoundShred>>(m, "SHRED")
        .def(py::init(&make_shred), py::arg("sequence_model") = "LSTM", py::arg("decoder_model") = "MLP",
             py::arg("latent_forecaster") = py::none(), py::arg("hidden_size") = 0, py::arg("num_layers") = 2,
             py::arg("decoder_layers") = std::vector<Index>{350, 400}, py::arg("seed") = 0)
        .def(
            "fit",
            [](BoundShred& self, const SequenceDataset& train, const SequenceDataset& val, Index num_epochs,
               Index batch_size, double lr, Index patience, bool verbose, Index sindy_thres_epoch,
               double sindy_regularization, double sindy_threshold) {
                const TrainConfig cfg = train_config(self.seed, num_epochs, batch_size, lr, patience, verbose,
                                                     sindy_thres_epoch, sindy_regularization, sindy_threshold);
                py::gil_scoped_release release;
                self.model.emplace(self.config, train.width, train.target_width(), self.seed);
                self.report = fit(*self.model, train, val, cfg);
                return self.report.val_errors;
            },
            py::arg("train_dataset"), py::arg("val_dataset"), py::arg("num_epochs") = 200, py::arg("batch_size") = 64,
            py::arg("lr") = 1e-3, py::arg("patience") = 20, py::arg("verbose") = false,
            py::arg("sindy_thres_epoch") = 20, py::arg("sindy_regularization") = 0.0, py::arg("sindy_threshold") = 0.05)
        .def(
            "evaluate", [](const BoundShred& self, const SequenceDataset& d) { return evaluate(self.trained(), d); },
            py::arg("dataset"), py::call_guard<py::gil_scoped_release>())
        .def_property_readonly("latent_size", [](const BoundShred& self) { return self.trained().latent_size(); })
        .def_property_readonly("best_epoch", [](const BoundShred& self) { return self.report.best_epoch; })
        .def_property_readonly("val_mse", [](const BoundShred& self) { return self.report.val_mse; })
        .def_property_readonly("sindy_coefficients",
                               [](const BoundShred& self) -> std::optional<Matrix> {
                                   const auto& s = self.trained().sindy();
                                   if (!s) return std::nullopt;
                                   return s->coefficients;
                               })
        .def("sindy_equations",
             [](const BoundShred& self) {
                 const auto& s = self.trained().sindy();
                 require(s.has_value(), ErrorKind::Data, "SHRED: no SINDy forecaster attached");
                 return format_equations(*s);
             })
        .def("save", [](const BoundShred& self, const std::string& path) { save_checkpoint(path, self.trained()); },
             py::arg("path"));

    py::class_<BoundEngine>(m, "SHREDEngine")
        .def(py::init([](std::shared_ptr<BoundManager> mgr, std::shared_ptr<BoundShred> s) {
                 return std::make_unique<BoundEngine>(std::move(mgr), std::move(s), false);
             }),
             py::arg("manager"), py::arg("shred"))
        .def(
            "sensor_to_latent",
            [](const BoundEngine& self, const Matrix& measurements) { return self.engine.sensor_to_latent(measurements); },
            py::arg("sensor_measurements"), py::call_guard<py::gil_scoped_release>())
        .def(
            "forecast_latent",
            [](const BoundEngine& self, Index h, const Matrix& init_latents) {
                return self.engine.forecast_latent(init_latents, h);
            },
            py::arg("h"), py::arg("init_latents"), py::call_guard<py::gil_scoped_release>())
        .def(
            "decode", [](const BoundEngine& self, const Matrix& latents) { return to_dict(self.engine.decode(latents)); },
            py::arg("latents"))
        .def(
            "reconstruct",
            [](const BoundEngine& self, const std::string& split) { return to_dict(self.engine.reconstruct(to_split(split))); },
            py::arg("split") = "test")
        .def(
            "evaluate",
            [](const BoundEngine& self, const std::map<std::string, DoubleArray>& truth, const std::string& split) {
                std::map<std::string, FieldArray> t;
                for (const auto& [id, a] : truth) t.emplace(id, to_field(a));
                return metrics_dict(self.engine.evaluate(t, to_split(split)));
            },
            py::arg("truth"), py::arg("split") = "test");

    py::class_<BoundParametricEngine, BoundEngine>(m, "ParametricSHREDEngine")
        .def(py::init([](std::shared_ptr<BoundParametricManager> mgr, std::shared_ptr<BoundShred> s) {
                 return std::make_unique<BoundParametricEngine>(std::move(mgr), std::move(s), true);
             }),
             py::arg("manager"), py::arg("shred"));

    m.def(
        "traveling_wave",
        [](Index rows, Index cols, Index timesteps, double speed, double wavelength) {
            return to_numpy(traveling_wave(rows, cols, timesteps, speed, wavelength));
        },
        py::arg("rows") = 64, py::arg("cols") = 64, py::arg("timesteps") = 500, py::arg("speed") = 0.5,
        py::arg("wavelength") = 32.0);
    m.def(
        "double_gyre",
        [](double epsilon, double omega, Index nx, Index ny, double dt, double t_end) {
            DoubleGyreParams p;
            p.epsilon = epsilon;
            p.omega = omega;
            p.nx = nx;
            p.ny = ny;
            p.dt = dt;
            p.t_end = t_end;
            const VelocityField f = double_gyre(p);
            return py::make_tuple(to_numpy(f.u), to_numpy(f.v));
        },
        py::arg("epsilon") = 0.25, py::arg("omega") = 2.0 * 3.141592653589793 / 10.0, py::arg("nx") = 50,
        py::arg("ny") = 25, py::arg("dt") = 0.05, py::arg("t_end") = 10.0);
    m.def(
        "read_dataset",
        [](const std::string& path) {
            const DatasetFile f = read_dataset(path);
            return py::make_tuple(f.id, to_numpy(f.array));
        },
        py::arg("path"));
}
