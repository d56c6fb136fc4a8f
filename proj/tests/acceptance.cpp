// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "shred/io.hpp"
#include "shred/rng.hpp"
#include "shred/sindy.hpp"
#include "shred/training.hpp"

using namespace shred;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double x)
{
    std::ostringstream s;
    s.precision(4);
    s << x;
    return s.str();
}

int cli(const std::vector<std::string>& args)
{
    std::vector<std::string> full{"shred"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0) std::cerr << "shred " << args.front() << " exited " << code << ": " << err.str();
    return code;
}

fs::path write_json(const fs::path& p, const json& doc)
{
    fs::create_directories(p.parent_path());
    std::ofstream(p) << doc.dump(2);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, double> test_errors(const fs::path& out)
{
    std::map<std::string, double> e;
    const json doc = json::parse(slurp(out / "evaluation.json"));
    for (const auto& f : doc["fields"])
        e[f["id"].get<std::string>()] = f["mean_relative_error"].get<double>();
    return e;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- double gyre -------------------------------------------------------

struct GyreRuns {
    bool ok = false;
    std::vector<Index> u_shape;
    std::map<std::string, double> pod, fourier;
    double pod_seconds = 0.0, fourier_seconds = 0.0;
};

json gyre_config(const json& compress)
{
    return json{
        {"seed", 3},
        {"manager", {{"lags", 25}, {"parametric", true}, {"noise_std", 0.005}}},
        {"fields",
         {{{"path", "U.shdf"}, {"id", "U"}, {"sensors", 3}, {"compress", compress}},
          {{"path", "V.shdf"}, {"id", "V"}, {"compress", compress}}}},
        {"model", {{"hidden_size", 16}, {"num_layers", 1}, {"decoder_layers", {64}}}},
        {"training", {{"epochs", 100}, {"patience", 50}, {"batch_size", 64}, {"lr", 0.001}}},
        {"evaluate", {{"split", "test"}}},
    };
}

GyreRuns run_gyre(const fs::path& root)
{
    GyreRuns r;
    const fs::path dir = root / "gyre";
    const fs::path gen = write_json(dir / "generate.json",
                                    json{{"seed", 3}, {"generate", {{"kind", "double_gyre"}, {"trajectories", 100}}}});
    if (cli({"generate", "--config", gen.string(), "--out", dir.string()}) != 0) return r;
    r.u_shape = read_dataset(dir / "U.shdf").array.shape();

    auto train_eval = [&](const std::string& name, const json& compress, std::map<std::string, double>& errors,
                          double& secs) {
        const auto start = std::chrono::steady_clock::now();
        const fs::path cfg = write_json(dir / (name + ".json"), gyre_config(compress));
        const fs::path out = dir / name;
        if (cli({"train", "--config", cfg.string(), "--out", out.string()}) != 0) return false;
        if (cli({"evaluate", "--config", cfg.string(), "--out", out.string()}) != 0) return false;
        errors = test_errors(out);
        secs = seconds_since(start);
        return true;
    };
    r.ok = train_eval("pod", json{{"svd", 4}}, r.pod, r.pod_seconds) &&
           train_eval("fourier", json{{"fourier", {10, 12}}}, r.fourier, r.fourier_seconds);
    return r;
}

Outcome gyre_pod(const GyreRuns& r)
{
    if (!r.ok) return {false, "pipeline failed"};
    const double u = r.pod.at("U"), v = r.pod.at("V");
    const bool shape = r.u_shape == std::vector<Index>{100, 201, 25, 50};
    return {shape && u <= 0.08 && v <= 0.09, "u " + num(u) + " (<= 0.08), v " + num(v) + " (<= 0.09), U axes " +
                                                 (shape ? "(100, 201, 25, 50)" : "wrong") + ", train+eval " +
                                                 num(r.pod_seconds) + " s"};
}

Outcome gyre_fourier(const GyreRuns& r)
{
    if (!r.ok) return {false, "pipeline failed"};
    const double u = r.fourier.at("U"), v = r.fourier.at("V");
    const bool order = r.pod.at("U") <= u;
    return {u <= 0.09 && v <= 0.12 && order, "u " + num(u) + " (<= 0.09), v " + num(v) + " (<= 0.12), POD u " +
                                                 num(r.pod.at("U")) + (order ? " <= " : " > ") + "Fourier u, " +
                                                 num(r.fourier_seconds) + " s"};
}

// ---- gradient ------------------------------------------------------------

Outcome gradients()
{
    double worst = 0.0;
    int models = 0;
    for (CellKind cell : {CellKind::Gru, CellKind::Lstm})
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            NetworkSpec spec;
            spec.cell = cell;
            spec.input_size = 2;
            spec.hidden_size = 4;
            spec.num_layers = 1;
            spec.decoder_layers = {6};
            spec.output_size = 3;
            Network net(spec);
            net.initialize(seed);
            Rng rng(seed + 1000);
            SequenceBatch inputs;
            for (int t = 0; t < 5; ++t) {
                Batch b(2, 4);
                for (Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-1.0, 1.0);
                inputs.push_back(b);
            }
            Batch targets(3, 4);
            for (Index i = 0; i < targets.size(); ++i) targets.data()[i] = rng.uniform(-1.0, 1.0);

            std::vector<Matrix> grads;
            batch_gradient(net, inputs, targets, grads);
            const double h = 1e-5;
            for (std::size_t g = 0; g < net.parameters().size(); ++g) {
                Matrix& p = net.parameters()[g];
                Matrix fd(p.rows(), p.cols());
                for (Index i = 0; i < p.size(); ++i) {
                    const double keep = p.data()[i];
                    p.data()[i] = keep + h;
                    const double up = batch_loss(net, inputs, targets).total;
                    p.data()[i] = keep - h;
                    const double down = batch_loss(net, inputs, targets).total;
                    p.data()[i] = keep;
                    fd.data()[i] = (up - down) / (2.0 * h);
                }
                const double scale = std::max({grads[g].norm(), fd.norm(), 1e-300});
                worst = std::max(worst, (grads[g] - fd).norm() / scale);
            }
            ++models;
        }
    return {worst <= 1e-4, std::to_string(models) + " models (GRU+LSTM, h=4, s=2, lags=5), worst relative error " +
                               num(worst) + " (<= 1e-4)"};
}

// ---- SINDy ---------------------------------------------------------------

Matrix rk4_linear(const Matrix& a, const Vector& z0, double dt, Index steps)
{
    Matrix out(steps + 1, z0.size());
    Vector z = z0;
    out.row(0) = z.transpose();
    for (Index k = 1; k <= steps; ++k) {
        const Vector k1 = a * z;
        const Vector k2 = a * (z + 0.5 * dt * k1);
        const Vector k3 = a * (z + 0.5 * dt * k2);
        const Vector k4 = a * (z + dt * k3);
        z += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        out.row(k) = z.transpose();
    }
    return out;
}

Outcome sindy_recovery()
{
    Matrix rot(2, 2);
    rot << 0, 1, -1, 0;
    const Matrix decay = -Matrix::Identity(1, 1);
    bool pass = true;
    double worst = 0.0;
    for (const Matrix& a : {rot, decay}) {
        const Index h = a.rows();
        const Vector z0 = Vector::LinSpaced(h, 1.0, 0.5);
        const Matrix z = rk4_linear(a, z0, 0.01, 1000);
        const SindyModel m = sindy_threshold(sindy_fit(z, 0.01, {h, 1, false}), 0.05);
        Matrix truth = Matrix::Zero(h + 1, h);
        truth.bottomRows(h) = a.transpose();
        for (Index i = 0; i <= h; ++i)
            for (Index j = 0; j < h; ++j) {
                pass = pass && ((truth(i, j) != 0.0) == (m.active(i, j) != 0.0));
                worst = std::max(worst, std::abs(m.coefficients(i, j) - truth(i, j)));
            }
    }
    return {pass && worst <= 1e-2, std::string("support ") + (pass ? "exact" : "wrong") +
                                       ", worst coefficient error " + num(worst) + " (<= 1e-2)"};
}

Outcome rk4_order()
{
    Matrix rot(2, 2);
    rot << 0, 1, -1, 0;
    SindyModel m;
    m.library = {2, 1, false};
    m.coefficients = Matrix::Zero(3, 2);
    m.coefficients.bottomRows(2) = rot.transpose();
    m.active = Matrix::Ones(3, 2);
    Vector z0(2);
    z0 << 1.0, 0.0;
    Vector exact(2);
    exact << std::cos(1.0), -std::sin(1.0);
    auto error = [&](double dt, Index steps) {
        m.dt = dt;
        return (sindy_forecast(m, z0, steps).row(steps - 1).transpose() - exact).norm();
    };
    const double ratio = error(0.1, 10) / error(0.05, 20);
    return {ratio >= 8.0 && ratio <= 32.0, "error ratio " + num(ratio) + " (in [8, 32])"};
}

// ---- compression ---------------------------------------------------------

Outcome compression()
{
    Rng rng(11);
    Matrix b(200, 4), c(4, 100);
    for (Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
    for (Index i = 0; i < c.size(); ++i) c.data()[i] = rng.normal();
    const Matrix a = b * c;
    const SvdFactors f = randomized_svd(a, 4);
    const Matrix oracle_rec = oracle::truncated(oracle::jacobi_svd(a), 4, 200, 100);
    const double svd_err = (f.reconstruct() - oracle_rec).norm() / oracle_rec.norm();

    const Index m = 25, n = 50;
    Matrix field(3, m * n);
    for (Index i = 0; i < field.size(); ++i) field.data()[i] = rng.normal();
    const FourierTruncation t(m, n, static_cast<int>(n / 2), static_cast<int>(m / 2));
    const auto coeffs = fourier_truncate(field, t);
    const double fourier_err = (fourier_reconstruct(coeffs.real, coeffs.imag, t) - field).cwiseAbs().maxCoeff();
    return {svd_err <= 1e-8 && fourier_err <= 1e-10,
            "randomized SVD relative error " + num(svd_err) + " (<= 1e-8), Fourier round trip " + num(fourier_err) +
                " (<= 1e-10)"};
}

// ---- traveling wave ------------------------------------------------------

json wave_config()
{
    return json{
        {"seed", 11},
        {"generate", {{"kind", "traveling_wave"}}},
        {"manager", {{"lags", 52}}},
        {"fields",
         {{{"path", "X.shdf"},
           {"id", "X"},
           {"sensors",
            {{"stationary", {{10, 5}, {40, 47}}},
             {"circular", {{{"center", {32, 32}}, {"radius", 20}, {"step", 0.1}}}}}}}}},
        {"model", {{"hidden_size", 16}, {"num_layers", 1}, {"decoder_layers", {64}}}},
        {"training", {{"epochs", 20}, {"batch_size", 32}, {"lr", 0.005}}},
        {"evaluate", {{"split", "test"}}},
    };
}

// decode(sensor_to_latent(x)) against scalar oracles for every stage.
double pipeline_identity(const cli::RunConfig& cfg, const fs::path& checkpoint)
{
    PreparedDatasets data;
    std::map<std::string, FieldArray> truth;
    const DataManager manager = cli::build_manager(cfg, data, &truth);
    const ShredModel model = load_checkpoint(checkpoint);
    const Engine engine(manager, model);

    const Index rows = 80;
    const Matrix raw = manager.trajectory_measurements(0).topRows(rows);
    const Matrix got = engine.decode(engine.sensor_to_latent(raw)).at("X").as_matrix(1);

    const Index train_rows = 400;
    const Index lags = 52;
    const Matrix all = manager.trajectory_measurements(0);
    const Matrix snaps = truth.at("X").as_matrix(1);
    auto min_range = [](const Matrix& m, Index col) {
        double lo = m(0, col), hi = m(0, col);
        for (Index r = 1; r < m.rows(); ++r) {
            lo = std::min(lo, m(r, col));
            hi = std::max(hi, m(r, col));
        }
        return std::pair{lo, hi > lo ? hi - lo : 1.0};
    };

    std::vector<std::pair<double, double>> target_scale;
    for (Index c = 0; c < snaps.cols(); ++c) target_scale.push_back(min_range(snaps.topRows(train_rows), c));

    double worst = 0.0;
    for (Index t = 0; t < rows; ++t) {
        std::vector<std::vector<double>> window;
        for (Index k = t - lags + 1; k <= t; ++k) {
            const Index src = std::max<Index>(k, 0);
            std::vector<double> x;
            for (Index j = 0; j < all.cols(); ++j) {
                const auto [lo, range] = min_range(all.topRows(train_rows), j);
                x.push_back((all(src, j) - lo) / range);
            }
            window.push_back(x);
        }
        const std::vector<double> scaled = oracle::forward(model.network(), window);
        for (Index c = 0; c < snaps.cols(); ++c) {
            const auto [lo, range] = target_scale[static_cast<std::size_t>(c)];
            worst = std::max(worst, std::abs(scaled[static_cast<std::size_t>(c)] * range + lo - got(t, c)));
        }
    }
    return worst;
}

struct WaveRun {
    bool ok = false;
    double test_error = 0.0;
    double identity = 0.0;
    bool deterministic = false;
};

WaveRun run_wave(const fs::path& root)
{
    WaveRun r;
    const fs::path dir = root / "wave";
    const fs::path cfg = write_json(dir / "run.json", wave_config());
    if (cli({"generate", "--config", cfg.string(), "--out", dir.string()}) != 0) return r;
    if (cli({"train", "--config", cfg.string(), "--out", (dir / "a").string()}) != 0) return r;
    if (cli({"evaluate", "--config", cfg.string(), "--out", (dir / "a").string()}) != 0) return r;
    r.test_error = test_errors(dir / "a").at("X");
    r.identity = pipeline_identity(cli::load_config(cfg), dir / "a" / "model.shrd");
    if (cli({"train", "--config", cfg.string(), "--out", (dir / "b").string()}) != 0) return r;
    r.deterministic = slurp(dir / "a" / "model.shrd") == slurp(dir / "b" / "model.shrd") &&
                      slurp(dir / "a" / "model.shrd.codecs") == slurp(dir / "b" / "model.shrd.codecs");
    r.ok = true;
    return r;
}

Outcome wave_sensing(const WaveRun& r)
{
    if (!r.ok) return {false, "pipeline failed"};
    return {r.test_error <= 0.10 && r.identity <= 1e-9,
            "test error " + num(r.test_error) + " (<= 0.10), pipeline vs oracle " + num(r.identity) + " (<= 1e-9)"};
}

Outcome determinism(const WaveRun& r)
{
    if (!r.ok) return {false, "pipeline failed"};
    return {r.deterministic, r.deterministic ? "checkpoints byte-identical" : "checkpoints differ"};
}

Outcome sindy_shred(const fs::path& root)
{
    const fs::path dir = root / "sindy_shred";
    json doc = wave_config();
    doc["model"] = {{"sequence_model", "GRU"}, {"hidden_size", 3}, {"num_layers", 1}, {"decoder_layers", {64}}};
    doc["forecaster"] = {{"type", "sindy"}, {"poly_order", 1}, {"dt", 0.1}};
    doc["training"] = {{"epochs", 60},
                       {"batch_size", 32},
                       {"lr", 0.005},
                       {"sindy_regularization", 1.0},
                       {"sindy_thres_epoch", 20},
                       {"sindy_threshold", 0.05}};
    doc["forecast"] = {{"horizon", 50}};
    const fs::path cfg = write_json(dir / "run.json", doc);
    if (cli({"generate", "--config", cfg.string(), "--out", dir.string()}) != 0 ||
        cli({"train", "--config", cfg.string(), "--out", dir.string()}) != 0 ||
        cli({"forecast", "--config", cfg.string(), "--out", dir.string()}) != 0)
        return {false, "pipeline failed"};

    const ShredModel model = load_checkpoint(dir / "model.shrd");
    const Matrix& xi = model.sindy()->coefficients;
    bool sparse = true;
    Index zeros = 0;
    for (Index i = 0; i < xi.size(); ++i) {
        const double c = std::abs(xi.data()[i]);
        if (c == 0.0) ++zeros;
        else if (c < 0.05) sparse = false;
    }
    const json fc = json::parse(slurp(dir / "forecast.json"));
    const double err = fc["fields"][0]["mean_relative_error"].get<double>();
    const Index steps = fc["fields"][0]["steps_compared"].get<Index>();
    return {sparse && err <= 0.2 && steps == 50,
            std::string("coefficients ") + (sparse ? "all 0 or >= 0.05" : "below threshold found") + " (" +
                std::to_string(zeros) + " of " + std::to_string(xi.size()) + " zero), 50-step forecast error " +
                num(err) + " (<= 0.2)"};
}

} // namespace

int main(int argc, char** argv)
{
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "shred_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    int failed = 0;
    auto report = [&](const std::string& name, const Outcome& o) {
        std::cout << (o.pass ? "PASS  " : "FAIL  ") << name << ": " << o.detail << std::endl;
        if (!o.pass) ++failed;
    };

    report("gradient check", gradients());
    report("SINDy recovery", sindy_recovery());
    report("RK4 order", rk4_order());
    report("compression oracles", compression());
    const WaveRun wave = run_wave(root);
    report("traveling-wave sensing", wave_sensing(wave));
    report("SINDy-SHRED forecast", sindy_shred(root));
    report("determinism", determinism(wave));
    const GyreRuns gyre = run_gyre(root);
    report("double gyre POD", gyre_pod(gyre));
    report("double gyre Fourier", gyre_fourier(gyre));

    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
