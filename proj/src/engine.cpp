#include "shred/engine.hpp"

#include <numeric>

#include "shred/error.hpp"

namespace shred {

namespace {

constexpr Index kChunk = 512;

std::vector<Index> with_leading(std::vector<Index> spatial, std::initializer_list<Index> leading)
{
    spatial.insert(spatial.begin(), leading.begin(), leading.end());
    return spatial;
}

std::string shape_text(const std::vector<Index>& shape)
{
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) out += (i ? ", " : "") + std::to_string(shape[i]);
    return out + ")";
}

} // namespace

FieldMetrics snapshot_errors(const Matrix& truth, const Matrix& estimate)
{
    require(truth.rows() == estimate.rows() && truth.cols() == estimate.cols(), ErrorKind::Data,
            "snapshot_errors: shape mismatch");
    require(truth.size() > 0, ErrorKind::Data, "snapshot_errors: no snapshots");
    FieldMetrics m;
    m.mse = (truth - estimate).squaredNorm() / static_cast<double>(truth.size());
    double sum = 0.0;
    for (Index n = 0; n < truth.rows(); ++n) {
        const double norm = truth.row(n).norm();
        if (norm == 0.0) {
            ++m.zero_norm_excluded;
            continue;
        }
        sum += (truth.row(n) - estimate.row(n)).norm() / norm;
        ++m.snapshots;
    }
    m.mean_relative_error = m.snapshots > 0 ? sum / static_cast<double>(m.snapshots) : 0.0;
    return m;
}

FieldArray vorticity(const FieldArray& u, const FieldArray& v, double dx, double dy)
{
    require(u.shape() == v.shape(), ErrorKind::Data, "vorticity: u " + u.shape_string() + " vs v " + v.shape_string());
    require(u.rank() == 3, ErrorKind::Data, "vorticity: expected (T, ny, nx) arrays");
    require(dx > 0.0 && dy > 0.0, ErrorKind::Data, "vorticity: spacings must be positive");
    const Index t_count = u.shape()[0];
    const Index ny = u.shape()[1];
    const Index nx = u.shape()[2];
    require(nx >= 2 && ny >= 2, ErrorKind::Data, "vorticity: need at least 2 points per axis");

    // Derivative along an axis of length n with stride `stride` at index i.
    auto derivative = [](const double* f, Index i, Index n, Index stride, double h) {
        if (i > 0 && i + 1 < n) return (f[(i + 1) * stride] - f[(i - 1) * stride]) / (2.0 * h);
        if (n == 2) return (f[stride] - f[0]) / h;
        if (i == 0) return (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) / (2.0 * h);
        return (3.0 * f[i * stride] - 4.0 * f[(i - 1) * stride] + f[(i - 2) * stride]) / (2.0 * h);
    };

    FieldArray w = FieldArray::zeros(u.shape());
    for (Index t = 0; t < t_count; ++t) {
        const double* ut = u.data() + t * ny * nx;
        const double* vt = v.data() + t * ny * nx;
        double* wt = w.data() + t * ny * nx;
        for (Index y = 0; y < ny; ++y)
            for (Index x = 0; x < nx; ++x) {
                const double du_dy = derivative(ut + x, y, ny, nx, dy);
                const double dv_dx = derivative(vt + y * nx, x, nx, 1, dx);
                wt[y * nx + x] = -du_dy + dv_dx;
            }
    }
    return w;
}

Engine::Engine(const DataManager& manager, const ShredModel& model) : manager_(&manager), model_(&model)
{
    require(manager.prepared(), ErrorKind::Data, "engine: manager not prepared");
    require(model.input_size() == manager.sensor_count(), ErrorKind::Data,
            "engine: model expects " + std::to_string(model.input_size()) + " sensor inputs, manager has " +
                std::to_string(manager.sensor_count()));
    require(model.output_size() == manager.target_width(), ErrorKind::Data,
            "engine: model outputs " + std::to_string(model.output_size()) + " values, manager target width is " +
                std::to_string(manager.target_width()));
}

Matrix Engine::sensor_to_latent(const Matrix& measurements) const
{
    require(measurements.cols() == manager_->sensor_count(), ErrorKind::Data,
            "sensor_to_latent: expected " + std::to_string(manager_->sensor_count()) + " sensor columns, got " +
                std::to_string(measurements.cols()));
    require_finite(measurements, "sensor_to_latent");
    const Index lags = manager_->lags();
    const Index s = measurements.cols();
    const LaggedSequences lagged = build_lagged_sequences(manager_->sensor_scaler().apply(measurements), lags);

    const Network& net = model_->network();
    Matrix out(measurements.rows(), net.latent_size());
    for (Index begin = 0; begin < measurements.rows(); begin += kChunk) {
        const Index end = std::min(begin + kChunk, measurements.rows());
        std::vector<Index> idx(static_cast<std::size_t>(end - begin));
        std::iota(idx.begin(), idx.end(), begin);
        out.middleRows(begin, end - begin) = net.encode(gather_sequences(lagged.windows, lags, s, idx)).transpose();
    }
    return out;
}

std::vector<Matrix> Engine::sensor_to_latent(const std::vector<Matrix>& trajectories) const
{
    std::vector<Matrix> out;
    out.reserve(trajectories.size());
    for (const auto& m : trajectories) out.push_back(sensor_to_latent(m));
    return out;
}

Matrix Engine::forecast_latent(const Matrix& seed, Index horizon) const
{
    require(!parametric(), ErrorKind::Data, "forecasting unsupported in parametric regime");
    require(horizon >= 0, ErrorKind::Data, "forecast_latent: negative horizon");
    require(seed.cols() == model_->latent_size(), ErrorKind::Data, "forecast_latent: seed width mismatch");
    switch (model_->forecaster_kind()) {
    case ForecasterKind::Sindy: {
        require(model_->sindy().has_value(), ErrorKind::Data, "forecast_latent: SINDy forecaster not fitted");
        require(seed.rows() >= 1, ErrorKind::Data, "forecast_latent: empty seed");
        return sindy_forecast(*model_->sindy(), seed.row(seed.rows() - 1).transpose(), horizon);
    }
    case ForecasterKind::Recurrent:
        require(model_->recurrent().has_value(), ErrorKind::Data, "forecast_latent: recurrent forecaster not fitted");
        return recurrent_forecast(*model_->recurrent(), seed, horizon);
    case ForecasterKind::None: break;
    }
    fail(ErrorKind::Data, "forecast_latent: model has no latent forecaster");
}

Matrix Engine::decode_targets(const Matrix& latents) const
{
    require(latents.cols() == model_->latent_size(), ErrorKind::Data,
            "decode: expected latent width " + std::to_string(model_->latent_size()) + ", got " +
                std::to_string(latents.cols()));
    require_finite(latents, "decode");
    Matrix out(latents.rows(), model_->output_size());
    for (Index begin = 0; begin < latents.rows(); begin += kChunk) {
        const Index end = std::min(begin + kChunk, latents.rows());
        const Batch z = latents.middleRows(begin, end - begin).transpose();
        out.middleRows(begin, end - begin) = model_->network().decode(z).transpose();
    }
    return out;
}

FieldReconstruction Engine::decode(const Matrix& latents) const
{
    const Matrix targets = decode_targets(latents);
    FieldReconstruction out;
    for (const auto& f : manager_->fields()) {
        const Matrix physical = f.codec.decode(targets.middleCols(f.target_offset, f.codec.width()));
        out.emplace(f.id, FieldArray::from_matrix(physical, with_leading(f.spatial_shape, {latents.rows()})));
    }
    return out;
}

FieldReconstruction Engine::reconstruct(Split split) const
{
    const auto [begin, end] = manager_->split_times(split);
    const auto& trajs = manager_->split_trajectories(split);
    require(end > begin && !trajs.empty(), ErrorKind::Data, "reconstruct: empty split");
    const Index span = end - begin;

    Matrix latents(static_cast<Index>(trajs.size()) * span, model_->latent_size());
    Index row = 0;
    for (Index r : trajs) {
        // History before the split start stays in the windows.
        const Matrix z = sensor_to_latent(manager_->trajectory_measurements(r).topRows(end));
        latents.middleRows(row, span) = z.bottomRows(span);
        row += span;
    }

    FieldReconstruction flat = decode(latents);
    if (!parametric()) return flat;
    FieldReconstruction out;
    for (const auto& f : manager_->fields()) {
        const Matrix m = flat.at(f.id).as_matrix(1);
        out.emplace(f.id, FieldArray::from_matrix(
                              m, with_leading(f.spatial_shape, {static_cast<Index>(trajs.size()), span})));
    }
    return out;
}

EvaluationReport Engine::evaluate(const std::map<std::string, FieldArray>& truth, Split split) const
{
    require(!truth.empty(), ErrorKind::Data, "evaluate: no ground truth given");
    for (const auto& [id, array] : truth) (void)manager_->field(id);

    const FieldReconstruction recon = reconstruct(split);
    const auto [begin, end] = manager_->split_times(split);
    const auto& trajs = manager_->split_trajectories(split);
    const Index lead = parametric() ? 2 : 1;

    EvaluationReport report;
    report.split = split;
    for (const auto& f : manager_->fields()) {
        const auto it = truth.find(f.id);
        if (it == truth.end()) continue;
        const FieldArray& gt = it->second;
        const auto expected = parametric()
                                  ? with_leading(f.spatial_shape, {manager_->trajectories(), manager_->timesteps()})
                                  : with_leading(f.spatial_shape, {manager_->timesteps()});
        require(gt.shape() == expected, ErrorKind::Data,
                "evaluate: ground truth for '" + f.id + "' has shape " + gt.shape_string() + ", expected " +
                    shape_text(expected));
        const Matrix all = gt.as_matrix(lead);
        Matrix selected(static_cast<Index>(trajs.size()) * (end - begin), all.cols());
        Index row = 0;
        for (Index r : trajs) {
            selected.middleRows(row, end - begin) = all.middleRows(r * manager_->timesteps() + begin, end - begin);
            row += end - begin;
        }
        const Matrix estimate = recon.at(f.id).as_matrix(lead);
        report.fields.emplace_back(f.id, snapshot_errors(selected, estimate));
    }
    return report;
}

} // namespace shred
