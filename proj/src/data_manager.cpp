#include "shred/data_manager.hpp"

#include <algorithm>
#include <cmath>

#include "shred/error.hpp"
#include "shred/rng.hpp"

namespace shred {

namespace {

std::string coordinate_string(const Coordinate& c)
{
    std::string out = "(";
    for (std::size_t i = 0; i < c.size(); ++i) out += (i ? ", " : "") + std::to_string(c[i]);
    return out + ")";
}

Index ravel(const Coordinate& c, const std::vector<Index>& shape)
{
    require(c.size() == shape.size(), ErrorKind::Data,
            "sensor coordinate " + coordinate_string(c) + " has " + std::to_string(c.size()) +
                " axes, field has " + std::to_string(shape.size()));
    Index flat = 0;
    for (std::size_t axis = 0; axis < shape.size(); ++axis) {
        require(c[axis] >= 0 && c[axis] < shape[axis], ErrorKind::Data,
                "sensor coordinate " + coordinate_string(c) + " out of bounds for spatial shape " +
                    coordinate_string(shape));
        flat = flat * shape[axis] + c[axis];
    }
    return flat;
}

Coordinate unravel(Index flat, const std::vector<Index>& shape)
{
    Coordinate c(shape.size());
    for (std::size_t axis = shape.size(); axis-- > 0;) {
        c[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
    return c;
}

Index product(const std::vector<Index>& shape)
{
    Index n = 1;
    for (Index s : shape) n *= s;
    return n;
}

} // namespace

// ---------------------------------------------------------------------------
// FieldCodec

FieldCodec FieldCodec::fit(const Matrix& train_snapshots, const std::vector<Index>& spatial_shape,
                           const Compression& compression, std::uint64_t seed)
{
    FieldCodec codec;
    codec.compression_ = compression;
    codec.spatial_size_ = product(spatial_shape);
    require(train_snapshots.cols() == codec.spatial_size_, ErrorKind::Data, "FieldCodec: snapshot size mismatch");

    if (const auto* svd = std::get_if<SvdCompression>(&compression)) {
        const Index limit = std::min(train_snapshots.rows(), train_snapshots.cols());
        require(svd->modes >= 1 && svd->modes <= limit, ErrorKind::Data,
                "compress: " + std::to_string(svd->modes) + " SVD modes outside [1, " + std::to_string(limit) + "]");
        RandomizedSvdOptions options;
        options.seed = seed;
        SvdFactors factors = randomized_svd(train_snapshots, svd->modes, options);
        factors.U.resize(0, svd->modes);
        codec.svd_ = std::move(factors);
    } else if (const auto* fourier = std::get_if<FourierCompression>(&compression)) {
        require(spatial_shape.size() == 2, ErrorKind::Data, "compress: Fourier truncation needs a 2-D spatial grid");
        codec.fourier_ = FourierTruncation(spatial_shape[0], spatial_shape[1], fourier->cutoff_x, fourier->cutoff_y);
    }
    codec.scaler_ = MinMaxScaler::fit(codec.compress(train_snapshots));
    return codec;
}

FieldCodec FieldCodec::restore(Compression compression, Index spatial_size, MinMaxScaler scaler,
                               std::optional<SvdFactors> svd, std::optional<FourierTruncation> fourier)
{
    FieldCodec codec;
    codec.compression_ = std::move(compression);
    codec.spatial_size_ = spatial_size;
    codec.scaler_ = std::move(scaler);
    codec.svd_ = std::move(svd);
    codec.fourier_ = std::move(fourier);
    return codec;
}

Matrix FieldCodec::compress(const Matrix& snapshots) const
{
    require(snapshots.cols() == spatial_size_, ErrorKind::Data,
            "FieldCodec::compress: expected " + std::to_string(spatial_size_) + " values per snapshot");
    if (svd_) return snapshots * svd_->V;
    if (fourier_) {
        const auto coeffs = fourier_truncate(snapshots, *fourier_);
        return fourier_->pack(coeffs.real, coeffs.imag);
    }
    return snapshots;
}

Matrix FieldCodec::decompress(const Matrix& coefficients) const
{
    if (svd_) {
        require(coefficients.cols() == svd_->V.cols(), ErrorKind::Data, "FieldCodec::decompress: width mismatch");
        return coefficients * svd_->V.transpose();
    }
    if (fourier_) {
        Matrix real;
        Matrix imag;
        fourier_->unpack(coefficients, real, imag);
        return fourier_reconstruct(real, imag, *fourier_);
    }
    require(coefficients.cols() == spatial_size_, ErrorKind::Data, "FieldCodec::decompress: width mismatch");
    return coefficients;
}

// ---------------------------------------------------------------------------
// Measurements and lagged windows

Matrix extract_measurements(const Matrix& snapshots, const std::vector<Index>& spatial_shape,
                            const std::vector<Sensor>& sensors)
{
    require(snapshots.cols() == product(spatial_shape), ErrorKind::Data, "extract_measurements: spatial size mismatch");
    const Index t_count = snapshots.rows();
    Matrix out(t_count, static_cast<Index>(sensors.size()));
    for (std::size_t j = 0; j < sensors.size(); ++j) {
        const auto col = static_cast<Index>(j);
        if (const auto* fixed = std::get_if<StationarySensor>(&sensors[j])) {
            const Index flat = ravel(fixed->at, spatial_shape);
            out.col(col) = snapshots.col(flat);
        } else {
            const auto& path = std::get<MobileSensor>(sensors[j]).path;
            require(static_cast<Index>(path.size()) == t_count, ErrorKind::Data,
                    "mobile sensor " + std::to_string(j) + " has " + std::to_string(path.size()) +
                        " positions for " + std::to_string(t_count) + " time steps");
            for (Index t = 0; t < t_count; ++t)
                out(t, col) = snapshots(t, ravel(path[static_cast<std::size_t>(t)], spatial_shape));
        }
    }
    return out;
}

Matrix extract_measurements(const FieldArray& data, const std::vector<Sensor>& sensors)
{
    require(data.rank() >= 1, ErrorKind::Data, "extract_measurements: array needs a time axis");
    const std::vector<Index> spatial(data.shape().begin() + 1, data.shape().end());
    return extract_measurements(data.as_matrix(1), spatial, sensors);
}

LaggedSequences build_lagged_sequences(const Matrix& measurements, Index lags)
{
    require(lags >= 1, ErrorKind::Data, "build_lagged_sequences: lags must be >= 1");
    require(measurements.rows() >= 1, ErrorKind::Data, "build_lagged_sequences: no measurements");
    const Index t_count = measurements.rows();
    const Index s = measurements.cols();
    LaggedSequences out;
    out.windows.resize(t_count, lags * s);
    out.target_times.resize(static_cast<std::size_t>(t_count));
    for (Index t = 0; t < t_count; ++t) {
        for (Index l = 0; l < lags; ++l) {
            const Index source = std::max<Index>(0, t - lags + 1 + l);
            out.windows.block(t, l * s, 1, s) = measurements.row(source);
        }
        out.target_times[static_cast<std::size_t>(t)] = t;
    }
    return out;
}

std::string to_string(Split split)
{
    switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "?";
}

Split split_from_string(const std::string& name)
{
    if (name == "train") return Split::Train;
    if (name == "val" || name == "validation") return Split::Val;
    if (name == "test") return Split::Test;
    fail(ErrorKind::Config, "unknown split '" + name + "' (expected train, val or test)");
}

// ---------------------------------------------------------------------------
// DataManager

void ManagerOptions::validate() const
{
    require(lags >= 1, ErrorKind::Config, "manager: lags must be >= 1");
    require(train_size > 0.0 && val_size > 0.0 && test_size > 0.0, ErrorKind::Config,
            "manager: split fractions must be positive");
    require(std::abs(train_size + val_size + test_size - 1.0) <= 1e-9, ErrorKind::Config,
            "manager: split fractions must sum to 1");
}

DataManager::DataManager(ManagerOptions options) : options_(options)
{
    options_.validate();
}

void DataManager::plan_splits(Index count)
{
    const auto n_train = static_cast<Index>(std::floor(options_.train_size * static_cast<double>(count) + 0.5));
    const auto n_val = static_cast<Index>(std::floor(options_.val_size * static_cast<double>(count) + 0.5));
    const Index n_test = count - n_train - n_val;
    require(n_train >= 1 && n_val >= 1 && n_test >= 1, ErrorKind::Data,
            "manager: " + std::to_string(count) + (options_.parametric ? " trajectories" : " time steps") +
                " leave an empty partition (" + std::to_string(n_train) + "/" + std::to_string(n_val) + "/" +
                std::to_string(n_test) + ")");
    split_sizes_ = {n_train, n_val, n_test};

    split_trajectories_.assign(3, {});
    if (options_.parametric) {
        Rng rng(options_.seed);
        const auto perm = rng.permutation(static_cast<std::size_t>(count));
        for (Index i = 0; i < count; ++i) {
            const std::size_t which = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
            split_trajectories_[which].push_back(static_cast<Index>(perm[static_cast<std::size_t>(i)]));
        }
        for (auto& list : split_trajectories_) std::sort(list.begin(), list.end());
    } else {
        for (auto& list : split_trajectories_) list = {0};
    }
}

std::vector<Index> DataManager::train_rows() const
{
    std::vector<Index> rows;
    if (options_.parametric) {
        for (Index r : split_trajectories_[0])
            for (Index t = 0; t < timesteps_; ++t) rows.push_back(r * timesteps_ + t);
    } else {
        for (Index t = 0; t < split_sizes_[0]; ++t) rows.push_back(t);
    }
    return rows;
}

void DataManager::add_data(const FieldArray& data, const std::string& id, const SensorSource& sensors,
                           const Compression& compression)
{
    for (const auto& f : fields_) require(f.id != id, ErrorKind::Data, "add_data: duplicate id '" + id + "'");
    const Index lead = options_.parametric ? 2 : 1;
    require(data.rank() >= lead, ErrorKind::Data,
            "add_data '" + id + "': array " + data.shape_string() + " lacks " +
                (options_.parametric ? "trajectory and time axes" : "a time axis"));
    const Index r_count = options_.parametric ? data.shape()[0] : 1;
    const Index t_count = data.shape()[static_cast<std::size_t>(lead - 1)];
    require(r_count >= 1 && t_count >= 1, ErrorKind::Data, "add_data '" + id + "': empty array");

    if (fields_.empty()) {
        plan_splits(options_.parametric ? r_count : t_count);
        trajectories_ = r_count;
        timesteps_ = t_count;
        measurements_.resize(r_count * t_count, 0);
    } else {
        require(t_count == timesteps_, ErrorKind::Data,
                "add_data '" + id + "': " + std::to_string(t_count) + " time steps, expected " +
                    std::to_string(timesteps_));
        require(r_count == trajectories_, ErrorKind::Data,
                "add_data '" + id + "': " + std::to_string(r_count) + " trajectories, expected " +
                    std::to_string(trajectories_));
    }

    FieldEntry entry;
    entry.id = id;
    entry.spatial_shape.assign(data.shape().begin() + lead, data.shape().end());
    const Matrix snapshots = data.as_matrix(lead);
    require_finite(snapshots, "add_data '" + id + "'");
    const Index spatial = snapshots.cols();

    Matrix new_columns(r_count * t_count, 0);
    if (const auto* random = std::get_if<RandomSensors>(&sensors)) {
        require(random->count >= 0 && random->count <= spatial, ErrorKind::Data,
                "add_data '" + id + "': cannot place " + std::to_string(random->count) + " sensors on " +
                    std::to_string(spatial) + " grid points");
        Rng rng(random->seed.value_or(options_.seed + 7919 * (fields_.size() + 1)));
        for (std::size_t flat : rng.sample_without_replacement(static_cast<std::size_t>(spatial),
                                                               static_cast<std::size_t>(random->count)))
            entry.sensors.push_back(StationarySensor{unravel(static_cast<Index>(flat), entry.spatial_shape)});
    } else if (const auto* chosen = std::get_if<ExplicitSensors>(&sensors)) {
        entry.sensors = chosen->sensors;
    } else if (const auto* measured = std::get_if<MeasuredSensors>(&sensors)) {
        require(measured->table.rows() == r_count * t_count, ErrorKind::Data,
                "add_data '" + id + "': measurement table has " + std::to_string(measured->table.rows()) +
                    " rows, expected " + std::to_string(r_count * t_count));
        require_finite(measured->table, "add_data '" + id + "' measurements");
        new_columns = measured->table;
    }
    if (!entry.sensors.empty()) {
        new_columns.resize(r_count * t_count, static_cast<Index>(entry.sensors.size()));
        for (Index r = 0; r < r_count; ++r)
            new_columns.middleRows(r * t_count, t_count) =
                extract_measurements(snapshots.middleRows(r * t_count, t_count), entry.spatial_shape, entry.sensors);
    }

    const std::vector<Index> rows = train_rows();
    Matrix train_snapshots(static_cast<Index>(rows.size()), spatial);
    for (std::size_t i = 0; i < rows.size(); ++i) train_snapshots.row(static_cast<Index>(i)) = snapshots.row(rows[i]);
    entry.codec = FieldCodec::fit(train_snapshots, entry.spatial_shape, compression,
                                  options_.seed + 104729 * (fields_.size() + 1));
    entry.encoded = entry.codec.encode(snapshots);
    entry.target_offset = target_width();

    entry.sensor_offset = measurements_.cols();
    entry.sensor_count = new_columns.cols();
    Matrix table(r_count * t_count, measurements_.cols() + new_columns.cols());
    table << measurements_, new_columns;
    measurements_ = std::move(table);

    fields_.push_back(std::move(entry));
    sensor_scaler_.reset();
}

void DataManager::inject_noise(double std, std::uint64_t seed)
{
    require(std >= 0.0 && std::isfinite(std), ErrorKind::Data, "inject_noise: std must be finite and >= 0");
    require(!fields_.empty(), ErrorKind::Data, "inject_noise: no measurements extracted yet");
    Rng rng(seed);
    for (Index i = 0; i < measurements_.rows(); ++i)
        for (Index j = 0; j < measurements_.cols(); ++j) measurements_(i, j) += std * rng.normal();
    sensor_scaler_.reset();
}

const FieldEntry& DataManager::field(const std::string& id) const
{
    for (const auto& f : fields_)
        if (f.id == id) return f;
    fail(ErrorKind::Data, "no field with id '" + id + "'");
}

Index DataManager::target_width() const
{
    Index w = 0;
    for (const auto& f : fields_) w += f.codec.width();
    return w;
}

Matrix DataManager::trajectory_measurements(Index trajectory) const
{
    require(trajectory >= 0 && trajectory < trajectories_, ErrorKind::Data, "trajectory index out of range");
    return measurements_.middleRows(trajectory * timesteps_, timesteps_);
}

std::pair<Index, Index> DataManager::split_times(Split split) const
{
    require(!fields_.empty(), ErrorKind::Data, "manager has no data");
    if (options_.parametric) return {0, timesteps_};
    switch (split) {
    case Split::Train: return {0, split_sizes_[0]};
    case Split::Val: return {split_sizes_[0], split_sizes_[0] + split_sizes_[1]};
    case Split::Test: return {split_sizes_[0] + split_sizes_[1], timesteps_};
    }
    return {0, 0};
}

const std::vector<Index>& DataManager::split_trajectories(Split split) const
{
    require(!fields_.empty(), ErrorKind::Data, "manager has no data");
    return split_trajectories_[static_cast<std::size_t>(split)];
}

Matrix DataManager::split_measurements(Split split) const
{
    const auto [begin, end] = split_times(split);
    const auto& trajs = split_trajectories(split);
    Matrix out(static_cast<Index>(trajs.size()) * (end - begin), measurements_.cols());
    Index row = 0;
    for (Index r : trajs) {
        out.middleRows(row, end - begin) = measurements_.middleRows(r * timesteps_ + begin, end - begin);
        row += end - begin;
    }
    return out;
}

const MinMaxScaler& DataManager::sensor_scaler() const
{
    require(sensor_scaler_.has_value(), ErrorKind::Data, "manager not prepared: call prepare() first");
    return *sensor_scaler_;
}

PreparedDatasets DataManager::prepare()
{
    require(!fields_.empty(), ErrorKind::Data, "prepare: no data added");
    require(measurements_.cols() >= 1, ErrorKind::Data, "prepare: no sensors on any field");

    const std::vector<Index> rows = train_rows();
    Matrix train_measurements(static_cast<Index>(rows.size()), measurements_.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        train_measurements.row(static_cast<Index>(i)) = measurements_.row(rows[i]);
    sensor_scaler_ = MinMaxScaler::fit(train_measurements);
    const Matrix scaled = sensor_scaler_->apply(measurements_);

    const Index width = target_width();
    const Index s = measurements_.cols();
    PreparedDatasets out;
    SequenceDataset* sets[3] = {&out.train, &out.val, &out.test};
    for (int k = 0; k < 3; ++k) {
        const auto split = static_cast<Split>(k);
        const auto [begin, end] = split_times(split);
        const auto& trajs = split_trajectories(split);
        const Index n = static_cast<Index>(trajs.size()) * (end - begin);
        SequenceDataset& set = *sets[k];
        set.lags = options_.lags;
        set.width = s;
        set.inputs.resize(n, options_.lags * s);
        set.targets.resize(n, width);
        set.samples.reserve(static_cast<std::size_t>(n));
        Index row = 0;
        for (Index r : trajs) {
            const LaggedSequences lagged =
                build_lagged_sequences(scaled.middleRows(r * timesteps_, timesteps_), options_.lags);
            for (Index t = begin; t < end; ++t, ++row) {
                set.inputs.row(row) = lagged.windows.row(t);
                for (const auto& f : fields_)
                    set.targets.block(row, f.target_offset, 1, f.codec.width()) = f.encoded.row(r * timesteps_ + t);
                set.samples.push_back({r, t});
            }
        }
    }
    return out;
}

} // namespace shred
