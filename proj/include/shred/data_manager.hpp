#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shred/dataset.hpp"
#include "shred/field_array.hpp"
#include "shred/linalg.hpp"

namespace shred {

/// Spatial index tuple into a field's grid.
using Coordinate = std::vector<Index>;

struct StationarySensor {
    Coordinate at;
};

/// One coordinate per time step.
struct MobileSensor {
    std::vector<Coordinate> path;
};

using Sensor = std::variant<StationarySensor, MobileSensor>;

struct NoSensors {};
/// `count` stationary sensors drawn uniformly without replacement.
struct RandomSensors {
    Index count = 0;
    std::optional<std::uint64_t> seed; ///< defaults to a seed derived from the manager's
};
struct ExplicitSensors {
    std::vector<Sensor> sensors;
};
/// Externally supplied measurements: T x s (or R*T x s, trajectory-major).
struct MeasuredSensors {
    Matrix table;
};

using SensorSource = std::variant<NoSensors, RandomSensors, ExplicitSensors, MeasuredSensors>;

struct NoCompression {};
struct SvdCompression {
    Index modes = 0;
};
struct FourierCompression {
    int cutoff_x = 0;
    int cutoff_y = 0;
};

using Compression = std::variant<NoCompression, SvdCompression, FourierCompression>;

/// Field encoding: compression followed by min-max scaling of the
/// compressed coefficients.
class FieldCodec {
public:
    FieldCodec() = default;

    /// Fits the compressor on `train_snapshots` (rows are snapshots), then the
    /// scaler on their compressed coefficients.
    static FieldCodec fit(const Matrix& train_snapshots, const std::vector<Index>& spatial_shape,
                          const Compression& compression, std::uint64_t seed = 0);

    /// Reassembles a codec from stored parts (checkpoint/codec files).
    static FieldCodec restore(Compression compression, Index spatial_size, MinMaxScaler scaler,
                              std::optional<SvdFactors> svd, std::optional<FourierTruncation> fourier);

    [[nodiscard]] Matrix compress(const Matrix& snapshots) const;
    [[nodiscard]] Matrix decompress(const Matrix& coefficients) const;
    [[nodiscard]] Matrix encode(const Matrix& snapshots) const { return scaler_.apply(compress(snapshots)); }
    [[nodiscard]] Matrix decode(const Matrix& scaled) const { return decompress(scaler_.invert(scaled)); }

    [[nodiscard]] Index width() const { return scaler_.width(); }
    [[nodiscard]] Index spatial_size() const { return spatial_size_; }
    [[nodiscard]] const Compression& compression() const { return compression_; }
    [[nodiscard]] const MinMaxScaler& scaler() const { return scaler_; }
    [[nodiscard]] const std::optional<SvdFactors>& svd() const { return svd_; }
    [[nodiscard]] const std::optional<FourierTruncation>& fourier() const { return fourier_; }

private:
    Compression compression_{};
    Index spatial_size_ = 0;
    MinMaxScaler scaler_;
    std::optional<SvdFactors> svd_; ///< U is dropped after fitting; S and V kept
    std::optional<FourierTruncation> fourier_;
};

/// Measurements of `snapshots` (T x prod(spatial_shape)) at each sensor:
/// entry (t, j) is sensor j's value at time t.
Matrix extract_measurements(const Matrix& snapshots, const std::vector<Index>& spatial_shape,
                            const std::vector<Sensor>& sensors);

/// Same, for an array whose leading axis is time.
Matrix extract_measurements(const FieldArray& data, const std::vector<Sensor>& sensors);

struct LaggedSequences {
    Matrix windows;                  ///< T x (lags * s), time-major per row
    std::vector<Index> target_times; ///< 0..T-1
};

/// One window per time t covering t-lags+1..t; times before 0 repeat the
/// first measurement.
LaggedSequences build_lagged_sequences(const Matrix& measurements, Index lags);

enum class Split { Train, Val, Test };

std::string to_string(Split split);
Split split_from_string(const std::string& name);

struct ManagerOptions {
    Index lags = 52;
    double train_size = 0.8;
    double val_size = 0.1;
    double test_size = 0.1;
    bool parametric = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FieldEntry {
    std::string id;
    std::vector<Index> spatial_shape;
    FieldCodec codec;
    std::vector<Sensor> sensors; ///< empty for measured or sensor-less fields
    Index sensor_offset = 0;     ///< first column in the measurement table
    Index sensor_count = 0;
    Index target_offset = 0;     ///< first column in the target vector
    Matrix encoded;              ///< (R*T) x codec width, scaled

    [[nodiscard]] Index spatial_size() const { return codec.spatial_size(); }
};

/// Registers fields, extracts sensor data and produces lagged train /
/// validation / test datasets. Non-parametric data is one trajectory split
/// contiguously in time; parametric data assigns whole trajectories to splits
/// at random.
class DataManager {
public:
    explicit DataManager(ManagerOptions options);

    /// `data` is (T, spatial...) or, parametric, (R, T, spatial...).
    void add_data(const FieldArray& data, const std::string& id, const SensorSource& sensors = NoSensors{},
                  const Compression& compression = NoCompression{});

    /// Adds i.i.d. N(0, std^2) noise to every stored sensor measurement.
    void inject_noise(double std, std::uint64_t seed);

    /// Fits the sensor scaler on training rows and builds the datasets.
    PreparedDatasets prepare();

    [[nodiscard]] const ManagerOptions& options() const { return options_; }
    [[nodiscard]] bool parametric() const { return options_.parametric; }
    [[nodiscard]] Index lags() const { return options_.lags; }
    [[nodiscard]] Index trajectories() const { return trajectories_; }
    [[nodiscard]] Index timesteps() const { return timesteps_; }
    [[nodiscard]] const std::vector<FieldEntry>& fields() const { return fields_; }
    [[nodiscard]] const FieldEntry& field(const std::string& id) const;
    [[nodiscard]] Index sensor_count() const { return measurements_.cols(); }
    [[nodiscard]] Index target_width() const;
    [[nodiscard]] bool prepared() const { return sensor_scaler_.has_value(); }

    /// Raw measurement table, (R*T) x s, trajectory-major rows.
    [[nodiscard]] const Matrix& sensor_measurements() const { return measurements_; }
    [[nodiscard]] Matrix& sensor_measurements() { return measurements_; }
    /// T x s raw measurements of one trajectory.
    [[nodiscard]] Matrix trajectory_measurements(Index trajectory) const;
    /// Raw measurement rows belonging to a split (parametric: stacked trajectories).
    [[nodiscard]] Matrix split_measurements(Split split) const;
    [[nodiscard]] Matrix test_sensor_measurements() const { return split_measurements(Split::Test); }

    /// Time range [begin, end) of a split (non-parametric).
    [[nodiscard]] std::pair<Index, Index> split_times(Split split) const;
    /// Trajectories of a split (parametric; {0} for non-parametric).
    [[nodiscard]] const std::vector<Index>& split_trajectories(Split split) const;

    [[nodiscard]] const MinMaxScaler& sensor_scaler() const;

private:
    void plan_splits(Index count);
    [[nodiscard]] std::vector<Index> train_rows() const;

    ManagerOptions options_;
    Index trajectories_ = 0;
    Index timesteps_ = 0;
    std::vector<FieldEntry> fields_;
    Matrix measurements_;
    std::vector<Index> split_sizes_;                   // train, val, test
    std::vector<std::vector<Index>> split_trajectories_; // parametric assignment
    std::optional<MinMaxScaler> sensor_scaler_;
};

} // namespace shred
