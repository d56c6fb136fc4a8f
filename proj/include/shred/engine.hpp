#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shred/data_manager.hpp"
#include "shred/field_array.hpp"
#include "shred/model.hpp"

namespace shred {

/// Field id -> physical-space array, (T, spatial...) per trajectory.
using FieldReconstruction = std::map<std::string, FieldArray>;

struct FieldMetrics {
    double mse = 0.0;
    double mean_relative_error = 0.0;
    Index snapshots = 0;          ///< snapshots entering the relative mean
    Index zero_norm_excluded = 0; ///< snapshots with |truth| = 0, left out of the mean
};

struct EvaluationReport {
    Split split = Split::Test;
    std::vector<std::pair<std::string, FieldMetrics>> fields; ///< in registration order
};

/// Mean over snapshot rows of |truth - estimate|_2 / |truth|_2, skipping rows
/// whose truth norm is zero.
FieldMetrics snapshot_errors(const Matrix& truth, const Matrix& estimate);

/// w = -du/dy + dv/dx for (T, ny, nx) arrays: axis 1 is y, axis 2 is x.
/// Central differences inside, second-order one-sided at the edges.
FieldArray vorticity(const FieldArray& u, const FieldArray& v, double dx, double dy);

/// Downstream operations on a prepared manager and a trained model.
/// Holds references; both must outlive the engine.
class Engine {
public:
    Engine(const DataManager& manager, const ShredModel& model);

    [[nodiscard]] bool parametric() const { return manager_->parametric(); }
    [[nodiscard]] const DataManager& manager() const { return *manager_; }
    [[nodiscard]] const ShredModel& model() const { return *model_; }

    /// Raw T x s measurements of one trajectory -> T x h latents. Windows are
    /// padded by repeating the first row.
    [[nodiscard]] Matrix sensor_to_latent(const Matrix& measurements) const;

    /// Parametric form: each trajectory is windowed independently.
    [[nodiscard]] std::vector<Matrix> sensor_to_latent(const std::vector<Matrix>& trajectories) const;

    /// Continues `seed` latents for `horizon` steps with the attached forecaster.
    [[nodiscard]] Matrix forecast_latent(const Matrix& seed, Index horizon) const;

    /// Scaled decoder outputs, T x target width.
    [[nodiscard]] Matrix decode_targets(const Matrix& latents) const;

    /// Decoder outputs split per field, unscaled and decompressed.
    [[nodiscard]] FieldReconstruction decode(const Matrix& latents) const;

    /// Reconstruction of a split from the stored measurements. Windows use the
    /// full measurement history of each trajectory; parametric output arrays
    /// are (R_split, T, spatial...).
    [[nodiscard]] FieldReconstruction reconstruct(Split split) const;

    /// Physical-space metrics of reconstruct(split) against full-length
    /// ground-truth arrays (shaped as registered) for the fields in `truth`.
    [[nodiscard]] EvaluationReport evaluate(const std::map<std::string, FieldArray>& truth, Split split) const;

private:
    const DataManager* manager_;
    const ShredModel* model_;
};

} // namespace shred
