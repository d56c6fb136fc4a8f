#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "shred/dataset.hpp"
#include "shred/forecaster.hpp"
#include "shred/network.hpp"
#include "shred/sindy.hpp"
#include "shred/training.hpp"

namespace shred {

struct SindyForecasterSpec {
    int poly_order = 1;
    bool include_sine = false;
    double dt = 1.0;

    friend bool operator==(const SindyForecasterSpec&, const SindyForecasterSpec&) = default;
};

using ForecasterConfig = std::variant<std::monostate, RecurrentForecasterSpec, SindyForecasterSpec>;

enum class ForecasterKind : std::uint32_t { None = 0, Recurrent = 1, Sindy = 2 };

/// Architecture choices for a SHRED model; input and output widths come from
/// the data at creation time.
struct ModelConfig {
    CellKind cell = CellKind::Lstm;
    Index hidden_size = 0; ///< 0 picks 3 with a SINDy forecaster, else 64
    Index num_layers = 2;
    std::vector<Index> decoder_layers{350, 400};
    ForecasterConfig forecaster{};

    [[nodiscard]] Index latent_size() const;
};

/// Recurrent encoder + MLP decoder, with an optional latent forecaster.
class ShredModel {
public:
    ShredModel() = default;
    ShredModel(const ModelConfig& config, Index input_size, Index output_size, std::uint64_t seed);

    [[nodiscard]] Network& network() { return network_; }
    [[nodiscard]] const Network& network() const { return network_; }
    [[nodiscard]] const ForecasterConfig& forecaster_config() const { return forecaster_; }
    [[nodiscard]] ForecasterKind forecaster_kind() const;

    [[nodiscard]] Index input_size() const { return network_.spec().input_size; }
    [[nodiscard]] Index output_size() const { return network_.spec().output_size; }
    [[nodiscard]] Index latent_size() const { return network_.latent_size(); }

    [[nodiscard]] std::optional<SindyModel>& sindy() { return sindy_; }
    [[nodiscard]] const std::optional<SindyModel>& sindy() const { return sindy_; }
    [[nodiscard]] std::optional<RecurrentForecaster>& recurrent() { return recurrent_; }
    [[nodiscard]] const std::optional<RecurrentForecaster>& recurrent() const { return recurrent_; }

    /// Fresh (unfitted) SINDy model matching the configured library, or
    /// nullopt when no SINDy forecaster is attached.
    [[nodiscard]] std::optional<SindyModel> sindy_template() const;

    void set_forecaster(ForecasterConfig config) { forecaster_ = std::move(config); }

private:
    Network network_;
    ForecasterConfig forecaster_{};
    std::optional<SindyModel> sindy_;
    std::optional<RecurrentForecaster> recurrent_;
};

/// Latent (final hidden state of the last layer) of one lags x s window.
Vector encoder_forward(const ShredModel& model, const Matrix& sequence);

/// Decoder output for one latent vector.
Vector decoder_forward(const ShredModel& model, const Vector& latent);

/// Loss over `data` as one batch (samples in dataset order): MSE plus
/// sindy_regularization times the latent consistency when `sindy` is given.
double loss(const ShredModel& model, const SequenceDataset& data, const SindyModel* sindy = nullptr,
            double sindy_regularization = 0.0);

/// Exact gradient of loss() by backpropagation through time.
std::vector<Matrix> backward(const ShredModel& model, const SequenceDataset& data,
                             const SindyModel* sindy = nullptr, double sindy_regularization = 0.0);

/// Trains the network and any attached forecaster. A SINDy forecaster is
/// trained jointly; a recurrent forecaster is trained afterwards on the
/// training latents.
TrainReport fit(ShredModel& model, const SequenceDataset& train, const SequenceDataset& val,
                const TrainConfig& cfg);

/// MSE over samples and target components in scaled target space.
double evaluate(const ShredModel& model, const SequenceDataset& data);

} // namespace shred
