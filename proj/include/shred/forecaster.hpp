#pragma once

#include "shred/network.hpp"
#include "shred/training.hpp"

namespace shred {

struct RecurrentForecasterSpec {
    Index window = 20;
    CellKind cell = CellKind::Lstm;
    Index hidden_size = 64;
    Index num_layers = 1;
    TrainConfig training{};

    friend bool operator==(const RecurrentForecasterSpec& a, const RecurrentForecasterSpec& b)
    {
        return a.window == b.window && a.cell == b.cell && a.hidden_size == b.hidden_size &&
               a.num_layers == b.num_layers;
    }
};

/// Next-latent predictor: a recurrent network reading `window` latents and
/// emitting the following one through a linear head.
struct RecurrentForecaster {
    Index window = 0;
    Network network;

    [[nodiscard]] Index latent_size() const { return network.spec().input_size; }
};

/// Trains on every (window -> next) pair of `latents`; the last tenth of the
/// pairs (at least one) is held out for early stopping.
RecurrentForecaster fit_recurrent_forecaster(const Matrix& latents, const RecurrentForecasterSpec& spec);

/// Autoregressive rollout from the last `window` rows of `seed`.
Matrix recurrent_forecast(const RecurrentForecaster& forecaster, const Matrix& seed, Index steps);

} // namespace shred
