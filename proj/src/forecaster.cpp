#include "shred/forecaster.hpp"

#include "shred/error.hpp"

namespace shred {

namespace {

SequenceDataset window_pairs(const Matrix& latents, Index window, Index begin, Index end)
{
    const Index h = latents.cols();
    SequenceDataset out;
    out.lags = window;
    out.width = h;
    out.inputs.resize(end - begin, window * h);
    out.targets.resize(end - begin, h);
    for (Index n = begin; n < end; ++n) {
        for (Index t = 0; t < window; ++t) out.inputs.block(n - begin, t * h, 1, h) = latents.row(n + t);
        out.targets.row(n - begin) = latents.row(n + window);
        out.samples.push_back({0, n + window});
    }
    return out;
}

} // namespace

RecurrentForecaster fit_recurrent_forecaster(const Matrix& latents, const RecurrentForecasterSpec& spec)
{
    require(spec.window >= 1, ErrorKind::Config, "recurrent forecaster: window must be >= 1");
    require(latents.rows() > spec.window, ErrorKind::Data,
            "recurrent forecaster: need more than " + std::to_string(spec.window) + " latents, got " +
                std::to_string(latents.rows()));
    require_finite(latents, "recurrent forecaster latents");

    const Index pairs = latents.rows() - spec.window;
    const Index held_out = pairs >= 2 ? std::max<Index>(1, pairs / 10) : 0;
    const SequenceDataset train = window_pairs(latents, spec.window, 0, pairs - held_out);
    const SequenceDataset val =
        held_out > 0 ? window_pairs(latents, spec.window, pairs - held_out, pairs) : train;

    NetworkSpec net_spec;
    net_spec.cell = spec.cell;
    net_spec.input_size = latents.cols();
    net_spec.hidden_size = spec.hidden_size;
    net_spec.num_layers = spec.num_layers;
    net_spec.decoder_layers = {};
    net_spec.output_size = latents.cols();

    RecurrentForecaster out{spec.window, Network(net_spec)};
    out.network.initialize(spec.training.seed);
    train_network(out.network, train, val, spec.training);
    return out;
}

Matrix recurrent_forecast(const RecurrentForecaster& forecaster, const Matrix& seed, Index steps)
{
    const Index h = forecaster.latent_size();
    require(steps >= 0, ErrorKind::Data, "recurrent_forecast: negative step count");
    require(seed.cols() == h, ErrorKind::Data, "recurrent_forecast: seed width mismatch");
    require(seed.rows() >= forecaster.window, ErrorKind::Data,
            "recurrent_forecast: seed has " + std::to_string(seed.rows()) + " rows, window is " +
                std::to_string(forecaster.window));

    SequenceBatch window;
    for (Index t = seed.rows() - forecaster.window; t < seed.rows(); ++t) window.push_back(seed.row(t).transpose());
    Matrix out(steps, h);
    for (Index k = 0; k < steps; ++k) {
        const Batch next = forecaster.network.decode(forecaster.network.encode(window));
        out.row(k) = next.col(0).transpose();
        window.erase(window.begin());
        window.push_back(next);
    }
    return out;
}

} // namespace shred
