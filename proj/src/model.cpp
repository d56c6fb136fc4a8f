#include "shred/model.hpp"

#include <numeric>

#include "shred/error.hpp"

namespace shred {

namespace {

std::vector<Index> all_indices(Index n)
{
    std::vector<Index> out(static_cast<std::size_t>(n));
    std::iota(out.begin(), out.end(), Index{0});
    return out;
}

} // namespace

Index ModelConfig::latent_size() const
{
    if (hidden_size > 0) return hidden_size;
    return std::holds_alternative<SindyForecasterSpec>(forecaster) ? 3 : 64;
}

ShredModel::ShredModel(const ModelConfig& config, Index input_size, Index output_size, std::uint64_t seed)
    : forecaster_(config.forecaster)
{
    NetworkSpec spec;
    spec.cell = config.cell;
    spec.input_size = input_size;
    spec.hidden_size = config.latent_size();
    spec.num_layers = config.num_layers;
    spec.decoder_layers = config.decoder_layers;
    spec.output_size = output_size;
    network_ = Network(spec);
    network_.initialize(seed);
}

ForecasterKind ShredModel::forecaster_kind() const
{
    if (std::holds_alternative<SindyForecasterSpec>(forecaster_)) return ForecasterKind::Sindy;
    if (std::holds_alternative<RecurrentForecasterSpec>(forecaster_)) return ForecasterKind::Recurrent;
    return ForecasterKind::None;
}

std::optional<SindyModel> ShredModel::sindy_template() const
{
    const auto* spec = std::get_if<SindyForecasterSpec>(&forecaster_);
    if (spec == nullptr) return std::nullopt;
    require(spec->dt > 0.0, ErrorKind::Config, "SINDy forecaster: dt must be positive");
    SindyModel model;
    model.library = {latent_size(), spec->poly_order, spec->include_sine};
    model.library.validate();
    model.dt = spec->dt;
    return model;
}

Vector encoder_forward(const ShredModel& model, const Matrix& sequence)
{
    require(sequence.cols() == model.input_size(), ErrorKind::Data,
            "encoder_forward: sequence width " + std::to_string(sequence.cols()) + " != model input width " +
                std::to_string(model.input_size()));
    SequenceBatch steps;
    for (Index t = 0; t < sequence.rows(); ++t) steps.push_back(sequence.row(t).transpose());
    return model.network().encode(steps).col(0);
}

Vector decoder_forward(const ShredModel& model, const Vector& latent)
{
    return model.network().decode(latent).col(0);
}

double loss(const ShredModel& model, const SequenceDataset& data, const SindyModel* sindy,
            double sindy_regularization)
{
    require(!data.empty(), ErrorKind::Data, "loss: empty batch");
    const auto idx = all_indices(data.size());
    return batch_loss(model.network(), gather_sequences(data.inputs, data.lags, data.width, idx),
                      gather_targets(data.targets, idx), sindy, sindy_regularization)
        .total;
}

std::vector<Matrix> backward(const ShredModel& model, const SequenceDataset& data, const SindyModel* sindy,
                             double sindy_regularization)
{
    require(!data.empty(), ErrorKind::Data, "backward: empty batch");
    const auto idx = all_indices(data.size());
    std::vector<Matrix> grads;
    batch_gradient(model.network(), gather_sequences(data.inputs, data.lags, data.width, idx),
                   gather_targets(data.targets, idx), grads, sindy, sindy_regularization);
    return grads;
}

TrainReport fit(ShredModel& model, const SequenceDataset& train, const SequenceDataset& val, const TrainConfig& cfg)
{
    TrainReport report;
    if (auto sindy = model.sindy_template()) {
        report = train_network(model.network(), train, val, cfg, &*sindy);
        model.sindy() = std::move(*sindy);
    } else {
        report = train_network(model.network(), train, val, cfg);
    }

    if (const auto* spec = std::get_if<RecurrentForecasterSpec>(&model.forecaster_config())) {
        RecurrentForecasterSpec rf = *spec;
        rf.training.seed = cfg.seed;
        model.recurrent() = fit_recurrent_forecaster(dataset_latents(model.network(), train), rf);
    }
    return report;
}

double evaluate(const ShredModel& model, const SequenceDataset& data)
{
    return dataset_mse(model.network(), data);
}

} // namespace shred
