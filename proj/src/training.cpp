#include "shred/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>

#include "shred/error.hpp"
#include "shred/rng.hpp"

namespace shred {

namespace {

constexpr Index kEvalChunk = 512;

std::vector<Index> index_range(Index begin, Index end)
{
    std::vector<Index> out(static_cast<std::size_t>(end - begin));
    std::iota(out.begin(), out.end(), begin);
    return out;
}

void check_widths(const Network& net, const SequenceDataset& data, const char* which)
{
    require(data.width == net.spec().input_size, ErrorKind::Data,
            std::string(which) + " dataset has " + std::to_string(data.width) + " sensor inputs, model expects " +
                std::to_string(net.spec().input_size));
    require(data.target_width() == net.spec().output_size, ErrorKind::Data,
            std::string(which) + " dataset has target width " + std::to_string(data.target_width()) +
                ", model outputs " + std::to_string(net.spec().output_size));
}

} // namespace

void TrainConfig::validate() const
{
    require(epochs >= 1, ErrorKind::Config, "training: epochs must be >= 1");
    require(batch_size >= 1, ErrorKind::Config, "training: batch_size must be >= 1");
    require(patience >= 1, ErrorKind::Config, "training: patience must be >= 1");
    require(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorKind::Config,
            "training: learning rate must be finite and >= 0");
    require(sindy_regularization >= 0.0, ErrorKind::Config, "training: sindy_regularization must be >= 0");
    require(sindy_thres_epoch >= 1, ErrorKind::Config, "training: sindy_thres_epoch must be >= 1");
    require(sindy_threshold >= 0.0, ErrorKind::Config, "training: sindy_threshold must be >= 0");
    require(sindy_ridge >= 0.0, ErrorKind::Config, "training: sindy ridge must be >= 0");
}

Adam::Adam(const std::vector<Matrix>& params, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon)
{
    for (const auto& p : params) {
        first_.push_back(Matrix::Zero(p.rows(), p.cols()));
        second_.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
}

void Adam::step(std::vector<Matrix>& params, const std::vector<Matrix>& grads)
{
    beta1_power_ *= beta1_;
    beta2_power_ *= beta2_;
    const double correction1 = 1.0 - beta1_power_;
    const double correction2 = 1.0 - beta2_power_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        first_[i] = beta1_ * first_[i] + (1.0 - beta1_) * grads[i];
        second_[i] = beta2_ * second_[i] + (1.0 - beta2_) * grads[i].cwiseAbs2();
        params[i].array() -= lr_ * (first_[i].array() / correction1) /
                             ((second_[i].array() / correction2).sqrt() + epsilon_);
    }
}

Batch gather_targets(const Matrix& targets, const std::vector<Index>& indices)
{
    Batch out(targets.cols(), static_cast<Index>(indices.size()));
    for (std::size_t b = 0; b < indices.size(); ++b) out.col(static_cast<Index>(b)) = targets.row(indices[b]).transpose();
    return out;
}

BatchLoss batch_loss(const Network& net, const SequenceBatch& inputs, const Batch& targets, const SindyModel* sindy,
                     double sindy_weight)
{
    const ForwardPass pass = net.forward(inputs);
    require(targets.rows() == pass.output().rows() && targets.cols() == pass.batch, ErrorKind::Data,
            "loss: target shape mismatch");
    BatchLoss loss;
    loss.mse = (pass.output() - targets).squaredNorm() / static_cast<double>(targets.size());
    if (sindy != nullptr && pass.batch >= 3) {
        const Matrix z = pass.latent().transpose();
        loss.consistency = sindy_consistency(z, *sindy);
    }
    loss.total = loss.mse + sindy_weight * loss.consistency;
    return loss;
}

BatchLoss batch_gradient(const Network& net, const SequenceBatch& inputs, const Batch& targets,
                         std::vector<Matrix>& grads, const SindyModel* sindy, double sindy_weight)
{
    const ForwardPass pass = net.forward(inputs);
    require(targets.rows() == pass.output().rows() && targets.cols() == pass.batch, ErrorKind::Data,
            "loss: target shape mismatch");
    BatchLoss loss;
    const Batch diff = pass.output() - targets;
    const auto count = static_cast<double>(targets.size());
    loss.mse = diff.squaredNorm() / count;
    const Batch d_output = diff * (2.0 / count);

    Batch d_latent;
    if (sindy != nullptr && pass.batch >= 3) {
        const Matrix z = pass.latent().transpose();
        loss.consistency = sindy_consistency(z, *sindy);
        if (sindy_weight != 0.0) d_latent = (sindy_consistency_gradient(z, *sindy) * sindy_weight).transpose();
    }
    loss.total = loss.mse + sindy_weight * loss.consistency;
    grads = net.backward(pass, d_output, d_latent);
    return loss;
}

double dataset_mse(const Network& net, const SequenceDataset& data)
{
    require(!data.empty(), ErrorKind::Data, "evaluate: empty dataset");
    check_widths(net, data, "evaluation");
    double total = 0.0;
    for (Index begin = 0; begin < data.size(); begin += kEvalChunk) {
        const auto idx = index_range(begin, std::min(begin + kEvalChunk, data.size()));
        const Batch out = net.decode(net.encode(gather_sequences(data.inputs, data.lags, data.width, idx)));
        total += (out - gather_targets(data.targets, idx)).squaredNorm();
    }
    return total / static_cast<double>(data.targets.size());
}

Matrix dataset_latents(const Network& net, const SequenceDataset& data)
{
    Matrix z(data.size(), net.latent_size());
    for (Index begin = 0; begin < data.size(); begin += kEvalChunk) {
        const Index end = std::min(begin + kEvalChunk, data.size());
        const Batch latent = net.encode(gather_sequences(data.inputs, data.lags, data.width, index_range(begin, end)));
        z.middleRows(begin, end - begin) = latent.transpose();
    }
    return z;
}

TrainReport train_network(Network& net, const SequenceDataset& train, const SequenceDataset& val,
                          const TrainConfig& cfg, SindyModel* sindy)
{
    cfg.validate();
    require(!train.empty(), ErrorKind::Data, "fit: empty training dataset");
    require(!val.empty(), ErrorKind::Data, "fit: empty validation dataset");
    check_widths(net, train, "training");
    check_widths(net, val, "validation");
    if (sindy != nullptr)
        require(sindy->library.latent_dim == net.latent_size(), ErrorKind::Config,
                "fit: SINDy latent dimension " + std::to_string(sindy->library.latent_dim) +
                    " != encoder hidden size " + std::to_string(net.latent_size()));

    Rng rng(cfg.seed);
    Adam adam(net.parameters(), cfg.learning_rate);
    TrainReport report;
    double best = std::numeric_limits<double>::infinity();
    std::vector<Matrix> best_params = net.parameters();
    std::optional<SindyModel> best_sindy;
    std::vector<Matrix> grads;

    const Index n = train.size();
    const Index batch_count = (n + cfg.batch_size - 1) / cfg.batch_size;

    for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (sindy != nullptr) {
            const Matrix z = dataset_latents(net, train);
            if (sindy->coefficients.size() == 0)
                *sindy = sindy_fit(z, sindy->dt, sindy->library, cfg.sindy_ridge);
            else
                sindy_refit(*sindy, z, cfg.sindy_ridge);
        }

        // SINDy batches keep consecutive samples together so the latent
        // columns form a time series; only their order is shuffled.
        std::vector<Index> order(static_cast<std::size_t>(n));
        if (sindy != nullptr) {
            std::iota(order.begin(), order.end(), Index{0});
        } else {
            const auto perm = rng.permutation(static_cast<std::size_t>(n));
            for (std::size_t i = 0; i < perm.size(); ++i) order[i] = static_cast<Index>(perm[i]);
        }
        std::vector<std::size_t> batch_order(static_cast<std::size_t>(batch_count));
        if (sindy != nullptr)
            batch_order = rng.permutation(static_cast<std::size_t>(batch_count));
        else
            std::iota(batch_order.begin(), batch_order.end(), std::size_t{0});

        for (std::size_t b : batch_order) {
            const auto begin = static_cast<Index>(b) * cfg.batch_size;
            const Index end = std::min(begin + cfg.batch_size, n);
            const std::vector<Index> idx(order.begin() + begin, order.begin() + end);
            const BatchLoss loss =
                batch_gradient(net, gather_sequences(train.inputs, train.lags, train.width, idx),
                               gather_targets(train.targets, idx), grads, sindy, cfg.sindy_regularization);
            if (!std::isfinite(loss.total))
                fail(ErrorKind::Numeric, "fit: non-finite loss at epoch " + std::to_string(epoch) + " (mse " +
                                             std::to_string(loss.mse) + ", sindy " + std::to_string(loss.consistency) +
                                             ")");
            adam.step(net.parameters(), grads);
        }

        if (sindy != nullptr && epoch % cfg.sindy_thres_epoch == 0)
            *sindy = sindy_threshold(std::move(*sindy), cfg.sindy_threshold);

        const double val_mse = dataset_mse(net, val);
        if (!std::isfinite(val_mse))
            fail(ErrorKind::Numeric, "fit: non-finite validation error at epoch " + std::to_string(epoch));
        report.val_errors.push_back(val_mse);
        if (cfg.verbose) std::fprintf(stderr, "epoch %lld  val_mse %.6e\n", static_cast<long long>(epoch), val_mse);

        if (val_mse < best) {
            best = val_mse;
            report.best_epoch = epoch;
            best_params = net.parameters();
            if (sindy != nullptr) best_sindy = *sindy;
        } else if (epoch - report.best_epoch >= cfg.patience) {
            break;
        }
    }

    net.parameters() = best_params;
    if (sindy != nullptr) {
        *sindy = *best_sindy;
        sindy_refit(*sindy, dataset_latents(net, train), cfg.sindy_ridge);
        *sindy = sindy_threshold(std::move(*sindy), cfg.sindy_threshold);
    }
    report.train_mse = dataset_mse(net, train);
    report.val_mse = best;
    return report;
}

} // namespace shred
