#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "shred/dataset.hpp"
#include "shred/network.hpp"
#include "shred/sindy.hpp"

namespace shred {

struct TrainConfig {
    Index epochs = 200;
    Index batch_size = 64;
    double learning_rate = 1e-3;
    Index patience = 20;
    std::uint64_t seed = 0;
    double sindy_regularization = 0.0;
    Index sindy_thres_epoch = 20;
    double sindy_threshold = 0.05;
    double sindy_ridge = 1e-6;
    bool verbose = false;

    void validate() const;
};

struct TrainReport {
    std::vector<double> val_errors; ///< one per completed epoch
    Index best_epoch = 0;           ///< 1-based
    double train_mse = 0.0;
    double val_mse = 0.0;
};

/// Adam with bias correction (Kingma & Ba defaults).
class Adam {
public:
    Adam(const std::vector<Matrix>& params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double epsilon = 1e-8);

    void step(std::vector<Matrix>& params, const std::vector<Matrix>& grads);

private:
    double lr_;
    double beta1_;
    double beta2_;
    double epsilon_;
    double beta1_power_ = 1.0;
    double beta2_power_ = 1.0;
    std::vector<Matrix> first_;
    std::vector<Matrix> second_;
};

/// Loss of a batch: MSE over samples and output components, plus
/// `sindy_weight` times the SINDy consistency of the batch latents when a
/// model is given (batch columns are then read as consecutive time steps).
struct BatchLoss {
    double mse = 0.0;
    double consistency = 0.0;
    double total = 0.0;
};

BatchLoss batch_loss(const Network& net, const SequenceBatch& inputs, const Batch& targets,
                     const SindyModel* sindy = nullptr, double sindy_weight = 0.0);

/// Loss and its exact gradient, aligned with net.parameters().
BatchLoss batch_gradient(const Network& net, const SequenceBatch& inputs, const Batch& targets,
                         std::vector<Matrix>& grads, const SindyModel* sindy = nullptr,
                         double sindy_weight = 0.0);

/// Target matrix (rows = samples) transposed into a features x B batch.
Batch gather_targets(const Matrix& targets, const std::vector<Index>& indices);

/// Mean squared error over all samples and target components.
double dataset_mse(const Network& net, const SequenceDataset& data);

/// Latents of every sample, in dataset order (N x hidden).
Matrix dataset_latents(const Network& net, const SequenceDataset& data);

/// Mini-batch Adam training with per-epoch validation and early stopping;
/// the best-validation weights are restored on return. When `sindy` is
/// non-null the SINDy-augmented loss is used and the model is refit each
/// epoch and thresholded every cfg.sindy_thres_epoch epochs.
TrainReport train_network(Network& net, const SequenceDataset& train, const SequenceDataset& val,
                          const TrainConfig& cfg, SindyModel* sindy = nullptr);

} // namespace shred
