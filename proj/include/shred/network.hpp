#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shred/linalg.hpp"

namespace shred {

enum class CellKind : std::uint32_t { Gru = 0, Lstm = 1 };

std::string to_string(CellKind kind);
CellKind cell_kind_from_string(const std::string& name);

/// Architecture of a recurrent encoder followed by a feed-forward decoder.
struct NetworkSpec {
    CellKind cell = CellKind::Lstm;
    Index input_size = 1;
    Index hidden_size = 64;
    Index num_layers = 2;
    std::vector<Index> decoder_layers{350, 400};
    Index output_size = 1;

    void validate() const;
    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Activations are column-per-sample: a batch at one time step is features x B.
using Batch = Eigen::MatrixXd;
/// One Batch per time step, oldest first.
using SequenceBatch = std::vector<Batch>;

/// Everything the backward pass needs, captured by Network::forward.
struct ForwardPass {
    struct LayerStep {
        Batch gates;  // activated gates: LSTM (i,f,g,o), GRU (r,z,n)
        Batch cell;   // LSTM cell state c_t
        Batch tanh_cell;
        Batch hidden_proj; // GRU: W_hn h_{t-1} + b_hn
        Batch hidden;  // h_t
    };
    SequenceBatch inputs;
    std::vector<std::vector<LayerStep>> layers; // [layer][time]
    std::vector<Batch> decoder_activations;    // input to each decoder layer, then output
    Index batch = 0;

    [[nodiscard]] bool empty() const { return layers.empty(); }
    [[nodiscard]] const Batch& latent() const { return layers.back().back().hidden; }
    [[nodiscard]] const Batch& output() const { return decoder_activations.back(); }
};

/// Recurrent encoder (stacked GRU/LSTM) plus MLP decoder (ReLU hidden
/// layers, linear output). Gate layout and bias placement follow the common
/// two-bias convention: LSTM gates (i, f, g, o), GRU gates (r, z, n) with
/// the hidden bias of n inside the reset product.
class Network {
public:
    Network() = default;
    explicit Network(NetworkSpec spec);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every parameter; the
    /// recurrent layers use the hidden size as fan-in.
    void initialize(std::uint64_t seed);

    [[nodiscard]] const NetworkSpec& spec() const { return spec_; }
    [[nodiscard]] Index latent_size() const { return spec_.hidden_size; }

    /// Parameters in declared order: per layer (W_ih, W_hh, b_ih, b_hh), then
    /// per decoder layer (W, b). Biases are column matrices.
    [[nodiscard]] std::vector<Matrix>& parameters() { return params_; }
    [[nodiscard]] const std::vector<Matrix>& parameters() const { return params_; }
    [[nodiscard]] std::vector<std::string> parameter_names() const;
    [[nodiscard]] Index parameter_count() const;

    [[nodiscard]] ForwardPass forward(const SequenceBatch& inputs) const;
    [[nodiscard]] Batch encode(const SequenceBatch& inputs) const;
    [[nodiscard]] Batch decode(const Batch& latent) const;

    /// Backpropagation through the decoder and through time. `d_output` is
    /// dLoss/d(output); `d_latent`, when non-empty, is an extra gradient
    /// arriving directly at the latent. Gradients align with parameters().
    [[nodiscard]] std::vector<Matrix> backward(const ForwardPass& pass, const Batch& d_output,
                                               const Batch& d_latent = Batch()) const;

private:
    [[nodiscard]] Index gate_count() const { return spec_.cell == CellKind::Lstm ? 4 : 3; }
    [[nodiscard]] std::size_t layer_param(Index layer, int which) const
    {
        return static_cast<std::size_t>(layer * 4 + which);
    }
    [[nodiscard]] std::size_t decoder_param(Index layer, int which) const
    {
        return static_cast<std::size_t>(spec_.num_layers * 4 + layer * 2 + which);
    }

    NetworkSpec spec_;
    std::vector<Matrix> params_;
};

/// Builds the time-major batch for rows `indices` of a flattened sequence
/// table (row = lags * width values, time-major).
SequenceBatch gather_sequences(const Matrix& table, Index lags, Index width, const std::vector<Index>& indices);

} // namespace shred
