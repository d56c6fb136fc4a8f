#include "shred/network.hpp"

#include <cmath>

#include "shred/error.hpp"
#include "shred/rng.hpp"

namespace shred {

namespace {

Batch sigmoid(const Batch& x)
{
    return (1.0 + (-x.array()).exp()).inverse().matrix();
}

void add_bias(Batch& x, const Matrix& bias)
{
    x.colwise() += Eigen::Map<const Vector>(bias.data(), bias.rows());
}

Matrix row_sums(const Batch& x)
{
    return x.rowwise().sum();
}

} // namespace

std::string to_string(CellKind kind)
{
    return kind == CellKind::Lstm ? "LSTM" : "GRU";
}

CellKind cell_kind_from_string(const std::string& name)
{
    if (name == "LSTM" || name == "lstm") return CellKind::Lstm;
    if (name == "GRU" || name == "gru") return CellKind::Gru;
    fail(ErrorKind::Config, "unknown sequence model '" + name + "' (expected LSTM or GRU)");
}

void NetworkSpec::validate() const
{
    require(input_size >= 1, ErrorKind::Config, "network: input size must be >= 1");
    require(hidden_size >= 1, ErrorKind::Config, "network: hidden size must be >= 1");
    require(num_layers >= 1, ErrorKind::Config, "network: need at least one recurrent layer");
    require(output_size >= 1, ErrorKind::Config, "network: output size must be >= 1");
    for (Index width : decoder_layers) require(width >= 1, ErrorKind::Config, "network: empty decoder layer");
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec))
{
    spec_.validate();
    const Index g = gate_count();
    const Index h = spec_.hidden_size;
    for (Index layer = 0; layer < spec_.num_layers; ++layer) {
        const Index in = layer == 0 ? spec_.input_size : h;
        params_.push_back(Matrix::Zero(g * h, in));
        params_.push_back(Matrix::Zero(g * h, h));
        params_.push_back(Matrix::Zero(g * h, 1));
        params_.push_back(Matrix::Zero(g * h, 1));
    }
    Index in = h;
    for (Index width : spec_.decoder_layers) {
        params_.push_back(Matrix::Zero(width, in));
        params_.push_back(Matrix::Zero(width, 1));
        in = width;
    }
    params_.push_back(Matrix::Zero(spec_.output_size, in));
    params_.push_back(Matrix::Zero(spec_.output_size, 1));
}

void Network::initialize(std::uint64_t seed)
{
    Rng rng(seed);
    const double recurrent_bound = 1.0 / std::sqrt(static_cast<double>(spec_.hidden_size));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Matrix& p = params_[i];
        double bound = recurrent_bound;
        const auto recurrent = static_cast<std::size_t>(spec_.num_layers * 4);
        if (i >= recurrent) {
            const std::size_t weight = i - ((i - recurrent) % 2);
            bound = 1.0 / std::sqrt(static_cast<double>(params_[weight].cols()));
        }
        for (Index r = 0; r < p.rows(); ++r)
            for (Index c = 0; c < p.cols(); ++c) p(r, c) = rng.uniform(-bound, bound);
    }
}

std::vector<std::string> Network::parameter_names() const
{
    std::vector<std::string> names;
    for (Index layer = 0; layer < spec_.num_layers; ++layer) {
        const std::string prefix = "encoder." + std::to_string(layer) + ".";
        names.push_back(prefix + "weight_ih");
        names.push_back(prefix + "weight_hh");
        names.push_back(prefix + "bias_ih");
        names.push_back(prefix + "bias_hh");
    }
    const auto decoder_count = static_cast<Index>(spec_.decoder_layers.size()) + 1;
    for (Index layer = 0; layer < decoder_count; ++layer) {
        const std::string prefix = "decoder." + std::to_string(layer) + ".";
        names.push_back(prefix + "weight");
        names.push_back(prefix + "bias");
    }
    return names;
}

Index Network::parameter_count() const
{
    Index total = 0;
    for (const auto& p : params_) total += p.size();
    return total;
}

ForwardPass Network::forward(const SequenceBatch& inputs) const
{
    require(!inputs.empty(), ErrorKind::Data, "network forward: empty sequence");
    const Index batch = inputs.front().cols();
    const Index h = spec_.hidden_size;
    for (const auto& x : inputs) {
        require(x.rows() == spec_.input_size && x.cols() == batch, ErrorKind::Data,
                "network forward: expected " + std::to_string(spec_.input_size) + " inputs per step, got " +
                    std::to_string(x.rows()));
        if (!x.allFinite()) fail(ErrorKind::Data, "network forward: non-finite input");
    }

    ForwardPass pass;
    pass.inputs = inputs;
    pass.batch = batch;
    pass.layers.resize(static_cast<std::size_t>(spec_.num_layers));

    const SequenceBatch* layer_in = &pass.inputs;
    SequenceBatch hidden_seq;
    for (Index layer = 0; layer < spec_.num_layers; ++layer) {
        const Matrix& w_ih = params_[layer_param(layer, 0)];
        const Matrix& w_hh = params_[layer_param(layer, 1)];
        const Matrix& b_ih = params_[layer_param(layer, 2)];
        const Matrix& b_hh = params_[layer_param(layer, 3)];
        auto& steps = pass.layers[static_cast<std::size_t>(layer)];
        steps.reserve(layer_in->size());

        Batch h_prev = Batch::Zero(h, batch);
        Batch c_prev = Batch::Zero(h, batch);
        for (const Batch& x : *layer_in) {
            ForwardPass::LayerStep step;
            if (spec_.cell == CellKind::Lstm) {
                Batch pre = w_ih * x + w_hh * h_prev;
                add_bias(pre, b_ih);
                add_bias(pre, b_hh);
                step.gates.resize(4 * h, batch);
                step.gates.topRows(2 * h) = sigmoid(pre.topRows(2 * h));
                step.gates.middleRows(2 * h, h) = pre.middleRows(2 * h, h).array().tanh().matrix();
                step.gates.bottomRows(h) = sigmoid(pre.bottomRows(h));
                step.cell = step.gates.middleRows(h, h).cwiseProduct(c_prev) +
                            step.gates.topRows(h).cwiseProduct(step.gates.middleRows(2 * h, h));
                step.tanh_cell = step.cell.array().tanh().matrix();
                step.hidden = step.gates.bottomRows(h).cwiseProduct(step.tanh_cell);
                c_prev = step.cell;
            } else {
                Batch gi = w_ih * x;
                add_bias(gi, b_ih);
                Batch gh = w_hh * h_prev;
                add_bias(gh, b_hh);
                step.gates.resize(3 * h, batch);
                step.gates.topRows(2 * h) = sigmoid(gi.topRows(2 * h) + gh.topRows(2 * h));
                step.hidden_proj = gh.bottomRows(h);
                step.gates.bottomRows(h) =
                    (gi.bottomRows(h) + step.gates.topRows(h).cwiseProduct(step.hidden_proj)).array().tanh().matrix();
                const auto z = step.gates.middleRows(h, h).array();
                step.hidden = ((1.0 - z) * step.gates.bottomRows(h).array() + z * h_prev.array()).matrix();
            }
            h_prev = step.hidden;
            steps.push_back(std::move(step));
        }
        hidden_seq.clear();
        hidden_seq.reserve(steps.size());
        for (const auto& step : steps) hidden_seq.push_back(step.hidden);
        layer_in = &hidden_seq;
    }

    const auto decoder_count = static_cast<Index>(spec_.decoder_layers.size()) + 1;
    pass.decoder_activations.reserve(static_cast<std::size_t>(decoder_count) + 1);
    pass.decoder_activations.push_back(pass.latent());
    for (Index layer = 0; layer < decoder_count; ++layer) {
        Batch z = params_[decoder_param(layer, 0)] * pass.decoder_activations.back();
        add_bias(z, params_[decoder_param(layer, 1)]);
        if (layer + 1 < decoder_count) z = z.cwiseMax(0.0);
        pass.decoder_activations.push_back(std::move(z));
    }
    return pass;
}

Batch Network::encode(const SequenceBatch& inputs) const
{
    return forward(inputs).latent();
}

Batch Network::decode(const Batch& latent) const
{
    require(latent.rows() == spec_.hidden_size, ErrorKind::Data,
            "decoder: expected latent of size " + std::to_string(spec_.hidden_size) + ", got " +
                std::to_string(latent.rows()));
    const auto decoder_count = static_cast<Index>(spec_.decoder_layers.size()) + 1;
    Batch a = latent;
    for (Index layer = 0; layer < decoder_count; ++layer) {
        Batch z = params_[decoder_param(layer, 0)] * a;
        add_bias(z, params_[decoder_param(layer, 1)]);
        if (layer + 1 < decoder_count) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a;
}

std::vector<Matrix> Network::backward(const ForwardPass& pass, const Batch& d_output, const Batch& d_latent) const
{
    require(!pass.empty(), ErrorKind::Data, "network backward: no forward cache");
    require(d_output.rows() == spec_.output_size && d_output.cols() == pass.batch, ErrorKind::Data,
            "network backward: output gradient shape mismatch");

    std::vector<Matrix> grads;
    grads.reserve(params_.size());
    for (const auto& p : params_) grads.push_back(Matrix::Zero(p.rows(), p.cols()));

    const Index h = spec_.hidden_size;
    const Index batch = pass.batch;

    // Decoder.
    const auto decoder_count = static_cast<Index>(spec_.decoder_layers.size()) + 1;
    Batch delta = d_output;
    for (Index layer = decoder_count - 1; layer >= 0; --layer) {
        const Batch& a_in = pass.decoder_activations[static_cast<std::size_t>(layer)];
        grads[decoder_param(layer, 0)] += delta * a_in.transpose();
        grads[decoder_param(layer, 1)] += row_sums(delta);
        delta = params_[decoder_param(layer, 0)].transpose() * delta;
        if (layer > 0) delta = delta.cwiseProduct((a_in.array() > 0.0).cast<double>().matrix());
    }
    if (d_latent.size() != 0) {
        require(d_latent.rows() == h && d_latent.cols() == batch, ErrorKind::Data,
                "network backward: latent gradient shape mismatch");
        delta += d_latent;
    }

    // Encoder, top layer first. d_seq holds dLoss/dh_t arriving from above.
    const auto steps = static_cast<Index>(pass.inputs.size());
    std::vector<Batch> d_seq(static_cast<std::size_t>(steps), Batch::Zero(h, batch));
    d_seq.back() = delta;

    for (Index layer = spec_.num_layers - 1; layer >= 0; --layer) {
        const auto& cache = pass.layers[static_cast<std::size_t>(layer)];
        const Matrix& w_ih = params_[layer_param(layer, 0)];
        const Matrix& w_hh = params_[layer_param(layer, 1)];
        Matrix& g_ih = grads[layer_param(layer, 0)];
        Matrix& g_hh = grads[layer_param(layer, 1)];
        Matrix& g_bih = grads[layer_param(layer, 2)];
        Matrix& g_bhh = grads[layer_param(layer, 3)];
        const Index in_rows = w_ih.cols();

        std::vector<Batch> d_in(static_cast<std::size_t>(steps), Batch::Zero(in_rows, batch));
        Batch dh_next = Batch::Zero(h, batch);
        Batch dc_next = Batch::Zero(h, batch);
        const Batch zeros = Batch::Zero(h, batch);

        for (Index t = steps - 1; t >= 0; --t) {
            const auto& step = cache[static_cast<std::size_t>(t)];
            const Batch& x = layer == 0 ? pass.inputs[static_cast<std::size_t>(t)]
                                        : pass.layers[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(t)].hidden;
            const Batch& h_prev = t > 0 ? cache[static_cast<std::size_t>(t - 1)].hidden : zeros;
            const Batch dh = d_seq[static_cast<std::size_t>(t)] + dh_next;

            if (spec_.cell == CellKind::Lstm) {
                const Batch& c_prev = t > 0 ? cache[static_cast<std::size_t>(t - 1)].cell : zeros;
                const auto i = step.gates.topRows(h).array();
                const auto f = step.gates.middleRows(h, h).array();
                const auto g = step.gates.middleRows(2 * h, h).array();
                const auto o = step.gates.bottomRows(h).array();
                const auto tc = step.tanh_cell.array();

                const Batch dc = (dc_next.array() + dh.array() * o * (1.0 - tc * tc)).matrix();
                Batch dpre(4 * h, batch);
                dpre.topRows(h) = (dc.array() * g * i * (1.0 - i)).matrix();
                dpre.middleRows(h, h) = (dc.array() * c_prev.array() * f * (1.0 - f)).matrix();
                dpre.middleRows(2 * h, h) = (dc.array() * i * (1.0 - g * g)).matrix();
                dpre.bottomRows(h) = (dh.array() * tc * o * (1.0 - o)).matrix();

                g_ih.noalias() += dpre * x.transpose();
                g_hh.noalias() += dpre * h_prev.transpose();
                const Matrix bias = row_sums(dpre);
                g_bih += bias;
                g_bhh += bias;
                d_in[static_cast<std::size_t>(t)] = w_ih.transpose() * dpre;
                dh_next = w_hh.transpose() * dpre;
                dc_next = (dc.array() * f).matrix();
            } else {
                const auto r = step.gates.topRows(h).array();
                const auto z = step.gates.middleRows(h, h).array();
                const auto n = step.gates.bottomRows(h).array();

                const Batch dan = (dh.array() * (1.0 - z) * (1.0 - n * n)).matrix();
                Batch dgi(3 * h, batch);
                dgi.topRows(h) = (dan.array() * step.hidden_proj.array() * r * (1.0 - r)).matrix();
                dgi.middleRows(h, h) = (dh.array() * (h_prev.array() - n) * z * (1.0 - z)).matrix();
                dgi.bottomRows(h) = dan;
                Batch dgh = dgi;
                dgh.bottomRows(h) = (dan.array() * r).matrix();

                g_ih.noalias() += dgi * x.transpose();
                g_bih += row_sums(dgi);
                g_hh.noalias() += dgh * h_prev.transpose();
                g_bhh += row_sums(dgh);
                d_in[static_cast<std::size_t>(t)] = w_ih.transpose() * dgi;
                dh_next = (dh.array() * z).matrix() + w_hh.transpose() * dgh;
            }
        }
        d_seq = std::move(d_in);
    }
    return grads;
}

SequenceBatch gather_sequences(const Matrix& table, Index lags, Index width, const std::vector<Index>& indices)
{
    require(table.cols() == lags * width, ErrorKind::Data, "gather_sequences: table width mismatch");
    const auto batch = static_cast<Index>(indices.size());
    SequenceBatch out(static_cast<std::size_t>(lags), Batch(width, batch));
    for (Index b = 0; b < batch; ++b) {
        const Index row = indices[static_cast<std::size_t>(b)];
        for (Index t = 0; t < lags; ++t)
            for (Index j = 0; j < width; ++j) out[static_cast<std::size_t>(t)](j, b) = table(row, t * width + j);
    }
    return out;
}

} // namespace shred
