#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "shred/linalg.hpp"
#include "shred/network.hpp"

namespace oracle {

using shred::Index;

struct Svd {
    std::vector<double> s;
    std::vector<std::vector<double>> u; // columns
    std::vector<std::vector<double>> v; // columns
};

/// One-sided Jacobi on the columns of a (m x n), plain loops, no Eigen
/// decompositions.
inline Svd jacobi_svd(const shred::Matrix& a)
{
    const Index m = a.rows();
    const Index n = a.cols();
    std::vector<std::vector<double>> w(n, std::vector<double>(m));
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) w[j][i] = a(i, j);
        v[j][j] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Index p = 0; p < n; ++p)
            for (Index q = p + 1; q < n; ++q) {
                double alpha = 0, beta = 0, gamma = 0;
                for (Index i = 0; i < m; ++i) {
                    alpha += w[p][i] * w[p][i];
                    beta += w[q][i] * w[q][i];
                    gamma += w[p][i] * w[q][i];
                }
                if (gamma == 0.0 || std::abs(gamma) <= 1e-300) continue;
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta + 1e-300));
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Index i = 0; i < m; ++i) {
                    const double x = w[p][i], y = w[q][i];
                    w[p][i] = c * x - s * y;
                    w[q][i] = s * x + c * y;
                }
                for (Index i = 0; i < n; ++i) {
                    const double x = v[p][i], y = v[q][i];
                    v[p][i] = c * x - s * y;
                    v[q][i] = s * x + c * y;
                }
            }
        if (off < 1e-15) break;
    }
    std::vector<Index> order(n);
    for (Index j = 0; j < n; ++j) order[j] = j;
    std::vector<double> norms(n);
    for (Index j = 0; j < n; ++j) {
        double s = 0;
        for (double x : w[j]) s += x * x;
        norms[j] = std::sqrt(s);
    }
    std::sort(order.begin(), order.end(), [&](Index x, Index y) { return norms[x] > norms[y]; });
    Svd out;
    for (Index j : order) {
        out.s.push_back(norms[j]);
        std::vector<double> col(m, 0.0);
        if (norms[j] > 0)
            for (Index i = 0; i < m; ++i) col[i] = w[j][i] / norms[j];
        out.u.push_back(col);
        out.v.push_back(v[j]);
    }
    return out;
}

/// Rank-k reconstruction from an oracle SVD.
inline shred::Matrix truncated(const Svd& svd, Index k, Index m, Index n)
{
    shred::Matrix out = shred::Matrix::Zero(m, n);
    for (Index r = 0; r < k; ++r)
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < n; ++j) out(i, j) += svd.s[r] * svd.u[r][i] * svd.v[r][j];
    return out;
}

/// Direct 2-D DFT coefficient sum_{r,c} f[r,c] exp(-2 pi i (ky r / rows + kx c / cols)).
inline std::complex<double> dft2(const double* f, Index rows, Index cols, int ky, int kx)
{
    std::complex<double> acc = 0.0;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) {
            const double phase = -2.0 * std::numbers::pi *
                                 (static_cast<double>(ky) * static_cast<double>(r) / static_cast<double>(rows) +
                                  static_cast<double>(kx) * static_cast<double>(c) / static_cast<double>(cols));
            acc += f[r * cols + c] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    return acc;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Scalar-loop forward pass of one sample through a network whose weights
/// are read entry by entry. `sequence` is lags x input.
inline std::vector<double> forward(const shred::Network& net, const std::vector<std::vector<double>>& sequence,
                                   std::vector<double>* latent_out = nullptr)
{
    const auto& spec = net.spec();
    const auto& p = net.parameters();
    const Index h = spec.hidden_size;
    std::vector<std::vector<double>> inputs = sequence;
    for (Index layer = 0; layer < spec.num_layers; ++layer) {
        const auto& wih = p[layer * 4];
        const auto& whh = p[layer * 4 + 1];
        const auto& bih = p[layer * 4 + 2];
        const auto& bhh = p[layer * 4 + 3];
        std::vector<double> hs(h, 0.0), cs(h, 0.0);
        std::vector<std::vector<double>> outputs;
        for (const auto& x : inputs) {
            const Index g = spec.cell == shred::CellKind::Lstm ? 4 : 3;
            std::vector<double> gi(g * h), gh(g * h);
            for (Index r = 0; r < g * h; ++r) {
                double a = bih(r, 0), b = bhh(r, 0);
                for (Index c = 0; c < static_cast<Index>(x.size()); ++c) a += wih(r, c) * x[c];
                for (Index c = 0; c < h; ++c) b += whh(r, c) * hs[c];
                gi[r] = a;
                gh[r] = b;
            }
            std::vector<double> next(h);
            if (spec.cell == shred::CellKind::Lstm) {
                for (Index k = 0; k < h; ++k) {
                    const double i = sigmoid(gi[k] + gh[k]);
                    const double f = sigmoid(gi[h + k] + gh[h + k]);
                    const double gg = std::tanh(gi[2 * h + k] + gh[2 * h + k]);
                    const double o = sigmoid(gi[3 * h + k] + gh[3 * h + k]);
                    cs[k] = f * cs[k] + i * gg;
                    next[k] = o * std::tanh(cs[k]);
                }
            } else {
                for (Index k = 0; k < h; ++k) {
                    const double r = sigmoid(gi[k] + gh[k]);
                    const double z = sigmoid(gi[h + k] + gh[h + k]);
                    const double n = std::tanh(gi[2 * h + k] + r * gh[2 * h + k]);
                    next[k] = (1.0 - z) * n + z * hs[k];
                }
            }
            hs = next;
            outputs.push_back(hs);
        }
        inputs = outputs;
    }
    std::vector<double> act = inputs.back();
    if (latent_out) *latent_out = act;
    const std::size_t base = static_cast<std::size_t>(spec.num_layers * 4);
    const std::size_t layers = spec.decoder_layers.size() + 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto& w = p[base + 2 * l];
        const auto& b = p[base + 2 * l + 1];
        std::vector<double> next(w.rows());
        for (Index r = 0; r < w.rows(); ++r) {
            double s = b(r, 0);
            for (Index c = 0; c < w.cols(); ++c) s += w(r, c) * act[c];
            next[r] = (l + 1 < layers) ? std::max(0.0, s) : s;
        }
        act = next;
    }
    return act;
}

} // namespace oracle
