#include "shred/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <tuple>

#include "shred/error.hpp"
#include "shred/rng.hpp"

namespace shred {

namespace {

using ColMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

ColMatrix thin_q(const ColMatrix& y)
{
    Eigen::HouseholderQR<ColMatrix> qr(y);
    return qr.householderQ() * ColMatrix::Identity(y.rows(), y.cols());
}

// exp(sign * 2 pi i * k * j / n) with the phase reduced modulo n first.
std::complex<double> twiddle(long k, long j, long n, double sign)
{
    long phase = (k * j) % n;
    if (phase < 0) phase += n;
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(n);
    return {std::cos(angle), std::sin(angle)};
}

int signed_frequency(Index index, Index n)
{
    return static_cast<int>(index <= n / 2 ? index : index - n);
}

Index dft_index(int k, Index n)
{
    const Index r = static_cast<Index>(k) % n;
    return r < 0 ? r + n : r;
}

// Distinct axis frequencies among the retained modes, with lookup.
struct AxisSet {
    std::vector<int> values;
    std::map<int, Index> position;

    void add(int k)
    {
        if (position.emplace(k, 0).second) values.push_back(k);
    }
    void finish()
    {
        std::sort(values.begin(), values.end());
        for (std::size_t i = 0; i < values.size(); ++i) position[values[i]] = static_cast<Index>(i);
    }
};

} // namespace

Matrix matrix_from(Index rows, Index cols, std::span<const double> values)
{
    require(rows >= 0 && cols >= 0 && static_cast<std::size_t>(rows * cols) == values.size(), ErrorKind::Data,
            "matrix_from: expected " + std::to_string(rows * cols) + " values, got " + std::to_string(values.size()));
    Matrix m = Eigen::Map<const Matrix>(values.data(), rows, cols);
    require_finite(m, "matrix_from");
    return m;
}

void require_finite(const Matrix& m, const std::string& what)
{
    if (!m.allFinite()) fail(ErrorKind::Data, what + ": non-finite entries");
}

Matrix SvdFactors::reconstruct() const
{
    return U * S.asDiagonal() * V.transpose();
}

SvdFactors randomized_svd(const Matrix& a, Index k, const RandomizedSvdOptions& options)
{
    const Index m = a.rows();
    const Index n = a.cols();
    require(k >= 1 && k <= std::min(m, n), ErrorKind::Data,
            "randomized_svd: rank " + std::to_string(k) + " outside [1, " + std::to_string(std::min(m, n)) + "]");
    require(options.oversample >= 0 && options.power_iters >= 0, ErrorKind::Data,
            "randomized_svd: negative oversample or power iteration count");
    require_finite(a, "randomized_svd");

    const Index sketch = std::min(k + options.oversample, std::min(m, n));
    Rng rng(options.seed);
    ColMatrix omega(n, sketch);
    for (Index j = 0; j < sketch; ++j)
        for (Index i = 0; i < n; ++i) omega(i, j) = rng.normal();

    ColMatrix q = thin_q(a * omega);
    for (Index it = 0; it < options.power_iters; ++it) {
        const ColMatrix z = thin_q(a.transpose() * q);
        q = thin_q(a * z);
    }

    const ColMatrix b = q.transpose() * a;
    Eigen::JacobiSVD<ColMatrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

    SvdFactors out;
    out.U = q * svd.matrixU().leftCols(k);
    out.S = svd.singularValues().head(k);
    out.V = svd.matrixV().leftCols(k);

    // Sign convention: the largest-magnitude entry of each U column is positive.
    for (Index j = 0; j < k; ++j) {
        Index arg = 0;
        out.U.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.U(arg, j) < 0.0) {
            out.U.col(j) *= -1.0;
            out.V.col(j) *= -1.0;
        }
    }
    return out;
}

Matrix ridge_solve(const Matrix& theta, const Matrix& y, double lambda)
{
    require(theta.rows() >= 1, ErrorKind::Data, "ridge_solve: empty design matrix");
    require(theta.rows() == y.rows(), ErrorKind::Data,
            "ridge_solve: design has " + std::to_string(theta.rows()) + " rows, targets " + std::to_string(y.rows()));
    require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::Data, "ridge_solve: lambda must be finite and >= 0");

    const Index p = theta.cols();
    if (p == 0) return Matrix(0, y.cols());

    const ColMatrix t = theta;
    const ColMatrix rhs = y;
    if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<ColMatrix> qr(t);
        if (qr.rank() < p)
            fail(ErrorKind::Numeric, "ridge_solve: rank-deficient design (rank " + std::to_string(qr.rank()) + " < " +
                                         std::to_string(p) + ") with lambda = 0");
        return qr.solve(rhs);
    }
    ColMatrix normal = t.transpose() * t;
    normal.diagonal().array() += lambda;
    Eigen::LLT<ColMatrix> llt(normal);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Numeric, "ridge_solve: normal equations not positive definite");
    return llt.solve(t.transpose() * rhs);
}

MinMaxScaler::MinMaxScaler(Vector minimum, Vector range) : minimum_(std::move(minimum)), range_(std::move(range))
{
    require(minimum_.size() == range_.size(), ErrorKind::Data, "MinMaxScaler: minimum/range length mismatch");
    require((range_.array() > 0.0).all(), ErrorKind::Data, "MinMaxScaler: ranges must be positive");
}

MinMaxScaler MinMaxScaler::fit(const Matrix& data)
{
    require(data.rows() >= 1, ErrorKind::Data, "MinMaxScaler::fit: no rows");
    require_finite(data, "MinMaxScaler::fit");
    Vector lo = data.colwise().minCoeff().transpose();
    Vector range = data.colwise().maxCoeff().transpose() - lo;
    for (Index j = 0; j < range.size(); ++j)
        if (range(j) == 0.0) range(j) = 1.0;
    return MinMaxScaler(std::move(lo), std::move(range));
}

Matrix MinMaxScaler::apply(const Matrix& data) const
{
    require(data.cols() == width(), ErrorKind::Data,
            "MinMaxScaler::apply: expected " + std::to_string(width()) + " columns, got " + std::to_string(data.cols()));
    return (data.rowwise() - minimum_.transpose()).array().rowwise() / range_.transpose().array();
}

Matrix MinMaxScaler::invert(const Matrix& scaled) const
{
    require(scaled.cols() == width(), ErrorKind::Data,
            "MinMaxScaler::invert: expected " + std::to_string(width()) + " columns, got " +
                std::to_string(scaled.cols()));
    Matrix out = scaled.array().rowwise() * range_.transpose().array();
    out.rowwise() += minimum_.transpose();
    return out;
}

FourierTruncation::FourierTruncation(Index rows, Index cols, int cutoff_x, int cutoff_y)
    : rows_(rows), cols_(cols), cutoff_x_(cutoff_x), cutoff_y_(cutoff_y)
{
    require(rows >= 1 && cols >= 1, ErrorKind::Data, "FourierTruncation: empty grid");
    require(cutoff_x >= 0 && cutoff_x <= cols / 2 && cutoff_y >= 0 && cutoff_y <= rows / 2, ErrorKind::Data,
            "FourierTruncation: cutoffs (" + std::to_string(cutoff_x) + ", " + std::to_string(cutoff_y) +
                ") exceed Nyquist (" + std::to_string(cols / 2) + ", " + std::to_string(rows / 2) + ")");

    for (Index iy = 0; iy < rows; ++iy) {
        const int ky = signed_frequency(iy, rows);
        if (std::abs(ky) > cutoff_y) continue;
        for (Index ix = 0; ix < cols; ++ix) {
            const int kx = signed_frequency(ix, cols);
            if (std::abs(kx) > cutoff_x) continue;
            modes_.push_back({ky, kx});
        }
    }
    std::sort(modes_.begin(), modes_.end(), [](const Wavenumber& a, const Wavenumber& b) {
        return std::make_tuple(std::abs(a.kx), std::abs(a.ky), a.kx < 0, a.ky < 0) <
               std::make_tuple(std::abs(b.kx), std::abs(b.ky), b.kx < 0, b.ky < 0);
    });

    std::map<std::pair<Index, Index>, Index> where;
    for (std::size_t i = 0; i < modes_.size(); ++i)
        where[{dft_index(modes_[i].ky, rows), dft_index(modes_[i].kx, cols)}] = static_cast<Index>(i);
    partner_.resize(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i)
        partner_[i] = where.at({dft_index(-modes_[i].ky, rows), dft_index(-modes_[i].kx, cols)});
}

Matrix FourierTruncation::pack(const Matrix& real, const Matrix& imag) const
{
    require(real.cols() == size() && imag.cols() == size() && real.rows() == imag.rows(), ErrorKind::Data,
            "FourierTruncation::pack: coefficient shape mismatch");
    Matrix out(real.rows(), size());
    for (Index i = 0; i < size(); ++i) {
        const Index p = partner(i);
        out.col(i) = p >= i ? real.col(i) : imag.col(p);
    }
    return out;
}

void FourierTruncation::unpack(const Matrix& packed, Matrix& real, Matrix& imag) const
{
    require(packed.cols() == size(), ErrorKind::Data, "FourierTruncation::unpack: expected " +
                                                          std::to_string(size()) + " columns");
    real.resize(packed.rows(), size());
    imag.resize(packed.rows(), size());
    for (Index i = 0; i < size(); ++i) {
        const Index p = partner(i);
        if (p == i) {
            real.col(i) = packed.col(i);
            imag.col(i).setZero();
        } else if (p > i) {
            real.col(i) = packed.col(i);
            imag.col(i) = packed.col(p);
        } else {
            real.col(i) = packed.col(p);
            imag.col(i) = -packed.col(i);
        }
    }
}

FourierCoefficients fourier_truncate(const Matrix& snapshots, const FourierTruncation& trunc)
{
    const Index m = trunc.rows();
    const Index n = trunc.cols();
    require(snapshots.cols() == m * n, ErrorKind::Data,
            "fourier_truncate: snapshot size " + std::to_string(snapshots.cols()) + " != grid " + std::to_string(m) +
                "x" + std::to_string(n));

    AxisSet xs;
    AxisSet ys;
    for (const auto& mode : trunc.modes()) {
        xs.add(mode.kx);
        ys.add(mode.ky);
    }
    xs.finish();
    ys.finish();
    const auto a = static_cast<Index>(xs.values.size());
    const auto b = static_cast<Index>(ys.values.size());

    ComplexMatrix ex(n, a);
    for (Index x = 0; x < n; ++x)
        for (Index j = 0; j < a; ++j) ex(x, j) = twiddle(xs.values[static_cast<std::size_t>(j)], x, n, -1.0);
    ComplexMatrix ey(b, m);
    for (Index i = 0; i < b; ++i)
        for (Index y = 0; y < m; ++y) ey(i, y) = twiddle(ys.values[static_cast<std::size_t>(i)], y, m, -1.0);

    const Index t_count = snapshots.rows();
    const Eigen::Map<const Matrix> stacked(snapshots.data(), t_count * m, n);
    const ComplexMatrix along_x = stacked.cast<std::complex<double>>() * ex;

    FourierCoefficients out{Matrix(t_count, trunc.size()), Matrix(t_count, trunc.size())};
    for (Index t = 0; t < t_count; ++t) {
        const ComplexMatrix c = ey * along_x.middleRows(t * m, m);
        for (Index r = 0; r < trunc.size(); ++r) {
            const auto& mode = trunc.modes()[static_cast<std::size_t>(r)];
            const std::complex<double> v = c(ys.position.at(mode.ky), xs.position.at(mode.kx));
            out.real(t, r) = v.real();
            out.imag(t, r) = v.imag();
        }
    }
    return out;
}

Matrix fourier_reconstruct(const Matrix& real, const Matrix& imag, const FourierTruncation& trunc)
{
    require(real.cols() == trunc.size() && imag.cols() == trunc.size() && real.rows() == imag.rows(),
            ErrorKind::Data, "fourier_reconstruct: expected " + std::to_string(trunc.size()) +
                                 " coefficients per snapshot in both parts");
    const Index m = trunc.rows();
    const Index n = trunc.cols();

    AxisSet xs;
    AxisSet ys;
    for (const auto& mode : trunc.modes()) {
        xs.add(mode.kx);
        ys.add(mode.ky);
    }
    xs.finish();
    ys.finish();
    const auto a = static_cast<Index>(xs.values.size());
    const auto b = static_cast<Index>(ys.values.size());

    ComplexMatrix px(a, n);
    for (Index j = 0; j < a; ++j)
        for (Index x = 0; x < n; ++x) px(j, x) = twiddle(xs.values[static_cast<std::size_t>(j)], x, n, 1.0);
    ComplexMatrix py(m, b);
    for (Index y = 0; y < m; ++y)
        for (Index i = 0; i < b; ++i) py(y, i) = twiddle(ys.values[static_cast<std::size_t>(i)], y, m, 1.0);

    const double norm = 1.0 / static_cast<double>(m * n);
    Matrix out(real.rows(), m * n);
    ComplexMatrix grid(b, a);
    for (Index t = 0; t < real.rows(); ++t) {
        grid.setZero();
        for (Index r = 0; r < trunc.size(); ++r) {
            const auto& mode = trunc.modes()[static_cast<std::size_t>(r)];
            grid(ys.position.at(mode.ky), xs.position.at(mode.kx)) = {real(t, r), imag(t, r)};
        }
        const Eigen::MatrixXd field = (py * (grid * px)).real() * norm;
        Eigen::Map<Matrix>(out.row(t).data(), m, n) = field;
    }
    return out;
}

} // namespace shred
