#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shred {

/// Dense double matrix with row-major storage; rows are samples/snapshots.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Copies `values` (row-major) into a rows x cols matrix. Rejects NaN/Inf.
Matrix matrix_from(Index rows, Index cols, std::span<const double> values);

/// Throws a data error naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, const std::string& what);

struct SvdFactors {
    Matrix U; ///< T x k, orthonormal columns
    Vector S; ///< k singular values, nonincreasing
    Matrix V; ///< D x k, orthonormal columns

    [[nodiscard]] Index rank() const { return S.size(); }
    [[nodiscard]] Matrix reconstruct() const;
};

struct RandomizedSvdOptions {
    Index oversample = 10;
    Index power_iters = 2;
    std::uint64_t seed = 0;
};

/// Rank-k truncated SVD by Gaussian range sketching with power iterations.
SvdFactors randomized_svd(const Matrix& a, Index k, const RandomizedSvdOptions& options = {});

/// argmin_X |theta X - y|^2 + lambda |X|^2. With lambda == 0 a rank-deficient
/// theta is reported as a numeric error.
Matrix ridge_solve(const Matrix& theta, const Matrix& y, double lambda);

/// Per-column affine map of the fitting data onto [0, 1].
class MinMaxScaler {
public:
    MinMaxScaler() = default;
    MinMaxScaler(Vector minimum, Vector range);

    static MinMaxScaler fit(const Matrix& data);

    [[nodiscard]] Matrix apply(const Matrix& data) const;
    [[nodiscard]] Matrix invert(const Matrix& scaled) const;

    [[nodiscard]] const Vector& minimum() const { return minimum_; }
    [[nodiscard]] const Vector& range() const { return range_; }
    [[nodiscard]] Index width() const { return minimum_.size(); }

private:
    Vector minimum_;
    Vector range_;
};

/// A retained 2-D wavenumber. `ky` runs along grid rows (axis 0), `kx`
/// along grid columns (axis 1). Signed, in (-N/2, N/2].
struct Wavenumber {
    int ky = 0;
    int kx = 0;

    friend bool operator==(const Wavenumber&, const Wavenumber&) = default;
};

/// Low-pass selection of 2-D DFT modes on a rows x cols grid: every mode with
/// |kx| <= cutoff_x and |ky| <= cutoff_y.
///
/// Retained modes are ordered by (|kx|, |ky|, kx < 0, ky < 0). The set is
/// closed under conjugation, so a real field's retained spectrum can be
/// packed into exactly `size()` real numbers.
class FourierTruncation {
public:
    FourierTruncation(Index rows, Index cols, int cutoff_x, int cutoff_y);

    [[nodiscard]] Index rows() const { return rows_; }
    [[nodiscard]] Index cols() const { return cols_; }
    [[nodiscard]] int cutoff_x() const { return cutoff_x_; }
    [[nodiscard]] int cutoff_y() const { return cutoff_y_; }
    [[nodiscard]] Index size() const { return static_cast<Index>(modes_.size()); }
    [[nodiscard]] const std::vector<Wavenumber>& modes() const { return modes_; }

    /// Position of the conjugate mode (-ky, -kx) in `modes()`.
    [[nodiscard]] Index partner(Index position) const { return partner_[static_cast<std::size_t>(position)]; }

    /// Packs conjugate-symmetric coefficients into size() reals: a mode that
    /// precedes its partner stores the real part, the partner stores the
    /// imaginary part of the first; self-conjugate modes store the real part.
    [[nodiscard]] Matrix pack(const Matrix& real, const Matrix& imag) const;
    void unpack(const Matrix& packed, Matrix& real, Matrix& imag) const;

private:
    Index rows_;
    Index cols_;
    int cutoff_x_;
    int cutoff_y_;
    std::vector<Wavenumber> modes_;
    std::vector<Index> partner_;
};

struct FourierCoefficients {
    Matrix real; ///< T x retained
    Matrix imag; ///< T x retained
};

/// Retained 2-D DFT coefficients (unnormalized forward transform) of each
/// snapshot row, the snapshot being a row-major rows x cols grid.
FourierCoefficients fourier_truncate(const Matrix& snapshots, const FourierTruncation& trunc);

/// Inverse DFT with every non-retained coefficient zero; real part only.
Matrix fourier_reconstruct(const Matrix& real, const Matrix& imag, const FourierTruncation& trunc);

} // namespace shred
