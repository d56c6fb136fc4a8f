#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "shred/error.hpp"
#include "shred/linalg.hpp"
#include "shred/rng.hpp"

using namespace shred;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

} // namespace

TEST(Rng, SameSeedSameStream)
{
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    Rng c(7);
    const auto p = c.permutation(10);
    std::vector<std::size_t> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Rng, NormalMoments)
{
    Rng rng(3);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(MatrixFrom, RejectsNonFinite)
{
    const std::vector<double> ok{1, 2, 3, 4};
    EXPECT_EQ(matrix_from(2, 2, ok)(1, 0), 3.0);
    const std::vector<double> bad{1, NAN, 3, 4};
    EXPECT_THROW(matrix_from(2, 2, bad), Error);
}

TEST(RandomizedSvd, Identity)
{
    const Matrix a = Matrix::Identity(5, 5);
    const SvdFactors f = randomized_svd(a, 5);
    for (Index i = 0; i < 5; ++i) EXPECT_NEAR(f.S(i), 1.0, 1e-12);
    EXPECT_LE((f.reconstruct() - a).norm(), 1e-10);
}

TEST(RandomizedSvd, RankOneClosedForm)
{
    Matrix a(3, 2);
    a << 1, 1, 2, 2, 3, 3;
    const SvdFactors f = randomized_svd(a, 1);
    EXPECT_NEAR(f.S(0), std::sqrt(14.0) * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(f.S(0), 5.2915, 1e-4);
}

TEST(RandomizedSvd, ExactRankFourMatchesJacobiOracle)
{
    const Matrix a = random_matrix(200, 4, 11) * random_matrix(4, 100, 12);
    const SvdFactors f = randomized_svd(a, 4, {10, 2, 5});
    const oracle::Svd exact = oracle::jacobi_svd(a);
    for (Index i = 0; i < 4; ++i) EXPECT_NEAR(f.S(i), exact.s[static_cast<std::size_t>(i)], 1e-9 * exact.s[0]);
    EXPECT_LE(exact.s[4], 1e-10 * exact.s[0]);
    const Matrix oracle_rec = oracle::truncated(exact, 4, 200, 100);
    EXPECT_LE((f.reconstruct() - a).norm(), 1e-8 * a.norm());
    EXPECT_LE((f.reconstruct() - oracle_rec).norm(), 1e-8 * a.norm());
}

TEST(RandomizedSvd, FactorsOrthonormalAndSorted)
{
    const Matrix a = random_matrix(60, 30, 21);
    const SvdFactors f = randomized_svd(a, 6, {10, 3, 1});
    EXPECT_LE((f.U.transpose() * f.U - Matrix::Identity(6, 6)).norm(), 1e-10);
    EXPECT_LE((f.V.transpose() * f.V - Matrix::Identity(6, 6)).norm(), 1e-10);
    for (Index i = 1; i < 6; ++i) EXPECT_GE(f.S(i - 1), f.S(i));
    for (Index j = 0; j < 6; ++j) {
        Index at;
        f.U.col(j).cwiseAbs().maxCoeff(&at);
        EXPECT_GT(f.U(at, j), 0.0);
    }
}

TEST(RandomizedSvd, RejectsBadRank)
{
    const Matrix a = random_matrix(4, 3, 1);
    EXPECT_THROW(randomized_svd(a, 0), Error);
    EXPECT_THROW(randomized_svd(a, 4), Error);
}

TEST(RidgeSolve, Examples)
{
    const Matrix i2 = Matrix::Identity(2, 2);
    EXPECT_LE((ridge_solve(i2, i2, 0.0) - i2).norm(), 1e-14);
    EXPECT_LE((ridge_solve(i2, i2, 1.0) - 0.5 * i2).norm(), 1e-14);
    Matrix theta(2, 1), y(2, 1);
    theta << 1, 2;
    y << 2, 4;
    EXPECT_NEAR(ridge_solve(theta, y, 0.0)(0, 0), 2.0, 1e-14);
}

TEST(RidgeSolve, RankDeficientWithoutRidgeIsNumericError)
{
    Matrix theta(3, 2);
    theta << 1, 2, 2, 4, 3, 6;
    const Matrix y = Matrix::Ones(3, 1);
    try {
        (void)ridge_solve(theta, y, 0.0);
        FAIL() << "expected a numeric error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Numeric);
    }
    EXPECT_NO_THROW((void)ridge_solve(theta, y, 1e-3));
}

TEST(MinMaxScaler, Examples)
{
    Matrix col(3, 1);
    col << 0, 5, 10;
    const MinMaxScaler s = MinMaxScaler::fit(col);
    const Matrix scaled = s.apply(col);
    EXPECT_DOUBLE_EQ(scaled(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(scaled(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(scaled(2, 0), 1.0);

    const Matrix constant = Matrix::Constant(3, 1, 3.0);
    const MinMaxScaler c = MinMaxScaler::fit(constant);
    EXPECT_EQ(c.apply(constant), Matrix::Zero(3, 1));
    EXPECT_EQ(c.invert(c.apply(constant)), constant);

    Matrix pm(2, 1);
    pm << -1, 1;
    const MinMaxScaler r = MinMaxScaler::fit(pm);
    Matrix x(1, 1);
    x << 0.3;
    EXPECT_NEAR(r.invert(r.apply(x))(0, 0), 0.3, 1e-15);
}

TEST(Fourier, ConstantFieldHasOnlyDc)
{
    const Index m = 6, n = 8;
    const FourierTruncation t(m, n, 2, 2);
    const Matrix field = Matrix::Constant(1, m * n, 1.5);
    const auto c = fourier_truncate(field, t);
    for (Index r = 0; r < t.size(); ++r) {
        const auto& mode = t.modes()[static_cast<std::size_t>(r)];
        const double expect = (mode.kx == 0 && mode.ky == 0) ? 1.5 * m * n : 0.0;
        EXPECT_NEAR(c.real(0, r), expect, 1e-10);
        EXPECT_NEAR(c.imag(0, r), 0.0, 1e-10);
    }
}

TEST(Fourier, SingleHarmonicGivesTwoEqualCoefficients)
{
    const Index m = 8, n = 10;
    Matrix field(1, m * n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) field(0, i * n + j) = std::cos(2.0 * std::numbers::pi * i / m);
    const FourierTruncation t(m, n, 2, 2);
    const auto c = fourier_truncate(field, t);
    std::vector<double> nonzero;
    for (Index r = 0; r < t.size(); ++r) {
        const double mag = std::hypot(c.real(0, r), c.imag(0, r));
        if (mag > 1e-9) nonzero.push_back(mag);
    }
    ASSERT_EQ(nonzero.size(), 2u);
    EXPECT_NEAR(nonzero[0], nonzero[1], 1e-10);
    EXPECT_NEAR(nonzero[0], m * n / 2.0, 1e-9);
}

TEST(Fourier, MatchesDirectDftOracle)
{
    const Index m = 5, n = 6;
    const Matrix field = random_matrix(2, m * n, 4);
    const FourierTruncation t(m, n, 2, 1);
    const auto c = fourier_truncate(field, t);
    for (Index s = 0; s < 2; ++s)
        for (Index r = 0; r < t.size(); ++r) {
            const auto& mode = t.modes()[static_cast<std::size_t>(r)];
            const auto expect = oracle::dft2(field.row(s).data(), m, n, mode.ky, mode.kx);
            EXPECT_NEAR(c.real(s, r), expect.real(), 1e-10);
            EXPECT_NEAR(c.imag(s, r), expect.imag(), 1e-10);
        }
}

TEST(Fourier, FullRoundTrip)
{
    for (auto [m, n] : {std::pair<Index, Index>{6, 8}, {5, 7}, {25, 50}}) {
        const Matrix field = random_matrix(3, m * n, static_cast<std::uint64_t>(m * n));
        const FourierTruncation t(m, n, static_cast<int>(n / 2), static_cast<int>(m / 2));
        EXPECT_EQ(t.size(), m * n);
        const auto c = fourier_truncate(field, t);
        EXPECT_LE((fourier_reconstruct(c.real, c.imag, t) - field).cwiseAbs().maxCoeff(), 1e-10);
        const Matrix packed = t.pack(c.real, c.imag);
        Matrix re, im;
        t.unpack(packed, re, im);
        EXPECT_LE((fourier_reconstruct(re, im, t) - field).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Fourier, ReconstructZeroAndDcOnly)
{
    const Index m = 4, n = 6;
    const FourierTruncation t(m, n, 1, 1);
    const Matrix zero = Matrix::Zero(1, t.size());
    EXPECT_EQ(fourier_reconstruct(zero, zero, t), Matrix::Zero(1, m * n));
    Matrix re = Matrix::Zero(1, t.size());
    re(0, 0) = 2.5 * m * n;
    const Matrix f = fourier_reconstruct(re, zero, t);
    EXPECT_LE((f.array() - 2.5).abs().maxCoeff(), 1e-12);
}

TEST(Fourier, TruncationIsIdempotent)
{
    const Index m = 10, n = 12;
    const Matrix field = random_matrix(2, m * n, 9);
    const FourierTruncation t(m, n, 3, 2);
    const auto c = fourier_truncate(field, t);
    const Matrix once = fourier_reconstruct(c.real, c.imag, t);
    const auto c2 = fourier_truncate(once, t);
    EXPECT_LE((fourier_reconstruct(c2.real, c2.imag, t) - once).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((c2.real - c.real).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Fourier, PackedWidthEqualsRetainedCountAndPartnersAreConjugate)
{
    const FourierTruncation t(25, 50, 10, 12);
    EXPECT_EQ(t.size(), 21 * 25);
    for (Index i = 0; i < t.size(); ++i) {
        const auto& a = t.modes()[static_cast<std::size_t>(i)];
        const auto& b = t.modes()[static_cast<std::size_t>(t.partner(i))];
        EXPECT_EQ(((a.kx + b.kx) % 50 + 50) % 50, 0);
        EXPECT_EQ(((a.ky + b.ky) % 25 + 25) % 25, 0);
    }
}
