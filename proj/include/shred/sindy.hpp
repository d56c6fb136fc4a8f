#pragma once

#include <string>
#include <vector>

#include "shred/error.hpp"
#include "shred/linalg.hpp"

namespace shred {

/// Candidate terms for latent dynamics: the constant, monomials up to
/// `poly_order` in graded lexicographic order, then sin(z_i) when
/// `include_sine` is set.
struct SindyLibrarySpec {
    Index latent_dim = 1;
    int poly_order = 1;
    bool include_sine = false;

    void validate() const;
    [[nodiscard]] Index term_count() const;
    [[nodiscard]] std::vector<std::string> term_labels() const;

    friend bool operator==(const SindyLibrarySpec&, const SindyLibrarySpec&) = default;
};

/// N x term_count evaluation of the library on each latent row.
Matrix build_library(const Matrix& z, const SindyLibrarySpec& spec);

/// Sparse latent ODE dz/dt = library(z) * coefficients.
struct SindyModel {
    SindyLibrarySpec library;
    Matrix coefficients; ///< terms x latent_dim
    Matrix active;       ///< 1 where a coefficient may be nonzero, 0 once masked
    double dt = 1.0;
    double threshold = 0.0;

    [[nodiscard]] Index nonzero_count() const;
    /// Right-hand side at a single state.
    [[nodiscard]] Vector rate(const Vector& z) const;
};

/// Second-order finite differences: central inside, one-sided at both ends.
Matrix finite_difference(const Matrix& z, double dt);

/// Fits coefficients by ridge regression of finite-difference rates on the
/// library. Every term starts active.
SindyModel sindy_fit(const Matrix& z, double dt, const SindyLibrarySpec& spec, double ridge = 1e-6);

/// Refits in place, each output solving only over its still-active terms.
void sindy_refit(SindyModel& model, const Matrix& z, double ridge = 1e-6);

/// Zeroes and masks every coefficient with magnitude below tau.
SindyModel sindy_threshold(SindyModel model, double tau);

/// Mean over rows of |dz/dt - library(z) * coefficients|^2 for a
/// time-ordered latent sequence.
double sindy_consistency(const Matrix& z, const SindyModel& model);

/// Gradient of sindy_consistency with respect to every entry of z.
Matrix sindy_consistency_gradient(const Matrix& z, const SindyModel& model);

/// Raised when an integrated trajectory leaves the finite range.
class DivergenceError : public Error {
public:
    DivergenceError(Index completed, const std::string& what)
        : Error(ErrorKind::Numeric, what), completed_(completed)
    {
    }
    [[nodiscard]] Index steps_completed() const { return completed_; }

private:
    Index completed_;
};

/// Classical RK4 rollout with step model.dt; row k is the state after k + 1
/// steps.
Matrix sindy_forecast(const SindyModel& model, const Vector& z0, Index steps);

/// Human-readable equations, e.g. "dx0/dt = 0.048 - 0.122 x0", 3 decimals.
std::string format_equations(const SindyModel& model);

/// "term,output,value" table with full-precision values.
std::string coefficient_csv(const SindyModel& model);

} // namespace shred
