#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shred/field_array.hpp"

namespace shred {

/// Analytic double-gyre velocity on node grid x_i = i L_x/(n_x-1),
/// y_j = j L_y/(n_y-1), times t_k = k dt for k = 0..round(t_end/dt).
struct DoubleGyreParams {
    double length_x = 2.0;
    double length_y = 1.0;
    double intensity = 0.1;
    double epsilon = 0.25;
    double omega = 0.6283185307179586; // 2 pi / 10
    Index nx = 50;
    Index ny = 25;
    double dt = 0.05;
    double t_end = 10.0;

    void validate() const;
    [[nodiscard]] Index timesteps() const;
};

struct VelocityField {
    FieldArray u; ///< (T, ny, nx)
    FieldArray v; ///< (T, ny, nx)
};

VelocityField double_gyre(const DoubleGyreParams& params);

struct ParameterSample {
    std::vector<std::pair<double, double>> values; ///< (epsilon, omega)
    std::pair<double, double> epsilon_range;
    std::pair<double, double> omega_range;
    std::uint64_t seed = 0;
};

inline constexpr std::pair<double, double> kDefaultEpsilonRange{0.1, 0.3};
inline constexpr std::pair<double, double> kDefaultOmegaRange{0.3141592653589793, 1.2566370614359172};

/// n i.i.d. uniform (epsilon, omega) draws.
ParameterSample sample_parameters(Index n, std::pair<double, double> epsilon_range,
                                  std::pair<double, double> omega_range, std::uint64_t seed);

struct ParametricVelocityField {
    FieldArray u;          ///< (R, T, ny, nx)
    FieldArray v;          ///< (R, T, ny, nx)
    FieldArray parameters; ///< (R, T, 2): epsilon, omega repeated over time
};

/// One double-gyre trajectory per sampled (epsilon, omega); other settings
/// come from `base`.
ParametricVelocityField double_gyre_ensemble(const DoubleGyreParams& base, const ParameterSample& sample);

/// sin(2 pi (x - speed t) / wavelength) with x the column index and t the
/// step index; (T, rows, cols).
FieldArray traveling_wave(Index rows, Index cols, Index timesteps, double speed, double wavelength);

} // namespace shred
