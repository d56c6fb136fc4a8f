#include "shred/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "shred/error.hpp"
#include "shred/rng.hpp"

namespace shred {

void DoubleGyreParams::validate() const
{
    require(nx >= 2 && ny >= 2, ErrorKind::Config, "double gyre: grid needs at least 2 nodes per axis");
    require(dt > 0.0 && t_end >= 0.0, ErrorKind::Config, "double gyre: dt must be positive, t_end >= 0");
    require(length_x > 0.0 && length_y > 0.0, ErrorKind::Config, "double gyre: domain lengths must be positive");
}

Index DoubleGyreParams::timesteps() const
{
    return static_cast<Index>(std::llround(t_end / dt)) + 1;
}

VelocityField double_gyre(const DoubleGyreParams& p)
{
    p.validate();
    constexpr double pi = std::numbers::pi;
    const Index t_count = p.timesteps();
    VelocityField out{FieldArray::zeros({t_count, p.ny, p.nx}), FieldArray::zeros({t_count, p.ny, p.nx})};
    double* u = out.u.data();
    double* v = out.v.data();
    for (Index k = 0; k < t_count; ++k) {
        const double t = static_cast<double>(k) * p.dt;
        const double a = p.epsilon * std::sin(p.omega * t);
        const double b = 1.0 - 2.0 * a;
        for (Index j = 0; j < p.ny; ++j) {
            const double y = static_cast<double>(j) * p.length_y / static_cast<double>(p.ny - 1);
            for (Index i = 0; i < p.nx; ++i) {
                const double x = static_cast<double>(i) * p.length_x / static_cast<double>(p.nx - 1);
                const double f = a * x * x + b * x;
                const double df = 2.0 * a * x + b;
                const Index at = (k * p.ny + j) * p.nx + i;
                u[at] = -pi * p.intensity * std::sin(pi * f) * std::cos(pi * y);
                v[at] = pi * p.intensity * std::cos(pi * f) * std::sin(pi * y) * df;
            }
        }
    }
    return out;
}

ParameterSample sample_parameters(Index n, std::pair<double, double> epsilon_range,
                                  std::pair<double, double> omega_range, std::uint64_t seed)
{
    require(n >= 1, ErrorKind::Config, "sample_parameters: n must be >= 1");
    require(epsilon_range.first <= epsilon_range.second && omega_range.first <= omega_range.second,
            ErrorKind::Config, "sample_parameters: inverted range");
    ParameterSample sample{{}, epsilon_range, omega_range, seed};
    Rng rng(seed);
    for (Index i = 0; i < n; ++i) {
        const double eps = rng.uniform(epsilon_range.first, epsilon_range.second);
        const double omega = rng.uniform(omega_range.first, omega_range.second);
        sample.values.emplace_back(eps, omega);
    }
    return sample;
}

ParametricVelocityField double_gyre_ensemble(const DoubleGyreParams& base, const ParameterSample& sample)
{
    base.validate();
    const auto r_count = static_cast<Index>(sample.values.size());
    const Index t_count = base.timesteps();
    const Index per = t_count * base.ny * base.nx;
    ParametricVelocityField out{FieldArray::zeros({r_count, t_count, base.ny, base.nx}),
                                FieldArray::zeros({r_count, t_count, base.ny, base.nx}),
                                FieldArray::zeros({r_count, t_count, 2})};
    for (Index r = 0; r < r_count; ++r) {
        DoubleGyreParams p = base;
        p.epsilon = sample.values[static_cast<std::size_t>(r)].first;
        p.omega = sample.values[static_cast<std::size_t>(r)].second;
        const VelocityField field = double_gyre(p);
        std::copy(field.u.values().begin(), field.u.values().end(), out.u.values().begin() + r * per);
        std::copy(field.v.values().begin(), field.v.values().end(), out.v.values().begin() + r * per);
        for (Index t = 0; t < t_count; ++t) {
            out.parameters.data()[(r * t_count + t) * 2] = p.epsilon;
            out.parameters.data()[(r * t_count + t) * 2 + 1] = p.omega;
        }
    }
    return out;
}

FieldArray traveling_wave(Index rows, Index cols, Index timesteps, double speed, double wavelength)
{
    require(rows >= 1 && cols >= 1 && timesteps >= 1, ErrorKind::Config, "traveling_wave: empty grid");
    require(speed >= 0.0 && wavelength > 0.0, ErrorKind::Config,
            "traveling_wave: speed must be >= 0 and wavelength positive");
    FieldArray out = FieldArray::zeros({timesteps, rows, cols});
    double* w = out.data();
    for (Index t = 0; t < timesteps; ++t)
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j)
                w[(t * rows + i) * cols + j] =
                    std::sin(2.0 * std::numbers::pi *
                             (static_cast<double>(j) - speed * static_cast<double>(t)) / wavelength);
    return out;
}

} // namespace shred
