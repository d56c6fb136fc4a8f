#include "shred/sindy.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace shred {

namespace {

// Index lists of every monomial of degree 1..poly_order, graded lex order.
std::vector<std::vector<Index>> monomials(const SindyLibrarySpec& spec)
{
    std::vector<std::vector<Index>> out;
    std::vector<Index> current;
    auto extend = [&](auto&& self, Index start, int remaining) -> void {
        if (remaining == 0) {
            out.push_back(current);
            return;
        }
        for (Index i = start; i < spec.latent_dim; ++i) {
            current.push_back(i);
            self(self, i, remaining - 1);
            current.pop_back();
        }
    };
    for (int degree = 1; degree <= spec.poly_order; ++degree) extend(extend, 0, degree);
    return out;
}

std::string subscript_label(Index i)
{
    return "x" + std::to_string(i);
}

} // namespace

void SindyLibrarySpec::validate() const
{
    require(latent_dim >= 1, ErrorKind::Config, "SINDy library: latent dimension must be >= 1");
    require(poly_order >= 0, ErrorKind::Config, "SINDy library: poly_order must be >= 0");
}

Index SindyLibrarySpec::term_count() const
{
    return 1 + static_cast<Index>(monomials(*this).size()) + (include_sine ? latent_dim : 0);
}

std::vector<std::string> SindyLibrarySpec::term_labels() const
{
    std::vector<std::string> labels{"1"};
    for (const auto& mono : monomials(*this)) {
        std::string label;
        for (std::size_t k = 0; k < mono.size();) {
            std::size_t run = k;
            while (run < mono.size() && mono[run] == mono[k]) ++run;
            if (!label.empty()) label += " ";
            label += subscript_label(mono[k]);
            if (run - k > 1) label += "^" + std::to_string(run - k);
            k = run;
        }
        labels.push_back(label);
    }
    if (include_sine)
        for (Index i = 0; i < latent_dim; ++i) labels.push_back("sin(" + subscript_label(i) + ")");
    return labels;
}

Matrix build_library(const Matrix& z, const SindyLibrarySpec& spec)
{
    spec.validate();
    require(z.cols() == spec.latent_dim, ErrorKind::Data,
            "build_library: latent width " + std::to_string(z.cols()) + " != library dimension " +
                std::to_string(spec.latent_dim));
    const auto monos = monomials(spec);
    Matrix theta(z.rows(), spec.term_count());
    theta.col(0).setOnes();
    Index col = 1;
    for (const auto& mono : monos) {
        Vector v = Vector::Ones(z.rows());
        for (Index i : mono) v.array() *= z.col(i).array();
        theta.col(col++) = v;
    }
    if (spec.include_sine)
        for (Index i = 0; i < spec.latent_dim; ++i) theta.col(col++) = z.col(i).array().sin().matrix();
    return theta;
}

Index SindyModel::nonzero_count() const
{
    return (coefficients.array() != 0.0).count();
}

Vector SindyModel::rate(const Vector& z) const
{
    const Matrix row = z.transpose();
    return (build_library(row, library) * coefficients).transpose();
}

Matrix finite_difference(const Matrix& z, double dt)
{
    require(dt > 0.0, ErrorKind::Data, "finite_difference: dt must be positive");
    const Index n = z.rows();
    require(n >= 3, ErrorKind::Data, "finite_difference: need at least 3 samples, got " + std::to_string(n));
    Matrix d(n, z.cols());
    d.row(0) = (-3.0 * z.row(0) + 4.0 * z.row(1) - z.row(2)) / (2.0 * dt);
    for (Index t = 1; t + 1 < n; ++t) d.row(t) = (z.row(t + 1) - z.row(t - 1)) / (2.0 * dt);
    d.row(n - 1) = (3.0 * z.row(n - 1) - 4.0 * z.row(n - 2) + z.row(n - 3)) / (2.0 * dt);
    return d;
}

namespace {

// Transpose of the finite_difference operator applied to g.
Matrix finite_difference_adjoint(const Matrix& g, double dt)
{
    const Index n = g.rows();
    Matrix out = Matrix::Zero(n, g.cols());
    const double s = 1.0 / (2.0 * dt);
    out.row(0) += -3.0 * s * g.row(0);
    out.row(1) += 4.0 * s * g.row(0);
    out.row(2) += -1.0 * s * g.row(0);
    for (Index t = 1; t + 1 < n; ++t) {
        out.row(t + 1) += s * g.row(t);
        out.row(t - 1) -= s * g.row(t);
    }
    out.row(n - 1) += 3.0 * s * g.row(n - 1);
    out.row(n - 2) += -4.0 * s * g.row(n - 1);
    out.row(n - 3) += 1.0 * s * g.row(n - 1);
    return out;
}

} // namespace

SindyModel sindy_fit(const Matrix& z, double dt, const SindyLibrarySpec& spec, double ridge)
{
    require(dt > 0.0, ErrorKind::Data, "sindy_fit: dt must be positive");
    require(z.rows() >= 3, ErrorKind::Data, "sindy_fit: need at least 3 samples, got " + std::to_string(z.rows()));
    SindyModel model;
    model.library = spec;
    model.dt = dt;
    model.active = Matrix::Ones(spec.term_count(), spec.latent_dim);
    model.coefficients = Matrix::Zero(spec.term_count(), spec.latent_dim);
    sindy_refit(model, z, ridge);
    return model;
}

void sindy_refit(SindyModel& model, const Matrix& z, double ridge)
{
    const Matrix theta = build_library(z, model.library);
    const Matrix rates = finite_difference(z, model.dt);
    for (Index out = 0; out < model.library.latent_dim; ++out) {
        std::vector<Index> keep;
        for (Index term = 0; term < theta.cols(); ++term)
            if (model.active(term, out) != 0.0) keep.push_back(term);
        model.coefficients.col(out).setZero();
        if (keep.empty()) continue;
        Matrix sub(theta.rows(), static_cast<Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) sub.col(static_cast<Index>(k)) = theta.col(keep[k]);
        const Matrix solution = ridge_solve(sub, rates.col(out), ridge);
        for (std::size_t k = 0; k < keep.size(); ++k) model.coefficients(keep[k], out) = solution(static_cast<Index>(k), 0);
    }
}

SindyModel sindy_threshold(SindyModel model, double tau)
{
    require(tau >= 0.0, ErrorKind::Data, "sindy_threshold: tau must be >= 0");
    for (Index i = 0; i < model.coefficients.rows(); ++i)
        for (Index j = 0; j < model.coefficients.cols(); ++j)
            if (std::abs(model.coefficients(i, j)) < tau) {
                model.coefficients(i, j) = 0.0;
                model.active(i, j) = 0.0;
            }
    model.threshold = tau;
    return model;
}

double sindy_consistency(const Matrix& z, const SindyModel& model)
{
    const Matrix residual = finite_difference(z, model.dt) - build_library(z, model.library) * model.coefficients;
    return residual.squaredNorm() / static_cast<double>(z.rows());
}

Matrix sindy_consistency_gradient(const Matrix& z, const SindyModel& model)
{
    const Index n = z.rows();
    const Matrix residual = finite_difference(z, model.dt) - build_library(z, model.library) * model.coefficients;
    const Matrix g = residual * (2.0 / static_cast<double>(n));
    Matrix grad = finite_difference_adjoint(g, model.dt);

    // Library path: d/dz of -(theta(z) xi) contracted with g.
    const Matrix weights = g * model.coefficients.transpose(); // n x terms
    const auto monos = monomials(model.library);
    Index col = 1;
    for (const auto& mono : monos) {
        for (std::size_t k = 0; k < mono.size(); ++k) {
            Vector partial = Vector::Ones(n);
            for (std::size_t other = 0; other < mono.size(); ++other)
                if (other != k) partial.array() *= z.col(mono[other]).array();
            grad.col(mono[k]).array() -= weights.col(col).array() * partial.array();
        }
        ++col;
    }
    if (model.library.include_sine)
        for (Index i = 0; i < model.library.latent_dim; ++i, ++col)
            grad.col(i).array() -= weights.col(col).array() * z.col(i).array().cos();
    return grad;
}

Matrix sindy_forecast(const SindyModel& model, const Vector& z0, Index steps)
{
    require(steps >= 0, ErrorKind::Data, "sindy_forecast: negative step count");
    require(z0.size() == model.library.latent_dim, ErrorKind::Data, "sindy_forecast: initial state width mismatch");
    Matrix out(steps, z0.size());
    Vector z = z0;
    const double h = model.dt;
    for (Index k = 0; k < steps; ++k) {
        const Vector k1 = model.rate(z);
        const Vector k2 = model.rate(z + 0.5 * h * k1);
        const Vector k3 = model.rate(z + 0.5 * h * k2);
        const Vector k4 = model.rate(z + h * k3);
        z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!z.allFinite())
            throw DivergenceError(k, "sindy_forecast: state diverged after " + std::to_string(k) + " of " +
                                         std::to_string(steps) + " steps");
        out.row(k) = z.transpose();
    }
    return out;
}

std::string format_equations(const SindyModel& model)
{
    const auto labels = model.library.term_labels();
    std::ostringstream os;
    char buf[64];
    for (Index out = 0; out < model.library.latent_dim; ++out) {
        os << "d" << subscript_label(out) << "/dt =";
        bool first = true;
        for (Index term = 0; term < model.coefficients.rows(); ++term) {
            const double c = model.coefficients(term, out);
            if (c == 0.0) continue;
            const std::string& label = labels[static_cast<std::size_t>(term)];
            std::snprintf(buf, sizeof buf, "%.3f", std::abs(c));
            if (first)
                os << (c < 0.0 ? " -" : " ") << buf;
            else
                os << (c < 0.0 ? " - " : " + ") << buf;
            if (label != "1") os << " " << label;
            first = false;
        }
        if (first) os << " 0";
        os << "\n";
    }
    return os.str();
}

std::string coefficient_csv(const SindyModel& model)
{
    const auto labels = model.library.term_labels();
    std::ostringstream os;
    os << "term,output,value\n";
    char buf[64];
    for (Index term = 0; term < model.coefficients.rows(); ++term)
        for (Index out = 0; out < model.coefficients.cols(); ++out) {
            std::snprintf(buf, sizeof buf, "%.17g", model.coefficients(term, out));
            os << labels[static_cast<std::size_t>(term)] << "," << out << "," << buf << "\n";
        }
    return os.str();
}

} // namespace shred
