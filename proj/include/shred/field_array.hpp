#pragma once

#include <string>
#include <vector>

#include "shred/linalg.hpp"

namespace shred {

/// Row-major n-dimensional array of doubles: time (or trajectory, time)
/// leading, spatial axes trailing.
class FieldArray {
public:
    FieldArray() = default;
    FieldArray(std::vector<Index> shape, std::vector<double> values);

    static FieldArray zeros(std::vector<Index> shape);
    /// Wraps `m` (rows = leading axes flattened) with the given full shape.
    static FieldArray from_matrix(const Matrix& m, std::vector<Index> shape);

    [[nodiscard]] const std::vector<Index>& shape() const { return shape_; }
    [[nodiscard]] Index rank() const { return static_cast<Index>(shape_.size()); }
    [[nodiscard]] Index size() const { return static_cast<Index>(values_.size()); }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::vector<double>& values() { return values_; }
    [[nodiscard]] double* data() { return values_.data(); }
    [[nodiscard]] const double* data() const { return values_.data(); }

    /// Product of the axes after the first `leading` ones.
    [[nodiscard]] Index trailing_size(Index leading) const;

    /// View as (product of first `leading` axes) x (product of the rest).
    [[nodiscard]] Matrix as_matrix(Index leading) const;

    [[nodiscard]] std::string shape_string() const;

private:
    std::vector<Index> shape_;
    std::vector<double> values_;
};

} // namespace shred
