#include "shred/field_array.hpp"

#include <functional>
#include <numeric>

#include "shred/error.hpp"

namespace shred {

namespace {

Index product(std::vector<Index>::const_iterator begin, std::vector<Index>::const_iterator end)
{
    return std::accumulate(begin, end, Index{1}, std::multiplies<>());
}

} // namespace

FieldArray::FieldArray(std::vector<Index> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values))
{
    for (Index axis : shape_) require(axis >= 0, ErrorKind::Data, "FieldArray: negative axis length");
    require(product(shape_.begin(), shape_.end()) == static_cast<Index>(values_.size()), ErrorKind::Data,
            "FieldArray: shape " + shape_string() + " does not match " + std::to_string(values_.size()) + " values");
}

FieldArray FieldArray::zeros(std::vector<Index> shape)
{
    const Index n = product(shape.begin(), shape.end());
    return FieldArray(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

FieldArray FieldArray::from_matrix(const Matrix& m, std::vector<Index> shape)
{
    return FieldArray(std::move(shape), std::vector<double>(m.data(), m.data() + m.size()));
}

Index FieldArray::trailing_size(Index leading) const
{
    require(leading >= 0 && leading <= rank(), ErrorKind::Data, "FieldArray: bad axis split");
    return product(shape_.begin() + leading, shape_.end());
}

Matrix FieldArray::as_matrix(Index leading) const
{
    const Index cols = trailing_size(leading);
    const Index rows = product(shape_.begin(), shape_.begin() + leading);
    return Eigen::Map<const Matrix>(values_.data(), rows, cols);
}

std::string FieldArray::shape_string() const
{
    std::string out = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) out += (i ? ", " : "") + std::to_string(shape_[i]);
    return out + ")";
}

} // namespace shred
