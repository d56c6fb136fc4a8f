#include "shred/dataset.hpp"

namespace shred {

Matrix SequenceDataset::sequence(Index n) const
{
    return Eigen::Map<const Matrix>(inputs.row(n).data(), lags, width);
}

} // namespace shred
