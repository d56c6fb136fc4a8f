#pragma once

#include <vector>

#include "shred/linalg.hpp"

namespace shred {

/// Where a sample's target lives: trajectory (0 for non-parametric data) and
/// time index within it.
struct SampleRef {
    Index trajectory = 0;
    Index time = 0;

    friend bool operator==(const SampleRef&, const SampleRef&) = default;
};

/// Lagged input sequences with their target vectors.
///
/// Row n of `inputs` holds sample n's window flattened time-major: the
/// `width` sensor values at the oldest lag first.
struct SequenceDataset {
    Index lags = 0;
    Index width = 0;
    Matrix inputs;  ///< N x (lags * width)
    Matrix targets; ///< N x target width
    std::vector<SampleRef> samples;

    [[nodiscard]] Index size() const { return inputs.rows(); }
    [[nodiscard]] bool empty() const { return inputs.rows() == 0; }
    [[nodiscard]] Index target_width() const { return targets.cols(); }

    /// Window of sample n as a lags x width matrix.
    [[nodiscard]] Matrix sequence(Index n) const;
};

struct PreparedDatasets {
    SequenceDataset train;
    SequenceDataset val;
    SequenceDataset test;
};

} // namespace shred
