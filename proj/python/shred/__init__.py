from ._shred import (
    DataManager,
    ParametricDataManager,
    ParametricSHREDEngine,
    SequenceDataset,
    SHRED,
    SHREDEngine,
    ShredError,
    SINDy_Forecaster,
    double_gyre,
    read_dataset,
    traveling_wave,
)

__all__ = [
    "DataManager",
    "ParametricDataManager",
    "ParametricSHREDEngine",
    "SequenceDataset",
    "SHRED",
    "SHREDEngine",
    "ShredError",
    "SINDy_Forecaster",
    "double_gyre",
    "read_dataset",
    "traveling_wave",
]
