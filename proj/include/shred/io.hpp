#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shred/data_manager.hpp"
#include "shred/field_array.hpp"
#include "shred/model.hpp"

namespace shred {

inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kCodecVersion = 1;

/// Dataset file layout (all integers and floats little-endian):
///   "SHDF" | u32 version | u32 id length | id bytes | u32 dtype (1 = f64)
///   | u32 axis count | u64 axis lengths... | f64 payload, row-major
struct DatasetFile {
    std::string id;
    FieldArray array;
};

std::vector<std::uint8_t> serialize_dataset(const std::string& id, const FieldArray& array);
DatasetFile deserialize_dataset(const std::vector<std::uint8_t>& bytes);
void write_dataset(const std::filesystem::path& path, const std::string& id, const FieldArray& array);
DatasetFile read_dataset(const std::filesystem::path& path);

/// CSV of a 2-D matrix, one row per line, full precision.
void write_csv(const std::filesystem::path& path, const Matrix& m);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes);

/// Checkpoint layout:
///   "SHRD" | u32 version | architecture (u32 cell, u64 input, u64 hidden,
///   u64 layers, u64 decoder count, u64 decoder widths..., u64 output)
///   | u64 parameter count | per parameter: u64 rows, u64 cols, f64 values
///   | u32 forecaster kind | forecaster block
/// SINDy block: u64 latent dim, u32 poly order, u8 sine, f64 dt,
///   u8 fitted, then (fitted) f64 threshold, coefficients, active mask.
/// Recurrent block: u64 window, u32 cell, u64 hidden, u64 layers,
///   u8 fitted, then (fitted) the forecaster network's parameters.
std::vector<std::uint8_t> serialize_checkpoint(const ShredModel& model);
ShredModel deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::filesystem::path& path, const ShredModel& model);
ShredModel load_checkpoint(const std::filesystem::path& path);

/// Fitted per-field codecs plus the sensor scaler of a prepared manager.
struct CodecState {
    struct Field {
        std::string id;
        std::vector<Index> spatial_shape;
        FieldCodec codec;
    };
    std::vector<Field> fields;
    MinMaxScaler sensor_scaler;
    Index lags = 0;
};

CodecState codec_state(const DataManager& manager);
std::vector<std::uint8_t> serialize_codecs(const CodecState& state);
CodecState deserialize_codecs(const std::vector<std::uint8_t>& bytes);
void save_codecs(const std::filesystem::path& path, const CodecState& state);
CodecState load_codecs(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

} // namespace shred
