#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "dre/autodiff/parameters.hpp"

// Checkpoint container, all integers little-endian:
//
//   "DRE1"
//   u64 config_len | config_len bytes of canonical JSON (sorted keys)
//   u32 tensor_count
//   tensor_count x ( u32 name_len | name | u8 dtype (0 = f32, 1 = f64)
//                    | u32 rank | rank x u32 dims | raw values )
//
// Writing the same configuration and parameters always produces the same
// bytes.
namespace dre::model {

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

template <typename Real>
struct CheckpointContents {
  nlohmann::json config;
  ad::ParameterSet<Real> params;
};

template <typename Real>
void write_checkpoint(std::ostream& out, const nlohmann::json& config,
                      const ad::ParameterSet<Real>& params);
// Throws FormatError with the byte offset on truncation, bad magic, or a
// dtype that differs from Real.
template <typename Real>
CheckpointContents<Real> read_checkpoint(std::istream& in);

template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& config,
                     const ad::ParameterSet<Real>& params);
template <typename Real>
CheckpointContents<Real> load_checkpoint(const std::filesystem::path& path);

}  // namespace dre::model
