#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pinr/mrnet.hpp"
#include "pinr/periodic_inr.hpp"

namespace pinr {

// Little-endian model file:
//   "PINR", u32 version, u32 n_stages, then per stage
//   u32 n_freq, u32 n_hidden, u32 widths[n_hidden], u32 channels, f64 P[2],
//   first layer, f64 phi[n_freq], (f64 W, f64 b) per hidden layer, f64 C, f64 c0.
// Version 1 stores the first layer as i32 K[n_freq * 2]. Version 2 is written
// only when some stage has a real-valued first layer: each stage then starts
// with a u32 kind (0 = integer K as in version 1, 1 = f64 omega[n_freq * 2]).
inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::uint32_t kModelVersionReal = 2;

// Errors are ModelFileError with codes kIo, kBadMagic, kVersionMismatch,
// kTruncated (message names the stage and field) and kUnsupported.
void save_model(const MrNet& net, const std::filesystem::path& path);
void save_model(const PeriodicInr& net, const std::filesystem::path& path);
MrNet load_model(const std::filesystem::path& path);

std::string encode_model(const MrNet& net);
MrNet decode_model(const std::string& bytes);

}  // namespace pinr
