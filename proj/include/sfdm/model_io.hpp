#pragma once
// Model checkpoints: a little-endian binary container, magic "SFDM".
//
// Layout (version 1):
//   char[4]  magic "SFDM"
//   u32      version
//   u32      wiring          0 = single_transform, 1 = per_layer
//   u32      transform kind  0 = dct2, 1 = dft
//   u32      ndim            1 or 2
//   u64[ndim] grid dims      (rows, cols) for 2-D, (cols) for 1-D
//   u64      retained modes m
//   u32      depth
//   u32      width
//   u64[m]   selector indices
//   per layer:
//     u32    layout          0 = ModeDense, 1 = PerMode
//     u32    c_in, u32 c_out
//     u32    activation      0 = none, 1 = gelu
//     u32    has_bias, u32 has_residual
//     f64[]  weights         (re, im interleaved for dft models)
//     f64[]  bias            if has_bias
//     f64[]  residual        if has_residual (c_out reals)
//
// Writes are deterministic: the same model produces the same bytes.

#include <string>

#include "sfdm/layers.hpp"

namespace sfdm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

}  // namespace sfdm
