#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "axrv/circuits.hpp"
#include "axrv/csr.hpp"

namespace axrv {

struct ImageBuffer {
  unsigned width = 0;
  unsigned height = 0;
  std::vector<uint8_t> pixels;  // row-major

  uint8_t at(unsigned x, unsigned y) const { return pixels[y * width + x]; }
  uint8_t& at(unsigned x, unsigned y) { return pixels[y * width + x]; }
  /// Edge-replicated access for kernel windows.
  uint8_t clamped_at(int x, int y) const;
  bool same_shape(const ImageBuffer& o) const {
    return width == o.width && height == o.height;
  }
};

ImageBuffer load_pgm(const std::string& path);
void save_pgm(const ImageBuffer& img, const std::string& path);

/// Unsharp masking S = clamp(2*I - G) with G the binomial 5x5 blur
/// (outer([1,4,6,4,1]) / 256, edge replication). Every pixel-by-weight
/// product routes through the multiplier circuit selected by `mul_config`;
/// accumulation, the /256 shift, the doubling and the clamp stay exact.
ImageBuffer sharpen(const ImageBuffer& img, const CircuitRegistry& reg,
                    ApproxConfig mul_config);

double mse(const ImageBuffer& x, const ImageBuffer& y);

/// 10*log10(255^2 / mse); +infinity when mse is zero.
double psnr(double mse_value);

}  // namespace axrv
