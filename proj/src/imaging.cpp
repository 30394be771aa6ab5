#include "axrv/imaging.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>

namespace axrv {

namespace {

constexpr int kKernel1D[5] = {1, 4, 6, 4, 1};

int read_pgm_token(std::istream& in, const std::string& path) {
  // skips whitespace and '#' comment lines per the netpbm grammar
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF) throw ConfigError("truncated PGM header: " + path);
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw ConfigError("malformed PGM header: " + path);
  return value;
}

}  // namespace

uint8_t ImageBuffer::clamped_at(int x, int y) const {
  if (x < 0) x = 0;
  if (y < 0) y = 0;
  if (x >= int(width)) x = int(width) - 1;
  if (y >= int(height)) y = int(height) - 1;
  return pixels[unsigned(y) * width + unsigned(x)];
}

ImageBuffer load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open image: " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5') {
    if (m0 == 'P' && m1 == '2')
      throw ConfigError("binary PGM (P5) required, got ASCII P2: " + path);
    throw ConfigError("binary PGM (P5) required: " + path);
  }
  int width = read_pgm_token(in, path);
  int height = read_pgm_token(in, path);
  int maxval = read_pgm_token(in, path);
  if (maxval != 255)
    throw ConfigError("8-bit samples required (maxval 255), got maxval " +
                      std::to_string(maxval) + ": " + path);
  if (width <= 0 || height <= 0)
    throw ConfigError("bad PGM dimensions: " + path);

  ImageBuffer img;
  img.width = unsigned(width);
  img.height = unsigned(height);
  img.pixels.resize(size_t(width) * size_t(height));
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          std::streamsize(img.pixels.size()));
  if (size_t(in.gcount()) != img.pixels.size())
    throw ConfigError("truncated PGM payload: " + path);
  return img;
}

void save_pgm(const ImageBuffer& img, const std::string& path) {
  if (img.pixels.size() != size_t(img.width) * img.height)
    throw ConfigError("inconsistent image buffer");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write image: " + path);
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            std::streamsize(img.pixels.size()));
  if (!out) throw ConfigError("write failed: " + path);
}

ImageBuffer sharpen(const ImageBuffer& img, const CircuitRegistry& reg,
                    ApproxConfig mul_config) {
  if (img.width < 5 || img.height < 5)
    throw ConfigError("sharpen needs at least a 5x5 image");

  ImageBuffer out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size());

  for (int y = 0; y < int(img.height); ++y) {
    for (int x = 0; x < int(img.width); ++x) {
      uint32_t acc = 0;
      for (int ky = -2; ky <= 2; ++ky) {
        for (int kx = -2; kx <= 2; ++kx) {
          uint32_t weight =
              uint32_t(kKernel1D[ky + 2]) * uint32_t(kKernel1D[kx + 2]);
          uint32_t pixel = img.clamped_at(x + kx, y + ky);
          acc += uint32_t(dispatch_mul(reg, mul_config, pixel, weight,
                                       MulMode::UnsignedUnsigned)
                              .value);
        }
      }
      int g = int(acc >> 8);
      int s = 2 * int(img.at(unsigned(x), unsigned(y))) - g;
      if (s < 0) s = 0;
      if (s > 255) s = 255;
      out.at(unsigned(x), unsigned(y)) = uint8_t(s);
    }
  }
  return out;
}

double mse(const ImageBuffer& x, const ImageBuffer& y) {
  if (!x.same_shape(y)) throw ConfigError("mse: image dimensions differ");
  uint64_t sum = 0;
  for (size_t i = 0; i < x.pixels.size(); ++i) {
    int64_t d = int64_t(x.pixels[i]) - int64_t(y.pixels[i]);
    sum += uint64_t(d * d);
  }
  return double(sum) / double(x.pixels.size());
}

double psnr(double mse_value) {
  if (mse_value < 0) throw ConfigError("psnr: negative mse");
  if (mse_value == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse_value);
}

}  // namespace axrv
