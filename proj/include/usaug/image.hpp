#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace usaug {

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

/// Row-major grayscale raster. Intensities are kept in [0,1]; quantization to
/// 8 bits happens only at file I/O.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
};

/// Inclusive pixel bounds.
struct Box {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
};

/// Per-pixel membership mask. Doubles as a plain instance mask (any pixels)
/// and, when every member sits strictly inside the image, as the paste region
/// Omega whose exterior 4-neighbor ring supplies the Dirichlet boundary.
struct RegionMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> member;

  RegionMask() = default;
  RegionMask(int w, int h)
      : width(w), height(h), member(static_cast<size_t>(w) * h, 0) {}

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  bool is_member(int x, int y) const {
    return member[static_cast<size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool on) {
    member[static_cast<size_t>(y) * width + x] = on ? 1 : 0;
  }

  int count() const {
    int n = 0;
    for (uint8_t m : member) n += (m != 0);
    return n;
  }

  std::optional<Box> bounding_box() const {
    Box b{width, height, -1, -1};
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (is_member(x, y)) {
          if (x < b.x0) b.x0 = x;
          if (x > b.x1) b.x1 = x;
          if (y < b.y0) b.y0 = y;
          if (y > b.y1) b.y1 = y;
        }
    if (b.x1 < 0) return std::nullopt;
    return b;
  }
};

/// Scalar samples over a subset of a grid; carries the guidance intensities g
/// for the divergence computation, which may be defined on only part of the
/// raster (the pasted crop).
struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> value;
  std::vector<uint8_t> known;

  ScalarField() = default;
  ScalarField(int w, int h)
      : width(w),
        height(h),
        value(static_cast<size_t>(w) * h, 0.0),
        known(static_cast<size_t>(w) * h, 0) {}

  static ScalarField from_image(const GrayImage& img) {
    ScalarField f(img.width, img.height);
    f.value = img.data;
    f.known.assign(f.known.size(), 1);
    return f;
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  bool has(int x, int y) const {
    return in_bounds(x, y) && known[static_cast<size_t>(y) * width + x] != 0;
  }
  double at(int x, int y) const { return value[static_cast<size_t>(y) * width + x]; }
  void set(int x, int y, double v) {
    value[static_cast<size_t>(y) * width + x] = v;
    known[static_cast<size_t>(y) * width + x] = 1;
  }
};

/// Cropped source intensities g plus membership mask. The crop rectangle is
/// the mask bounding box dilated by one pixel, so every member pixel has all
/// four neighbors inside the crop.
struct RoiPatch {
  GrayImage values;  // crop-local intensities
  RegionMask mask;   // crop-local membership
  int origin_x = 0;  // source coords of the crop top-left (may be negative
  int origin_y = 0;  // when the dilation was clamped at the image border)
};

}  // namespace usaug
