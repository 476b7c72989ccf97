#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vqa {

/// Row-major single-channel image of normalized samples.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  Plane() = default;
  Plane(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::size_t size() const noexcept { return data.size(); }
  bool empty() const noexcept { return data.empty(); }

  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  std::span<float> row(int y) { return {data.data() + static_cast<std::size_t>(y) * width, static_cast<std::size_t>(width)}; }
  std::span<const float> row(int y) const {
    return {data.data() + static_cast<std::size_t>(y) * width, static_cast<std::size_t>(width)};
  }

  bool same_shape(const Plane& other) const noexcept { return width == other.width && height == other.height; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

struct RgbPlanes {
  Plane r, g, b;
};

}  // namespace vqa
