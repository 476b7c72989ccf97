#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vqa {

/// Binary PGM (P5) or PPM (P6) raster. Samples are interleaved for PPM.
struct PnmImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  int maxval = 255;
  std::vector<std::uint16_t> samples;
};

PnmImage parse_pnm(std::span<const std::uint8_t> bytes);
PnmImage read_pnm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pnm(const PnmImage& image);
void write_pnm(const PnmImage& image, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace vqa
