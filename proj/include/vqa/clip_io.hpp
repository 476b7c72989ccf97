#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vqa/plane.hpp"

namespace vqa {

enum class ChromaLayout { k420, k422, k444, kMono };

struct Fps {
  std::int64_t num = 30;
  std::int64_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fps&, const Fps&) = default;
};

struct ChromaPlanes {
  Plane cb;
  Plane cr;
};

/// One decoded picture. Luma is always full resolution; chroma keeps the
/// source subsampling and is only expanded when RGB is requested.
class Frame {
 public:
  Frame(Plane luma, std::optional<ChromaPlanes> chroma, int source_bit_depth = 8);

  const Plane& luma() const noexcept { return luma_; }
  const std::optional<ChromaPlanes>& chroma() const noexcept { return chroma_; }
  bool has_chroma() const noexcept { return chroma_.has_value(); }
  int source_bit_depth() const noexcept { return bit_depth_; }

  // BT.709, nearest-neighbour chroma upsampling, clamped to [0,1].
  // Throws Error when the frame has no chroma.
  RgbPlanes to_rgb() const;

 private:
  Plane luma_;
  std::optional<ChromaPlanes> chroma_;
  int bit_depth_;
};

class VideoClip {
 public:
  VideoClip(std::vector<Frame> frames, Fps fps, ChromaLayout layout = ChromaLayout::k420);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Fps fps() const noexcept { return fps_; }
  ChromaLayout chroma_layout() const noexcept { return layout_; }
  std::size_t frame_count() const noexcept { return frames_.size(); }
  const Frame& frame(std::size_t i) const { return frames_.at(i); }
  std::span<const Frame> frames() const noexcept { return frames_; }

 private:
  int width_;
  int height_;
  Fps fps_;
  ChromaLayout layout_;
  std::vector<Frame> frames_;
};

struct ClipSpec {
  std::string label;
  int frame_count;
  int width;
  int height;
};

inline const ClipSpec kSpec30Fhd{"30-FHD", 30, 1920, 1080};
inline const ClipSpec kSpec60Hd{"60-HD", 60, 1280, 720};
inline const ClipSpec kSpec30Uhd{"30-4K", 30, 3840, 2160};

/// Looks up one of the canonical specs; throws Error for unknown labels.
const ClipSpec& clip_spec_from_label(std::string_view label);

// YUV4MPEG2 ---------------------------------------------------------------

VideoClip parse_y4m(std::span<const std::uint8_t> bytes);
VideoClip read_y4m_file(const std::filesystem::path& path);
std::vector<std::uint8_t> write_y4m(const VideoClip& clip);
void write_y4m_file(const VideoClip& clip, const std::filesystem::path& path);

// Frame directories (binary PGM/PPM) ---------------------------------------

VideoClip load_frame_dir(const std::filesystem::path& dir, Fps fps);

// Synthetic payloads --------------------------------------------------------

namespace pattern {
struct Constant {
  float value = 0.5f;
};
struct Gradient {};
struct Noise {
  std::uint64_t seed = 0;
};
}  // namespace pattern

using Pattern = std::variant<pattern::Constant, pattern::Gradient, pattern::Noise>;

struct SynthOptions {
  bool with_chroma = false;  // adds 4:2:0 chroma (noise for Noise, neutral otherwise)
  int threads = 1;
};

VideoClip synth_clip(const ClipSpec& spec, const Pattern& pattern, const SynthOptions& options = {});

}  // namespace vqa
