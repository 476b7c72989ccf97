#include "vqa/clip_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include "vqa/error.hpp"
#include "vqa/parallel.hpp"
#include "vqa/pnm.hpp"

namespace vqa {

namespace {

constexpr std::string_view kMagic = "YUV4MPEG2";
constexpr std::string_view kFrameTag = "FRAME";

// BT.709 luma coefficients.
constexpr float kKr = 0.2126f;
constexpr float kKb = 0.0722f;
constexpr float kKg = 1.0f - kKr - kKb;

float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

struct ColorspaceInfo {
  ChromaLayout layout;
  int bit_depth;
};

ColorspaceInfo colorspace_from_tag(const std::string& tag) {
  if (tag == "420" || tag == "420jpeg" || tag == "420paldv" || tag == "420mpeg2") return {ChromaLayout::k420, 8};
  if (tag == "422") return {ChromaLayout::k422, 8};
  if (tag == "444") return {ChromaLayout::k444, 8};
  if (tag == "mono") return {ChromaLayout::kMono, 8};
  if (tag == "420p10") return {ChromaLayout::k420, 10};
  if (tag == "422p10") return {ChromaLayout::k422, 10};
  if (tag == "444p10") return {ChromaLayout::k444, 10};
  if (tag == "mono10") return {ChromaLayout::kMono, 10};
  throw Unsupported(tag);
}

std::string colorspace_tag(ChromaLayout layout, int bit_depth) {
  std::string base;
  switch (layout) {
    case ChromaLayout::k420: base = "420"; break;
    case ChromaLayout::k422: base = "422"; break;
    case ChromaLayout::k444: base = "444"; break;
    case ChromaLayout::kMono: base = "mono"; break;
  }
  if (bit_depth == 10) base += layout == ChromaLayout::kMono ? "10" : "p10";
  return base;
}

std::pair<int, int> chroma_dims(ChromaLayout layout, int w, int h) {
  switch (layout) {
    case ChromaLayout::k420: return {(w + 1) / 2, (h + 1) / 2};
    case ChromaLayout::k422: return {(w + 1) / 2, h};
    case ChromaLayout::k444: return {w, h};
    case ChromaLayout::kMono: return {0, 0};
  }
  return {0, 0};
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Reads one line (without '\n') starting at pos; returns false if no newline.
bool read_line(std::span<const std::uint8_t> bytes, std::size_t pos, std::string_view& line, std::size_t& next) {
  const auto* begin = bytes.data() + pos;
  const auto* end = bytes.data() + bytes.size();
  const auto* nl = std::find(begin, end, static_cast<std::uint8_t>('\n'));
  if (nl == end) return false;
  line = std::string_view(reinterpret_cast<const char*>(begin), static_cast<std::size_t>(nl - begin));
  next = static_cast<std::size_t>(nl - bytes.data()) + 1;
  return true;
}

Plane read_plane(std::span<const std::uint8_t> bytes, std::size_t offset, int w, int h, int bit_depth) {
  Plane plane(w, h);
  const float maxval = bit_depth == 10 ? 1023.0f : 255.0f;
  const std::size_t n = plane.size();
  if (bit_depth == 8) {
    for (std::size_t i = 0; i < n; ++i) plane.data[i] = static_cast<float>(bytes[offset + i]) / maxval;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = offset + 2 * i;
      const unsigned raw = static_cast<unsigned>(bytes[at]) | (static_cast<unsigned>(bytes[at + 1]) << 8);
      plane.data[i] = static_cast<float>(std::min(raw, 1023u)) / maxval;
    }
  }
  return plane;
}

void append_plane(std::vector<std::uint8_t>& out, const Plane& plane, int bit_depth) {
  const float maxval = bit_depth == 10 ? 1023.0f : 255.0f;
  for (const float v : plane.data) {
    const auto raw = static_cast<unsigned>(std::lround(clamp01(v) * maxval));
    if (bit_depth == 8) {
      out.push_back(static_cast<std::uint8_t>(raw));
    } else {
      out.push_back(static_cast<std::uint8_t>(raw & 0xff));
      out.push_back(static_cast<std::uint8_t>(raw >> 8));
    }
  }
}

}  // namespace

// Frame ----------------------------------------------------------------------

Frame::Frame(Plane luma, std::optional<ChromaPlanes> chroma, int source_bit_depth)
    : luma_(std::move(luma)), chroma_(std::move(chroma)), bit_depth_(source_bit_depth) {
  if (luma_.width <= 0 || luma_.height <= 0) throw Error("frame luma plane is empty");
  if (bit_depth_ != 8 && bit_depth_ != 10) throw Unsupported("bit depth " + std::to_string(bit_depth_));
  if (chroma_ && !chroma_->cb.same_shape(chroma_->cr)) throw DimensionMismatch("chroma planes differ in size");
}

RgbPlanes Frame::to_rgb() const {
  if (!chroma_) throw Error("frame has no chroma planes");
  const int w = luma_.width;
  const int h = luma_.height;
  const Plane& cb = chroma_->cb;
  const Plane& cr = chroma_->cr;
  const int shift_x = cb.width == w ? 0 : 1;
  const int shift_y = cb.height == h ? 0 : 1;

  RgbPlanes rgb{Plane(w, h), Plane(w, h), Plane(w, h)};
  for (int y = 0; y < h; ++y) {
    const int cy = std::min(y >> shift_y, cb.height - 1);
    for (int x = 0; x < w; ++x) {
      const int cx = std::min(x >> shift_x, cb.width - 1);
      const float luma = luma_.at(x, y);
      const float u = cb.at(cx, cy) - 0.5f;
      const float v = cr.at(cx, cy) - 0.5f;
      rgb.r.at(x, y) = clamp01(luma + 2.0f * (1.0f - kKr) * v);
      rgb.g.at(x, y) = clamp01(luma - (2.0f * kKb * (1.0f - kKb) / kKg) * u - (2.0f * kKr * (1.0f - kKr) / kKg) * v);
      rgb.b.at(x, y) = clamp01(luma + 2.0f * (1.0f - kKb) * u);
    }
  }
  return rgb;
}

// VideoClip ------------------------------------------------------------------

VideoClip::VideoClip(std::vector<Frame> frames, Fps fps, ChromaLayout layout)
    : width_(0), height_(0), fps_(fps), layout_(layout), frames_(std::move(frames)) {
  if (frames_.empty()) throw EmptyInput("clip has no frames");
  if (fps_.num <= 0 || fps_.den <= 0) throw Error("fps numerator and denominator must be positive");
  width_ = frames_.front().luma().width;
  height_ = frames_.front().luma().height;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const Plane& l = frames_[i].luma();
    if (l.width != width_ || l.height != height_) {
      throw DimensionMismatch("frame " + std::to_string(i) + " is " + std::to_string(l.width) + "x" +
                              std::to_string(l.height) + ", clip is " + std::to_string(width_) + "x" +
                              std::to_string(height_));
    }
  }
  const bool chroma = frames_.front().has_chroma();
  if (layout_ == ChromaLayout::kMono && chroma) layout_ = ChromaLayout::k444;
  for (const Frame& f : frames_) {
    if (f.has_chroma() != chroma) throw DimensionMismatch("frames disagree on chroma presence");
  }
  if (!chroma) layout_ = ChromaLayout::kMono;
}

const ClipSpec& clip_spec_from_label(std::string_view label) {
  for (const ClipSpec* spec : {&kSpec30Fhd, &kSpec60Hd, &kSpec30Uhd}) {
    if (spec->label == label) return *spec;
  }
  throw Error("unknown clip spec '" + std::string(label) + "'");
}

// YUV4MPEG2 ------------------------------------------------------------------

VideoClip parse_y4m(std::span<const std::uint8_t> bytes) {
  std::string_view header;
  std::size_t pos = 0;
  if (!read_line(bytes, 0, header, pos)) throw ParseError(bytes.size(), "<header newline>");
  if (header.substr(0, kMagic.size()) != kMagic) throw ParseError(0, std::string(header.substr(0, kMagic.size())));

  std::int64_t width = -1;
  std::int64_t height = -1;
  std::optional<Fps> fps;
  ColorspaceInfo cs{ChromaLayout::k420, 8};

  std::size_t cursor = kMagic.size();
  while (cursor < header.size()) {
    if (header[cursor] == ' ') {
      ++cursor;
      continue;
    }
    const std::size_t end = std::min(header.find(' ', cursor), header.size());
    const std::string_view tok = header.substr(cursor, end - cursor);
    const std::string_view value = tok.substr(1);
    switch (tok[0]) {
      case 'W':
        if (!parse_int(value, width) || width <= 0) throw ParseError(cursor, std::string(tok));
        break;
      case 'H':
        if (!parse_int(value, height) || height <= 0) throw ParseError(cursor, std::string(tok));
        break;
      case 'F': {
        const std::size_t colon = value.find(':');
        Fps f;
        if (colon == std::string_view::npos || !parse_int(value.substr(0, colon), f.num) ||
            !parse_int(value.substr(colon + 1), f.den) || f.num <= 0 || f.den <= 0) {
          throw ParseError(cursor, std::string(tok));
        }
        fps = f;
        break;
      }
      case 'C':
        cs = colorspace_from_tag(std::string(value));
        break;
      case 'I':
      case 'A':
      case 'X':
        break;
      default:
        throw ParseError(cursor, std::string(tok));
    }
    cursor = end;
  }
  if (width < 0) throw ParseError(header.size(), "W");
  if (height < 0) throw ParseError(header.size(), "H");
  if (!fps) throw ParseError(header.size(), "F");

  const int w = static_cast<int>(width);
  const int h = static_cast<int>(height);
  const auto [cw, ch] = chroma_dims(cs.layout, w, h);
  const std::size_t bps = cs.bit_depth == 10 ? 2 : 1;
  const std::size_t luma_bytes = static_cast<std::size_t>(w) * h * bps;
  const std::size_t chroma_bytes = static_cast<std::size_t>(cw) * ch * bps;
  const std::size_t payload = luma_bytes + 2 * chroma_bytes;

  std::vector<Frame> frames;
  while (pos < bytes.size()) {
    std::string_view line;
    std::size_t next = 0;
    if (!read_line(bytes, pos, line, next)) throw TruncatedFrame(frames.size());
    if (line.substr(0, kFrameTag.size()) != kFrameTag) {
      throw ParseError(pos, std::string(line.substr(0, std::min<std::size_t>(line.size(), 16))));
    }
    if (bytes.size() - next < payload) throw TruncatedFrame(frames.size());
    Plane luma = read_plane(bytes, next, w, h, cs.bit_depth);
    std::optional<ChromaPlanes> chroma;
    if (cs.layout != ChromaLayout::kMono) {
      chroma = ChromaPlanes{read_plane(bytes, next + luma_bytes, cw, ch, cs.bit_depth),
                            read_plane(bytes, next + luma_bytes + chroma_bytes, cw, ch, cs.bit_depth)};
    }
    frames.emplace_back(std::move(luma), std::move(chroma), cs.bit_depth);
    pos = next + payload;
  }
  if (frames.empty()) throw TruncatedFrame(0);
  return VideoClip(std::move(frames), *fps, cs.layout);
}

VideoClip read_y4m_file(const std::filesystem::path& path) { return parse_y4m(read_file_bytes(path)); }

std::vector<std::uint8_t> write_y4m(const VideoClip& clip) {
  const int depth = clip.frame(0).source_bit_depth();
  const std::string header = std::string(kMagic) + " W" + std::to_string(clip.width()) + " H" +
                             std::to_string(clip.height()) + " F" + std::to_string(clip.fps().num) + ":" +
                             std::to_string(clip.fps().den) + " C" + colorspace_tag(clip.chroma_layout(), depth) +
                             "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (const Frame& f : clip.frames()) {
    out.insert(out.end(), kFrameTag.begin(), kFrameTag.end());
    out.push_back('\n');
    append_plane(out, f.luma(), depth);
    if (f.chroma()) {
      append_plane(out, f.chroma()->cb, depth);
      append_plane(out, f.chroma()->cr, depth);
    }
  }
  return out;
}

void write_y4m_file(const VideoClip& clip, const std::filesystem::path& path) {
  const auto bytes = write_y4m(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Frame directories ----------------------------------------------------------

VideoClip load_frame_dir(const std::filesystem::path& dir, Fps fps) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
  }
  if (files.empty()) throw EmptyInput("no PGM/PPM frames in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  const auto ext = files.front().extension();
  for (const auto& f : files) {
    if (f.extension() != ext) throw Unsupported("mixed raster formats in " + dir.string());
  }

  std::vector<Frame> frames;
  frames.reserve(files.size());
  int width = -1;
  int height = -1;
  for (const auto& file : files) {
    const PnmImage img = read_pnm(file);
    if (width < 0) {
      width = img.width;
      height = img.height;
    } else if (img.width != width || img.height != height) {
      throw DimensionMismatch(file.string());
    }
    const float maxval = static_cast<float>(img.maxval);
    const int depth = img.maxval > 255 ? 10 : 8;
    Plane luma(img.width, img.height);
    if (img.channels == 1) {
      for (std::size_t i = 0; i < luma.size(); ++i) luma.data[i] = static_cast<float>(img.samples[i]) / maxval;
      frames.emplace_back(std::move(luma), std::nullopt, depth);
    } else {
      ChromaPlanes chroma{Plane(img.width, img.height), Plane(img.width, img.height)};
      for (std::size_t i = 0; i < luma.size(); ++i) {
        const float r = static_cast<float>(img.samples[3 * i]) / maxval;
        const float g = static_cast<float>(img.samples[3 * i + 1]) / maxval;
        const float b = static_cast<float>(img.samples[3 * i + 2]) / maxval;
        const float yv = kKr * r + kKg * g + kKb * b;
        luma.data[i] = clamp01(yv);
        chroma.cb.data[i] = clamp01(0.5f + (b - yv) / (2.0f * (1.0f - kKb)));
        chroma.cr.data[i] = clamp01(0.5f + (r - yv) / (2.0f * (1.0f - kKr)));
      }
      frames.emplace_back(std::move(luma), std::move(chroma), depth);
    }
  }
  return VideoClip(std::move(frames), fps, ext == ".ppm" ? ChromaLayout::k444 : ChromaLayout::kMono);
}

// Synthetic payloads -----------------------------------------------------------

namespace {

Plane noise_plane(int w, int h, std::uint64_t seed) {
  Plane p(w, h);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  for (float& v : p.data) v = dist(rng);
  return p;
}

}  // namespace

VideoClip synth_clip(const ClipSpec& spec, const Pattern& pat, const SynthOptions& options) {
  if (spec.width <= 0 || spec.height <= 0 || spec.frame_count <= 0) throw Error("clip spec dimensions must be positive");
  const int w = spec.width;
  const int h = spec.height;
  const int cw = (w + 1) / 2;
  const int ch = (h + 1) / 2;

  std::vector<std::optional<Frame>> slots(static_cast<std::size_t>(spec.frame_count));
  parallel_for(slots.size(), options.threads, [&](std::size_t i) {
    Plane luma;
    std::optional<ChromaPlanes> chroma;
    if (const auto* c = std::get_if<pattern::Constant>(&pat)) {
      luma = Plane(w, h, c->value);
    } else if (std::holds_alternative<pattern::Gradient>(pat)) {
      luma = Plane(w, h);
      for (int y = 0; y < h; ++y) {
        const double fy = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
        for (int x = 0; x < w; ++x) {
          const double fx = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
          luma.at(x, y) = static_cast<float>((fx + fy) / 2.0);
        }
      }
    } else {
      const std::uint64_t seed = std::get<pattern::Noise>(pat).seed ^ static_cast<std::uint64_t>(i);
      luma = noise_plane(w, h, seed);
      if (options.with_chroma) {
        chroma = ChromaPlanes{noise_plane(cw, ch, seed ^ 0x9e3779b97f4a7c15ULL),
                              noise_plane(cw, ch, seed ^ 0xbf58476d1ce4e5b9ULL)};
      }
    }
    if (options.with_chroma && !chroma) chroma = ChromaPlanes{Plane(cw, ch, 0.5f), Plane(cw, ch, 0.5f)};
    slots[i].emplace(std::move(luma), std::move(chroma), 8);
  });

  std::vector<Frame> frames;
  frames.reserve(slots.size());
  for (auto& s : slots) frames.push_back(std::move(*s));
  return VideoClip(std::move(frames), Fps{30, 1}, options.with_chroma ? ChromaLayout::k420 : ChromaLayout::kMono);
}

}  // namespace vqa
