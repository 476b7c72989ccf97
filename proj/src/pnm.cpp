#include "vqa/pnm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "vqa/error.hpp"

namespace vqa {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) out.push_back(static_cast<char>(bytes_[pos_++]));
    return out;
  }

  int number() {
    const std::size_t start = pos_;
    const std::string tok = token();
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 9) {
      throw ParseError(start, tok);
    }
    return std::stoi(tok);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw ParseError(pos_, "<raster separator>");
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PnmImage parse_pnm(std::span<const std::uint8_t> bytes) {
  HeaderReader reader(bytes);
  const std::string magic = reader.token();
  PnmImage img;
  if (magic == "P5") {
    img.channels = 1;
  } else if (magic == "P6") {
    img.channels = 3;
  } else {
    throw Unsupported(magic);
  }
  img.width = reader.number();
  img.height = reader.number();
  const std::size_t maxval_pos = reader.pos();
  img.maxval = reader.number();
  if (img.width <= 0 || img.height <= 0) throw ParseError(maxval_pos, "dimensions");
  if (img.maxval != 255 && img.maxval != 1023) throw Unsupported("maxval " + std::to_string(img.maxval));
  reader.single_space();

  const std::size_t count = static_cast<std::size_t>(img.width) * img.height * img.channels;
  const std::size_t bytes_per_sample = img.maxval > 255 ? 2 : 1;
  const std::size_t start = reader.pos();
  if (bytes.size() - start < count * bytes_per_sample) throw TruncatedFrame(0);

  img.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (bytes_per_sample == 1) {
      img.samples[i] = bytes[start + i];
    } else {
      const std::size_t at = start + 2 * i;
      const auto v = static_cast<std::uint16_t>((bytes[at] << 8) | bytes[at + 1]);
      if (v > img.maxval) throw ParseError(at, std::to_string(v));
      img.samples[i] = v;
    }
  }
  return img;
}

PnmImage read_pnm(const std::filesystem::path& path) { return parse_pnm(read_file_bytes(path)); }

std::vector<std::uint8_t> encode_pnm(const PnmImage& image) {
  const std::string header = std::string(image.channels == 3 ? "P6" : "P5") + "\n" + std::to_string(image.width) +
                             " " + std::to_string(image.height) + "\n" + std::to_string(image.maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const bool wide = image.maxval > 255;
  out.reserve(out.size() + image.samples.size() * (wide ? 2 : 1));
  for (const auto s : image.samples) {
    if (wide) {
      out.push_back(static_cast<std::uint8_t>(s >> 8));
      out.push_back(static_cast<std::uint8_t>(s & 0xff));
    } else {
      out.push_back(static_cast<std::uint8_t>(s));
    }
  }
  return out;
}

void write_pnm(const PnmImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_pnm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace vqa
