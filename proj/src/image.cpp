#include "pdl/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pdl/errors.hpp"
#include "pdl/rng.hpp"

namespace pdl {

ImageGrid::ImageGrid(Index w, Index h, double fill) : width(w), height(h) {
  if (w < 1 || h < 1) throw DimensionError("ImageGrid: dims must be >= 1");
  data.assign(static_cast<std::size_t>(w * h), fill);
}

ImageGrid ImageGrid::from_vector(Index w, Index h, ConstVecRef v) {
  if (v.size() != w * h) throw DimensionError("ImageGrid::from_vector: size mismatch");
  ImageGrid img(w, h);
  img.vec() = v;
  return img;
}

namespace {

std::string printable(const std::string& s) {
  std::ostringstream os;
  for (unsigned char ch : s) {
    if (std::isprint(ch))
      os << ch;
    else
      os << "\\x" << std::hex << static_cast<int>(ch) << std::dec;
  }
  return os.str();
}

// Next header integer, skipping whitespace and '#' comments.
long read_header_int(std::istream& in, const std::string& path, const char* field) {
  for (;;) {
    int ch = in.peek();
    if (ch == EOF) throw IoError(path + ": truncated header while reading " + field);
    if (std::isspace(ch)) {
      in.get();
    } else if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
  }
  long v = 0;
  if (!(in >> v)) throw IoError(path + ": malformed header field " + field);
  return v;
}

}  // namespace

ImageGrid load_image_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (in.gcount() != 2 || (magic != "P2" && magic != "P5"))
    throw IoError(path + ": not a PGM file (magic bytes '" + printable(magic.substr(0, in.gcount())) + "')");
  const long w = read_header_int(in, path, "width");
  const long h = read_header_int(in, path, "height");
  const long maxval = read_header_int(in, path, "maxval");
  if (w < 1 || h < 1) throw IoError(path + ": invalid dimensions");
  if (maxval < 1 || maxval > 65535) throw IoError(path + ": maxval must be in [1, 65535]");
  ImageGrid img(w, h);
  const std::size_t n = static_cast<std::size_t>(w * h);
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      long v;
      if (!(in >> v)) throw IoError(path + ": truncated pixel data at pixel " + std::to_string(i));
      if (v < 0 || v > maxval) throw IoError(path + ": pixel value out of range at pixel " + std::to_string(i));
      img.data[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    in.get();  // single whitespace after maxval
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(n * bpp);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
      throw IoError(path + ": truncated pixel data (" + std::to_string(in.gcount()) + " of " +
                    std::to_string(buf.size()) + " bytes)");
    for (std::size_t i = 0; i < n; ++i) {
      const long v = bpp == 2 ? (static_cast<long>(buf[2 * i]) << 8) | buf[2 * i + 1] : buf[i];
      if (v > maxval) throw IoError(path + ": pixel value out of range at pixel " + std::to_string(i));
      img.data[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return img;
}

void save_image_pgm(const ImageGrid& img, const std::string& path, int maxval) {
  if (maxval < 1 || maxval > 65535) throw DomainError("save_image_pgm: maxval must be in [1, 65535]");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  const bool wide = maxval > 255;
  for (double v : img.data) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    const auto q = static_cast<unsigned>(std::lround(c * maxval));
    if (wide) out.put(static_cast<char>(q >> 8));
    out.put(static_cast<char>(q & 0xff));
  }
  if (!out) throw IoError("write failed: " + path);
}

ImageGrid add_gaussian_noise(const ImageGrid& img, double sigma_eps, std::uint64_t seed) {
  if (!(sigma_eps >= 0.0) || !std::isfinite(sigma_eps)) throw DomainError("sigma_eps must be >= 0");
  ImageGrid out = img;
  if (sigma_eps == 0.0) return out;
  ChainRng rng(seed, 0xfeedULL);
  for (double& v : out.data) v += sigma_eps * rng.normal();
  return out;
}

ImageGrid make_phantom(Index width, Index height) {
  ImageGrid img(width, height, 0.2);
  const double w = static_cast<double>(width), h = static_cast<double>(height);
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      const double x = (c + 0.5) / w, y = (r + 0.5) / h;
      double v = 0.2;
      if (x > 0.1 && x < 0.45 && y > 0.15 && y < 0.6) v = 0.8;
      const double dx = x - 0.68, dy = y - 0.62;
      if (dx * dx + dy * dy < 0.22 * 0.22) v = 0.55;
      if (y > 0.78 && y < 0.9 && x > 0.1 && x < 0.5) v = 1.0;
      img.at(r, c) = v;
    }
  }
  return img;
}

}  // namespace pdl
