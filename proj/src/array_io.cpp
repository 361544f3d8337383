#include "pmace/array_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pmace {

namespace {

constexpr size_t kMaxElements = size_t{1} << 33;  // 8 Gi elements, overflow guard

void write_header(std::ostream& os, const std::string& kind,
                  const std::vector<size_t>& shape) {
  os << "arrayfile 1\n";
  os << "kind " << kind << "\n";
  os << "order little-endian\n";
  os << "layout row-major\n";
  os << "shape";
  for (size_t s : shape) os << " " << s;
  os << "\ndata\n";
}

struct Header {
  std::string kind;
  std::vector<size_t> shape;
  size_t elements = 1;
};

Header read_header(std::istream& is, const std::filesystem::path& path) {
  auto fail = [&](const std::string& why) -> Header {
    throw IoError("read_array: " + path.string() + ": " + why);
  };

  std::string line;
  if (!std::getline(is, line) || line != "arrayfile 1") fail("missing arrayfile signature");

  Header h;
  bool order_ok = false, layout_ok = false, have_shape = false;
  while (std::getline(is, line)) {
    if (line == "data") break;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "kind") {
      ss >> h.kind;
      if (h.kind != "complex64-pair" && h.kind != "float64" && h.kind != "float32")
        fail("unknown element kind '" + h.kind + "'");
    } else if (key == "order") {
      std::string order;
      ss >> order;
      if (order != "little-endian") fail("unsupported byte order '" + order + "'");
      order_ok = true;
    } else if (key == "layout") {
      std::string layout;
      ss >> layout;
      if (layout != "row-major") fail("unsupported layout '" + layout + "'");
      layout_ok = true;
    } else if (key == "shape") {
      long long dim;
      while (ss >> dim) {
        if (dim <= 0) fail("non-positive dimension in shape");
        h.shape.push_back(static_cast<size_t>(dim));
        if (h.elements > kMaxElements / static_cast<size_t>(dim)) fail("shape overflow");
        h.elements *= static_cast<size_t>(dim);
      }
      if (h.shape.empty() || h.shape.size() > 3) fail("shape must have 1 to 3 dimensions");
      have_shape = true;
    } else {
      fail("unexpected header field '" + key + "'");
    }
  }
  if (h.kind.empty() || !order_ok || !layout_ok || !have_shape)
    fail("incomplete header");
  return h;
}

void read_payload(std::istream& is, void* dest, size_t bytes,
                  const std::filesystem::path& path) {
  is.read(reinterpret_cast<char*>(dest), static_cast<std::streamsize>(bytes));
  if (static_cast<size_t>(is.gcount()) != bytes)
    throw IoError("read_array: " + path.string() + ": truncated payload");
  char extra;
  if (is.read(&extra, 1))
    throw IoError("read_array: " + path.string() + ": trailing bytes after payload");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_array: cannot open '" + path.string() + "'");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_array: cannot open '" + path.string() + "'");
  return is;
}

}  // namespace

void write_array(const std::filesystem::path& path, const ComplexImage& image) {
  if (image.empty()) throw IoError("write_array: refusing to write empty array");
  auto os = open_out(path);
  write_header(os, "complex64-pair",
               {static_cast<size_t>(image.rows()), static_cast<size_t>(image.cols())});
  os.write(reinterpret_cast<const char*>(image.data()),
           static_cast<std::streamsize>(image.size() * sizeof(Complex)));
  if (!os) throw IoError("write_array: write failed for '" + path.string() + "'");
}

void write_array(const std::filesystem::path& path, const RealImage& image) {
  if (image.empty()) throw IoError("write_array: refusing to write empty array");
  auto os = open_out(path);
  write_header(os, "float64",
               {static_cast<size_t>(image.rows()), static_cast<size_t>(image.cols())});
  os.write(reinterpret_cast<const char*>(image.data()),
           static_cast<std::streamsize>(image.size() * sizeof(double)));
  if (!os) throw IoError("write_array: write failed for '" + path.string() + "'");
}

void write_array(const std::filesystem::path& path, const std::vector<RealImage>& frames) {
  if (frames.empty() || frames.front().empty())
    throw IoError("write_array: refusing to write empty stack");
  for (const auto& f : frames)
    if (!f.same_shape(frames.front())) throw IoError("write_array: ragged stack");
  auto os = open_out(path);
  write_header(os, "float64",
               {frames.size(), static_cast<size_t>(frames.front().rows()),
                static_cast<size_t>(frames.front().cols())});
  for (const auto& f : frames)
    os.write(reinterpret_cast<const char*>(f.data()),
             static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!os) throw IoError("write_array: write failed for '" + path.string() + "'");
}

ComplexImage read_complex_image(const std::filesystem::path& path) {
  auto is = open_in(path);
  Header h = read_header(is, path);
  if (h.kind != "complex64-pair" || h.shape.size() != 2)
    throw IoError("read_array: " + path.string() + ": expected a 2D complex64-pair array");
  ComplexImage image(static_cast<int>(h.shape[0]), static_cast<int>(h.shape[1]));
  read_payload(is, image.data(), h.elements * sizeof(Complex), path);
  return image;
}

namespace {

RealImage widen_frame(std::istream& is, const Header& h, size_t frame_elems, int rows,
                      int cols, const std::filesystem::path& path) {
  RealImage image(rows, cols);
  if (h.kind == "float64") {
    is.read(reinterpret_cast<char*>(image.data()),
            static_cast<std::streamsize>(frame_elems * sizeof(double)));
    if (static_cast<size_t>(is.gcount()) != frame_elems * sizeof(double))
      throw IoError("read_array: " + path.string() + ": truncated payload");
  } else {  // float32
    std::vector<float> buf(frame_elems);
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(frame_elems * sizeof(float)));
    if (static_cast<size_t>(is.gcount()) != frame_elems * sizeof(float))
      throw IoError("read_array: " + path.string() + ": truncated payload");
    for (size_t i = 0; i < frame_elems; ++i) image[i] = buf[i];
  }
  return image;
}

}  // namespace

RealImage read_real_image(const std::filesystem::path& path) {
  auto is = open_in(path);
  Header h = read_header(is, path);
  if ((h.kind != "float64" && h.kind != "float32") || h.shape.size() != 2)
    throw IoError("read_array: " + path.string() + ": expected a 2D real array");
  RealImage image = widen_frame(is, h, h.elements, static_cast<int>(h.shape[0]),
                                static_cast<int>(h.shape[1]), path);
  char extra;
  if (is.read(&extra, 1))
    throw IoError("read_array: " + path.string() + ": trailing bytes after payload");
  return image;
}

std::vector<RealImage> read_real_stack(const std::filesystem::path& path) {
  auto is = open_in(path);
  Header h = read_header(is, path);
  if ((h.kind != "float64" && h.kind != "float32") || h.shape.size() != 3)
    throw IoError("read_array: " + path.string() + ": expected a 3D real stack");
  size_t frames = h.shape[0];
  size_t frame_elems = h.shape[1] * h.shape[2];
  std::vector<RealImage> out;
  out.reserve(frames);
  for (size_t f = 0; f < frames; ++f)
    out.push_back(widen_frame(is, h, frame_elems, static_cast<int>(h.shape[1]),
                              static_cast<int>(h.shape[2]), path));
  char extra;
  if (is.read(&extra, 1))
    throw IoError("read_array: " + path.string() + ": trailing bytes after payload");
  return out;
}

void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace) {
  std::ofstream os(path);
  if (!os) throw IoError("write_trace_csv: cannot open '" + path.string() + "'");
  os << "iteration,residual,nrmse,seconds\n";
  char buf[64];
  for (const auto& rec : trace.records) {
    os << rec.iteration << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", rec.residual);
    os << buf << ",";
    if (rec.nrmse) {
      std::snprintf(buf, sizeof(buf), "%.17g", *rec.nrmse);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.6f", rec.seconds);
    os << "," << buf << "\n";
  }
  if (!os) throw IoError("write_trace_csv: write failed for '" + path.string() + "'");
}

}  // namespace pmace
