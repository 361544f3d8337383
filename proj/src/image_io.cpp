#include "pmace/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

namespace pmace {

void write_png_gray(const std::filesystem::path& path, const RealImage& image,
                    double vmin, double vmax) {
  if (image.empty()) throw IoError("write_png_gray: empty image");
  if (!(vmax > vmin)) throw IoError("write_png_gray: need vmax > vmin");

  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"),
                                           &std::fclose);
  if (!fp) throw IoError("write_png_gray: cannot open '" + path.string() + "'");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("write_png_gray: png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("write_png_gray: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("write_png_gray: libpng error writing '" + path.string() + "'");
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.cols(), image.rows(), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(image.cols());
  double scale = 255.0 / (vmax - vmin);
  for (int r = 0; r < image.rows(); ++r) {
    for (int c = 0; c < image.cols(); ++c) {
      double t = (image(r, c) - vmin) * scale;
      row[c] = static_cast<png_byte>(std::clamp(t, 0.0, 255.0) + 0.5);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace pmace
