#include "shuffleguard/png_io.hpp"

#include <png.h>

#include <cstring>
#include <stdexcept>

#include "shuffleguard/errors.hpp"

namespace shuffleguard {

ByteImage read_png_rgb8(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw dataset_error("cannot read PNG " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  ByteImage image(static_cast<int>(png.height), static_cast<int>(png.width), 3);
  if (!png_image_finish_read(&png, nullptr, image.data.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw dataset_error("cannot decode PNG " + path.string() + ": " + message);
  }
  return image;
}

void write_png_rgb8(const std::filesystem::path& path, const ByteImage& image) {
  if (image.channels != 3 || !image.shape_consistent()) {
    throw std::invalid_argument("write_png_rgb8 expects an H x W x 3 byte image");
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.data.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw std::runtime_error("cannot write PNG " + path.string() + ": " + message);
  }
}

}  // namespace shuffleguard
