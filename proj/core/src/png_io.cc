// Copyright 2026 The Mixseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <png.h>

#include <cstring>

#include "mixseg/error.h"
#include "mixseg/io.h"

namespace mixseg {

std::uint32_t rgb_to_id(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint32_t>(r) + 256u * g + 65536u * b;
}

void id_to_rgb(std::uint32_t id, std::uint8_t rgb[3]) {
  rgb[0] = static_cast<std::uint8_t>(id & 0xFF);
  rgb[1] = static_cast<std::uint8_t>((id >> 8) & 0xFF);
  rgb[2] = static_cast<std::uint8_t>((id >> 16) & 0xFF);
}

std::vector<std::uint32_t> read_id_png(const fs::path& path,
                                       MaskShape* shape) {
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kIo, "no such file: " + path.string());
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::kFormat, path.string() + ": " + msg);
  }
  // Linear 8-bit RGB; no gamma or colour conversion is applied to 8-bit
  // sRGB input, so ids survive bit-exactly.
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::kFormat, path.string() + ": " + msg);
  }
  shape->height = static_cast<int>(image.height);
  shape->width = static_cast<int>(image.width);
  std::vector<std::uint32_t> ids(shape->pixels());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ids[i] = rgb_to_id(buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]);
  }
  return ids;
}

void write_id_png(const fs::path& path, const MaskShape& shape,
                  const std::vector<std::uint32_t>& ids) {
  if (static_cast<std::int64_t>(ids.size()) != shape.pixels()) {
    throw Error(ErrorKind::kDimension,
                "id buffer does not match " + to_string(shape));
  }
  std::vector<std::uint8_t> buffer(3 * ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] > 0xFFFFFFu) {
      throw Error(ErrorKind::kConfig,
                  "segment id " + std::to_string(ids[i]) +
                      " does not fit in 24 bits");
    }
    id_to_rgb(ids[i], &buffer[3 * i]);
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(shape.width);
  image.height = static_cast<png_uint_32>(shape.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0,
                               nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::kIo, path.string() + ": " + msg);
  }
}

}  // namespace mixseg
