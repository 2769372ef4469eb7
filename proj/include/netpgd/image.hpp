#pragma once

#include <string>

#include "netpgd/decoder.hpp"
#include "netpgd/matrix.hpp"

namespace netpgd {

/// Grayscale image in [0, 1], pixels row-major.
struct ImageVector {
    Vector pixels;
    std::size_t height = 0;
    std::size_t width = 0;
};

/// Reads a binary 8-bit PGM (P5). The image must be square.
ImageVector load_image(const std::string& path);
/// As above, and additionally requires the side to match the decoder output.
ImageVector load_image(const std::string& path, const DecoderSpec& spec);

ImageVector parse_pgm(const std::string& bytes, const std::string& name = "<memory>");

/// Clamps to [0, 1] and writes a P5 PGM with maxval 255.
void write_pgm(const std::string& path, const ImageVector& image);
std::string encode_pgm(const ImageVector& image);

}  // namespace netpgd
