#include "netpgd/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace netpgd {

namespace {

// Skips whitespace and '#' comments, then reads an unsigned decimal field.
std::size_t read_header_field(const std::string& bytes, std::size_t& pos, const std::string& name) {
    while (pos < bytes.size()) {
        const auto ch = static_cast<unsigned char>(bytes[pos]);
        if (ch == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(ch)) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos])))
        throw Error(name + ": malformed PGM header");
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
        value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
        if (value > 1u << 20) throw Error(name + ": PGM header value too large");
        ++pos;
    }
    return value;
}

}  // namespace

ImageVector parse_pgm(const std::string& bytes, const std::string& name) {
    if (bytes.size() < 2 || bytes[0] != 'P') throw Error(name + ": not a PNM file");
    if (bytes[1] != '5')
        throw Error(name + ": unsupported format P" + std::string(1, bytes[1]) + " (only binary PGM P5 is supported)");
    std::size_t pos = 2;
    const std::size_t width = read_header_field(bytes, pos, name);
    const std::size_t height = read_header_field(bytes, pos, name);
    const std::size_t maxval = read_header_field(bytes, pos, name);
    if (width == 0 || height == 0) throw Error(name + ": empty image");
    if (maxval == 0 || maxval > 255) throw Error(name + ": only 8-bit PGM is supported (maxval " +
                                                 std::to_string(maxval) + ")");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw Error(name + ": malformed PGM header");
    ++pos;
    if (bytes.size() - pos < width * height)
        throw Error(name + ": truncated pixel data (" + std::to_string(bytes.size() - pos) + " of " +
                    std::to_string(width * height) + " bytes)");
    if (width != height)
        throw Error(name + ": image is " + std::to_string(width) + "x" + std::to_string(height) + ", must be square");

    ImageVector img{Vector(width * height), height, width};
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<double>(static_cast<unsigned char>(bytes[pos + i])) * scale;
    return img;
}

ImageVector load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open image '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pgm(buf.str(), path);
}

ImageVector load_image(const std::string& path, const DecoderSpec& spec) {
    ImageVector img = load_image(path);
    const std::size_t side = spec.output_side();
    if (img.width != side || spec.output_channels() != 1)
        throw Error(path + ": side " + std::to_string(img.width) + " is incompatible with the decoder (latent_side " +
                    std::to_string(spec.latent_side) + " x 2^" + std::to_string(spec.num_layers() - 1) + " = " +
                    std::to_string(side) + ", " + std::to_string(spec.output_channels()) + " output channel(s))");
    return img;
}

std::string encode_pgm(const ImageVector& image) {
    require(image.pixels.size() == image.width * image.height, "encode_pgm: pixel count does not match shape");
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.reserve(out.size() + image.pixels.size());
    for (double v : image.pixels) {
        const double clamped = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
    }
    return out;
}

void write_pgm(const std::string& path, const ImageVector& image) {
    const std::string bytes = encode_pgm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write image '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing image '" + path + "'");
}

}  // namespace netpgd
