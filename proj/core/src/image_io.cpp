#include "aqua/image_io.hpp"

#include <algorithm>
#include <cstdio>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include <png.h>

#include <OpenEXR/ImathBox.h>
#include <OpenEXR/ImfChannelList.h>
#include <OpenEXR/ImfFrameBuffer.h>
#include <OpenEXR/ImfHeader.h>
#include <OpenEXR/ImfInputFile.h>
#include <OpenEXR/ImfOutputFile.h>

#include <json.hpp>

#include "aqua/errors.hpp"
#include "aqua/rng.hpp"

namespace fs = std::filesystem;

namespace aqua {

namespace {

struct FileHandle {
    FILE* fp = nullptr;
    explicit FileHandle(const fs::path& path, const char* mode)
        : fp(std::fopen(path.string().c_str(), mode)) {}
    ~FileHandle() {
        if (fp) std::fclose(fp);
    }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
};

struct PngErrorState {
    std::string message;
};

void png_error_handler(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    if (state && msg) state->message = msg;
    longjmp(png_jmpbuf(png), 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

bool host_is_little_endian() {
    const std::uint16_t probe = 1;
    unsigned char byte;
    std::memcpy(&byte, &probe, 1);
    return byte == 1;
}

fs::path temp_path_for(const fs::path& target) {
    fs::path tmp = target;
    tmp += ".tmp";
    return tmp;
}

void commit_temp(const fs::path& tmp, const fs::path& target) {
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw DecodeError("cannot move " + tmp.string() + " to " + target.string() + ": " +
                          ec.message());
    }
}

} // namespace

EncodedImage read_png(const fs::path& path) {
    FileHandle file(path, "rb");
    if (!file.fp) throw DecodeError("cannot open " + path.string());

    PngErrorState err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                             png_warning_handler);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("libpng init failed for " + path.string());
    }

    EncodedImage out;
    std::vector<png_bytep> rows;
    std::vector<unsigned char> raw;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError(path.string() + ": " +
                          (err.message.empty() ? "png decode failed" : err.message));
    }

    png_init_io(png, file.fp);
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
    if (bit_depth == 16 && host_is_little_endian()) png_set_swap(png);

    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.bit_depth = png_get_bit_depth(png, info) == 16 ? 16 : 8;

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    raw.resize(row_bytes * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) {
        rows[static_cast<std::size_t>(y)] = raw.data() + static_cast<std::size_t>(y) * row_bytes;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t values = static_cast<std::size_t>(out.width) * out.height * 3;
    out.data.resize(values);
    if (out.bit_depth == 16) {
        const std::uint16_t* src = reinterpret_cast<const std::uint16_t*>(raw.data());
        std::copy(src, src + values, out.data.begin());
    } else {
        for (std::size_t i = 0; i < values; ++i) out.data[i] = raw[i];
    }
    return out;
}

void write_png(const EncodedImage& img, const fs::path& path) {
    if (img.bit_depth != 8 && img.bit_depth != 16) {
        throw ValidationError("png bit depth must be 8 or 16");
    }
    const std::size_t values = static_cast<std::size_t>(img.width) * img.height * 3;
    if (img.data.size() != values) throw ValidationError("png data length mismatch");

    const fs::path tmp = temp_path_for(path);
    {
        FileHandle file(tmp, "wb");
        if (!file.fp) throw DecodeError("cannot open " + tmp.string() + " for writing");

        PngErrorState err;
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                                  png_warning_handler);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            if (png) png_destroy_write_struct(&png, &info);
            throw DecodeError("libpng init failed for " + tmp.string());
        }

        std::vector<unsigned char> raw;
        std::vector<png_bytep> rows;

        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DecodeError(path.string() + ": " +
                              (err.message.empty() ? "png encode failed" : err.message));
        }

        png_init_io(png, file.fp);
        png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                     static_cast<png_uint_32>(img.height), img.bit_depth, PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        if (img.bit_depth == 16 && host_is_little_endian()) png_set_swap(png);

        const std::size_t row_values = static_cast<std::size_t>(img.width) * 3;
        if (img.bit_depth == 16) {
            raw.resize(values * 2);
            std::memcpy(raw.data(), img.data.data(), values * 2);
            rows.resize(static_cast<std::size_t>(img.height));
            for (int y = 0; y < img.height; ++y) {
                rows[static_cast<std::size_t>(y)] =
                    raw.data() + static_cast<std::size_t>(y) * row_values * 2;
            }
        } else {
            raw.resize(values);
            for (std::size_t i = 0; i < values; ++i) {
                raw[i] = static_cast<unsigned char>(img.data[i] & 0xff);
            }
            rows.resize(static_cast<std::size_t>(img.height));
            for (int y = 0; y < img.height; ++y) {
                rows[static_cast<std::size_t>(y)] =
                    raw.data() + static_cast<std::size_t>(y) * row_values;
            }
        }
        png_write_image(png, rows.data());
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }
    commit_temp(tmp, path);
}

LinearImage read_exr(const fs::path& path) {
    try {
        Imf::InputFile file(path.string().c_str());
        const Imath::Box2i dw = file.header().dataWindow();
        const int width = dw.max.x - dw.min.x + 1;
        const int height = dw.max.y - dw.min.y + 1;

        const Imf::ChannelList& channels = file.header().channels();
        for (const char* name : {"R", "G", "B"}) {
            if (!channels.findChannel(name)) {
                throw DecodeError(path.string() + ": missing channel " + name);
            }
        }

        const std::size_t n = static_cast<std::size_t>(width) * height;
        std::vector<float> r(n), g(n), b(n);
        const std::size_t xs = sizeof(float);
        const std::size_t ys = xs * static_cast<std::size_t>(width);
        const std::ptrdiff_t origin = dw.min.x + static_cast<std::ptrdiff_t>(dw.min.y) * width;

        Imf::FrameBuffer fb;
        fb.insert("R", Imf::Slice(Imf::FLOAT, reinterpret_cast<char*>(r.data() - origin), xs, ys));
        fb.insert("G", Imf::Slice(Imf::FLOAT, reinterpret_cast<char*>(g.data() - origin), xs, ys));
        fb.insert("B", Imf::Slice(Imf::FLOAT, reinterpret_cast<char*>(b.data() - origin), xs, ys));
        file.setFrameBuffer(fb);
        file.readPixels(dw.min.y, dw.max.y);

        LinearImage out(width, height);
        double* dst = out.data();
        for (std::size_t i = 0; i < n; ++i) {
            dst[i * 3] = r[i];
            dst[i * 3 + 1] = g[i];
            dst[i * 3 + 2] = b[i];
        }
        return out;
    } catch (const DecodeError&) {
        throw;
    } catch (const std::exception& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

void write_exr(const LinearImage& img, const fs::path& path) {
    const fs::path tmp = temp_path_for(path);
    try {
        const int width = img.width();
        const int height = img.height();
        const std::size_t n = img.pixel_count();
        std::vector<float> r(n), g(n), b(n);
        const double* src = img.data();
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = static_cast<float>(src[i * 3]);
            g[i] = static_cast<float>(src[i * 3 + 1]);
            b[i] = static_cast<float>(src[i * 3 + 2]);
        }

        Imf::Header header(width, height);
        header.channels().insert("R", Imf::Channel(Imf::FLOAT));
        header.channels().insert("G", Imf::Channel(Imf::FLOAT));
        header.channels().insert("B", Imf::Channel(Imf::FLOAT));

        const std::size_t xs = sizeof(float);
        const std::size_t ys = xs * static_cast<std::size_t>(width);
        Imf::FrameBuffer fb;
        fb.insert("R", Imf::Slice(Imf::FLOAT, reinterpret_cast<char*>(r.data()), xs, ys));
        fb.insert("G", Imf::Slice(Imf::FLOAT, reinterpret_cast<char*>(g.data()), xs, ys));
        fb.insert("B", Imf::Slice(Imf::FLOAT, reinterpret_cast<char*>(b.data()), xs, ys));

        Imf::OutputFile out(tmp.string().c_str(), header);
        out.setFrameBuffer(fb);
        out.writePixels(height);
    } catch (const std::exception& e) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw DecodeError(path.string() + ": " + e.what());
    }
    commit_temp(tmp, path);
}

namespace {

DepthMap read_exr_depth(const fs::path& path) {
    try {
        Imf::InputFile file(path.string().c_str());
        const Imath::Box2i dw = file.header().dataWindow();
        const int width = dw.max.x - dw.min.x + 1;
        const int height = dw.max.y - dw.min.y + 1;

        const Imf::ChannelList& channels = file.header().channels();
        std::string channel;
        for (const char* name : {"Z", "Y", "R"}) {
            if (channels.findChannel(name)) {
                channel = name;
                break;
            }
        }
        if (channel.empty() && channels.begin() != channels.end()) {
            channel = channels.begin().name();
        }
        if (channel.empty()) throw DecodeError(path.string() + ": no channels");

        const std::size_t n = static_cast<std::size_t>(width) * height;
        std::vector<float> z(n);
        const std::size_t xs = sizeof(float);
        const std::size_t ys = xs * static_cast<std::size_t>(width);
        const std::ptrdiff_t origin = dw.min.x + static_cast<std::ptrdiff_t>(dw.min.y) * width;

        Imf::FrameBuffer fb;
        fb.insert(channel.c_str(),
                  Imf::Slice(Imf::FLOAT, reinterpret_cast<char*>(z.data() - origin), xs, ys));
        file.setFrameBuffer(fb);
        file.readPixels(dw.min.y, dw.max.y);

        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = z[i];
        return DepthMap(width, height, std::move(values));
    } catch (const DecodeError&) {
        throw;
    } catch (const std::exception& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

void write_exr_depth(const DepthMap& map, const fs::path& path) {
    const fs::path tmp = temp_path_for(path);
    try {
        const std::size_t n = map.pixel_count();
        std::vector<float> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<float>(map.data()[i]);

        Imf::Header header(map.width(), map.height());
        header.channels().insert("Z", Imf::Channel(Imf::FLOAT));

        Imf::FrameBuffer fb;
        fb.insert("Z", Imf::Slice(Imf::FLOAT, reinterpret_cast<char*>(z.data()), sizeof(float),
                                  sizeof(float) * static_cast<std::size_t>(map.width())));

        Imf::OutputFile out(tmp.string().c_str(), header);
        out.setFrameBuffer(fb);
        out.writePixels(map.height());
    } catch (const std::exception& e) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw DecodeError(path.string() + ": " + e.what());
    }
    commit_temp(tmp, path);
}

} // namespace

DepthMap read_pfm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DecodeError("cannot open " + path.string());

    std::string magic;
    int width = 0;
    int height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    if (!in || (magic != "Pf" && magic != "PF")) {
        throw DecodeError(path.string() + ": not a PFM file");
    }
    if (magic == "PF") throw DecodeError(path.string() + ": color PFM not supported for depth");
    if (width < 1 || height < 1 || scale == 0.0) {
        throw DecodeError(path.string() + ": bad PFM header");
    }
    in.get(); // single whitespace after the scale line

    const bool file_little = scale < 0.0;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<float> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw DecodeError(path.string() + ": truncated PFM data");

    if (file_little != host_is_little_endian()) {
        for (float& v : raw) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            bits = __builtin_bswap32(bits);
            std::memcpy(&v, &bits, 4);
        }
    }

    // PFM rows are stored bottom-up.
    std::vector<double> values(n);
    for (int y = 0; y < height; ++y) {
        const float* src = raw.data() + static_cast<std::size_t>(height - 1 - y) * width;
        double* dst = values.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) dst[x] = src[x];
    }
    return DepthMap(width, height, std::move(values));
}

void write_pfm(const DepthMap& map, const fs::path& path) {
    const fs::path tmp = temp_path_for(path);
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DecodeError("cannot open " + tmp.string() + " for writing");

        const double scale = host_is_little_endian() ? -1.0 : 1.0;
        out << "Pf\n" << map.width() << " " << map.height() << "\n" << scale << "\n";

        const std::size_t row = static_cast<std::size_t>(map.width());
        std::vector<float> line(row);
        for (int y = map.height() - 1; y >= 0; --y) {
            const double* src = map.data() + static_cast<std::size_t>(y) * row;
            for (std::size_t x = 0; x < row; ++x) line[x] = static_cast<float>(src[x]);
            out.write(reinterpret_cast<const char*>(line.data()),
                      static_cast<std::streamsize>(row * sizeof(float)));
        }
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DecodeError("write failed for " + tmp.string());
        }
    }
    commit_temp(tmp, path);
}

namespace {

DepthMap apply_depth_policy(DepthMap map, const fs::path& path, DepthPolicy policy) {
    std::size_t invalid = 0;
    double smallest_valid = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < map.pixel_count(); ++i) {
        const double v = map.data()[i];
        if (!std::isfinite(v) || v <= 0.0) {
            ++invalid;
        } else {
            smallest_valid = std::min(smallest_valid, v);
        }
    }
    if (invalid == 0) return map;
    if (policy == DepthPolicy::Strict) {
        throw ValidationError(path.string() + ": " + std::to_string(invalid) +
                              " non-finite or non-positive depth samples");
    }
    if (!std::isfinite(smallest_valid)) {
        throw ValidationError(path.string() + ": no valid depth samples to repair from");
    }
    for (std::size_t i = 0; i < map.pixel_count(); ++i) {
        double& v = map.data()[i];
        if (!std::isfinite(v) || v <= 0.0) v = smallest_valid;
    }
    return map;
}

DepthMap read_png_depth(const fs::path& path) {
    const EncodedImage img = read_png(path);
    if (img.bit_depth != 16) {
        throw DecodeError(path.string() + ": depth PNG must be 16-bit");
    }
    fs::path sidecar = path;
    sidecar.replace_extension(".json");
    if (!fs::exists(sidecar)) {
        throw DecodeError(path.string() + ": missing depth sidecar " + sidecar.string());
    }
    double scale = 0.0;
    double offset = 0.0;
    try {
        const nlohmann::json doc = nlohmann::json::parse(read_text(sidecar));
        scale = doc.at("scale").get<double>();
        offset = doc.value("offset", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(sidecar.string() + ": " + e.what());
    }
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(offset)) {
        throw ValidationError(sidecar.string() + ": scale must be positive and finite");
    }

    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = offset + scale * (static_cast<double>(img.data[i * 3]) / 65535.0);
    }
    return DepthMap(img.width, img.height, std::move(values));
}

} // namespace

DepthMap read_depth(const fs::path& path, DepthPolicy policy) {
    const std::string ext = path.extension().string();
    DepthMap map(1, 1);
    if (ext == ".pfm") {
        map = read_pfm(path);
    } else if (ext == ".exr") {
        map = read_exr_depth(path);
    } else if (ext == ".png") {
        map = read_png_depth(path);
    } else {
        throw DecodeError(path.string() + ": unsupported depth format '" + ext + "'");
    }
    return apply_depth_policy(std::move(map), path, policy);
}

void write_depth(const DepthMap& map, const fs::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".pfm") {
        write_pfm(map, path);
    } else if (ext == ".exr") {
        write_exr_depth(map, path);
    } else {
        throw ValidationError(path.string() + ": unsupported depth output format '" + ext + "'");
    }
}

void atomic_write_text(const fs::path& path, const std::string& content) {
    const fs::path tmp = temp_path_for(path);
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DecodeError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DecodeError("write failed for " + tmp.string());
        }
    }
    commit_temp(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DecodeError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string file_content_hash(const fs::path& path) {
    const std::string bytes = read_text(path);
    const std::uint64_t hash = fnv1a(bytes);
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(out);
}

} // namespace aqua
