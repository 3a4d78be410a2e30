// Grayscale raster: PGM/PPM ingestion, crop/resize/flip, and extraction of the
// 8-dimensional local differential vectors from 3x3 neighborhoods.
#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lhs/util.hpp"

namespace lhs {

// Intensities are carried as real values nominally in [0, 255]; no 8-bit
// truncation happens after resize or interpolation.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // row-major

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

    double at(int row, int col) const { return data[static_cast<size_t>(row) * width + col]; }
    double& at(int row, int col) { return data[static_cast<size_t>(row) * width + col]; }
    size_t pixel_count() const { return data.size(); }
};

// Signed differences neighbor-minus-center, ordered clockwise starting at the
// top-left neighbor.
using DiffVector = std::array<double, 8>;

struct DiffSample {
    int row = 0;
    int col = 0;
    DiffVector v{};
};

enum class SamplingMode : uint32_t {
    Rectangular = 0,  // the 8 raster neighbors
    Circular = 1,     // diagonals bilinearly interpolated on the radius-1 circle
};

inline const char* to_string(SamplingMode m) {
    return m == SamplingMode::Rectangular ? "rectangular" : "circular";
}

inline SamplingMode sampling_mode_from_string(const std::string& s) {
    if (s == "rectangular" || s == "rect") return SamplingMode::Rectangular;
    if (s == "circular" || s == "circ") return SamplingMode::Circular;
    throw InvalidArgument("unknown sampling mode: " + s);
}

class ImageError : public Error {
public:
    enum class Kind { UnsupportedMagic, MalformedHeader, TruncatedPayload };
    ImageError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

namespace detail {

// Reads the next header token, skipping whitespace and '#' comment lines.
inline std::string next_header_token(std::istream& is) {
    std::string tok;
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) continue;
        break;
    }
    if (c == EOF) return tok;
    tok.push_back(static_cast<char>(c));
    while ((c = is.get()) != EOF && !std::isspace(c) && c != '#') tok.push_back(static_cast<char>(c));
    if (c == '#') {
        while ((c = is.get()) != EOF && c != '\n') {
        }
    }
    return tok;
}

inline long header_int(std::istream& is, const std::string& path, const char* field) {
    std::string tok = next_header_token(is);
    if (tok.empty())
        throw ImageError(ImageError::Kind::MalformedHeader, path + ": missing " + field + " in header");
    char* end = nullptr;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (!end || *end != '\0' || v < 0)
        throw ImageError(ImageError::Kind::MalformedHeader,
                         path + ": bad " + field + " '" + tok + "' in header");
    return v;
}

inline std::vector<double> read_ascii_samples(std::istream& is, size_t n, const std::string& path) {
    std::vector<double> out;
    out.reserve(n);
    long v;
    while (out.size() < n && is >> v) out.push_back(static_cast<double>(v));
    if (out.size() < n)
        throw ImageError(ImageError::Kind::TruncatedPayload, path + ": truncated ASCII pixel data");
    return out;
}

inline std::vector<double> read_binary_samples(std::istream& is, size_t n, long maxval,
                                               const std::string& path) {
    std::vector<double> out;
    out.reserve(n);
    // One whitespace byte separates the header from the payload; it was already
    // consumed by the maxval token reader.
    if (maxval < 256) {
        std::vector<unsigned char> buf(n);
        if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n)))
            throw ImageError(ImageError::Kind::TruncatedPayload, path + ": truncated binary pixel data");
        for (unsigned char b : buf) out.push_back(static_cast<double>(b));
    } else {
        std::vector<unsigned char> buf(2 * n);
        if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n)))
            throw ImageError(ImageError::Kind::TruncatedPayload, path + ": truncated binary pixel data");
        for (size_t i = 0; i < n; ++i)
            out.push_back(static_cast<double>(buf[2 * i] << 8 | buf[2 * i + 1]));  // big-endian per netpbm
    }
    return out;
}

}  // namespace detail

// Loads a PGM (P2/P5) or PPM (P3/P6) file. Color is converted to gray with the
// Rec.601 luma weights 0.299/0.587/0.114; a maxval other than 255 is rescaled
// linearly onto [0, 255].
inline GrayImage load_image(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open image: " + path);

    std::string magic = detail::next_header_token(is);
    if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6")
        throw ImageError(ImageError::Kind::UnsupportedMagic,
                         path + ": unsupported magic number '" + magic + "'");
    bool color = magic == "P3" || magic == "P6";
    bool binary = magic == "P5" || magic == "P6";

    long w = detail::header_int(is, path, "width");
    long h = detail::header_int(is, path, "height");
    long maxval = detail::header_int(is, path, "maxval");
    if (w <= 0 || h <= 0)
        throw ImageError(ImageError::Kind::MalformedHeader, path + ": non-positive dimensions");
    if (maxval <= 0 || maxval > 65535)
        throw ImageError(ImageError::Kind::MalformedHeader,
                         path + ": maxval " + std::to_string(maxval) + " out of range");

    size_t samples = static_cast<size_t>(w) * static_cast<size_t>(h) * (color ? 3 : 1);
    std::vector<double> raw = binary ? detail::read_binary_samples(is, samples, maxval, path)
                                     : detail::read_ascii_samples(is, samples, path);

    if (maxval != 255) {
        double scale = 255.0 / static_cast<double>(maxval);
        for (double& v : raw) v *= scale;
    }

    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    if (color) {
        for (size_t i = 0; i < img.pixel_count(); ++i)
            img.data[i] = 0.299 * raw[3 * i] + 0.587 * raw[3 * i + 1] + 0.114 * raw[3 * i + 2];
    } else {
        img.data = std::move(raw);
    }
    return img;
}

// Writes an 8-bit PGM, rounding and clamping intensities to [0, 255].
inline void save_pgm(const GrayImage& img, const std::string& path, bool binary = true) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << (binary ? "P5" : "P2") << "\n" << img.width << " " << img.height << "\n255\n";
    if (binary) {
        std::vector<unsigned char> buf(img.pixel_count());
        for (size_t i = 0; i < buf.size(); ++i) {
            double v = std::lround(img.data[i]);
            buf[i] = static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
        os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    } else {
        for (int r = 0; r < img.height; ++r) {
            for (int c = 0; c < img.width; ++c) {
                long v = std::lround(img.at(r, c));
                os << (v < 0 ? 0 : (v > 255 ? 255 : v)) << (c + 1 == img.width ? '\n' : ' ');
            }
        }
    }
    if (!os) throw IoError("write failed: " + path);
}

// Sub-image [left, right) x [top, bottom); the source is untouched.
inline GrayImage crop(const GrayImage& img, int left, int top, int right, int bottom) {
    if (left < 0 || top < 0 || left >= right || top >= bottom || right > img.width ||
        bottom > img.height)
        throw InvalidArgument("crop ROI (" + std::to_string(left) + "," + std::to_string(top) + "," +
                              std::to_string(right) + "," + std::to_string(bottom) +
                              ") out of bounds for " + std::to_string(img.width) + "x" +
                              std::to_string(img.height));
    GrayImage out(right - left, bottom - top);
    for (int r = 0; r < out.height; ++r)
        for (int c = 0; c < out.width; ++c) out.at(r, c) = img.at(top + r, left + c);
    return out;
}

// Corner-aligned bilinear resampling. Identity dimensions reproduce the input
// bit for bit.
inline GrayImage resize(const GrayImage& img, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1) throw InvalidArgument("resize target must be at least 1x1");
    if (img.width < 1 || img.height < 1) throw InvalidArgument("resize of empty image");
    GrayImage out(new_width, new_height);
    auto src_coord = [](int i, int n_out, int n_in) {
        if (n_out == 1) return 0.5 * (n_in - 1);
        return static_cast<double>(i) * (n_in - 1) / (n_out - 1);
    };
    for (int r = 0; r < new_height; ++r) {
        double sy = src_coord(r, new_height, img.height);
        int y0 = static_cast<int>(sy);
        if (y0 > img.height - 2) y0 = img.height < 2 ? 0 : img.height - 2;
        double fy = sy - y0;
        int y1 = img.height < 2 ? y0 : y0 + 1;
        for (int c = 0; c < new_width; ++c) {
            double sx = src_coord(c, new_width, img.width);
            int x0 = static_cast<int>(sx);
            if (x0 > img.width - 2) x0 = img.width < 2 ? 0 : img.width - 2;
            double fx = sx - x0;
            int x1 = img.width < 2 ? x0 : x0 + 1;
            double top = img.at(y0, x0) + fx * (img.at(y0, x1) - img.at(y0, x0));
            double bot = img.at(y1, x0) + fx * (img.at(y1, x1) - img.at(y1, x0));
            out.at(r, c) = top + fy * (bot - top);
        }
    }
    return out;
}

inline GrayImage hflip(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) out.at(r, c) = img.at(r, img.width - 1 - c);
    return out;
}

namespace detail {

// Clockwise from the top-left neighbor.
inline constexpr int kNbrRow[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
inline constexpr int kNbrCol[8] = {-1, 0, 1, 1, 1, 0, -1, -1};

// Bilinear weights for a diagonal sample on the unit circle. With
// t = 1/sqrt(2), the sample at offset (sr*t, sc*t) interpolates the center,
// the two axis neighbors and the diagonal neighbor with weights (1-t)^2,
// t(1-t), t(1-t) and t^2. The center term cancels in differential form, so a
// diagonal difference is a weighted sum of plain raster differences; that form
// is exactly invariant to intensity shifts.
inline constexpr double kCircT = 0.70710678118654752440;  // 1/sqrt(2)
inline constexpr double kCircWDiag = kCircT * kCircT;     // 0.5
inline constexpr double kCircWAxis = kCircT * (1.0 - kCircT);

}  // namespace detail

// One DiffVector per interior pixel (1-pixel border excluded), in row-major
// pixel order.
inline std::vector<DiffSample> extract_diff_vectors(const GrayImage& img, SamplingMode mode) {
    if (img.width < 3 || img.height < 3)
        throw InvalidArgument("image must be at least 3x3 for sampling, got " +
                              std::to_string(img.width) + "x" + std::to_string(img.height));
    std::vector<DiffSample> out;
    out.reserve(static_cast<size_t>(img.width - 2) * static_cast<size_t>(img.height - 2));
    for (int r = 1; r + 1 < img.height; ++r) {
        for (int c = 1; c + 1 < img.width; ++c) {
            DiffSample s;
            s.row = r;
            s.col = c;
            double center = img.at(r, c);
            if (mode == SamplingMode::Rectangular) {
                for (int k = 0; k < 8; ++k)
                    s.v[k] = img.at(r + detail::kNbrRow[k], c + detail::kNbrCol[k]) - center;
            } else {
                for (int k = 1; k < 8; k += 2)  // axis-aligned samples are shared with rectangular
                    s.v[k] = img.at(r + detail::kNbrRow[k], c + detail::kNbrCol[k]) - center;
                for (int k = 0; k < 8; k += 2) {
                    int sr = detail::kNbrRow[k];
                    int sc = detail::kNbrCol[k];
                    double d_diag = img.at(r + sr, c + sc) - center;
                    double d_v = img.at(r + sr, c) - center;
                    double d_h = img.at(r, c + sc) - center;
                    s.v[k] = detail::kCircWDiag * d_diag + detail::kCircWAxis * (d_v + d_h);
                }
            }
            out.push_back(s);
        }
    }
    return out;
}

// Appends only the DiffVectors (no coordinates); used by the feature sampler.
inline void append_diff_vectors(const GrayImage& img, SamplingMode mode,
                                std::vector<DiffVector>& out) {
    for (const DiffSample& s : extract_diff_vectors(img, mode)) out.push_back(s.v);
}

struct GridSpec {
    int rows = 0;
    int cols = 0;
    bool enabled() const { return rows > 0 && cols > 0; }
    int cells() const { return enabled() ? rows * cols : 1; }
};

inline GridSpec grid_from_string(const std::string& s) {
    if (s.empty() || s == "none") return {};
    auto x = s.find('x');
    if (x == std::string::npos) throw InvalidArgument("grid must look like ROWSxCOLS, got: " + s);
    int r = std::stoi(s.substr(0, x));
    int c = std::stoi(s.substr(x + 1));
    if (r < 1 || c < 1) throw InvalidArgument("grid cells must be positive, got: " + s);
    return {r, c};
}

// Splits the image into rows x cols cells. An image not divisible by the grid
// is first center-cropped to the largest divisible extent.
inline std::vector<GrayImage> grid_cells(const GrayImage& img, const GridSpec& grid) {
    if (!grid.enabled()) return {img};
    int ch = img.height / grid.rows;
    int cw = img.width / grid.cols;
    if (ch < 3 || cw < 3)
        throw InvalidArgument("grid " + std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                              " leaves cells smaller than 3x3 on a " + std::to_string(img.width) +
                              "x" + std::to_string(img.height) + " image");
    int top = (img.height - ch * grid.rows) / 2;
    int left = (img.width - cw * grid.cols) / 2;
    std::vector<GrayImage> cells;
    cells.reserve(static_cast<size_t>(grid.rows) * grid.cols);
    for (int gr = 0; gr < grid.rows; ++gr)
        for (int gc = 0; gc < grid.cols; ++gc)
            cells.push_back(crop(img, left + gc * cw, top + gr * ch, left + (gc + 1) * cw,
                                 top + (gr + 1) * ch));
    return cells;
}

}  // namespace lhs
