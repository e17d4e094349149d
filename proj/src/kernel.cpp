#include "exdeblur/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "exdeblur/error.hpp"
#include "exdeblur/image_io.hpp"

namespace exdeblur {

BlurKernel::BlurKernel(int size, std::vector<double> data) : size_(size), data_(std::move(data)) {
    if (size <= 0 || size % 2 == 0) throw ValueError("kernel size must be odd and positive");
    if (data_.size() != static_cast<std::size_t>(size) * size) {
        throw DimensionError("kernel data length does not match size*size");
    }
    double s = 0.0;
    for (double v : data_) {
        if (!std::isfinite(v)) throw ValueError("kernel contains non-finite values");
        if (v < 0.0) throw ValueError("kernel contains negative entries");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ValueError("kernel does not sum to 1");
}

BlurKernel BlurKernel::normalized(int size, std::vector<double> data) {
    double s = 0.0;
    for (double& v : data) {
        if (!std::isfinite(v)) throw ValueError("kernel contains non-finite values");
        v = std::max(v, 0.0);
        s += v;
    }
    if (s <= 0.0) throw DegenerateInputError("kernel has no positive mass");
    for (double& v : data) v /= s;
    return {size, std::move(data)};
}

BlurKernel BlurKernel::delta(int size) {
    std::vector<double> d(static_cast<std::size_t>(size) * size, 0.0);
    d[static_cast<std::size_t>(size / 2) * size + size / 2] = 1.0;
    return {size, std::move(d)};
}

std::pair<double, double> BlurKernel::center_of_mass() const noexcept {
    double mx = 0.0, my = 0.0;
    for (int y = 0; y < size_; ++y) {
        for (int x = 0; x < size_; ++x) {
            mx += x * (*this)(x, y);
            my += y * (*this)(x, y);
        }
    }
    return {mx, my};
}

BlurKernel BlurKernel::padded(int new_size) const {
    if (new_size < size_ || new_size % 2 == 0) throw ValueError("padded size must be odd and >= size");
    const int off = (new_size - size_) / 2;
    std::vector<double> d(static_cast<std::size_t>(new_size) * new_size, 0.0);
    for (int y = 0; y < size_; ++y) {
        for (int x = 0; x < size_; ++x) {
            d[static_cast<std::size_t>(y + off) * new_size + x + off] = (*this)(x, y);
        }
    }
    return {new_size, std::move(d)};
}

BlurKernel read_kernel(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open kernel file " + path.string());
    std::string tag;
    int size = 0;
    if (!(in >> tag >> size) || tag != "KERN") {
        throw FormatError("kernel file " + path.string() + " lacks a `KERN <size>` header");
    }
    if (size <= 0 || size % 2 == 0) throw FormatError("kernel size must be odd and positive");
    std::vector<double> d(static_cast<std::size_t>(size) * size);
    for (double& v : d) {
        if (!(in >> v)) throw FormatError("kernel file " + path.string() + " is truncated");
    }
    std::string extra;
    if (in >> extra) throw FormatError("kernel file " + path.string() + " has trailing data");
    // Printed decimals may not sum to exactly 1; files that are close but
    // outside the in-memory tolerance are renormalized.
    double s = 0.0;
    for (double v : d) {
        if (v < 0.0) throw ValueError("kernel file has negative entries");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-6) throw ValueError("kernel file does not sum to 1");
    if (std::abs(s - 1.0) > 1e-9) {
        for (double& v : d) v /= s;
    }
    return {size, std::move(d)};
}

void write_kernel(const BlurKernel& k, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write kernel file " + path.string());
    out << "KERN " << k.size() << '\n';
    char buf[32];
    for (int y = 0; y < k.size(); ++y) {
        for (int x = 0; x < k.size(); ++x) {
            std::snprintf(buf, sizeof buf, "%.17g", k(x, y));
            out << (x ? " " : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing kernel file " + path.string());
}

void export_kernel_pgm(const BlurKernel& k, const std::filesystem::path& path) {
    const double peak = *std::max_element(k.data().begin(), k.data().end());
    std::vector<double> d(k.data().begin(), k.data().end());
    for (double& v : d) v = peak > 0 ? v / peak : 0.0;
    save_image(GrayImage(k.size(), k.size(), std::move(d)), path);
}

}  // namespace exdeblur
