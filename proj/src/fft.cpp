#include "exdeblur/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "exdeblur/error.hpp"

namespace exdeblur {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (size, direction) and never freed.
class PlanCache {
public:
    fftw_plan get(int width, int height, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_tuple(width, height, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        const std::size_t n = static_cast<std::size_t>(width) * height;
        fftw_complex* in = fftw_alloc_complex(n);
        fftw_complex* out = fftw_alloc_complex(n);
        fftw_plan plan =
            fftw_plan_dft_2d(height, width, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        if (plan == nullptr) throw Error("FFTW failed to create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void execute(std::vector<Complex>& in, std::vector<Complex>& out, int width, int height, int sign) {
    fftw_plan plan = plan_cache().get(width, height, sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

Spectrum dft(std::span<const double> data, int width, int height) {
    if (data.size() != static_cast<std::size_t>(width) * height) {
        throw DimensionError("dft: data length does not match width*height");
    }
    std::vector<Complex> in(data.begin(), data.end());
    Spectrum s{width, height, std::vector<Complex>(in.size())};
    execute(in, s.bins, width, height, FFTW_FORWARD);
    return s;
}

Spectrum dft(const GrayImage& img) { return dft(img.data(), img.width(), img.height()); }

std::vector<double> idft_real(const Spectrum& s) {
    std::vector<Complex> in = s.bins;
    std::vector<Complex> out(in.size());
    execute(in, out, s.width, s.height, FFTW_BACKWARD);
    const double norm = 1.0 / static_cast<double>(out.size());
    std::vector<double> re(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) re[i] = out[i].real() * norm;
    return re;
}

GrayImage idft_image(const Spectrum& s) { return {s.width, s.height, idft_real(s)}; }

Spectrum filter_otf(std::span<const double> taps, int kw, int kh, int width, int height) {
    if (kw > width || kh > height) throw DimensionError("filter larger than the image");
    std::vector<double> padded(static_cast<std::size_t>(width) * height, 0.0);
    const int cx = kw / 2;
    const int cy = kh / 2;
    for (int y = 0; y < kh; ++y) {
        const int ty = ((y - cy) % height + height) % height;
        for (int x = 0; x < kw; ++x) {
            const int tx = ((x - cx) % width + width) % width;
            padded[static_cast<std::size_t>(ty) * width + tx] += taps[static_cast<std::size_t>(y) * kw + x];
        }
    }
    return dft(padded, width, height);
}

// gradient() computes I(x+1) - I(x), i.e. convolution with a filter that
// has -1 at offset 0 and +1 at offset -1.
Spectrum dx_otf(int width, int height) {
    std::vector<double> f(static_cast<std::size_t>(width) * height, 0.0);
    f[0] -= 1.0;
    f[static_cast<std::size_t>(width - 1)] += 1.0;
    return dft(f, width, height);
}

Spectrum dy_otf(int width, int height) {
    std::vector<double> f(static_cast<std::size_t>(width) * height, 0.0);
    f[0] -= 1.0;
    f[static_cast<std::size_t>(height - 1) * width] += 1.0;
    return dft(f, width, height);
}

Spectrum multiply(const Spectrum& a, const Spectrum& b, bool conj_a) {
    if (a.width != b.width || a.height != b.height) throw DimensionError("spectrum sizes differ");
    Spectrum out{a.width, a.height, std::vector<Complex>(a.bins.size())};
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        out.bins[i] = (conj_a ? std::conj(a.bins[i]) : a.bins[i]) * b.bins[i];
    }
    return out;
}

}  // namespace exdeblur
