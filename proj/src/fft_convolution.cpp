#include "fft_convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <new>

namespace trdma::detail {

namespace {

using cd = std::complex<double>;

// Below this kernel length the direct sum is both faster and exact.
constexpr std::size_t kDirectKernelMax = 48;

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data == nullptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    cd* complex() { return reinterpret_cast<cd*>(data); }

    fftw_complex* data;
};

struct PlanPair {
    fftw_plan forward;
    fftw_plan backward;
};

// FFTW planning is not thread-safe; execution with fftw_execute_dft is.
// Plans are created once per size, in place, on fftw_malloc'd (aligned)
// scratch, and reused for every later buffer from fftw_malloc.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    PlanPair get(std::size_t n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        FftwBuffer scratch(n);
        const int len = static_cast<int>(n);
        PlanPair pair{
            fftw_plan_dft_1d(len, scratch.data, scratch.data, FFTW_FORWARD, FFTW_ESTIMATE),
            fftw_plan_dft_1d(len, scratch.data, scratch.data, FFTW_BACKWARD, FFTW_ESTIMATE),
        };
        plans_.emplace(n, pair);
        return pair;
    }

    ~PlanCache() {
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.backward);
        }
    }

private:
    std::mutex mutex_;
    std::map<std::size_t, PlanPair> plans_;
};

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<cd> direct(std::span<const cd> a, std::span<const cd> b) {
    std::vector<cd> out(a.size() + b.size() - 1, cd{0.0, 0.0});
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cd ai = a[i];
        cd* dst = out.data() + i;
        for (std::size_t j = 0; j < b.size(); ++j) dst[j] += ai * b[j];
    }
    return out;
}

std::vector<cd> transform(std::span<const cd> a, std::span<const cd> b) {
    const std::size_t out_len = a.size() + b.size() - 1;
    const std::size_t n = next_pow2(out_len);
    const PlanPair plans = PlanCache::instance().get(n);

    FftwBuffer fa(n), fb(n);
    std::fill_n(fa.complex(), n, cd{});
    std::fill_n(fb.complex(), n, cd{});
    std::copy(a.begin(), a.end(), fa.complex());
    std::copy(b.begin(), b.end(), fb.complex());

    fftw_execute_dft(plans.forward, fa.data, fa.data);
    fftw_execute_dft(plans.forward, fb.data, fb.data);
    cd* pa = fa.complex();
    const cd* pb = fb.complex();
    for (std::size_t k = 0; k < n; ++k) pa[k] *= pb[k];
    fftw_execute_dft(plans.backward, fa.data, fa.data);

    const double scale = 1.0 / static_cast<double>(n);
    std::vector<cd> out(out_len);
    for (std::size_t k = 0; k < out_len; ++k) out[k] = pa[k] * scale;
    return out;
}

}  // namespace

std::vector<cd> linear_convolution(std::span<const cd> a, std::span<const cd> b) {
    if (std::min(a.size(), b.size()) <= kDirectKernelMax) {
        return a.size() >= b.size() ? direct(a, b) : direct(b, a);
    }
    return transform(a, b);
}

}  // namespace trdma::detail
