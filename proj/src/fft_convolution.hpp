#pragma once

#include <complex>
#include <span>
#include <vector>

namespace trdma::detail {

// Full linear convolution, length a.size() + b.size() - 1. Picks a direct
// sum for short kernels and an FFTW-backed transform otherwise.
std::vector<std::complex<double>> linear_convolution(std::span<const std::complex<double>> a,
                                                     std::span<const std::complex<double>> b);

}  // namespace trdma::detail
