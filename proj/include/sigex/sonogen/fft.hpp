#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sigex::sonogen {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);

/// Forward DFT, A[k] = sum_n exp(-i 2 pi k n / N) a[n], by radix-2
/// decimation in time. Throws std::length_error unless N is a power of two.
std::vector<Complex> dft(std::span<const Complex> frame);
std::vector<Complex> dft(std::span<const double> frame);

/// Inverse of dft (includes the 1/N factor).
std::vector<Complex> idft(std::span<const Complex> spectrum);

}  // namespace sigex::sonogen
