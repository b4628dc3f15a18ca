#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace spincharge {

using Complex = std::complex<double>;

/// Unnormalized complex DFT of fixed size backed by FFTW.
///
/// forward: X_k = Σ_j x_j e^{-2πi jk/n}; inverse: x_j = Σ_k X_k e^{+2πi jk/n}
/// (no 1/n factor). Plans use FFTW_ESTIMATE on an owned aligned buffer, so a
/// given size always runs the same code path and results are bitwise
/// reproducible. Instances are not shareable across threads; distinct
/// instances are.
class Fft {
public:
    explicit Fft(std::size_t n);
    /// Two-dimensional row-major transform of a rows×cols array.
    Fft(std::size_t rows, std::size_t cols);
    ~Fft();

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&& other) noexcept;
    Fft& operator=(Fft&& other) noexcept;

    std::size_t size() const { return size_; }

    void forward(std::span<Complex> data);
    void inverse(std::span<Complex> data);

private:
    void execute(void* plan, std::span<Complex> data);
    void release() noexcept;

    std::size_t size_ = 0;
    Complex* buffer_ = nullptr;
    void* forward_plan_ = nullptr;
    void* inverse_plan_ = nullptr;
};

} // namespace spincharge
