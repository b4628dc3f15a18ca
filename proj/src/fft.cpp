#include "spincharge/fft.hpp"

#include "spincharge/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <utility>

namespace spincharge {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

Fft::Fft(std::size_t n) : size_(n) {
    if (n == 0) throw DomainError("FFT size must be positive");
    std::lock_guard lock(planner_mutex());
    buffer_ = reinterpret_cast<Complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    auto* buf = reinterpret_cast<fftw_complex*>(buffer_);
    const int len = static_cast<int>(n);
    forward_plan_ = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::Fft(std::size_t rows, std::size_t cols) : size_(rows * cols) {
    if (rows == 0 || cols == 0) throw DomainError("FFT size must be positive");
    std::lock_guard lock(planner_mutex());
    buffer_ = reinterpret_cast<Complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
    auto* buf = reinterpret_cast<fftw_complex*>(buffer_);
    const int r = static_cast<int>(rows);
    const int c = static_cast<int>(cols);
    forward_plan_ = fftw_plan_dft_2d(r, c, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_2d(r, c, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() { release(); }

Fft::Fft(Fft&& other) noexcept
    : size_(std::exchange(other.size_, 0)), buffer_(std::exchange(other.buffer_, nullptr)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      inverse_plan_(std::exchange(other.inverse_plan_, nullptr)) {}

Fft& Fft::operator=(Fft&& other) noexcept {
    if (this != &other) {
        release();
        size_ = std::exchange(other.size_, 0);
        buffer_ = std::exchange(other.buffer_, nullptr);
        forward_plan_ = std::exchange(other.forward_plan_, nullptr);
        inverse_plan_ = std::exchange(other.inverse_plan_, nullptr);
    }
    return *this;
}

void Fft::release() noexcept {
    if (!buffer_) return;
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
    fftw_free(buffer_);
    buffer_ = nullptr;
}

void Fft::forward(std::span<Complex> data) { execute(forward_plan_, data); }

void Fft::inverse(std::span<Complex> data) { execute(inverse_plan_, data); }

void Fft::execute(void* plan, std::span<Complex> data) {
    if (data.size() != size_) throw DomainError("FFT input size does not match the plan");
    std::copy(data.begin(), data.end(), buffer_);
    fftw_execute(static_cast<fftw_plan>(plan));
    std::copy(buffer_, buffer_ + size_, data.begin());
}

} // namespace spincharge
