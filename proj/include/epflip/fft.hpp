#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>

namespace epflip {

namespace detail {

// FFTW planning is not thread-safe; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const noexcept {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

}  // namespace detail

/// Unnormalised complex DFT pair of fixed length. Plans are built with
/// FFTW_ESTIMATE so the transform is bit-reproducible from run to run, and
/// FFTW_UNALIGNED so any contiguous buffer may be passed to the const
/// execute methods concurrently.
class FourierTransform {
public:
  explicit FourierTransform(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("FourierTransform: zero length");
    auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    std::lock_guard lock(detail::fftw_planner_mutex());
    const auto len = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_.reset(fftw_plan_dft_1d(len, scratch, scratch, FFTW_FORWARD, flags));
    backward_.reset(fftw_plan_dft_1d(len, scratch, scratch, FFTW_BACKWARD, flags));
    fftw_free(scratch);
  }

  std::size_t size() const noexcept { return n_; }

  /// out[k] = sum_j in[j] exp(-2 pi i jk/n). In-place allowed.
  void forward(std::span<const std::complex<double>> in,
               std::span<std::complex<double>> out) const {
    execute(forward_.get(), in, out);
  }

  /// out[j] = sum_k in[k] exp(+2 pi i jk/n), no 1/n factor. In-place allowed.
  void backward(std::span<const std::complex<double>> in,
                std::span<std::complex<double>> out) const {
    execute(backward_.get(), in, out);
  }

private:
  void execute(fftw_plan plan, std::span<const std::complex<double>> in,
               std::span<std::complex<double>> out) const {
    if (in.size() != n_ || out.size() != n_) {
      throw std::invalid_argument("FourierTransform: length mismatch");
    }
    // Plans are in-place, so the transform always runs on `out`.
    if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
    fftw_execute_dft(plan, detail::as_fftw(out.data()), detail::as_fftw(out.data()));
  }

  std::size_t n_;
  detail::PlanHandle forward_;
  detail::PlanHandle backward_;
};

}  // namespace epflip
