// Copyright (c) 2026 The articodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fftw3.h>

#include <complex>
#include <concepts>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace articodec::nn {

namespace detail {

// FFTW planning is not thread-safe; executing an existing plan on new
// arrays is. Plans are created once per size under a lock and reused.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

template <std::floating_point T>
struct FftwApi;

template <>
struct FftwApi<double> {
  using Plan = fftw_plan;
  using Complex = fftw_complex;
  static void* alloc(std::size_t bytes) { return fftw_malloc(bytes); }
  static void release(void* p) { fftw_free(p); }
  static Plan r2c(int n, double* in, Complex* out) {
    return fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static Plan c2r(int n, Complex* in, double* out) {
    return fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static void exec_r2c(Plan p, double* in, Complex* out) { fftw_execute_dft_r2c(p, in, out); }
  static void exec_c2r(Plan p, Complex* in, double* out) { fftw_execute_dft_c2r(p, in, out); }
};

template <>
struct FftwApi<float> {
  using Plan = fftwf_plan;
  using Complex = fftwf_complex;
  static void* alloc(std::size_t bytes) { return fftwf_malloc(bytes); }
  static void release(void* p) { fftwf_free(p); }
  static Plan r2c(int n, float* in, Complex* out) {
    return fftwf_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static Plan c2r(int n, Complex* in, float* out) {
    return fftwf_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static void exec_r2c(Plan p, float* in, Complex* out) { fftwf_execute_dft_r2c(p, in, out); }
  static void exec_c2r(Plan p, Complex* in, float* out) { fftwf_execute_dft_c2r(p, in, out); }
};

}  // namespace detail

// Real FFT of a fixed power-of-two-or-not size n with n/2+1 output bins.
// Forward is unnormalized; inverse_real is the unnormalized Hermitian
// inverse (c2r).
template <std::floating_point T>
class RealFft {
  using Api = detail::FftwApi<T>;

 public:
  explicit RealFft(int n) : n_(n) {
    std::lock_guard lock(detail::fftw_plan_mutex());
    auto& cache = plans();
    auto it = cache.find(n);
    if (it == cache.end()) {
      Buffer<T> in(n);
      Buffer<typename Api::Complex> spec(n / 2 + 1);
      Pair pair{Api::r2c(n, in.get(), spec.get()), nullptr};
      Buffer<T> out(n);
      pair.inverse = Api::c2r(n, spec.get(), out.get());
      it = cache.emplace(n, pair).first;
    }
    forward_ = it->second.forward;
    inverse_ = it->second.inverse;
  }

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  void forward(const T* in, std::complex<T>* out) const {
    Buffer<T> a(n_);
    std::copy(in, in + n_, a.get());
    Buffer<typename Api::Complex> s(bins());
    Api::exec_r2c(forward_, a.get(), s.get());
    for (int k = 0; k < bins(); ++k) out[k] = {s.get()[k][0], s.get()[k][1]};
  }

  // out[j] = sum_{k} Y_k e^{+2 pi i j k / n} over the Hermitian extension of
  // the n/2+1 supplied bins; imaginary parts at DC and Nyquist are ignored.
  void inverse_real(const std::complex<T>* in, T* out) const {
    Buffer<typename Api::Complex> s(bins());
    for (int k = 0; k < bins(); ++k) {
      s.get()[k][0] = in[k].real();
      s.get()[k][1] = in[k].imag();
    }
    Buffer<T> a(n_);
    Api::exec_c2r(inverse_, s.get(), a.get());
    std::copy(a.get(), a.get() + n_, out);
  }

 private:
  template <typename U>
  class Buffer {
   public:
    explicit Buffer(int count) : p_(static_cast<U*>(Api::alloc(sizeof(U) * count))) {}
    ~Buffer() { Api::release(p_); }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    U* get() const { return p_; }

   private:
    U* p_;
  };

  struct Pair {
    typename Api::Plan forward;
    typename Api::Plan inverse;
  };

  static std::map<int, Pair>& plans() {
    static std::map<int, Pair> cache;
    return cache;
  }

  int n_;
  typename Api::Plan forward_;
  typename Api::Plan inverse_;
};

}  // namespace articodec::nn
