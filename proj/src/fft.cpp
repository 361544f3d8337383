#include "pmace/fft.hpp"

#include <fftw3.h>

#include <atomic>
#include <map>
#include <mutex>

namespace pmace {

namespace {

std::atomic<uint64_t> g_fft_calls{0};

// Plans are created once per (rows, cols, sign) and reused with the
// new-array execute interface. FFTW_UNALIGNED lets them run on any buffer;
// plan creation is serialized (FFTW planning is not thread-safe), execution
// is concurrent.
class PlanCache {
public:
  fftw_plan get(int rows, int cols, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(rows, cols, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    size_t n = static_cast<size_t>(rows) * cols;
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_2d(rows, cols, in, out, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

ComplexImage transform(const ComplexImage& in, int sign) {
  if (in.empty()) throw ShapeError("fft2: empty input");
  ComplexImage out(in.rows(), in.cols());
  fftw_plan plan = cache().get(in.rows(), in.cols(), sign);
  // std::complex<double> is layout-compatible with fftw_complex.
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
  for (size_t i = 0; i < out.size(); ++i) out[i] *= scale;
  g_fft_calls.fetch_add(1, std::memory_order_relaxed);
  return out;
}

}  // namespace

ComplexImage fft2(const ComplexImage& in) { return transform(in, FFTW_FORWARD); }

ComplexImage ifft2(const ComplexImage& in) { return transform(in, FFTW_BACKWARD); }

uint64_t fft_call_count() { return g_fft_calls.load(std::memory_order_relaxed); }

void reset_fft_call_count() { g_fft_calls.store(0, std::memory_order_relaxed); }

}  // namespace pmace
