// OpenMP kernels. Threads split disjoint output elements; within each
// output the accumulation order matches the serial reference exactly, so
// outputs are bit-identical to nn::serial regardless of thread count.
// The `if` clauses skip the fork for workloads too small to pay for it.

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridlab/kernels.hpp"

namespace gridlab::nn::par {

namespace {
constexpr std::int64_t kForkThreshold = 1 << 14;  // flops-ish
}

template <typename T>
void conv3x3_forward(const T* x, const T* w, const T* b, T* y, int n, int cin,
                     int cout, int h, int wd) {
  const std::int64_t plane = static_cast<std::int64_t>(h) * wd;
  const std::int64_t work = static_cast<std::int64_t>(n) * cout * cin * plane * 9;
#pragma omp parallel for collapse(2) schedule(static) if (work > kForkThreshold)
  for (int im = 0; im < n; ++im) {
    for (int oc = 0; oc < cout; ++oc) {
      T* yp = y + (static_cast<std::int64_t>(im) * cout + oc) * plane;
      for (std::int64_t i = 0; i < plane; ++i) yp[i] = b[oc];
      for (int ic = 0; ic < cin; ++ic) {
        const T* xp = x + (static_cast<std::int64_t>(im) * cin + ic) * plane;
        const T* wp = w + (static_cast<std::int64_t>(oc) * cin + ic) * 9;
        for (int ki = 0; ki < 3; ++ki) {
          const int di = ki - 1;
          for (int kj = 0; kj < 3; ++kj) {
            const int dj = kj - 1;
            const T wv = wp[ki * 3 + kj];
            const int i0 = std::max(0, -di), i1 = std::min(h, h - di);
            const int j0 = std::max(0, -dj), j1 = std::min(wd, wd - dj);
            for (int i = i0; i < i1; ++i) {
              const T* xrow = xp + static_cast<std::int64_t>(i + di) * wd + dj;
              T* yrow = yp + static_cast<std::int64_t>(i) * wd;
              for (int j = j0; j < j1; ++j) yrow[j] += wv * xrow[j];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv3x3_dinput(const T* dy, const T* w, T* dx, int n, int cin, int cout,
                    int h, int wd) {
  const std::int64_t plane = static_cast<std::int64_t>(h) * wd;
  const std::int64_t work = static_cast<std::int64_t>(n) * cout * cin * plane * 9;
#pragma omp parallel for collapse(2) schedule(static) if (work > kForkThreshold)
  for (int im = 0; im < n; ++im) {
    for (int ic = 0; ic < cin; ++ic) {
      T* dxp = dx + (static_cast<std::int64_t>(im) * cin + ic) * plane;
      for (int oc = 0; oc < cout; ++oc) {
        const T* dyp = dy + (static_cast<std::int64_t>(im) * cout + oc) * plane;
        const T* wp = w + (static_cast<std::int64_t>(oc) * cin + ic) * 9;
        for (int ki = 0; ki < 3; ++ki) {
          const int di = ki - 1;
          for (int kj = 0; kj < 3; ++kj) {
            const int dj = kj - 1;
            const T wv = wp[ki * 3 + kj];
            const int i0 = std::max(0, di), i1 = std::min(h, h + di);
            const int j0 = std::max(0, dj), j1 = std::min(wd, wd + dj);
            for (int i = i0; i < i1; ++i) {
              T* dxrow = dxp + static_cast<std::int64_t>(i) * wd;
              const T* dyrow = dyp + static_cast<std::int64_t>(i - di) * wd - dj;
              for (int j = j0; j < j1; ++j) dxrow[j] += wv * dyrow[j];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv3x3_dparams(const T* dy, const T* x, T* dw, T* db, int n, int cin,
                     int cout, int h, int wd) {
  const std::int64_t plane = static_cast<std::int64_t>(h) * wd;
  const std::int64_t work = static_cast<std::int64_t>(n) * cout * cin * plane * 9;
#pragma omp parallel for schedule(static) if (work > kForkThreshold)
  for (int oc = 0; oc < cout; ++oc) {
    for (int im = 0; im < n; ++im) {
      const T* dyp = dy + (static_cast<std::int64_t>(im) * cout + oc) * plane;
      T dbacc = T(0);
      for (std::int64_t i = 0; i < plane; ++i) dbacc += dyp[i];
      db[oc] += dbacc;
      for (int ic = 0; ic < cin; ++ic) {
        const T* xp = x + (static_cast<std::int64_t>(im) * cin + ic) * plane;
        T acc[9] = {T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0)};
        for (int i = 0; i < h; ++i) {
          for (int j = 0; j < wd; ++j) {
            const T d = dyp[static_cast<std::int64_t>(i) * wd + j];
            for (int ki = 0; ki < 3; ++ki) {
              const int si = i + ki - 1;
              if (si < 0 || si >= h) continue;
              const T* xrow = xp + static_cast<std::int64_t>(si) * wd;
              for (int kj = 0; kj < 3; ++kj) {
                const int sj = j + kj - 1;
                if (sj < 0 || sj >= wd) continue;
                acc[ki * 3 + kj] += d * xrow[sj];
              }
            }
          }
        }
        T* wp = dw + (static_cast<std::int64_t>(oc) * cin + ic) * 9;
        for (int k = 0; k < 9; ++k) wp[k] += acc[k];
      }
    }
  }
}

template <typename T>
void maxpool_forward(const T* x, T* y, std::int32_t* argmax, int n, int c,
                     int h, int wd, int oh, int ow) {
  const std::int64_t plane = static_cast<std::int64_t>(h) * wd;
  const std::int64_t oplane = static_cast<std::int64_t>(oh) * ow;
  const std::int64_t work = static_cast<std::int64_t>(n) * c * oplane * 9;
#pragma omp parallel for collapse(2) schedule(static) if (work > kForkThreshold)
  for (int im = 0; im < n; ++im) {
    for (int ch = 0; ch < c; ++ch) {
      const T* xp = x + (static_cast<std::int64_t>(im) * c + ch) * plane;
      T* yp = y + (static_cast<std::int64_t>(im) * c + ch) * oplane;
      std::int32_t* ap = argmax + (static_cast<std::int64_t>(im) * c + ch) * oplane;
      for (int oi = 0; oi < oh; ++oi) {
        for (int oj = 0; oj < ow; ++oj) {
          T best = -std::numeric_limits<T>::infinity();
          std::int32_t bestidx = -1;
          for (int ki = 0; ki < 3; ++ki) {
            const int i = oi * 2 - 1 + ki;
            if (i < 0 || i >= h) continue;
            for (int kj = 0; kj < 3; ++kj) {
              const int j = oj * 2 - 1 + kj;
              if (j < 0 || j >= wd) continue;
              const T v = xp[static_cast<std::int64_t>(i) * wd + j];
              if (v > best) {
                best = v;
                bestidx = static_cast<std::int32_t>(i * wd + j);
              }
            }
          }
          yp[static_cast<std::int64_t>(oi) * ow + oj] = best;
          ap[static_cast<std::int64_t>(oi) * ow + oj] = bestidx;
        }
      }
    }
  }
}

template <typename T>
void maxpool_dinput(const T* dy, const std::int32_t* argmax, T* dx, int n,
                    int c, int h, int wd, int oh, int ow) {
  const std::int64_t plane = static_cast<std::int64_t>(h) * wd;
  const std::int64_t oplane = static_cast<std::int64_t>(oh) * ow;
  const std::int64_t work = static_cast<std::int64_t>(n) * c * oplane;
#pragma omp parallel for collapse(2) schedule(static) if (work > kForkThreshold)
  for (int im = 0; im < n; ++im) {
    for (int ch = 0; ch < c; ++ch) {
      const T* dyp = dy + (static_cast<std::int64_t>(im) * c + ch) * oplane;
      const std::int32_t* ap =
          argmax + (static_cast<std::int64_t>(im) * c + ch) * oplane;
      T* dxp = dx + (static_cast<std::int64_t>(im) * c + ch) * plane;
      for (std::int64_t k = 0; k < oplane; ++k) dxp[ap[k]] += dyp[k];
    }
  }
}

template <typename T>
void linear_forward(const T* x, const T* w, const T* b, T* y, int n, int in,
                    int out) {
  const std::int64_t work = static_cast<std::int64_t>(n) * in * out;
#pragma omp parallel for collapse(2) schedule(static) if (work > kForkThreshold)
  for (int i = 0; i < n; ++i) {
    for (int o = 0; o < out; ++o) {
      const T* xr = x + static_cast<std::int64_t>(i) * in;
      const T* wr = w + static_cast<std::int64_t>(o) * in;
      T acc = b[o];
      for (int k = 0; k < in; ++k) acc += xr[k] * wr[k];
      y[static_cast<std::int64_t>(i) * out + o] = acc;
    }
  }
}

template <typename T>
void linear_dinput(const T* dy, const T* w, T* dx, int n, int in, int out) {
  const std::int64_t work = static_cast<std::int64_t>(n) * in * out;
#pragma omp parallel for schedule(static) if (work > kForkThreshold)
  for (int i = 0; i < n; ++i) {
    T* dxr = dx + static_cast<std::int64_t>(i) * in;
    const T* dyr = dy + static_cast<std::int64_t>(i) * out;
    for (int o = 0; o < out; ++o) {
      const T g = dyr[o];
      const T* wr = w + static_cast<std::int64_t>(o) * in;
      for (int k = 0; k < in; ++k) dxr[k] += g * wr[k];
    }
  }
}

template <typename T>
void linear_dparams(const T* dy, const T* x, T* dw, T* db, int n, int in,
                    int out) {
  const std::int64_t work = static_cast<std::int64_t>(n) * in * out;
#pragma omp parallel for schedule(static) if (work > kForkThreshold)
  for (int o = 0; o < out; ++o) {
    T* dwr = dw + static_cast<std::int64_t>(o) * in;
    T dbacc = T(0);
    for (int i = 0; i < n; ++i) {
      const T g = dy[static_cast<std::int64_t>(i) * out + o];
      dbacc += g;
      const T* xr = x + static_cast<std::int64_t>(i) * in;
      for (int k = 0; k < in; ++k) dwr[k] += g * xr[k];
    }
    db[o] += dbacc;
  }
}

template <typename T>
void relu_forward(const T* x, T* y, std::int64_t len) {
#pragma omp parallel for schedule(static) if (len > kForkThreshold)
  for (std::int64_t i = 0; i < len; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_dinput(const T* y, const T* dy, T* dx, std::int64_t len) {
#pragma omp parallel for schedule(static) if (len > kForkThreshold)
  for (std::int64_t i = 0; i < len; ++i)
    if (y[i] > T(0)) dx[i] += dy[i];
}

template <typename T>
void lstm_gate_forward(const T* gates, const T* cprev, T* h, T* c, int n,
                       int hsz) {
  const std::int64_t work = static_cast<std::int64_t>(n) * hsz * 8;
#pragma omp parallel for schedule(static) if (work > kForkThreshold)
  for (int r = 0; r < n; ++r) {
    const T* g = gates + static_cast<std::int64_t>(r) * 4 * hsz;
    const T* cp = cprev + static_cast<std::int64_t>(r) * hsz;
    T* hr = h + static_cast<std::int64_t>(r) * hsz;
    T* cr = c + static_cast<std::int64_t>(r) * hsz;
    for (int u = 0; u < hsz; ++u) {
      const T ig = T(1) / (T(1) + std::exp(-g[u]));
      const T fg = T(1) / (T(1) + std::exp(-g[hsz + u]));
      const T gg = std::tanh(g[2 * hsz + u]);
      const T og = T(1) / (T(1) + std::exp(-g[3 * hsz + u]));
      const T cv = fg * cp[u] + ig * gg;
      cr[u] = cv;
      hr[u] = og * std::tanh(cv);
    }
  }
}

template <typename T>
void lstm_gate_dinput(const T* gates, const T* cprev, const T* c, const T* dh,
                      const T* dc, T* dgates, T* dcprev, int n, int hsz) {
  const std::int64_t work = static_cast<std::int64_t>(n) * hsz * 16;
#pragma omp parallel for schedule(static) if (work > kForkThreshold)
  for (int r = 0; r < n; ++r) {
    const T* g = gates + static_cast<std::int64_t>(r) * 4 * hsz;
    const T* cp = cprev + static_cast<std::int64_t>(r) * hsz;
    const T* cr = c + static_cast<std::int64_t>(r) * hsz;
    const T* dhr = dh + static_cast<std::int64_t>(r) * hsz;
    const T* dcr = dc + static_cast<std::int64_t>(r) * hsz;
    T* dg = dgates + static_cast<std::int64_t>(r) * 4 * hsz;
    T* dcp = dcprev + static_cast<std::int64_t>(r) * hsz;
    for (int u = 0; u < hsz; ++u) {
      const T ig = T(1) / (T(1) + std::exp(-g[u]));
      const T fg = T(1) / (T(1) + std::exp(-g[hsz + u]));
      const T gg = std::tanh(g[2 * hsz + u]);
      const T og = T(1) / (T(1) + std::exp(-g[3 * hsz + u]));
      const T tc = std::tanh(cr[u]);
      const T dct = dcr[u] + dhr[u] * og * (T(1) - tc * tc);
      dg[u] += dct * gg * ig * (T(1) - ig);
      dg[hsz + u] += dct * cp[u] * fg * (T(1) - fg);
      dg[2 * hsz + u] += dct * ig * (T(1) - gg * gg);
      dg[3 * hsz + u] += dhr[u] * tc * og * (T(1) - og);
      dcp[u] += dct * fg;
    }
  }
}

template <typename T>
void log_softmax_rows(const T* x, T* y, int n, int cols) {
  const std::int64_t work = static_cast<std::int64_t>(n) * cols * 4;
#pragma omp parallel for schedule(static) if (work > kForkThreshold)
  for (int r = 0; r < n; ++r) {
    const T* xr = x + static_cast<std::int64_t>(r) * cols;
    T* yr = y + static_cast<std::int64_t>(r) * cols;
    T m = xr[0];
    for (int j = 1; j < cols; ++j) m = std::max(m, xr[j]);
    T lse = T(0);
    for (int j = 0; j < cols; ++j) lse += std::exp(xr[j] - m);
    lse = std::log(lse);
    for (int j = 0; j < cols; ++j) yr[j] = xr[j] - m - lse;
  }
}

template <typename T>
void log_softmax_dinput(const T* y, const T* dy, T* dx, int n, int cols) {
  const std::int64_t work = static_cast<std::int64_t>(n) * cols * 4;
#pragma omp parallel for schedule(static) if (work > kForkThreshold)
  for (int r = 0; r < n; ++r) {
    const T* yr = y + static_cast<std::int64_t>(r) * cols;
    const T* dyr = dy + static_cast<std::int64_t>(r) * cols;
    T* dxr = dx + static_cast<std::int64_t>(r) * cols;
    T s = T(0);
    for (int j = 0; j < cols; ++j) s += dyr[j];
    for (int j = 0; j < cols; ++j) dxr[j] += dyr[j] - std::exp(yr[j]) * s;
  }
}

#define GRIDLAB_INSTANTIATE(ret, name, args) template ret name<T> args;
#define T float
GRIDLAB_KERNELS(GRIDLAB_INSTANTIATE)
#undef T
#define T double
GRIDLAB_KERNELS(GRIDLAB_INSTANTIATE)
#undef T
#undef GRIDLAB_INSTANTIATE

}  // namespace gridlab::nn::par
