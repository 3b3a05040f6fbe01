#pragma once

#include <cstdint>

namespace gridlab::nn {

// Every heavy kernel exists twice: a plain serial reference in
// nn::serial and an OpenMP version in nn::par. The parallel loops split
// work across disjoint output elements and keep the per-element
// accumulation order of the reference, so the two produce bit-identical
// results; tests and the benchmark target rely on that.
enum class ExecMode { serial, parallel };

ExecMode exec_mode();
void set_exec_mode(ExecMode m);

#define GRIDLAB_KERNELS(DECL)                                                  \
  /* 3x3 conv, stride 1, zero-padded "same". x [n,cin,h,w], w [cout,cin,3,3] */\
  DECL(void, conv3x3_forward,                                                  \
       (const T* x, const T* w, const T* b, T* y, int n, int cin, int cout,   \
        int h, int wd))                                                        \
  DECL(void, conv3x3_dinput,                                                   \
       (const T* dy, const T* w, T* dx, int n, int cin, int cout, int h,      \
        int wd))                                                               \
  DECL(void, conv3x3_dparams,                                                  \
       (const T* dy, const T* x, T* dw, T* db, int n, int cin, int cout,      \
        int h, int wd))                                                        \
  /* 3x3 max pool, stride 2, pad 1: out dims = ceil(in/2) */                   \
  DECL(void, maxpool_forward,                                                  \
       (const T* x, T* y, std::int32_t* argmax, int n, int c, int h, int wd,  \
        int oh, int ow))                                                       \
  DECL(void, maxpool_dinput,                                                   \
       (const T* dy, const std::int32_t* argmax, T* dx, int n, int c, int h,  \
        int wd, int oh, int ow))                                               \
  /* y[i,o] = sum_k x[i,k] w[o,k] + b[o] */                                    \
  DECL(void, linear_forward,                                                   \
       (const T* x, const T* w, const T* b, T* y, int n, int in, int out))    \
  DECL(void, linear_dinput,                                                    \
       (const T* dy, const T* w, T* dx, int n, int in, int out))              \
  DECL(void, linear_dparams,                                                   \
       (const T* dy, const T* x, T* dw, T* db, int n, int in, int out))       \
  DECL(void, relu_forward, (const T* x, T* y, std::int64_t len))               \
  DECL(void, relu_dinput, (const T* y, const T* dy, T* dx, std::int64_t len)) \
  /* gates [n,4h] in (i,f,g,o) order */                                        \
  DECL(void, lstm_gate_forward,                                                \
       (const T* gates, const T* cprev, T* h, T* c, int n, int hsz))          \
  DECL(void, lstm_gate_dinput,                                                 \
       (const T* gates, const T* cprev, const T* c, const T* dh, const T* dc, \
        T* dgates, T* dcprev, int n, int hsz))                                 \
  DECL(void, log_softmax_rows, (const T* x, T* y, int n, int cols))            \
  DECL(void, log_softmax_dinput,                                               \
       (const T* y, const T* dy, T* dx, int n, int cols))

#define GRIDLAB_DECLARE(ret, name, args) \
  template <typename T>                  \
  ret name args;

namespace serial {
GRIDLAB_KERNELS(GRIDLAB_DECLARE)
}
namespace par {
GRIDLAB_KERNELS(GRIDLAB_DECLARE)
}

// Dispatch on the process-wide execution mode.
GRIDLAB_KERNELS(GRIDLAB_DECLARE)

#undef GRIDLAB_DECLARE

inline int pooled_dim(int in) { return (in + 1) / 2; }

}  // namespace gridlab::nn
