// Execution-mode dispatch for the kernel pairs.

#include "gridlab/kernels.hpp"

#include <atomic>

namespace gridlab::nn {

namespace {
std::atomic<ExecMode> g_mode{ExecMode::parallel};
}

ExecMode exec_mode() { return g_mode.load(std::memory_order_relaxed); }
void set_exec_mode(ExecMode m) { g_mode.store(m, std::memory_order_relaxed); }

#define GRIDLAB_FORWARD_ARGS_conv3x3_forward (x, w, b, y, n, cin, cout, h, wd)

#define GRIDLAB_DISPATCH(ret, name, args)                        \
  template <typename T>                                          \
  ret name args {                                                \
    if (exec_mode() == ExecMode::parallel)                       \
      par::name<T> GRIDLAB_CALLARGS_##name;                      \
    else                                                         \
      serial::name<T> GRIDLAB_CALLARGS_##name;                   \
  }

#define GRIDLAB_CALLARGS_conv3x3_forward (x, w, b, y, n, cin, cout, h, wd)
#define GRIDLAB_CALLARGS_conv3x3_dinput (dy, w, dx, n, cin, cout, h, wd)
#define GRIDLAB_CALLARGS_conv3x3_dparams (dy, x, dw, db, n, cin, cout, h, wd)
#define GRIDLAB_CALLARGS_maxpool_forward (x, y, argmax, n, c, h, wd, oh, ow)
#define GRIDLAB_CALLARGS_maxpool_dinput (dy, argmax, dx, n, c, h, wd, oh, ow)
#define GRIDLAB_CALLARGS_linear_forward (x, w, b, y, n, in, out)
#define GRIDLAB_CALLARGS_linear_dinput (dy, w, dx, n, in, out)
#define GRIDLAB_CALLARGS_linear_dparams (dy, x, dw, db, n, in, out)
#define GRIDLAB_CALLARGS_relu_forward (x, y, len)
#define GRIDLAB_CALLARGS_relu_dinput (y, dy, dx, len)
#define GRIDLAB_CALLARGS_lstm_gate_forward (gates, cprev, h, c, n, hsz)
#define GRIDLAB_CALLARGS_lstm_gate_dinput \
  (gates, cprev, c, dh, dc, dgates, dcprev, n, hsz)
#define GRIDLAB_CALLARGS_log_softmax_rows (x, y, n, cols)
#define GRIDLAB_CALLARGS_log_softmax_dinput (y, dy, dx, n, cols)

GRIDLAB_KERNELS(GRIDLAB_DISPATCH)

#undef GRIDLAB_DISPATCH

#define GRIDLAB_INSTANTIATE(ret, name, args) template ret name<T> args;
#define T float
GRIDLAB_KERNELS(GRIDLAB_INSTANTIATE)
#undef T
#define T double
GRIDLAB_KERNELS(GRIDLAB_INSTANTIATE)
#undef T
#undef GRIDLAB_INSTANTIATE

}  // namespace gridlab::nn
