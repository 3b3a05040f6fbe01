#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gridlab/kernels.hpp"
#include "gridlab/tensor.hpp"

namespace gridlab {

// Eager reverse-mode tape. Each op computes its output immediately and
// records a closure that adds into its inputs' gradients; backward() runs
// the closures in exact reverse order. Gradients accumulate additively, so
// a value consumed twice receives both contributions.
template <typename T>
class TapeT {
 public:
  using Id = int;

  Id value(TensorT<T> v, bool needs_grad = false) {
    slots_.push_back(Slot{std::move(v), TensorT<T>{}, needs_grad, false});
    return static_cast<Id>(slots_.size() - 1);
  }

  const TensorT<T>& val(Id id) const { return slots_[id].v; }

  // Gradient of a leaf/output after backward(); zeros if it never got one.
  const TensorT<T>& grad(Id id) {
    ensure_grad(id);
    return slots_[id].g;
  }

  size_t size() const { return slots_.size(); }

  void clear() {
    slots_.clear();
    back_.clear();
  }

  // ---- network ops ----

  Id conv3x3(Id x, Id w, Id b) {
    const auto& xv = slots_[x].v;
    const auto& wv = slots_[w].v;
    check(xv.rank() == 4, "conv3x3: input must be [n,c,h,w], got " + xv.shape_str());
    check(wv.rank() == 4 && wv.dim(2) == 3 && wv.dim(3) == 3,
          "conv3x3: weight must be [cout,cin,3,3], got " + wv.shape_str());
    check(wv.dim(1) == xv.dim(1), "conv3x3: channel mismatch between input " +
                                      xv.shape_str() + " and weight " + wv.shape_str());
    const int n = static_cast<int>(xv.dim(0)), cin = static_cast<int>(xv.dim(1));
    const int h = static_cast<int>(xv.dim(2)), wd = static_cast<int>(xv.dim(3));
    const int cout = static_cast<int>(wv.dim(0));
    TensorT<T> out({n, cout, h, wd});
    nn::conv3x3_forward<T>(xv.ptr(), wv.ptr(), slots_[b].v.ptr(), out.ptr(), n,
                           cin, cout, h, wd);
    const Id y = value(std::move(out), needs(x, w, b));
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, w, b, y, n, cin, cout, h, wd] {
        const auto& dy = grad_ref(y);
        if (slots_[x].needs_grad)
          nn::conv3x3_dinput<T>(dy.ptr(), slots_[w].v.ptr(), grad_ref(x).ptr(),
                                n, cin, cout, h, wd);
        if (slots_[w].needs_grad || slots_[b].needs_grad)
          nn::conv3x3_dparams<T>(dy.ptr(), slots_[x].v.ptr(), grad_ref(w).ptr(),
                                 grad_ref(b).ptr(), n, cin, cout, h, wd);
      });
    }
    return y;
  }

  Id maxpool(Id x) {
    const auto& xv = slots_[x].v;
    check(xv.rank() == 4, "maxpool: input must be [n,c,h,w], got " + xv.shape_str());
    const int n = static_cast<int>(xv.dim(0)), c = static_cast<int>(xv.dim(1));
    const int h = static_cast<int>(xv.dim(2)), wd = static_cast<int>(xv.dim(3));
    const int oh = nn::pooled_dim(h), ow = nn::pooled_dim(wd);
    TensorT<T> out({n, c, oh, ow});
    auto argmax = std::make_shared<std::vector<std::int32_t>>(out.numel());
    nn::maxpool_forward<T>(xv.ptr(), out.ptr(), argmax->data(), n, c, h, wd, oh, ow);
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, y, argmax, n, c, h, wd, oh, ow] {
        nn::maxpool_dinput<T>(grad_ref(y).ptr(), argmax->data(),
                              grad_ref(x).ptr(), n, c, h, wd, oh, ow);
      });
    }
    return y;
  }

  Id relu(Id x) {
    const auto& xv = slots_[x].v;
    TensorT<T> out(xv.shape);
    nn::relu_forward<T>(xv.ptr(), out.ptr(), xv.numel());
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, y] {
        nn::relu_dinput<T>(slots_[y].v.ptr(), grad_ref(y).ptr(),
                           grad_ref(x).ptr(), slots_[y].v.numel());
      });
    }
    return y;
  }

  Id add(Id a, Id b) {
    const auto& av = slots_[a].v;
    const auto& bv = slots_[b].v;
    check(av.shape == bv.shape, "add: shape mismatch " + av.shape_str() +
                                    " vs " + bv.shape_str());
    TensorT<T> out(av.shape);
    for (std::int64_t i = 0; i < av.numel(); ++i)
      out.data[i] = av.data[i] + bv.data[i];
    const Id y = value(std::move(out), needs(a, b));
    if (slots_[y].needs_grad) {
      back_.push_back([this, a, b, y] {
        const auto& dy = grad_ref(y);
        if (slots_[a].needs_grad) {
          auto& da = grad_ref(a);
          for (std::int64_t i = 0; i < dy.numel(); ++i) da.data[i] += dy.data[i];
        }
        if (slots_[b].needs_grad) {
          auto& db = grad_ref(b);
          for (std::int64_t i = 0; i < dy.numel(); ++i) db.data[i] += dy.data[i];
        }
      });
    }
    return y;
  }

  Id linear(Id x, Id w, Id b) {
    const auto& xv = slots_[x].v;
    const auto& wv = slots_[w].v;
    check(xv.rank() == 2, "linear: input must be [n,k], got " + xv.shape_str());
    check(wv.rank() == 2 && wv.dim(1) == xv.dim(1),
          "linear: weight " + wv.shape_str() + " does not match input " +
              xv.shape_str());
    const int n = static_cast<int>(xv.dim(0)), in = static_cast<int>(xv.dim(1));
    const int out_dim = static_cast<int>(wv.dim(0));
    TensorT<T> out({n, out_dim});
    nn::linear_forward<T>(xv.ptr(), wv.ptr(), slots_[b].v.ptr(), out.ptr(), n,
                          in, out_dim);
    const Id y = value(std::move(out), needs(x, w, b));
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, w, b, y, n, in, out_dim] {
        const auto& dy = grad_ref(y);
        if (slots_[x].needs_grad)
          nn::linear_dinput<T>(dy.ptr(), slots_[w].v.ptr(), grad_ref(x).ptr(),
                               n, in, out_dim);
        if (slots_[w].needs_grad || slots_[b].needs_grad)
          nn::linear_dparams<T>(dy.ptr(), slots_[x].v.ptr(), grad_ref(w).ptr(),
                                grad_ref(b).ptr(), n, in, out_dim);
      });
    }
    return y;
  }

  Id embedding(Id table, const std::vector<int>& ids) {
    const auto& tv = slots_[table].v;
    check(tv.rank() == 2, "embedding: table must be [v,e]");
    const std::int64_t e = tv.dim(1);
    TensorT<T> out({static_cast<std::int64_t>(ids.size()), e});
    for (size_t r = 0; r < ids.size(); ++r) {
      check(ids[r] >= 0 && ids[r] < tv.dim(0), "embedding: id out of range");
      for (std::int64_t k = 0; k < e; ++k)
        out.data[r * e + k] = tv.data[ids[r] * e + k];
    }
    const Id y = value(std::move(out), slots_[table].needs_grad);
    if (slots_[y].needs_grad) {
      auto idcopy = ids;
      back_.push_back([this, table, y, idcopy, e] {
        const auto& dy = grad_ref(y);
        auto& dt = grad_ref(table);
        for (size_t r = 0; r < idcopy.size(); ++r)
          for (std::int64_t k = 0; k < e; ++k)
            dt.data[idcopy[r] * e + k] += dy.data[r * e + k];
      });
    }
    return y;
  }

  // gates [n,4h] -> (h, c), both [n,h]
  std::pair<Id, Id> lstm_gate(Id gates, Id cprev) {
    const auto& gv = slots_[gates].v;
    const auto& cv = slots_[cprev].v;
    check(gv.rank() == 2 && cv.rank() == 2 && gv.dim(1) == 4 * cv.dim(1),
          "lstm_gate: gates " + gv.shape_str() + " vs cell " + cv.shape_str());
    const int n = static_cast<int>(gv.dim(0));
    const int hsz = static_cast<int>(cv.dim(1));
    TensorT<T> h({n, hsz}), c({n, hsz});
    nn::lstm_gate_forward<T>(gv.ptr(), cv.ptr(), h.ptr(), c.ptr(), n, hsz);
    const bool ng = needs(gates, cprev);
    const Id hid = value(std::move(h), ng);
    const Id cid = value(std::move(c), ng);
    if (ng) {
      back_.push_back([this, gates, cprev, hid, cid, n, hsz] {
        nn::lstm_gate_dinput<T>(slots_[gates].v.ptr(), slots_[cprev].v.ptr(),
                                slots_[cid].v.ptr(), grad_ref(hid).ptr(),
                                grad_ref(cid).ptr(), grad_ref(gates).ptr(),
                                grad_ref(cprev).ptr(), n, hsz);
      });
    }
    return {hid, cid};
  }

  Id log_softmax(Id x) {
    const auto& xv = slots_[x].v;
    check(xv.rank() == 2, "log_softmax: input must be [n,k]");
    const int n = static_cast<int>(xv.dim(0)), k = static_cast<int>(xv.dim(1));
    TensorT<T> out(xv.shape);
    nn::log_softmax_rows<T>(xv.ptr(), out.ptr(), n, k);
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, y, n, k] {
        nn::log_softmax_dinput<T>(slots_[y].v.ptr(), grad_ref(y).ptr(),
                                  grad_ref(x).ptr(), n, k);
      });
    }
    return y;
  }

  // ---- glue ops ----

  Id concat_cols(const std::vector<Id>& parts) {
    check(!parts.empty(), "concat_cols: empty");
    const std::int64_t n = slots_[parts[0]].v.dim(0);
    std::int64_t total = 0;
    bool ng = false;
    for (Id p : parts) {
      check(slots_[p].v.rank() == 2 && slots_[p].v.dim(0) == n,
            "concat_cols: parts must be [n,*]");
      total += slots_[p].v.dim(1);
      ng = ng || slots_[p].needs_grad;
    }
    TensorT<T> out({n, total});
    std::int64_t off = 0;
    for (Id p : parts) {
      const auto& pv = slots_[p].v;
      const std::int64_t k = pv.dim(1);
      for (std::int64_t r = 0; r < n; ++r)
        for (std::int64_t j = 0; j < k; ++j)
          out.data[r * total + off + j] = pv.data[r * k + j];
      off += k;
    }
    const Id y = value(std::move(out), ng);
    if (ng) {
      auto ps = parts;
      back_.push_back([this, ps, y, n, total] {
        const auto& dy = grad_ref(y);
        std::int64_t o = 0;
        for (Id p : ps) {
          const std::int64_t k = slots_[p].v.dim(1);
          if (slots_[p].needs_grad) {
            auto& dp = grad_ref(p);
            for (std::int64_t r = 0; r < n; ++r)
              for (std::int64_t j = 0; j < k; ++j)
                dp.data[r * k + j] += dy.data[r * total + o + j];
          }
          o += k;
        }
      });
    }
    return y;
  }

  Id concat_rows(const std::vector<Id>& parts) {
    check(!parts.empty(), "concat_rows: empty");
    const std::int64_t k = slots_[parts[0]].v.dim(1);
    std::int64_t rows = 0;
    bool ng = false;
    for (Id p : parts) {
      check(slots_[p].v.rank() == 2 && slots_[p].v.dim(1) == k,
            "concat_rows: parts must be [*,k]");
      rows += slots_[p].v.dim(0);
      ng = ng || slots_[p].needs_grad;
    }
    TensorT<T> out({rows, k});
    std::int64_t off = 0;
    for (Id p : parts) {
      const auto& pv = slots_[p].v;
      for (std::int64_t i = 0; i < pv.numel(); ++i)
        out.data[off * k + i] = pv.data[i];
      off += pv.dim(0);
    }
    const Id y = value(std::move(out), ng);
    if (ng) {
      auto ps = parts;
      back_.push_back([this, ps, y, k] {
        const auto& dy = grad_ref(y);
        std::int64_t o = 0;
        for (Id p : ps) {
          const std::int64_t r = slots_[p].v.dim(0);
          if (slots_[p].needs_grad) {
            auto& dp = grad_ref(p);
            for (std::int64_t i = 0; i < r * k; ++i)
              dp.data[i] += dy.data[o * k + i];
          }
          o += r;
        }
      });
    }
    return y;
  }

  Id slice_rows(Id x, std::int64_t row0, std::int64_t nrows) {
    const auto& xv = slots_[x].v;
    check(xv.rank() == 2 && row0 >= 0 && row0 + nrows <= xv.dim(0),
          "slice_rows: out of range");
    const std::int64_t k = xv.dim(1);
    TensorT<T> out({nrows, k});
    for (std::int64_t i = 0; i < nrows * k; ++i)
      out.data[i] = xv.data[row0 * k + i];
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, y, row0, nrows, k] {
        const auto& dy = grad_ref(y);
        auto& dx = grad_ref(x);
        for (std::int64_t i = 0; i < nrows * k; ++i)
          dx.data[row0 * k + i] += dy.data[i];
      });
    }
    return y;
  }

  Id reshape(Id x, std::vector<std::int64_t> shape) {
    const auto& xv = slots_[x].v;
    TensorT<T> out(std::move(shape), xv.data);
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, y] {
        const auto& dy = grad_ref(y);
        auto& dx = grad_ref(x);
        for (std::int64_t i = 0; i < dy.numel(); ++i) dx.data[i] += dy.data[i];
      });
    }
    return y;
  }

  // ---- loss assembly ----

  Id pick(Id x, const std::vector<std::int64_t>& cols) {
    const auto& xv = slots_[x].v;
    check(xv.rank() == 2 &&
              xv.dim(0) == static_cast<std::int64_t>(cols.size()),
          "pick: one column per row required");
    const std::int64_t k = xv.dim(1);
    TensorT<T> out({xv.dim(0)});
    for (size_t r = 0; r < cols.size(); ++r) {
      check(cols[r] >= 0 && cols[r] < k, "pick: column out of range");
      out.data[r] = xv.data[r * k + cols[r]];
    }
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      auto cc = cols;
      back_.push_back([this, x, y, cc, k] {
        const auto& dy = grad_ref(y);
        auto& dx = grad_ref(x);
        for (size_t r = 0; r < cc.size(); ++r) dx.data[r * k + cc[r]] += dy.data[r];
      });
    }
    return y;
  }

  // per-row entropy of a log-softmax output: -sum exp(lp)*lp
  Id entropy_rows(Id logp) {
    const auto& xv = slots_[logp].v;
    check(xv.rank() == 2, "entropy_rows: input must be [n,k]");
    const std::int64_t n = xv.dim(0), k = xv.dim(1);
    TensorT<T> out({n});
    for (std::int64_t r = 0; r < n; ++r) {
      T acc = T(0);
      for (std::int64_t j = 0; j < k; ++j) {
        const T lp = xv.data[r * k + j];
        acc -= std::exp(lp) * lp;
      }
      out.data[r] = acc;
    }
    const Id y = value(std::move(out), slots_[logp].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, logp, y, n, k] {
        const auto& dy = grad_ref(y);
        const auto& xv2 = slots_[logp].v;
        auto& dx = grad_ref(logp);
        for (std::int64_t r = 0; r < n; ++r)
          for (std::int64_t j = 0; j < k; ++j) {
            const T lp = xv2.data[r * k + j];
            dx.data[r * k + j] -= dy.data[r] * std::exp(lp) * (T(1) + lp);
          }
      });
    }
    return y;
  }

  Id sub_const(Id x, const std::vector<T>& c) {
    const auto& xv = slots_[x].v;
    check(xv.numel() == static_cast<std::int64_t>(c.size()),
          "sub_const: size mismatch");
    TensorT<T> out(xv.shape);
    for (std::int64_t i = 0; i < xv.numel(); ++i) out.data[i] = xv.data[i] - c[i];
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, y] {
        const auto& dy = grad_ref(y);
        auto& dx = grad_ref(x);
        for (std::int64_t i = 0; i < dy.numel(); ++i) dx.data[i] += dy.data[i];
      });
    }
    return y;
  }

  Id square(Id x) {
    const auto& xv = slots_[x].v;
    TensorT<T> out(xv.shape);
    for (std::int64_t i = 0; i < xv.numel(); ++i)
      out.data[i] = xv.data[i] * xv.data[i];
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, y] {
        const auto& dy = grad_ref(y);
        const auto& xv2 = slots_[x].v;
        auto& dx = grad_ref(x);
        for (std::int64_t i = 0; i < dy.numel(); ++i)
          dx.data[i] += T(2) * xv2.data[i] * dy.data[i];
      });
    }
    return y;
  }

  Id dot_const(Id x, const std::vector<T>& w) {
    const auto& xv = slots_[x].v;
    check(xv.numel() == static_cast<std::int64_t>(w.size()),
          "dot_const: size mismatch");
    T acc = T(0);
    for (std::int64_t i = 0; i < xv.numel(); ++i) acc += xv.data[i] * w[i];
    TensorT<T> out({1});
    out.data[0] = acc;
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      auto wc = w;
      back_.push_back([this, x, y, wc] {
        const T g = grad_ref(y).data[0];
        auto& dx = grad_ref(x);
        for (size_t i = 0; i < wc.size(); ++i) dx.data[i] += g * wc[i];
      });
    }
    return y;
  }

  Id sum(Id x) {
    const auto& xv = slots_[x].v;
    T acc = T(0);
    for (std::int64_t i = 0; i < xv.numel(); ++i) acc += xv.data[i];
    TensorT<T> out({1});
    out.data[0] = acc;
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, y] {
        const T g = grad_ref(y).data[0];
        auto& dx = grad_ref(x);
        for (std::int64_t i = 0; i < dx.numel(); ++i) dx.data[i] += g;
      });
    }
    return y;
  }

  Id scale(Id x, T a) {
    const auto& xv = slots_[x].v;
    TensorT<T> out(xv.shape);
    for (std::int64_t i = 0; i < xv.numel(); ++i) out.data[i] = a * xv.data[i];
    const Id y = value(std::move(out), slots_[x].needs_grad);
    if (slots_[y].needs_grad) {
      back_.push_back([this, x, y, a] {
        const auto& dy = grad_ref(y);
        auto& dx = grad_ref(x);
        for (std::int64_t i = 0; i < dy.numel(); ++i) dx.data[i] += a * dy.data[i];
      });
    }
    return y;
  }

  Id add_scalars(const std::vector<Id>& xs) {
    check(!xs.empty(), "add_scalars: empty");
    T acc = T(0);
    bool ng = false;
    for (Id x : xs) {
      check(slots_[x].v.numel() == 1, "add_scalars: inputs must be scalars");
      acc += slots_[x].v.data[0];
      ng = ng || slots_[x].needs_grad;
    }
    TensorT<T> out({1});
    out.data[0] = acc;
    const Id y = value(std::move(out), ng);
    if (ng) {
      auto xc = xs;
      back_.push_back([this, xc, y] {
        const T g = grad_ref(y).data[0];
        for (Id x : xc)
          if (slots_[x].needs_grad) grad_ref(x).data[0] += g;
      });
    }
    return y;
  }

  void backward(Id root) {
    check(slots_[root].v.numel() == 1, "backward: root must be a scalar");
    ensure_grad(root);
    slots_[root].g.data[0] = T(1);
    for (auto it = back_.rbegin(); it != back_.rend(); ++it) (*it)();
  }

 private:
  struct Slot {
    TensorT<T> v;
    TensorT<T> g;
    bool needs_grad = false;
    bool grad_live = false;
  };

  static void check(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
  }

  bool needs(Id a, Id b) const {
    return slots_[a].needs_grad || slots_[b].needs_grad;
  }
  bool needs(Id a, Id b, Id c) const {
    return slots_[a].needs_grad || slots_[b].needs_grad || slots_[c].needs_grad;
  }

  void ensure_grad(Id id) {
    Slot& s = slots_[id];
    if (!s.grad_live) {
      s.g = TensorT<T>(s.v.shape);
      s.grad_live = true;
    }
  }

  TensorT<T>& grad_ref(Id id) {
    ensure_grad(id);
    return slots_[id].g;
  }

  std::vector<Slot> slots_;
  std::vector<std::function<void()>> back_;
};

using Tape = TapeT<float>;

}  // namespace gridlab
