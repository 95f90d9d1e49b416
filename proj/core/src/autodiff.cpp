// Copyright 2026 The RUAS Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ruas/autodiff.hpp"

#include <cmath>
#include <utility>

#include "kernels.hpp"
#include "ruas/error.hpp"

namespace ruas {

namespace k = kernels;

Tape::Id Tape::push(Tensor value, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), Tensor(), std::move(back)});
  Id id = static_cast<Id>(nodes_.size() - 1);
  nodes_.back().grad = Tensor(nodes_.back().value.dims());
  return id;
}

Tape::Id Tape::leaf(Tensor v) { return push(std::move(v), nullptr); }

void Tape::backward(Id root) {
  if (ran_backward_) throw std::logic_error("Tape::backward called twice");
  ran_backward_ = true;
  if (value(root).size() != 1) throw DimensionError("Tape::backward: root must be scalar");
  grad_mut(root)[0] = 1.0;
  // Creation order is a topological order, so a reverse sweep suffices.
  for (size_t i = nodes_.size(); i-- > 0;) {
    if (nodes_[i].back) nodes_[i].back(*this);
  }
}

Tape::Id Tape::add(Id a, Id b) {
  check_same_shape(value(a), value(b), "Tape::add");
  Tensor out = value(a);
  out.axpy(1.0, value(b));
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [a, b, self](Tape& t) {
    t.grad_mut(a).axpy(1.0, t.grad(self));
    t.grad_mut(b).axpy(1.0, t.grad(self));
  });
}

Tape::Id Tape::sub(Id a, Id b) {
  check_same_shape(value(a), value(b), "Tape::sub");
  Tensor out = value(a);
  out.axpy(-1.0, value(b));
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [a, b, self](Tape& t) {
    t.grad_mut(a).axpy(1.0, t.grad(self));
    t.grad_mut(b).axpy(-1.0, t.grad(self));
  });
}

Tape::Id Tape::mul(Id a, Id b) {
  check_same_shape(value(a), value(b), "Tape::mul");
  Tensor out = value(a);
  const Tensor& vb = value(b);
  for (size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [a, b, self](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& va = t.value(a);
    const Tensor& vb2 = t.value(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * vb2[i];
      gb[i] += g[i] * va[i];
    }
  });
}

Tape::Id Tape::scale(Id a, double s) {
  Tensor out = value(a);
  out.scale(s);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [a, s, self](Tape& t) { t.grad_mut(a).axpy(s, t.grad(self)); });
}

Tape::Id Tape::add_const(Id a, double s) {
  Tensor out = value(a);
  for (size_t i = 0; i < out.size(); ++i) out[i] += s;
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [a, self](Tape& t) { t.grad_mut(a).axpy(1.0, t.grad(self)); });
}

Tape::Id Tape::abs(Id a) {
  Tensor out = value(a);
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(out[i]);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [a, self](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& v = t.value(a);
    Tensor& ga = t.grad_mut(a);
    for (size_t i = 0; i < g.size(); ++i) {
      if (v[i] > 0.0)
        ga[i] += g[i];
      else if (v[i] < 0.0)
        ga[i] -= g[i];
    }
  });
}

Tape::Id Tape::div_eps(Id num, Id den, double eps) {
  check_same_shape(value(num), value(den), "Tape::div_eps");
  Tensor out = value(num);
  const Tensor& d = value(den);
  for (size_t i = 0; i < out.size(); ++i) out[i] /= (d[i] + eps);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [num, den, eps, self](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& n = t.value(num);
    const Tensor& d2 = t.value(den);
    Tensor& gn = t.grad_mut(num);
    Tensor& gd = t.grad_mut(den);
    for (size_t i = 0; i < g.size(); ++i) {
      const double inv = 1.0 / (d2[i] + eps);
      gn[i] += g[i] * inv;
      gd[i] -= g[i] * n[i] * inv * inv;
    }
  });
}

Tape::Id Tape::conv2d(Id x, Id w, Id b, int dilation) {
  Tensor out = k::conv2d(value(x), value(w), value(b), dilation);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, w, b, dilation, self](Tape& t) {
    k::conv2d_backward(t.value(x), t.value(w), t.grad(self), dilation, &t.grad_mut(x),
                       &t.grad_mut(w), &t.grad_mut(b));
  });
}

Tape::Id Tape::leaky_relu(Id x, double slope) {
  Tensor out = k::leaky_relu(value(x), slope);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, slope, self](Tape& t) {
    k::leaky_relu_backward(t.value(x), t.grad(self), slope, &t.grad_mut(x));
  });
}

Tape::Id Tape::scaled_sigmoid(Id x, double gain, double center) {
  Tensor out = k::scaled_sigmoid(value(x), gain, center);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, gain, self](Tape& t) {
    k::scaled_sigmoid_backward(t.value(self), t.grad(self), gain, &t.grad_mut(x));
  });
}

Tape::Id Tape::clamp(Id x, double lo, double hi) {
  Tensor out = k::clamp(value(x), lo, hi);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, lo, hi, self](Tape& t) {
    k::clamp_backward(t.value(x), t.grad(self), lo, hi, &t.grad_mut(x));
  });
}

Tape::Id Tape::window_channel_max(Id x, int window) {
  std::vector<uint32_t> argmax;
  Tensor out = k::window_channel_max(value(x), window, &argmax);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, argmax = std::move(argmax), self](Tape& t) {
    k::window_channel_max_backward(t.grad(self), argmax, &t.grad_mut(x));
  });
}

Tape::Id Tape::channel_mean(Id x) {
  const int c = value(x).dim(2);
  Tensor out = k::channel_mean(value(x));
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, c, self](Tape& t) {
    k::channel_mean_backward(t.grad(self), c, &t.grad_mut(x));
  });
}

Tape::Id Tape::div_broadcast(Id num, Id den) {
  Tensor out = k::div_broadcast(value(num), value(den));
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [num, den, self](Tape& t) {
    k::div_broadcast_backward(t.value(num), t.value(den), t.grad(self), &t.grad_mut(num),
                              &t.grad_mut(den));
  });
}

Tape::Id Tape::diff_x(Id x) {
  Tensor out = k::diff_x(value(x));
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, self](Tape& t) { k::diff_x_backward(t.grad(self), &t.grad_mut(x)); });
}

Tape::Id Tape::diff_y(Id x) {
  Tensor out = k::diff_y(value(x));
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, self](Tape& t) { k::diff_y_backward(t.grad(self), &t.grad_mut(x)); });
}

Tape::Id Tape::gauss_window_sum(Id x, int window, double sigma) {
  Tensor out = k::gauss_window_sum(value(x), window, sigma);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, window, sigma, self](Tape& t) {
    k::gauss_window_sum_backward(t.grad(self), window, sigma, &t.grad_mut(x));
  });
}

Tape::Id Tape::sum(Id x) {
  Tensor out = Tensor::scalar(value(x).sum());
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [x, self](Tape& t) {
    const double g = t.grad(self)[0];
    Tensor& gx = t.grad_mut(x);
    for (size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Tape::Id Tape::half_sum_sq_diff(Id a, Id b) {
  check_same_shape(value(a), value(b), "Tape::half_sum_sq_diff");
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  double s = 0.0;
  for (size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    s += d * d;
  }
  Tensor out = Tensor::scalar(0.5 * s);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [a, b, self](Tape& t) {
    const double g = t.grad(self)[0];
    const Tensor& va2 = t.value(a);
    const Tensor& vb2 = t.value(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (size_t i = 0; i < va2.size(); ++i) {
      const double d = g * (va2[i] - vb2[i]);
      ga[i] += d;
      gb[i] -= d;
    }
  });
}

Tape::Id Tape::row(Id matrix, int r) {
  const Tensor& m = value(matrix);
  if (m.rank() != 2) throw DimensionError("Tape::row: expects a rank-2 tensor");
  const int n = m.dim(1);
  Tensor out({n});
  for (int j = 0; j < n; ++j) out[static_cast<size_t>(j)] = m[static_cast<size_t>(r) * n + j];
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [matrix, r, n, self](Tape& t) {
    const Tensor& g = t.grad(self);
    Tensor& gm = t.grad_mut(matrix);
    for (int j = 0; j < n; ++j) gm[static_cast<size_t>(r) * n + j] += g[static_cast<size_t>(j)];
  });
}

Tape::Id Tape::softmax_vec(Id logits) {
  Tensor out = k::softmax_vec(value(logits));
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [logits, self](Tape& t) {
    k::softmax_vec_backward(t.value(self), t.grad(self), &t.grad_mut(logits));
  });
}

Tape::Id Tape::weighted_sum(Id weights, const std::vector<Id>& terms) {
  const Tensor& wv = value(weights);
  if (wv.size() != terms.size()) throw DimensionError("Tape::weighted_sum: weight count mismatch");
  Tensor out(value(terms[0]).dims());
  for (size_t i = 0; i < terms.size(); ++i) out.axpy(wv[i], value(terms[i]));
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), [weights, terms, self](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& w2 = t.value(weights);
    Tensor& gw = t.grad_mut(weights);
    for (size_t i = 0; i < terms.size(); ++i) {
      t.grad_mut(terms[i]).axpy(w2[i], g);
      const Tensor& ti = t.value(terms[i]);
      double dot = 0.0;
      for (size_t j = 0; j < g.size(); ++j) dot += g[j] * ti[j];
      gw[i] += dot;
    }
  });
}

}  // namespace ruas
