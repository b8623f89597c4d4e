// Copyright 2026 The Entrank Authors.
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

#include "entrank/encoder.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>

#include "entrank/status.h"
#include "entrank/text.h"

namespace entrank {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStddev = 0.02;
constexpr int kTensorsPerLayer = 16;

std::vector<TensorInfo> MakeLayout(const EncoderConfig &c) {
  std::vector<TensorInfo> t;
  size_t offset = 0;
  auto add = [&](std::string name, size_t rows, size_t cols) {
    t.push_back({std::move(name), offset, rows, cols});
    offset += rows * cols;
  };
  const size_t d = c.d_model, f = c.d_ff;
  add("embeddings.token", c.vocab_size, d);
  add("embeddings.position", c.max_positions, d);
  add("embeddings.segment", 2, d);
  for (int l = 0; l < c.n_layers; ++l) {
    std::string p = "layer" + std::to_string(l) + ".";
    add(p + "ln1.gamma", 1, d);
    add(p + "ln1.beta", 1, d);
    add(p + "attention.query.weight", d, d);
    add(p + "attention.query.bias", 1, d);
    add(p + "attention.key.weight", d, d);
    add(p + "attention.key.bias", 1, d);
    add(p + "attention.value.weight", d, d);
    add(p + "attention.value.bias", 1, d);
    add(p + "attention.output.weight", d, d);
    add(p + "attention.output.bias", 1, d);
    add(p + "ln2.gamma", 1, d);
    add(p + "ln2.beta", 1, d);
    add(p + "ffn.in.weight", f, d);
    add(p + "ffn.in.bias", 1, f);
    add(p + "ffn.out.weight", d, f);
    add(p + "ffn.out.bias", 1, d);
  }
  add("final_ln.gamma", 1, d);
  add("final_ln.beta", 1, d);
  add("classifier.weight", 1, d);
  add("classifier.bias", 1, 1);
  return t;
}

// Typed pointers into a parameter (or gradient) buffer laid out by
// MakeLayout().
template <typename T>
struct Params {
  struct Layer {
    T *ln1_g, *ln1_b, *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
    T *ln2_g, *ln2_b, *w1, *b1, *w2, *b2;
  };
  T *token, *position, *segment;
  std::vector<Layer> layers;
  T *lnf_g, *lnf_b, *cls_w, *cls_b;
};

template <typename T>
Params<T> Bind(const std::vector<TensorInfo> &t, T *base, int n_layers) {
  Params<T> p;
  size_t i = 0;
  auto next = [&] { return base + t[i++].offset; };
  p.token = next();
  p.position = next();
  p.segment = next();
  for (int l = 0; l < n_layers; ++l) {
    typename Params<T>::Layer L;
    L.ln1_g = next(); L.ln1_b = next();
    L.wq = next(); L.bq = next();
    L.wk = next(); L.bk = next();
    L.wv = next(); L.bv = next();
    L.wo = next(); L.bo = next();
    L.ln2_g = next(); L.ln2_b = next();
    L.w1 = next(); L.b1 = next();
    L.w2 = next(); L.b2 = next();
    p.layers.push_back(L);
  }
  p.lnf_g = next();
  p.lnf_b = next();
  p.cls_w = next();
  p.cls_b = next();
  return p;
}

// Activations kept for backward. T is double for training; GradCheck runs
// its finite differences in long double.
template <typename T>
struct LayerCache {
  std::vector<T> xhat1, rstd1, h1;
  std::vector<T> q, k, v, attn, ctx;
  std::vector<double> o_mask, f_mask;
  std::vector<T> xhat2, rstd2, h2;
  std::vector<T> u, g;
};

template <typename T>
struct Cache {
  int n = 0;
  std::vector<int> rows;  // token table row per position, -1 for entities
  std::vector<int> segments;
  std::vector<double> x0_mask;
  std::vector<LayerCache<T>> layers;
  std::vector<T> xhat_f, rstd_f, y;
  T logit = 0;
};

// out[i, o] = b[o] + sum_k in[i, k] * w[o, k]
template <typename T>
void Linear(const T *in, int n, int k, const double *w, const double *b,
            int out_dim, T *out) {
  for (int i = 0; i < n; ++i) {
    const T *x = in + static_cast<size_t>(i) * k;
    T *y = out + static_cast<size_t>(i) * out_dim;
    for (int o = 0; o < out_dim; ++o) {
      const double *wr = w + static_cast<size_t>(o) * k;
      T s = b[o];
      for (int j = 0; j < k; ++j) s += x[j] * wr[j];
      y[o] = s;
    }
  }
}

// Accumulates d_in, d_w, d_b for Linear().
void LinearBackward(const double *in, int n, int k, const double *w,
                    int out_dim, const double *d_out, double *d_in, double *d_w,
                    double *d_b) {
  for (int i = 0; i < n; ++i) {
    const double *x = in + static_cast<size_t>(i) * k;
    const double *dy = d_out + static_cast<size_t>(i) * out_dim;
    double *dx = d_in + static_cast<size_t>(i) * k;
    for (int o = 0; o < out_dim; ++o) {
      const double g = dy[o];
      if (g == 0.0) continue;
      const double *wr = w + static_cast<size_t>(o) * k;
      double *dwr = d_w + static_cast<size_t>(o) * k;
      for (int j = 0; j < k; ++j) {
        dx[j] += g * wr[j];
        dwr[j] += g * x[j];
      }
      d_b[o] += g;
    }
  }
}

template <typename T>
void LayerNorm(const T *x, int n, int d, const double *gamma,
               const double *beta, T *xhat, T *rstd, T *out) {
  for (int i = 0; i < n; ++i) {
    const T *xr = x + static_cast<size_t>(i) * d;
    T mean = 0;
    for (int j = 0; j < d; ++j) mean += xr[j];
    mean /= d;
    T var = 0;
    for (int j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= d;
    const T r = 1 / std::sqrt(var + static_cast<T>(kLayerNormEps));
    rstd[i] = r;
    for (int j = 0; j < d; ++j) {
      const T h = (xr[j] - mean) * r;
      xhat[static_cast<size_t>(i) * d + j] = h;
      out[static_cast<size_t>(i) * d + j] = gamma[j] * h + beta[j];
    }
  }
}

// Accumulates dx, d_gamma, d_beta.
void LayerNormBackward(const double *d_out, int n, int d, const double *xhat,
                       const double *rstd, const double *gamma, double *dx,
                       double *d_gamma, double *d_beta) {
  std::vector<double> dh(d);
  for (int i = 0; i < n; ++i) {
    const double *dy = d_out + static_cast<size_t>(i) * d;
    const double *xh = xhat + static_cast<size_t>(i) * d;
    double mean_dh = 0.0, mean_dh_xh = 0.0;
    for (int j = 0; j < d; ++j) {
      d_gamma[j] += dy[j] * xh[j];
      d_beta[j] += dy[j];
      dh[j] = dy[j] * gamma[j];
      mean_dh += dh[j];
      mean_dh_xh += dh[j] * xh[j];
    }
    mean_dh /= d;
    mean_dh_xh /= d;
    double *dxr = dx + static_cast<size_t>(i) * d;
    for (int j = 0; j < d; ++j) {
      dxr[j] += rstd[i] * (dh[j] - mean_dh - xh[j] * mean_dh_xh);
    }
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)

template <typename T>
T Gelu(T u) {
  return T(0.5) * u *
         (1 + std::tanh(static_cast<T>(kGeluC) * (u + T(0.044715) * u * u * u)));
}

double GeluGrad(double u) {
  const double t = std::tanh(kGeluC * (u + 0.044715 * u * u * u));
  return 0.5 * (1.0 + t) +
         0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * u * u);
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

template <typename T>
T Softplus(T z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void DropoutMask(double rate, int count, std::mt19937_64 *rng,
                 std::vector<double> *mask) {
  mask->assign(count, 1.0);
  std::bernoulli_distribution drop(rate);
  for (double &m : *mask) m = drop(*rng) ? 0.0 : 1.0 / (1.0 - rate);
}

template <typename T>
class Network {
 public:
  explicit Network(const EncoderWeights &w)
      : c_(w.config()),
        p_(Bind<const double>(w.tensors(), w.params().data(), c_.n_layers)) {}

  // Returns the logit; fills `cache` for backward and introspection.
  T Run(const ModelInput &input, const EntityVectors *entities,
        Cache<T> *cache, std::mt19937_64 *dropout_rng) const {
    const int n = static_cast<int>(input.size());
    const int d = c_.d_model;
    if (n == 0 || n > c_.max_positions) {
      throw Error(ErrorCode::kInvalid, "input length " + std::to_string(n) +
                                           " outside 1.." +
                                           std::to_string(c_.max_positions));
    }
    if (input.segment_ids.size() != input.tokens.size()) {
      throw Error(ErrorCode::kInvalid, "segment ids do not match tokens");
    }
    const bool dropout = dropout_rng != nullptr && c_.dropout > 0.0;
    cache->n = n;
    cache->rows.assign(n, -1);
    cache->segments.assign(input.segment_ids.begin(), input.segment_ids.end());
    x_.assign(static_cast<size_t>(n) * d, T(0));
    for (int i = 0; i < n; ++i) {
      const Token &t = input.tokens[i];
      const double *src;
      if (t.kind == TokenKind::kEntity) {
        std::string_view id = std::string_view(t.surface).substr(kEntityPrefix.size());
        if (entities == nullptr) {
          throw Error(ErrorCode::kMissingEmbedding,
                      "entity token without an entity vector source",
                      std::string(id));
        }
        std::span<const double> v = entities->Lookup(id);
        if (v.size() != static_cast<size_t>(d)) {
          throw Error(ErrorCode::kInvalid, "entity vector has wrong dimension",
                      std::string(id));
        }
        src = v.data();
      } else {
        if (t.id < 0 || t.id >= c_.vocab_size) {
          throw Error(ErrorCode::kInvalid,
                      "token id " + std::to_string(t.id) + " out of range");
        }
        cache->rows[i] = t.id;
        src = p_.token + static_cast<size_t>(t.id) * d;
      }
      const int seg = input.segment_ids[i];
      if (seg != 0 && seg != 1) {
        throw Error(ErrorCode::kInvalid, "segment id must be 0 or 1");
      }
      const double *pos = p_.position + static_cast<size_t>(i) * d;
      const double *sg = p_.segment + static_cast<size_t>(seg) * d;
      T *x = &x_[static_cast<size_t>(i) * d];
      for (int j = 0; j < d; ++j) x[j] = T(src[j]) + T(pos[j]) + T(sg[j]);
    }
    if (dropout) {
      DropoutMask(c_.dropout, n * d, dropout_rng, &cache->x0_mask);
      for (size_t j = 0; j < x_.size(); ++j) x_[j] *= cache->x0_mask[j];
    }

    cache->layers.resize(c_.n_layers);
    for (int l = 0; l < c_.n_layers; ++l) {
      RunLayer(p_.layers[l], n, &cache->layers[l], dropout ? dropout_rng : nullptr);
    }

    cache->xhat_f.resize(static_cast<size_t>(n) * d);
    cache->rstd_f.resize(n);
    cache->y.resize(static_cast<size_t>(n) * d);
    LayerNorm(x_.data(), n, d, p_.lnf_g, p_.lnf_b, cache->xhat_f.data(),
              cache->rstd_f.data(), cache->y.data());
    T z = p_.cls_b[0];
    for (int j = 0; j < d; ++j) z += p_.cls_w[j] * cache->y[j];
    cache->logit = z;
    return z;
  }

  // Backpropagates d loss / d logit through the cached pass.
  void Backward(const Cache<double> &cache, double d_logit, double *grad_base,
                const std::vector<TensorInfo> &tensors) const {
    Params<double> g = Bind<double>(tensors, grad_base, c_.n_layers);
    const int n = cache.n;
    const int d = c_.d_model;
    std::vector<double> dy(static_cast<size_t>(n) * d, 0.0);
    for (int j = 0; j < d; ++j) {
      g.cls_w[j] += d_logit * cache.y[j];
      dy[j] = d_logit * p_.cls_w[j];
    }
    g.cls_b[0] += d_logit;
    std::vector<double> dx(static_cast<size_t>(n) * d, 0.0);
    LayerNormBackward(dy.data(), n, d, cache.xhat_f.data(), cache.rstd_f.data(),
                      p_.lnf_g, dx.data(), g.lnf_g, g.lnf_b);
    for (int l = c_.n_layers - 1; l >= 0; --l) {
      BackwardLayer(p_.layers[l], g.layers[l], cache.layers[l], n, &dx);
    }
    if (!cache.x0_mask.empty()) {
      for (size_t j = 0; j < dx.size(); ++j) dx[j] *= cache.x0_mask[j];
    }
    for (int i = 0; i < n; ++i) {
      const double *dxr = &dx[static_cast<size_t>(i) * d];
      double *gp = g.position + static_cast<size_t>(i) * d;
      double *gs = g.segment + static_cast<size_t>(cache.segments[i]) * d;
      for (int j = 0; j < d; ++j) {
        gp[j] += dxr[j];
        gs[j] += dxr[j];
      }
      if (cache.rows[i] >= 0) {
        double *gt = g.token + static_cast<size_t>(cache.rows[i]) * d;
        for (int j = 0; j < d; ++j) gt[j] += dxr[j];
      }
    }
  }

 private:
  void RunLayer(const Params<const double>::Layer &L, int n, LayerCache<T> *lc,
                std::mt19937_64 *dropout_rng) const {
    const int d = c_.d_model, f = c_.d_ff, heads = c_.n_heads, dh = d / heads;
    const size_t nd = static_cast<size_t>(n) * d;
    lc->xhat1.resize(nd);
    lc->rstd1.resize(n);
    lc->h1.resize(nd);
    LayerNorm(x_.data(), n, d, L.ln1_g, L.ln1_b, lc->xhat1.data(),
              lc->rstd1.data(), lc->h1.data());
    lc->q.resize(nd);
    lc->k.resize(nd);
    lc->v.resize(nd);
    Linear(lc->h1.data(), n, d, L.wq, L.bq, d, lc->q.data());
    Linear(lc->h1.data(), n, d, L.wk, L.bk, d, lc->k.data());
    Linear(lc->h1.data(), n, d, L.wv, L.bv, d, lc->v.data());

    const T scale = 1 / std::sqrt(static_cast<T>(dh));
    lc->attn.assign(static_cast<size_t>(heads) * n * n, T(0));
    lc->ctx.assign(nd, T(0));
    for (int h = 0; h < heads; ++h) {
      for (int i = 0; i < n; ++i) {
        T *a = &lc->attn[(static_cast<size_t>(h) * n + i) * n];
        const T *qi = &lc->q[static_cast<size_t>(i) * d + h * dh];
        T max_s = -std::numeric_limits<T>::infinity();
        for (int j = 0; j < n; ++j) {
          const T *kj = &lc->k[static_cast<size_t>(j) * d + h * dh];
          T s = 0;
          for (int c = 0; c < dh; ++c) s += qi[c] * kj[c];
          a[j] = s * scale;
          max_s = std::max(max_s, a[j]);
        }
        T sum = 0;
        for (int j = 0; j < n; ++j) {
          a[j] = std::exp(a[j] - max_s);
          sum += a[j];
        }
        for (int j = 0; j < n; ++j) a[j] /= sum;
        T *ci = &lc->ctx[static_cast<size_t>(i) * d + h * dh];
        for (int j = 0; j < n; ++j) {
          const T *vj = &lc->v[static_cast<size_t>(j) * d + h * dh];
          for (int c = 0; c < dh; ++c) ci[c] += a[j] * vj[c];
        }
      }
    }
    tmp_.resize(nd);
    Linear(lc->ctx.data(), n, d, L.wo, L.bo, d, tmp_.data());
    if (dropout_rng) {
      DropoutMask(c_.dropout, static_cast<int>(nd), dropout_rng, &lc->o_mask);
      for (size_t j = 0; j < nd; ++j) tmp_[j] *= lc->o_mask[j];
    } else {
      lc->o_mask.clear();
    }
    for (size_t j = 0; j < nd; ++j) x_[j] += tmp_[j];

    lc->xhat2.resize(nd);
    lc->rstd2.resize(n);
    lc->h2.resize(nd);
    LayerNorm(x_.data(), n, d, L.ln2_g, L.ln2_b, lc->xhat2.data(),
              lc->rstd2.data(), lc->h2.data());
    const size_t nf = static_cast<size_t>(n) * f;
    lc->u.resize(nf);
    lc->g.resize(nf);
    Linear(lc->h2.data(), n, d, L.w1, L.b1, f, lc->u.data());
    for (size_t j = 0; j < nf; ++j) lc->g[j] = Gelu(lc->u[j]);
    Linear(lc->g.data(), n, f, L.w2, L.b2, d, tmp_.data());
    if (dropout_rng) {
      DropoutMask(c_.dropout, static_cast<int>(nd), dropout_rng, &lc->f_mask);
      for (size_t j = 0; j < nd; ++j) tmp_[j] *= lc->f_mask[j];
    } else {
      lc->f_mask.clear();
    }
    for (size_t j = 0; j < nd; ++j) x_[j] += tmp_[j];
  }

  // `dx` holds d loss / d layer output on entry and d loss / d layer input
  // on exit.
  void BackwardLayer(const Params<const double>::Layer &L,
                     const Params<double>::Layer &G,
                     const LayerCache<double> &lc,
                     int n, std::vector<double> *dx) const {
    const int d = c_.d_model, f = c_.d_ff, heads = c_.n_heads, dh = d / heads;
    const size_t nd = static_cast<size_t>(n) * d;

    // Feed-forward block: x_out = x_mid + drop(W2 gelu(W1 LN2(x_mid))).
    std::vector<double> d_f(*dx);
    if (!lc.f_mask.empty()) {
      for (size_t j = 0; j < nd; ++j) d_f[j] *= lc.f_mask[j];
    }
    std::vector<double> d_g(static_cast<size_t>(n) * f, 0.0);
    LinearBackward(lc.g.data(), n, f, L.w2, d, d_f.data(), d_g.data(), G.w2, G.b2);
    for (size_t j = 0; j < d_g.size(); ++j) d_g[j] *= GeluGrad(lc.u[j]);
    std::vector<double> d_h2(nd, 0.0);
    LinearBackward(lc.h2.data(), n, d, L.w1, f, d_g.data(), d_h2.data(), G.w1, G.b1);
    LayerNormBackward(d_h2.data(), n, d, lc.xhat2.data(), lc.rstd2.data(),
                      L.ln2_g, dx->data(), G.ln2_g, G.ln2_b);

    // Attention block: x_mid = x_in + drop(Wo attn(LN1(x_in))).
    std::vector<double> d_o(*dx);
    if (!lc.o_mask.empty()) {
      for (size_t j = 0; j < nd; ++j) d_o[j] *= lc.o_mask[j];
    }
    std::vector<double> d_ctx(nd, 0.0);
    LinearBackward(lc.ctx.data(), n, d, L.wo, d, d_o.data(), d_ctx.data(), G.wo, G.bo);

    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<double> d_q(nd, 0.0), d_k(nd, 0.0), d_v(nd, 0.0);
    std::vector<double> d_a(n);
    for (int h = 0; h < heads; ++h) {
      for (int i = 0; i < n; ++i) {
        const double *a = &lc.attn[(static_cast<size_t>(h) * n + i) * n];
        const double *dci = &d_ctx[static_cast<size_t>(i) * d + h * dh];
        double dot = 0.0;
        for (int j = 0; j < n; ++j) {
          const double *vj = &lc.v[static_cast<size_t>(j) * d + h * dh];
          double *dvj = &d_v[static_cast<size_t>(j) * d + h * dh];
          double s = 0.0;
          for (int c = 0; c < dh; ++c) {
            s += dci[c] * vj[c];
            dvj[c] += a[j] * dci[c];
          }
          d_a[j] = s;
          dot += a[j] * s;
        }
        const double *qi = &lc.q[static_cast<size_t>(i) * d + h * dh];
        double *dqi = &d_q[static_cast<size_t>(i) * d + h * dh];
        for (int j = 0; j < n; ++j) {
          const double ds = a[j] * (d_a[j] - dot) * scale;
          if (ds == 0.0) continue;
          const double *kj = &lc.k[static_cast<size_t>(j) * d + h * dh];
          double *dkj = &d_k[static_cast<size_t>(j) * d + h * dh];
          for (int c = 0; c < dh; ++c) {
            dqi[c] += ds * kj[c];
            dkj[c] += ds * qi[c];
          }
        }
      }
    }
    std::vector<double> d_h1(nd, 0.0);
    LinearBackward(lc.h1.data(), n, d, L.wq, d, d_q.data(), d_h1.data(), G.wq, G.bq);
    LinearBackward(lc.h1.data(), n, d, L.wk, d, d_k.data(), d_h1.data(), G.wk, G.bk);
    LinearBackward(lc.h1.data(), n, d, L.wv, d, d_v.data(), d_h1.data(), G.wv, G.bv);
    LayerNormBackward(d_h1.data(), n, d, lc.xhat1.data(), lc.rstd1.data(),
                      L.ln1_g, dx->data(), G.ln1_g, G.ln1_b);
  }

  const EncoderConfig &c_;
  Params<const double> p_;
  mutable std::vector<T> x_;  // residual stream
  mutable std::vector<T> tmp_;
};

double ClampProbability(double s) {
  constexpr double kLow = std::numeric_limits<double>::denorm_min();
  const double high = std::nextafter(1.0, 0.0);
  return std::clamp(s, kLow, high);
}

template <typename T>
T LossFromLogit(T z, int label) {
  return label > 0 ? Softplus(-z) : Softplus(z);
}

}  // namespace

// ---------------------------------------------------------------------------

void EncoderConfig::Validate() const {
  if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_ff <= 0 ||
      max_positions <= 0 || vocab_size <= 0) {
    throw Error(ErrorCode::kConfig, "encoder dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw Error(ErrorCode::kConfig,
                "d_model " + std::to_string(d_model) +
                    " is not divisible by n_heads " + std::to_string(n_heads));
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw Error(ErrorCode::kConfig, "dropout must be in [0, 1)");
  }
}

EncoderWeights EncoderWeights::Init(const EncoderConfig &config) {
  config.Validate();
  EncoderWeights w;
  w.config_ = config;
  w.tensors_ = MakeLayout(config);
  const TensorInfo &last = w.tensors_.back();
  w.params_.assign(last.offset + last.size(), 0.0);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, kInitStddev);
  for (const TensorInfo &t : w.tensors_) {
    double *p = w.params_.data() + t.offset;
    if (t.name.ends_with("gamma")) {
      std::fill(p, p + t.size(), 1.0);
    } else if (t.name.ends_with("bias") || t.name.ends_with("beta")) {
      std::fill(p, p + t.size(), 0.0);
    } else if (t.name.starts_with("embeddings.")) {
      for (size_t i = 0; i < t.size(); ++i) p[i] = normal(rng);
    } else {
      // Projections keep unit gain: std 1 / sqrt(fan_in).
      const double scale = 1.0 / (kInitStddev * std::sqrt(static_cast<double>(t.cols)));
      for (size_t i = 0; i < t.size(); ++i) p[i] = scale * normal(rng);
    }
  }
  return w;
}

const TensorInfo &EncoderWeights::tensor(std::string_view name) const {
  for (const TensorInfo &t : tensors_) {
    if (t.name == name) return t;
  }
  throw Error(ErrorCode::kUnknownKey, "no tensor named " + std::string(name),
              std::string(name));
}

std::span<double> EncoderWeights::Tensor(std::string_view name) {
  const TensorInfo &t = tensor(name);
  return {params_.data() + t.offset, t.size()};
}

std::span<const double> EncoderWeights::Tensor(std::string_view name) const {
  const TensorInfo &t = tensor(name);
  return {params_.data() + t.offset, t.size()};
}

Matrix EncoderWeights::TokenTable() const {
  const TensorInfo &t = tensor("embeddings.token");
  Matrix m(t.rows, t.cols);
  std::copy_n(params_.data() + t.offset, t.size(), m.data.begin());
  return m;
}

std::string EncoderWeights::Serialize() const {
  std::string out = "entrank-encoder\t1\n";
  out += "d_model\t" + std::to_string(config_.d_model) + "\n";
  out += "n_layers\t" + std::to_string(config_.n_layers) + "\n";
  out += "n_heads\t" + std::to_string(config_.n_heads) + "\n";
  out += "d_ff\t" + std::to_string(config_.d_ff) + "\n";
  out += "max_positions\t" + std::to_string(config_.max_positions) + "\n";
  out += "vocab_size\t" + std::to_string(config_.vocab_size) + "\n";
  out += "dropout\t" + FormatDouble(config_.dropout) + "\n";
  out += "seed\t" + std::to_string(config_.seed) + "\n";
  out += "tensors\t" + std::to_string(tensors_.size()) + "\n";
  for (const TensorInfo &t : tensors_) {
    out += "tensor\t" + t.name + "\t" + std::to_string(t.rows) + "\t" +
           std::to_string(t.cols) + "\n";
    const double *p = params_.data() + t.offset;
    for (size_t r = 0; r < t.rows; ++r) {
      for (size_t c = 0; c < t.cols; ++c) {
        if (c > 0) out += ' ';
        out += FormatDouble(p[r * t.cols + c]);
      }
      out += '\n';
    }
  }
  return out;
}

EncoderWeights EncoderWeights::Parse(const std::string &content,
                                     const std::string &origin) {
  std::vector<std::string_view> lines = SplitOn(content, '\n');
  size_t at = 0;
  auto fields = [&](size_t expected) {
    if (at >= lines.size()) throw ParseError(origin, at + 1, "unexpected end of file");
    auto f = SplitOn(lines[at], '\t');
    if (f.size() != expected) throw ParseError(origin, at + 1, "malformed header row");
    ++at;
    return f;
  };
  auto f = fields(2);
  if (f[0] != "entrank-encoder" || f[1] != "1") {
    throw ParseError(origin, 1, "not an encoder weights file");
  }
  EncoderConfig c;
  auto int_field = [&](std::string_view key) {
    auto row = fields(2);
    if (row[0] != key) throw ParseError(origin, at, "expected " + std::string(key));
    try {
      return ParseInt(row[1]);
    } catch (const Error &) {
      throw ParseError(origin, at, "bad value for " + std::string(key));
    }
  };
  c.d_model = static_cast<int>(int_field("d_model"));
  c.n_layers = static_cast<int>(int_field("n_layers"));
  c.n_heads = static_cast<int>(int_field("n_heads"));
  c.d_ff = static_cast<int>(int_field("d_ff"));
  c.max_positions = static_cast<int>(int_field("max_positions"));
  c.vocab_size = static_cast<int>(int_field("vocab_size"));
  {
    auto row = fields(2);
    if (row[0] != "dropout") throw ParseError(origin, at, "expected dropout");
    c.dropout = ParseDouble(row[1]);
  }
  c.seed = static_cast<uint64_t>(int_field("seed"));
  try {
    c.Validate();
  } catch (const Error &e) {
    throw ParseError(origin, at, e.what());
  }
  EncoderWeights w;
  w.config_ = c;
  w.tensors_ = MakeLayout(c);
  if (static_cast<size_t>(int_field("tensors")) != w.tensors_.size()) {
    throw ParseError(origin, at, "tensor count does not match the config");
  }
  w.params_.assign(w.tensors_.back().offset + w.tensors_.back().size(), 0.0);
  for (const TensorInfo &t : w.tensors_) {
    auto row = fields(4);
    if (row[0] != "tensor" || row[1] != t.name ||
        ParseInt(row[2]) != static_cast<long long>(t.rows) ||
        ParseInt(row[3]) != static_cast<long long>(t.cols)) {
      throw ParseError(origin, at, "expected tensor " + t.name);
    }
    double *p = w.params_.data() + t.offset;
    for (size_t r = 0; r < t.rows; ++r) {
      if (at >= lines.size()) throw ParseError(origin, at + 1, "truncated tensor");
      auto values = SplitWhitespace(lines[at]);
      if (values.size() != t.cols) throw ParseError(origin, at + 1, "row width mismatch");
      for (size_t col = 0; col < t.cols; ++col) {
        try {
          p[r * t.cols + col] = ParseDouble(values[col]);
        } catch (const Error &) {
          throw ParseError(origin, at + 1, "bad tensor value");
        }
      }
      ++at;
    }
  }
  return w;
}

EncoderWeights EncoderWeights::Load(const std::string &path) {
  return Parse(ReadFile(path), path);
}

// ---------------------------------------------------------------------------

ScoreOutput Forward(const EncoderWeights &weights, const ModelInput &input,
                    const EntityVectors *entities) {
  Network<double> net(weights);
  Cache<double> cache;
  const double z = net.Run(input, entities, &cache, nullptr);
  const int n = cache.n, d = weights.config().d_model;
  ScoreOutput out;
  out.logit = z;
  out.probability = ClampProbability(Sigmoid(z));
  out.final_hidden = Matrix(n, d);
  std::copy(cache.y.begin(), cache.y.end(), out.final_hidden.data.begin());
  for (const LayerCache<double> &lc : cache.layers) {
    std::vector<Matrix> heads;
    for (int h = 0; h < weights.config().n_heads; ++h) {
      Matrix a(n, n);
      std::copy_n(lc.attn.begin() + static_cast<long>(h) * n * n,
                  static_cast<long>(n) * n, a.data.begin());
      heads.push_back(std::move(a));
    }
    out.attentions.push_back(std::move(heads));
  }
  return out;
}

double Score(const EncoderWeights &weights, const ModelInput &input,
             const EntityVectors *entities) {
  Network<double> net(weights);
  Cache<double> cache;
  return ClampProbability(Sigmoid(net.Run(input, entities, &cache, nullptr)));
}

double PointwiseLoss(double probability, int label) {
  return label > 0 ? -std::log(probability) : -std::log1p(-probability);
}

double LossAndGradient(const EncoderWeights &weights, const ModelInput &input,
                       int label, const EntityVectors *entities,
                       std::span<double> grad, std::mt19937_64 *dropout_rng) {
  if (grad.size() != weights.params().size()) {
    throw Error(ErrorCode::kInvalid, "gradient buffer has the wrong size");
  }
  Network<double> net(weights);
  Cache<double> cache;
  const double z = net.Run(input, entities, &cache, dropout_rng);
  const double d_logit = Sigmoid(z) - (label > 0 ? 1.0 : 0.0);
  net.Backward(cache, d_logit, grad.data(), weights.tensors());
  return LossFromLogit(z, label);
}

double BatchLoss(const EncoderWeights &weights, const TrainingBatch &batch,
                 const EntityVectors *entities) {
  if (batch.inputs.size() != batch.labels.size()) {
    throw Error(ErrorCode::kInvalid, "labels are not aligned with inputs");
  }
  double total = 0.0;
  for (size_t i = 0; i < batch.inputs.size(); ++i) {
    total += PointwiseLoss(Score(weights, batch.inputs[i], entities),
                           batch.labels[i]);
  }
  return total;
}

TrainResult TrainPointwise(EncoderWeights &weights,
                           std::span<const TrainingBatch> batches,
                           const TrainOptions &options,
                           const EntityVectors *entities) {
  if (batches.empty()) throw Error(ErrorCode::kInvalid, "no training batches");
  for (const TrainingBatch &b : batches) {
    if (b.inputs.size() != b.labels.size() || b.inputs.empty()) {
      throw Error(ErrorCode::kInvalid, "every batch needs aligned, non-empty labels");
    }
  }
  if (weights.config().dropout > 0.0) {
    std::cerr << "warning: dropout " << weights.config().dropout
              << " makes training non-reproducible across batch orders\n";
  }
  std::mt19937_64 rng(options.seed);
  std::vector<double> grad(weights.params().size());
  std::vector<size_t> order(batches.size());
  std::vector<std::vector<double>> losses(batches.size());
  TrainResult result;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    if (options.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (size_t b : order) {
      const TrainingBatch &batch = batches[b];
      std::fill(grad.begin(), grad.end(), 0.0);
      losses[b].assign(batch.inputs.size(), 0.0);
      for (size_t i = 0; i < batch.inputs.size(); ++i) {
        const double loss =
            LossAndGradient(weights, batch.inputs[i], batch.labels[i], entities,
                            grad, weights.config().dropout > 0 ? &rng : nullptr);
        if (!std::isfinite(loss)) {
          throw Error(ErrorCode::kNonFiniteLoss,
                      "loss " + FormatDouble(loss) + " at epoch " +
                          std::to_string(epoch) + ", batch " + std::to_string(b) +
                          ", example " + std::to_string(i));
        }
        losses[b][i] = loss;
      }
      double lr = options.learning_rate;
      if (options.warmup_steps > 0 && result.steps < options.warmup_steps) {
        lr *= static_cast<double>(result.steps + 1) / options.warmup_steps;
      }
      const double scale = lr / static_cast<double>(batch.inputs.size());
      std::span<double> params = weights.params();
      for (size_t j = 0; j < params.size(); ++j) {
        if (!std::isfinite(grad[j])) {
          throw Error(ErrorCode::kNonFiniteLoss,
                      "non-finite gradient at epoch " + std::to_string(epoch) +
                          ", batch " + std::to_string(b));
        }
        params[j] -= scale * grad[j];
      }
      ++result.steps;
    }
    double total = 0.0;
    size_t count = 0;
    for (const auto &per_batch : losses) {
      for (double l : per_batch) total += l;
      count += per_batch.size();
    }
    result.loss_trace.push_back(total / static_cast<double>(count));
  }
  return result;
}

size_t WarmStartTokenTable(EncoderWeights &weights,
                           const JointEmbeddingTable &table,
                           const Vocabulary &vocab, uint64_t seed) {
  const int d = weights.config().d_model;
  const int dim = table.dim();
  if (vocab.native_size() != weights.config().vocab_size) {
    throw Error(ErrorCode::kInvalid, "vocabulary does not match the token table");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  Matrix projection(d, dim);
  for (double &x : projection.data) x = normal(rng);

  std::vector<std::pair<int, std::vector<double>>> rows;
  double norm_sum = 0.0;
  for (int id = Vocabulary::kNumSpecials; id < vocab.native_size(); ++id) {
    const std::string &piece = vocab.Surface(id);
    if (piece.starts_with(kContinuationPrefix)) continue;
    std::optional<size_t> w = table.WordIndex(piece);
    if (!w) continue;
    std::vector<double> row = projection.Apply(table.WordVector(*w));
    double sq = 0.0;
    for (double x : row) sq += x * x;
    norm_sum += std::sqrt(sq);
    rows.emplace_back(id, std::move(row));
  }
  if (rows.empty() || norm_sum == 0.0) return 0;
  const double scale = kInitStddev * std::sqrt(static_cast<double>(d)) /
                       (norm_sum / static_cast<double>(rows.size()));
  std::span<double> tokens = weights.Tensor("embeddings.token");
  for (const auto &[id, row] : rows) {
    for (int j = 0; j < d; ++j) tokens[static_cast<size_t>(id) * d + j] = scale * row[j];
  }
  return rows.size();
}

GradCheckResult GradCheck(const EncoderWeights &weights, const ModelInput &input,
                          int label, const EntityVectors *entities,
                          const GradCheckOptions &options) {
  EncoderWeights w = weights;
  std::vector<double> grad(w.params().size(), 0.0);
  LossAndGradient(w, input, label, entities, grad);

  std::vector<size_t> active;
  auto add_range = [&](const TensorInfo &t, size_t first_row, size_t rows) {
    for (size_t r = first_row; r < first_row + rows; ++r) {
      for (size_t c = 0; c < t.cols; ++c) active.push_back(t.offset + r * t.cols + c);
    }
  };
  if (options.scope == GradCheckScope::kClassifier) {
    add_range(w.tensor("classifier.weight"), 0, 1);
    add_range(w.tensor("classifier.bias"), 0, 1);
  } else {
    std::set<int> rows, segments;
    for (size_t i = 0; i < input.size(); ++i) {
      if (input.tokens[i].kind != TokenKind::kEntity) rows.insert(input.tokens[i].id);
      segments.insert(input.segment_ids[i]);
    }
    for (const TensorInfo &t : w.tensors()) {
      if (t.name == "embeddings.token") {
        for (int r : rows) add_range(t, r, 1);
      } else if (t.name == "embeddings.position") {
        add_range(t, 0, input.size());
      } else if (t.name == "embeddings.segment") {
        for (int s : segments) add_range(t, s, 1);
      } else {
        add_range(t, 0, t.rows);
      }
    }
  }
  std::mt19937_64 rng(options.seed);
  std::shuffle(active.begin(), active.end(), rng);
  if (active.size() > static_cast<size_t>(options.samples)) {
    active.resize(options.samples);
  }

  // Central differences in extended precision keep the rounding noise of the
  // quotient (about eps * loss / step) far below the tolerances callers use.
  Network<long double> net(w);
  Cache<long double> cache;
  auto loss_at = [&] {
    return LossFromLogit(net.Run(input, entities, &cache, nullptr), label);
  };
  GradCheckResult result;
  std::span<double> params = w.params();
  for (size_t index : active) {
    const double original = params[index];
    const double up = original + options.step;
    const double down = original - options.step;
    params[index] = up;
    const long double plus = loss_at();
    params[index] = down;
    const long double minus = loss_at();
    params[index] = original;
    // Divide by the step actually taken after rounding to double.
    const double numeric = static_cast<double>(
        (plus - minus) / (static_cast<long double>(up) - down));
    const double analytic = grad[index];
    const double abs_err = std::abs(analytic - numeric);
    const double rel_err =
        abs_err / std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
    result.max_absolute_error = std::max(result.max_absolute_error, abs_err);
    if (rel_err > result.max_relative_error || result.checked == 0) {
      result.max_relative_error = std::max(result.max_relative_error, rel_err);
      for (const TensorInfo &t : w.tensors()) {
        if (index >= t.offset && index < t.offset + t.size()) result.worst_tensor = t.name;
      }
    }
    ++result.checked;
  }
  return result;
}

}  // namespace entrank
