// Copyright 2026 The yahtzee-rl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "net.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "kernels.hpp"

namespace yahtzee {

namespace {
constexpr double kLayerNormEps = 1e-5;
}

const char* to_string(RollHeadMode mode) {
  return mode == RollHeadMode::kCategorical32 ? "categorical" : "bernoulli";
}

RollHeadMode roll_head_from_string(const std::string& s) {
  if (s == "categorical") return RollHeadMode::kCategorical32;
  if (s == "bernoulli") return RollHeadMode::kBernoulli5;
  throw std::invalid_argument("unknown roll head mode: " + s);
}

void NetConfig::validate() const {
  if (hidden < 1) throw std::invalid_argument("net.hidden must be >= 1");
  if (layers < 1) throw std::invalid_argument("net.layers must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("net.dropout must be in [0, 1)");
}

template <typename T>
Params<T> Params<T>::build(const NetConfig& cfg, int input_dim) {
  cfg.validate();
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  Params p;
  p.cfg = cfg;
  p.input_dim = input_dim;

  size_t offset = 0;
  auto add_view = [&](const std::string& name, int rows, int cols,
                      TensorView::Kind kind) {
    p.views.push_back({name, offset, rows, cols, kind});
    offset += static_cast<size_t>(rows) * cols;
    return static_cast<int>(p.views.size() - 1);
  };
  auto add_block = [&](const std::string& prefix, int in, int out,
                       bool norm) {
    BlockRef ref;
    ref.in = in;
    ref.out = out;
    ref.w = add_view(prefix + ".w", in, out, TensorView::Kind::kWeight);
    ref.b = add_view(prefix + ".b", 1, out, TensorView::Kind::kBias);
    if (norm) {
      ref.gain =
          add_view(prefix + ".ln.g", 1, out, TensorView::Kind::kNormGain);
      ref.nbias =
          add_view(prefix + ".ln.b", 1, out, TensorView::Kind::kNormBias);
    }
    return ref;
  };

  const int d = cfg.hidden;
  int in = input_dim;
  for (int i = 0; i < cfg.layers; ++i) {
    p.trunk.push_back(
        add_block("trunk." + std::to_string(i), in, d, cfg.layer_norm));
    in = d;
  }
  p.roll_hidden = add_block("head.roll.h", d, d, cfg.layer_norm);
  p.score_hidden = add_block("head.score.h", d, d, cfg.layer_norm);
  p.value_hidden = add_block("head.value.h", d, d, cfg.layer_norm);
  p.upper_hidden = add_block("head.upper.h", d, d, cfg.layer_norm);
  p.roll_out = add_block("head.roll.out", d, cfg.roll_dim(), false);
  p.score_out = add_block("head.score.out", d, kNumCategories, false);
  p.value_out = add_block("head.value.out", d, 1, false);
  p.upper_out = add_block("head.upper.out", d, 1, false);

  p.data.assign(offset, T(0));

  p.w_cross_offset.assign(p.views.size(), 0);
  size_t cross = 0;
  for (size_t i = 0; i < p.views.size(); ++i) {
    if (p.views[i].kind == TensorView::Kind::kWeight) {
      p.w_cross_offset[i] = cross;
      cross += p.views[i].size();
    }
  }
  p.w_cross.assign(cross, T(0));
  return p;
}

template <typename T>
void Params<T>::init(uint64_t master_seed) {
  Rng rng(derive_stream(master_seed, StreamDomain::kInit, 0));
  for (size_t v = 0; v < views.size(); ++v) {
    const TensorView& view = views[v];
    T* dst = data.data() + view.offset;
    switch (view.kind) {
      case TensorView::Kind::kWeight: {
        const double std = std::sqrt(2.0 / view.rows);
        for (size_t i = 0; i < view.size(); ++i)
          dst[i] = static_cast<T>(rng.normal() * std);
        break;
      }
      case TensorView::Kind::kNormGain:
        for (size_t i = 0; i < view.size(); ++i) dst[i] = T(1);
        break;
      default:
        for (size_t i = 0; i < view.size(); ++i) dst[i] = T(0);
        break;
    }
  }
  sync_derived();
}

template <typename T>
void Params<T>::sync_derived() {
  for (size_t v = 0; v < views.size(); ++v) {
    const TensorView& view = views[v];
    if (view.kind != TensorView::Kind::kWeight) continue;
    const T* src = data.data() + view.offset;       // in x out
    T* dst = w_cross.data() + w_cross_offset[v];    // out x in
    for (int i = 0; i < view.rows; ++i)
      for (int j = 0; j < view.cols; ++j)
        dst[static_cast<size_t>(j) * view.rows + i] =
            src[static_cast<size_t>(i) * view.cols + j];
  }
}

template <typename T>
int Params<T>::find_view(const std::string& name) const {
  for (size_t i = 0; i < views.size(); ++i)
    if (views[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

template <typename T>
void resize(std::vector<T>& v, size_t n) {
  v.resize(n);
}

// Linear -> Swish -> (LayerNorm) -> (Dropout). `keep` may be null (no
// dropout site or eval mode).
template <typename T>
void run_block(const Params<T>& p, const BlockRef& ref, const T* x, int n,
               BlockTrace<T>* bt, const uint8_t* keep, T dropout_scale) {
  const auto& ops = kernels::active_ops<T>();
  const size_t count = static_cast<size_t>(n) * ref.out;
  resize(bt->u, count);
  resize(bt->sig, count);
  resize(bt->s, count);
  resize(bt->out, count);

  ops.matmul_nn(x, p.tensor(ref.w), bt->u.data(), n, ref.out, ref.in, false);
  ops.add_bias_rows(bt->u.data(), p.tensor(ref.b), n, ref.out);

  for (size_t i = 0; i < count; ++i) {
    const T u = bt->u[i];
    const T sg = static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(u))));
    bt->sig[i] = sg;
    bt->s[i] = u * sg;
  }

  const T* pre_dropout = bt->s.data();
  if (ref.gain >= 0) {
    resize(bt->xhat, count);
    resize(bt->inv_std, static_cast<size_t>(n));
    const T* gain = p.tensor(ref.gain);
    const T* nbias = p.tensor(ref.nbias);
    for (int r = 0; r < n; ++r) {
      const T* row = bt->s.data() + static_cast<size_t>(r) * ref.out;
      T* xh = bt->xhat.data() + static_cast<size_t>(r) * ref.out;
      T* y = bt->out.data() + static_cast<size_t>(r) * ref.out;
      double mean = 0.0;
      for (int j = 0; j < ref.out; ++j) mean += row[j];
      mean /= ref.out;
      double var = 0.0;
      for (int j = 0; j < ref.out; ++j) {
        const double dlt = row[j] - mean;
        var += dlt * dlt;
      }
      var /= ref.out;
      const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
      bt->inv_std[r] = static_cast<T>(inv);
      for (int j = 0; j < ref.out; ++j) {
        xh[j] = static_cast<T>((row[j] - mean) * inv);
        y[j] = gain[j] * xh[j] + nbias[j];
      }
    }
    pre_dropout = bt->out.data();
  }

  if (keep != nullptr) {
    ops.dropout_apply(pre_dropout, keep, dropout_scale, bt->out.data(),
                      count);
  } else if (pre_dropout != bt->out.data()) {
    std::copy(pre_dropout, pre_dropout + count, bt->out.data());
  }
}

// Output linear layer y = x * w + b.
template <typename T>
void run_out(const Params<T>& p, const BlockRef& ref, const T* x, int n,
             T* y) {
  const auto& ops = kernels::active_ops<T>();
  ops.matmul_nn(x, p.tensor(ref.w), y, n, ref.out, ref.in, false);
  ops.add_bias_rows(y, p.tensor(ref.b), n, ref.out);
}

}  // namespace

template <typename T>
void net_forward(const Params<T>& params, const T* features, int n,
                 const uint16_t* score_masks, bool train_mode,
                 Rng* dropout_rng, const DropoutMasks* reuse_masks,
                 ForwardTrace<T>* trace, PolicyOut<T>* out) {
  static thread_local ForwardTrace<T> scratch;
  ForwardTrace<T>& tr = trace != nullptr ? *trace : scratch;
  const NetConfig& cfg = params.cfg;
  const int L = cfg.layers;
  const int d = cfg.hidden;
  const int roll_dim = cfg.roll_dim();
  const int num_sites = L + 2;  // trunk layers + roll & score head hiddens

  tr.n = n;
  tr.features = features;
  tr.blocks.resize(static_cast<size_t>(L) + 4);
  tr.score_masks.assign(score_masks, score_masks + n);

  const bool dropout_on = train_mode && cfg.dropout > 0.0;
  const T scale = dropout_on
                      ? static_cast<T>(1.0 / (1.0 - cfg.dropout))
                      : T(1);
  tr.masks.keep.assign(dropout_on ? num_sites : 0, {});
  if (dropout_on) {
    if (reuse_masks != nullptr) {
      if (static_cast<int>(reuse_masks->keep.size()) != num_sites)
        throw std::invalid_argument("reused dropout masks have wrong shape");
      tr.masks = *reuse_masks;
    } else {
      if (dropout_rng == nullptr)
        throw std::invalid_argument(
            "train-mode forward needs a dropout rng or reusable masks");
      for (int site = 0; site < num_sites; ++site) {
        auto& keep = tr.masks.keep[site];
        keep.resize(static_cast<size_t>(n) * d);
        for (auto& k : keep)
          k = dropout_rng->uniform01() >= cfg.dropout ? 1 : 0;
      }
    }
  }
  auto site_mask = [&](int site) -> const uint8_t* {
    return dropout_on ? tr.masks.keep[site].data() : nullptr;
  };

  // Trunk.
  const T* x = features;
  for (int i = 0; i < L; ++i) {
    run_block(params, params.trunk[i], x, n, &tr.blocks[i], site_mask(i),
              scale);
    x = tr.blocks[i].out.data();
  }
  const T* z = x;

  // Head hidden layers.
  run_block(params, params.roll_hidden, z, n, &tr.blocks[L], site_mask(L),
            scale);
  run_block(params, params.score_hidden, z, n, &tr.blocks[L + 1],
            site_mask(L + 1), scale);
  run_block(params, params.value_hidden, z, n, &tr.blocks[L + 2], nullptr,
            T(1));
  run_block(params, params.upper_hidden, z, n, &tr.blocks[L + 3], nullptr,
            T(1));

  // Output layers.
  out->n = n;
  out->roll_dim = roll_dim;
  resize(out->roll_probs, static_cast<size_t>(n) * roll_dim);
  resize(out->score_probs, static_cast<size_t>(n) * kNumCategories);
  resize(out->value, static_cast<size_t>(n));
  resize(out->upper, static_cast<size_t>(n));
  resize(tr.value_pre, static_cast<size_t>(n));

  // Logits are written into the prob buffers, then transformed in place.
  run_out(params, params.roll_out, tr.blocks[L].out.data(), n,
          out->roll_probs.data());
  run_out(params, params.score_out, tr.blocks[L + 1].out.data(), n,
          out->score_probs.data());
  run_out(params, params.value_out, tr.blocks[L + 2].out.data(), n,
          tr.value_pre.data());
  run_out(params, params.upper_out, tr.blocks[L + 3].out.data(), n,
          out->upper.data());

  for (int r = 0; r < n; ++r)
    out->value[r] = static_cast<T>(elu(tr.value_pre[r]));

  if (cfg.roll_head == RollHeadMode::kCategorical32) {
    for (int r = 0; r < n; ++r) {
      T* row = out->roll_probs.data() + static_cast<size_t>(r) * roll_dim;
      T mx = row[0];
      for (int j = 1; j < roll_dim; ++j) mx = std::max(mx, row[j]);
      double sum = 0.0;
      for (int j = 0; j < roll_dim; ++j) {
        const double e = std::exp(static_cast<double>(row[j] - mx));
        row[j] = static_cast<T>(e);
        sum += e;
      }
      const T inv = static_cast<T>(1.0 / sum);
      for (int j = 0; j < roll_dim; ++j) row[j] *= inv;
    }
  } else {
    for (size_t i = 0; i < out->roll_probs.size(); ++i)
      out->roll_probs[i] =
          static_cast<T>(sigmoid(static_cast<double>(out->roll_probs[i])));
  }

  for (int r = 0; r < n; ++r) {
    T* row = out->score_probs.data() + static_cast<size_t>(r) * kNumCategories;
    const uint16_t mask = score_masks[r];
    if ((mask & kAllCategoriesMask) == 0)
      throw std::invalid_argument("score mask must have a legal entry");
    T mx = 0;
    bool first = true;
    for (int j = 0; j < kNumCategories; ++j) {
      if (!(mask & (1u << j))) continue;
      mx = first ? row[j] : std::max(mx, row[j]);
      first = false;
    }
    double sum = 0.0;
    for (int j = 0; j < kNumCategories; ++j) {
      if (!(mask & (1u << j))) {
        row[j] = T(0);
        continue;
      }
      const double e = std::exp(static_cast<double>(row[j] - mx));
      row[j] = static_cast<T>(e);
      sum += e;
    }
    const T inv = static_cast<T>(1.0 / sum);
    for (int j = 0; j < kNumCategories; ++j)
      if (mask & (1u << j)) row[j] *= inv;
  }
}

namespace {

// Backward through one Linear -> Swish -> (LayerNorm) -> (Dropout) block.
// d_out is the gradient at the block output; on return d_in holds the
// gradient at the block input (accumulated if accumulate_input).
template <typename T>
void block_backward(const Params<T>& p, const BlockRef& ref,
                    const BlockTrace<T>& bt, const T* x_in, int n,
                    const uint8_t* keep, T dropout_scale, T* d_out_buf,
                    T* d_in, bool accumulate_input, bool skip_input_grad,
                    std::vector<T>* grads) {
  const auto& ops = kernels::active_ops<T>();
  const size_t count = static_cast<size_t>(n) * ref.out;

  // Dropout backward (in place on d_out_buf).
  if (keep != nullptr)
    ops.dropout_apply(d_out_buf, keep, dropout_scale, d_out_buf, count);

  // LayerNorm backward (in place, d_out_buf becomes d_s).
  if (ref.gain >= 0) {
    const T* gain = p.tensor(ref.gain);
    T* dgain = grads->data() + p.views[ref.gain].offset;
    T* dnbias = grads->data() + p.views[ref.nbias].offset;
    std::vector<double> gsum(ref.out, 0.0), bsum(ref.out, 0.0);
    for (int r = 0; r < n; ++r) {
      T* dy = d_out_buf + static_cast<size_t>(r) * ref.out;
      const T* xh = bt.xhat.data() + static_cast<size_t>(r) * ref.out;
      const double inv = bt.inv_std[r];
      double m1 = 0.0, m2 = 0.0;
      for (int j = 0; j < ref.out; ++j) {
        gsum[j] += static_cast<double>(dy[j]) * xh[j];
        bsum[j] += dy[j];
        const double dxh = static_cast<double>(dy[j]) * gain[j];
        m1 += dxh;
        m2 += dxh * xh[j];
      }
      m1 /= ref.out;
      m2 /= ref.out;
      for (int j = 0; j < ref.out; ++j) {
        const double dxh = static_cast<double>(dy[j]) * gain[j];
        dy[j] = static_cast<T>(inv * (dxh - m1 - xh[j] * m2));
      }
    }
    for (int j = 0; j < ref.out; ++j) {
      dgain[j] += static_cast<T>(gsum[j]);
      dnbias[j] += static_cast<T>(bsum[j]);
    }
  }

  // Swish backward (in place, d_out_buf becomes d_u).
  for (size_t i = 0; i < count; ++i) {
    const T sg = bt.sig[i];
    d_out_buf[i] = static_cast<T>(
        d_out_buf[i] * sg * (T(1) + bt.u[i] * (T(1) - sg)));
  }

  // Linear backward.
  T* dw = grads->data() + p.views[ref.w].offset;
  T* db = grads->data() + p.views[ref.b].offset;
  ops.matmul_tn(x_in, d_out_buf, dw, ref.in, ref.out, n, true);
  ops.sum_rows(d_out_buf, db, n, ref.out, true);
  if (!skip_input_grad)
    ops.matmul_nn(d_out_buf, p.tensor_cross(ref.w), d_in, n, ref.in,
                  ref.out, accumulate_input);
}

template <typename T>
void out_backward(const Params<T>& p, const BlockRef& ref, const T* x_in,
                  const T* d_y, int n, T* d_in, std::vector<T>* grads) {
  const auto& ops = kernels::active_ops<T>();
  T* dw = grads->data() + p.views[ref.w].offset;
  T* db = grads->data() + p.views[ref.b].offset;
  ops.matmul_tn(x_in, d_y, dw, ref.in, ref.out, n, true);
  ops.sum_rows(d_y, db, n, ref.out, true);
  ops.matmul_nn(d_y, p.tensor_cross(ref.w), d_in, n, ref.in, ref.out, false);
}

}  // namespace

template <typename T>
void net_backward(const Params<T>& params, const ForwardTrace<T>& trace,
                  const T* d_roll_logits, const T* d_score_logits,
                  const T* d_value, const T* d_upper, std::vector<T>* grads) {
  if (grads->size() != params.data.size())
    throw std::invalid_argument("gradient arena has wrong size");
  const NetConfig& cfg = params.cfg;
  const int L = cfg.layers;
  const int d = cfg.hidden;
  const int n = trace.n;
  const bool dropout_on = !trace.masks.keep.empty();
  const T scale =
      dropout_on ? static_cast<T>(1.0 / (1.0 - cfg.dropout)) : T(1);

  const T* z = L > 0 ? trace.blocks[L - 1].out.data() : trace.features;
  std::vector<T> d_head(static_cast<size_t>(n) * d);
  std::vector<T> d_z(static_cast<size_t>(n) * d, T(0));
  std::vector<T> d_hidden(static_cast<size_t>(n) * d);

  // Value chain: through ELU first.
  std::vector<T> d_vpre(static_cast<size_t>(n));
  for (int r = 0; r < n; ++r) {
    const double vp = trace.value_pre[r];
    d_vpre[r] = static_cast<T>(d_value[r] * (vp > 0 ? 1.0 : std::exp(vp)));
  }

  struct HeadSpec {
    const BlockRef* out_ref;
    const BlockRef* hidden_ref;
    int block_index;
    const T* d_logits;
    int site;  // dropout site or -1
  };
  const HeadSpec heads[4] = {
      {&params.roll_out, &params.roll_hidden, L, d_roll_logits, L},
      {&params.score_out, &params.score_hidden, L + 1, d_score_logits, L + 1},
      {&params.value_out, &params.value_hidden, L + 2, d_vpre.data(), -1},
      {&params.upper_out, &params.upper_hidden, L + 3, d_upper, -1},
  };

  for (int h = 0; h < 4; ++h) {
    const HeadSpec& spec = heads[h];
    const BlockTrace<T>& bt = trace.blocks[spec.block_index];
    out_backward(params, *spec.out_ref, bt.out.data(), spec.d_logits, n,
                 d_head.data(), grads);
    const uint8_t* keep =
        (dropout_on && spec.site >= 0) ? trace.masks.keep[spec.site].data()
                                       : nullptr;
    block_backward(params, *spec.hidden_ref, bt, z, n, keep, scale,
                   d_head.data(), d_z.data(), h > 0, false, grads);
  }

  // Trunk, top down. d_z holds the gradient at trunk layer L-1 output.
  T* d_cur = d_z.data();
  T* d_next = d_hidden.data();
  for (int i = L - 1; i >= 0; --i) {
    const T* x_in = i > 0 ? trace.blocks[i - 1].out.data() : trace.features;
    const uint8_t* keep = dropout_on ? trace.masks.keep[i].data() : nullptr;
    block_backward(params, params.trunk[i], trace.blocks[i], x_in, n, keep,
                   scale, d_cur, d_next, false, i == 0, grads);
    std::swap(d_cur, d_next);
  }
}

template struct Params<float>;
template struct Params<double>;
template void net_forward<float>(const Params<float>&, const float*, int,
                                 const uint16_t*, bool, Rng*,
                                 const DropoutMasks*, ForwardTrace<float>*,
                                 PolicyOut<float>*);
template void net_forward<double>(const Params<double>&, const double*, int,
                                  const uint16_t*, bool, Rng*,
                                  const DropoutMasks*, ForwardTrace<double>*,
                                  PolicyOut<double>*);
template void net_backward<float>(const Params<float>&,
                                  const ForwardTrace<float>&, const float*,
                                  const float*, const float*, const float*,
                                  std::vector<float>*);
template void net_backward<double>(const Params<double>&,
                                   const ForwardTrace<double>&, const double*,
                                   const double*, const double*, const double*,
                                   std::vector<double>*);

}  // namespace yahtzee
