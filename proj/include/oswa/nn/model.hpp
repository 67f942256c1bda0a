#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "oswa/data/pipeline.hpp"
#include "oswa/iq.hpp"
#include "oswa/kernels/kernels.hpp"
#include "oswa/rng.hpp"

namespace oswa::nn {

using Arch = data::Scheme;

// Shared residual trunk: one residual block per entry of block_filters,
// kernel_size-tap convolutions with "same" padding, average-pool /2 between
// blocks, global average pooling into a feature vector.
struct ExtractorConfig {
  std::vector<int> block_filters{32, 32, 64, 64};
  int kernel_size = 3;
  int feature_dim = 64;

  void validate() const {
    if (block_filters.empty())
      throw std::invalid_argument("block_filters must be nonempty");
    for (int f : block_filters)
      if (f <= 0) throw std::invalid_argument("block filters must be positive");
    if (kernel_size <= 0 || kernel_size % 2 == 0)
      throw std::invalid_argument("kernel_size must be positive and odd");
    if (feature_dim != block_filters.back())
      throw std::invalid_argument(
          "feature_dim must equal the last block's filter count");
    // every pool halves the length; blocks after the first few would see
    // zero-length activations otherwise
    if (static_cast<int>(block_filters.size()) > 8)
      throw std::invalid_argument("too many blocks for a 256-sample frame");
  }
};

// Classifier head(s) on top of the shared features.
// disc: one block with a single logistic output. dclass: one block with
// |A|+1 outputs (softmax applied outside the logits). ova: |A| blocks with
// one logistic output each.
struct HeadConfig {
  Arch arch = Arch::kDisc;
  int n_authorized = 1;
  int hidden_width = 80;
  double l2_weight = 0.001;

  void validate() const {
    if (n_authorized < 1) throw std::invalid_argument("|A| must be >= 1");
    if (hidden_width <= 0)
      throw std::invalid_argument("hidden_width must be positive");
    if (l2_weight < 0.0) throw std::invalid_argument("l2_weight must be >= 0");
  }
};

template <typename T>
struct Workspace;

template <typename T>
class Model {
 public:
  Model(ExtractorConfig ec, HeadConfig hc) : ec_(std::move(ec)), hc_(hc) {
    ec_.validate();
    hc_.validate();
    build_layout();
  }

  const ExtractorConfig& extractor_config() const { return ec_; }
  const HeadConfig& head_config() const { return hc_; }

  // disc: 1, dclass: |A|+1, ova: |A|
  int output_dim() const { return out_dim_; }
  std::int64_t param_count() const {
    return static_cast<std::int64_t>(params_.size());
  }

  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }
  std::vector<T>& grads() { return grads_; }

  void init_params(std::uint64_t seed) {
    Rng rng(seed_mix({seed, 0x696e6974ULL}));
    for (const auto& c : convs_) {
      const double std = std::sqrt(2.0 / (static_cast<double>(c.c_in) * c.k));
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(c.c_out) * c.c_in * c.k; ++i)
        params_[c.w_off + i] = static_cast<T>(std * rng.normal());
      for (int i = 0; i < c.c_out; ++i) params_[c.b_off + i] = T(0);
    }
    for (const auto& d : denses_) {
      const double std = std::sqrt(2.0 / static_cast<double>(d.n_in));
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(d.n_out) * d.n_in; ++i)
        params_[d.w_off + i] = static_cast<T>(std * rng.normal());
      for (int i = 0; i < d.n_out; ++i) params_[d.b_off + i] = T(0);
    }
  }

  void zero_grads() { std::fill(grads_.begin(), grads_.end(), T(0)); }

  Workspace<T> make_workspace() const;

  // input: [2][256] real channels (I then Q); logits: output_dim() values
  void forward(const T* input, Workspace<T>& ws, T* logits) const;

  // dlogits: gradient w.r.t. the logits; accumulates into grads()
  void backward(Workspace<T>& ws, const T* dlogits);

  // L2 penalty over dense-layer weight matrices (not biases, not convs)
  double l2_penalty() const {
    double acc = 0.0;
    for (const auto& d : denses_) {
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(d.n_out) * d.n_in; ++i) {
        const double w = static_cast<double>(params_[d.w_off + i]);
        acc += w * w;
      }
    }
    return hc_.l2_weight * acc;
  }

  // grads += 2*lambda*w for the dense weights; call once per optimizer step
  void add_l2_gradients() {
    const T two_lambda = static_cast<T>(2.0 * hc_.l2_weight);
    if (two_lambda == T(0)) return;
    for (const auto& d : denses_)
      kernels::axpy_t(two_lambda, params_.data() + d.w_off,
                      static_cast<std::int64_t>(d.n_out) * d.n_in,
                      grads_.data() + d.w_off);
  }

 private:
  struct ConvSpec {
    std::int64_t w_off, b_off;
    int c_in, c_out, k;
  };
  struct DenseSpec {
    std::int64_t w_off, b_off;
    int n_in, n_out;
  };
  struct BlockSpec {
    int conv1, conv2, proj;  // indices into convs_, proj -1 if identity skip
    int c_in, f, len;
  };
  struct HeadSpec {
    int d1, d2;  // indices into denses_
  };

  ExtractorConfig ec_;
  HeadConfig hc_;
  std::vector<T> params_, grads_;
  std::vector<ConvSpec> convs_;
  std::vector<DenseSpec> denses_;
  std::vector<BlockSpec> blocks_;
  std::vector<HeadSpec> heads_;
  int out_dim_ = 0;
  int final_len_ = 0;

  std::int64_t alloc_(std::int64_t n) {
    const std::int64_t off = static_cast<std::int64_t>(params_.size());
    params_.resize(params_.size() + n);
    return off;
  }

  int add_conv(int c_in, int c_out, int k) {
    ConvSpec c;
    c.c_in = c_in;
    c.c_out = c_out;
    c.k = k;
    c.w_off = alloc_(static_cast<std::int64_t>(c_out) * c_in * k);
    c.b_off = alloc_(c_out);
    convs_.push_back(c);
    return static_cast<int>(convs_.size()) - 1;
  }

  int add_dense(int n_in, int n_out) {
    DenseSpec d;
    d.n_in = n_in;
    d.n_out = n_out;
    d.w_off = alloc_(static_cast<std::int64_t>(n_out) * n_in);
    d.b_off = alloc_(n_out);
    denses_.push_back(d);
    return static_cast<int>(denses_.size()) - 1;
  }

  void build_layout() {
    int c_in = 2;
    int len = kFrameLen;
    for (std::size_t b = 0; b < ec_.block_filters.size(); ++b) {
      const int f = ec_.block_filters[b];
      BlockSpec bs;
      bs.c_in = c_in;
      bs.f = f;
      bs.len = len;
      bs.conv1 = add_conv(c_in, f, ec_.kernel_size);
      bs.conv2 = add_conv(f, f, ec_.kernel_size);
      bs.proj = (c_in == f) ? -1 : add_conv(c_in, f, 1);
      blocks_.push_back(bs);
      c_in = f;
      if (b + 1 < ec_.block_filters.size()) len /= 2;
    }
    final_len_ = len;

    const int n_heads = hc_.arch == Arch::kOvA ? hc_.n_authorized : 1;
    int head_out = 1;
    if (hc_.arch == Arch::kDClass) head_out = hc_.n_authorized + 1;
    out_dim_ = hc_.arch == Arch::kDClass ? hc_.n_authorized + 1
               : hc_.arch == Arch::kOvA  ? hc_.n_authorized
                                         : 1;
    for (int h = 0; h < n_heads; ++h) {
      HeadSpec hs;
      hs.d1 = add_dense(ec_.feature_dim, hc_.hidden_width);
      hs.d2 = add_dense(hc_.hidden_width, head_out);
      heads_.push_back(hs);
    }
    grads_.assign(params_.size(), T(0));
  }

  template <typename U>
  friend struct Workspace;
};

// Per-sample activation storage; reused across samples, one per thread.
template <typename T>
struct Workspace {
  // per block: input, post-relu of conv1, post-relu block output
  std::vector<std::vector<T>> block_in, r1, y;
  std::vector<std::vector<T>> d_block_in, d_r1, d_y, d_pre, d_tmp;
  std::vector<T> feat, d_feat;
  // per head: hidden pre/post activations
  std::vector<std::vector<T>> head_h;
  std::vector<std::vector<T>> d_head_h;
  std::vector<T> logits;
};

template <typename T>
Workspace<T> Model<T>::make_workspace() const {
  Workspace<T> ws;
  const std::size_t nb = blocks_.size();
  ws.block_in.resize(nb);
  ws.r1.resize(nb);
  ws.y.resize(nb);
  ws.d_block_in.resize(nb);
  ws.d_r1.resize(nb);
  ws.d_y.resize(nb);
  ws.d_pre.resize(nb);
  ws.d_tmp.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& bs = blocks_[b];
    ws.block_in[b].resize(static_cast<std::size_t>(bs.c_in) * bs.len);
    ws.r1[b].resize(static_cast<std::size_t>(bs.f) * bs.len);
    ws.y[b].resize(static_cast<std::size_t>(bs.f) * bs.len);
    ws.d_block_in[b].resize(ws.block_in[b].size());
    ws.d_r1[b].resize(ws.r1[b].size());
    ws.d_y[b].resize(ws.y[b].size());
    ws.d_pre[b].resize(ws.y[b].size());
    // holds the skip path forward and the projection input-gradient backward;
    // must fit both channel counts
    ws.d_tmp[b].resize(static_cast<std::size_t>(std::max(bs.c_in, bs.f)) *
                       bs.len);
  }
  ws.feat.resize(ec_.feature_dim);
  ws.d_feat.resize(ec_.feature_dim);
  ws.head_h.resize(heads_.size());
  ws.d_head_h.resize(heads_.size());
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    ws.head_h[h].resize(hc_.hidden_width);
    ws.d_head_h[h].resize(hc_.hidden_width);
  }
  ws.logits.resize(out_dim_);
  return ws;
}

template <typename T>
void Model<T>::forward(const T* input, Workspace<T>& ws, T* logits) const {
  const T* p = params_.data();
  std::copy(input, input + 2 * kFrameLen, ws.block_in[0].data());

  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& bs = blocks_[b];
    const auto& c1 = convs_[bs.conv1];
    const auto& c2 = convs_[bs.conv2];
    const T* x = ws.block_in[b].data();
    T* r1 = ws.r1[b].data();
    T* y = ws.y[b].data();
    const std::int64_t n = static_cast<std::int64_t>(bs.f) * bs.len;

    // conv1 -> relu (y used as conv scratch before the residual add)
    kernels::conv1d_fwd_t(x, bs.c_in, bs.len, p + c1.w_off, p + c1.b_off, bs.f,
                          c1.k, y);
    kernels::relu_fwd_t(y, n, r1);
    // conv2 into y, add skip
    kernels::conv1d_fwd_t(r1, bs.f, bs.len, p + c2.w_off, p + c2.b_off, bs.f,
                          c2.k, y);
    if (bs.proj >= 0) {
      const auto& pr = convs_[bs.proj];
      T* skip = ws.d_tmp[b].data();  // scratch; rewritten in backward
      kernels::conv1d_fwd_t(x, bs.c_in, bs.len, p + pr.w_off, p + pr.b_off,
                            bs.f, 1, skip);
      kernels::add_t(y, skip, n, y);
    } else {
      kernels::add_t(y, x, n, y);
    }
    kernels::relu_fwd_t(y, n, y);

    if (b + 1 < blocks_.size())
      kernels::avgpool2_fwd_t(y, bs.f, bs.len, ws.block_in[b + 1].data());
  }

  // global average pool over the final block output
  {
    const auto& bs = blocks_.back();
    const T* y = ws.y.back().data();
    const T inv = T(1) / static_cast<T>(final_len_);
    for (int c = 0; c < bs.f; ++c) {
      T acc = T(0);
      for (int l = 0; l < final_len_; ++l) acc += y[c * final_len_ + l];
      ws.feat[c] = acc * inv;
    }
  }

  int out_pos = 0;
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    const auto& d1 = denses_[heads_[h].d1];
    const auto& d2 = denses_[heads_[h].d2];
    T* hidden = ws.head_h[h].data();
    kernels::dense_fwd_t(ws.feat.data(), d1.n_in, p + d1.w_off, p + d1.b_off,
                         d1.n_out, hidden);
    kernels::relu_fwd_t(hidden, d1.n_out, hidden);
    kernels::dense_fwd_t(hidden, d2.n_in, p + d2.w_off, p + d2.b_off, d2.n_out,
                         ws.logits.data() + out_pos);
    out_pos += d2.n_out;
  }
  std::copy(ws.logits.begin(), ws.logits.end(), logits);
}

template <typename T>
void Model<T>::backward(Workspace<T>& ws, const T* dlogits) {
  const T* p = params_.data();
  T* g = grads_.data();

  std::fill(ws.d_feat.begin(), ws.d_feat.end(), T(0));
  int out_pos = 0;
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    const auto& d1 = denses_[heads_[h].d1];
    const auto& d2 = denses_[heads_[h].d2];
    const T* hidden = ws.head_h[h].data();
    T* dh = ws.d_head_h[h].data();
    kernels::dense_bwd_weights_t(hidden, d2.n_in, dlogits + out_pos, d2.n_out,
                                 g + d2.w_off, g + d2.b_off);
    kernels::dense_bwd_data_t(dlogits + out_pos, d2.n_out, p + d2.w_off,
                              d2.n_in, dh);
    kernels::relu_bwd_t(hidden, dh, d1.n_out, dh);
    kernels::dense_bwd_weights_t(ws.feat.data(), d1.n_in, dh, d1.n_out,
                                 g + d1.w_off, g + d1.b_off);
    // accumulate feature gradient across heads
    std::vector<T>& scratch = ws.d_y.back();  // reused below, safe here
    kernels::dense_bwd_data_t(dh, d1.n_out, p + d1.w_off, d1.n_in,
                              scratch.data());
    for (int i = 0; i < d1.n_in; ++i) ws.d_feat[i] += scratch[i];
    out_pos += d2.n_out;
  }

  // GAP backward into d_y of the last block
  {
    const auto& bs = blocks_.back();
    T* dy = ws.d_y.back().data();
    const T inv = T(1) / static_cast<T>(final_len_);
    for (int c = 0; c < bs.f; ++c) {
      const T d = ws.d_feat[c] * inv;
      for (int l = 0; l < final_len_; ++l) dy[c * final_len_ + l] = d;
    }
  }

  for (std::size_t bi = blocks_.size(); bi-- > 0;) {
    const auto& bs = blocks_[bi];
    const auto& c1 = convs_[bs.conv1];
    const auto& c2 = convs_[bs.conv2];
    const std::int64_t n = static_cast<std::int64_t>(bs.f) * bs.len;
    T* dy = ws.d_y[bi].data();
    T* dpre = ws.d_pre[bi].data();
    T* dr1 = ws.d_r1[bi].data();
    T* dx = ws.d_block_in[bi].data();
    T* dtmp = ws.d_tmp[bi].data();

    if (bi + 1 < blocks_.size())
      kernels::avgpool2_bwd_t(ws.d_block_in[bi + 1].data(), bs.f, bs.len, dy);

    kernels::relu_bwd_t(ws.y[bi].data(), dy, n, dpre);

    kernels::conv1d_bwd_weights_t(ws.r1[bi].data(), bs.f, bs.len, dpre, bs.f,
                                  c2.k, g + c2.w_off, g + c2.b_off);
    kernels::conv1d_bwd_data_t(dpre, bs.f, bs.len, p + c2.w_off, bs.f, c2.k,
                               dr1);
    kernels::relu_bwd_t(ws.r1[bi].data(), dr1, n, dr1);
    kernels::conv1d_bwd_weights_t(ws.block_in[bi].data(), bs.c_in, bs.len, dr1,
                                  bs.f, c1.k, g + c1.w_off, g + c1.b_off);
    kernels::conv1d_bwd_data_t(dr1, bs.f, bs.len, p + c1.w_off, bs.c_in, c1.k,
                               dx);

    if (bs.proj >= 0) {
      const auto& pr = convs_[bs.proj];
      kernels::conv1d_bwd_weights_t(ws.block_in[bi].data(), bs.c_in, bs.len,
                                    dpre, bs.f, 1, g + pr.w_off, g + pr.b_off);
      kernels::conv1d_bwd_data_t(dpre, bs.f, bs.len, p + pr.w_off, bs.c_in, 1,
                                 dtmp);
      kernels::add_t(dx, dtmp, static_cast<std::int64_t>(bs.c_in) * bs.len, dx);
    } else {
      kernels::add_t(dx, dpre, n, dx);
    }
  }
}

}  // namespace oswa::nn
