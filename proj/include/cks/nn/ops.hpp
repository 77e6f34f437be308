#pragma once

#include "cks/nn/tensor.hpp"

namespace cks::nn {

// Elementwise (same shape unless noted).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, float c);
Var add_scalar(const Var& a, float c);
Var relu(const Var& a);
Var exp_op(const Var& a);
Var square(const Var& a);

// Reductions to a scalar.
Var sum(const Var& a);
Var mean(const Var& a);

/// a: (m,k), b: (k,n) -> (m,n).
Var matmul(const Var& a, const Var& b);
/// x: (in), w: (out,in), b: (out) -> (out).
Var linear(const Var& x, const Var& w, const Var& b);

/// x: (Cin,T), w: (Cout,Cin,K), b: (Cout) -> (Cout,To).
/// To = (T + pad_left + pad_right - (K-1)*dilation - 1)/stride + 1.
/// Causal TCN convs use pad_left = (K-1)*dilation, pad_right = 0, stride 1, so
/// output t depends only on inputs <= t and To == T.
Var conv1d(const Var& x, const Var& w, const Var& b, int stride = 1, int dilation = 1,
           int pad_left = 0, int pad_right = 0);

/// x: (Cin,H,W), w: (Cout,Cin,Kh,Kw), b: (Cout), symmetric padding.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride = 1, int pad = 0);

/// Train mode: zeroes units with probability p and scales survivors by
/// 1/(1-p); eval mode returns the input unchanged.
Var dropout(const Var& x, double p, bool train, Rng& rng);

/// Row-wise log-softmax over the last dimension of a vector (C) or matrix (N,C).
Var log_softmax(const Var& x);

/// x: (C,T) -> (C); averages the first valid_len columns (0 = all).
Var mean_pool_time(const Var& x, int valid_len = 0);
/// x: (C,T) -> (C); copies column valid_len-1 (0 = last column).
Var last_step_time(const Var& x, int valid_len = 0);

Var reshape(const Var& x, std::vector<int> shape);
/// Flat concatenation of two vectors.
Var concat(const Var& a, const Var& b);

/// x: (C,T) -> (C,out_len), out_len <= factor*T, nearest neighbour.
Var upsample_nearest_1d(const Var& x, int factor, int out_len);
/// x: (C,H,W) -> (C,2H,2W).
Var upsample_nearest_2d(const Var& x);

/// Weight normalisation w[c,:] = g[c] * v[c,:] / ||v[c,:]||.
Var weight_norm(const Var& v, const Var& g);

/// Mean over the batch of -log_probs[target]. log_probs: (C) with one target,
/// or (N,C) with N targets.
Var nll_loss(const Var& log_probs, const std::vector<int>& targets);

}  // namespace cks::nn
