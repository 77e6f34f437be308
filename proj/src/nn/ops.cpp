#include "cks/nn/ops.hpp"

#include <algorithm>
#include <cmath>

namespace cks::nn {

namespace {

void check_same_shape(const char* op, const Var& a, const Var& b) {
    if (a->t.shape != b->t.shape)
        throw ArgError(std::string(op) + ": shape mismatch " + shape_str(a->t.shape) + " vs " +
                       shape_str(b->t.shape));
}

}  // namespace

Var add(const Var& a, const Var& b) {
    check_same_shape("add", a, b);
    Tensor out(a->t.shape);
    for (size_t i = 0; i < out.numel(); ++i) out.v[i] = a->t.v[i] + b->t.v[i];
    return make_op(std::move(out), {a, b}, [a, b](TensorNode& n) {
        if (a->requires_grad)
            for (size_t i = 0; i < n.t.numel(); ++i) a->t.g[i] += n.t.g[i];
        if (b->requires_grad)
            for (size_t i = 0; i < n.t.numel(); ++i) b->t.g[i] += n.t.g[i];
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape("sub", a, b);
    Tensor out(a->t.shape);
    for (size_t i = 0; i < out.numel(); ++i) out.v[i] = a->t.v[i] - b->t.v[i];
    return make_op(std::move(out), {a, b}, [a, b](TensorNode& n) {
        if (a->requires_grad)
            for (size_t i = 0; i < n.t.numel(); ++i) a->t.g[i] += n.t.g[i];
        if (b->requires_grad)
            for (size_t i = 0; i < n.t.numel(); ++i) b->t.g[i] -= n.t.g[i];
    });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape("mul", a, b);
    Tensor out(a->t.shape);
    for (size_t i = 0; i < out.numel(); ++i) out.v[i] = a->t.v[i] * b->t.v[i];
    return make_op(std::move(out), {a, b}, [a, b](TensorNode& n) {
        if (a->requires_grad)
            for (size_t i = 0; i < n.t.numel(); ++i) a->t.g[i] += n.t.g[i] * b->t.v[i];
        if (b->requires_grad)
            for (size_t i = 0; i < n.t.numel(); ++i) b->t.g[i] += n.t.g[i] * a->t.v[i];
    });
}

Var scale(const Var& a, float c) {
    Tensor out(a->t.shape);
    for (size_t i = 0; i < out.numel(); ++i) out.v[i] = a->t.v[i] * c;
    return make_op(std::move(out), {a}, [a, c](TensorNode& n) {
        for (size_t i = 0; i < n.t.numel(); ++i) a->t.g[i] += n.t.g[i] * c;
    });
}

Var add_scalar(const Var& a, float c) {
    Tensor out(a->t.shape);
    for (size_t i = 0; i < out.numel(); ++i) out.v[i] = a->t.v[i] + c;
    return make_op(std::move(out), {a}, [a](TensorNode& n) {
        for (size_t i = 0; i < n.t.numel(); ++i) a->t.g[i] += n.t.g[i];
    });
}

Var relu(const Var& a) {
    Tensor out(a->t.shape);
    for (size_t i = 0; i < out.numel(); ++i) out.v[i] = a->t.v[i] > 0.0f ? a->t.v[i] : 0.0f;
    return make_op(std::move(out), {a}, [a](TensorNode& n) {
        for (size_t i = 0; i < n.t.numel(); ++i)
            if (a->t.v[i] > 0.0f) a->t.g[i] += n.t.g[i];
    });
}

Var exp_op(const Var& a) {
    Tensor out(a->t.shape);
    for (size_t i = 0; i < out.numel(); ++i) out.v[i] = std::exp(a->t.v[i]);
    return make_op(std::move(out), {a}, [a](TensorNode& n) {
        for (size_t i = 0; i < n.t.numel(); ++i) a->t.g[i] += n.t.g[i] * n.t.v[i];
    });
}

Var square(const Var& a) {
    Tensor out(a->t.shape);
    for (size_t i = 0; i < out.numel(); ++i) out.v[i] = a->t.v[i] * a->t.v[i];
    return make_op(std::move(out), {a}, [a](TensorNode& n) {
        for (size_t i = 0; i < n.t.numel(); ++i) a->t.g[i] += 2.0f * n.t.g[i] * a->t.v[i];
    });
}

Var sum(const Var& a) {
    Tensor out({1});
    double acc = 0.0;
    for (float x : a->t.v) acc += x;
    out.v[0] = static_cast<float>(acc);
    return make_op(std::move(out), {a}, [a](TensorNode& n) {
        const float go = n.t.g[0];
        for (size_t i = 0; i < a->t.numel(); ++i) a->t.g[i] += go;
    });
}

Var mean(const Var& a) { return scale(sum(a), 1.0f / static_cast<float>(a->t.numel())); }

Var matmul(const Var& a, const Var& b) {
    if (a->t.ndim() != 2 || b->t.ndim() != 2 || a->t.dim(1) != b->t.dim(0))
        throw ArgError("matmul: bad shapes " + shape_str(a->t.shape) + " x " +
                       shape_str(b->t.shape));
    const int m = a->t.dim(0), k = a->t.dim(1), n = b->t.dim(1);
    Tensor out({m, n});
    for (int i = 0; i < m; ++i)
        for (int l = 0; l < k; ++l) {
            const float av = a->t.v[static_cast<size_t>(i) * k + l];
            const float* brow = &b->t.v[static_cast<size_t>(l) * n];
            float* orow = &out.v[static_cast<size_t>(i) * n];
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    return make_op(std::move(out), {a, b}, [a, b, m, k, n](TensorNode& node) {
        if (a->requires_grad) {
            for (int i = 0; i < m; ++i)
                for (int l = 0; l < k; ++l) {
                    const float* brow = &b->t.v[static_cast<size_t>(l) * n];
                    const float* grow = &node.t.g[static_cast<size_t>(i) * n];
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j) acc += static_cast<double>(grow[j]) * brow[j];
                    a->t.g[static_cast<size_t>(i) * k + l] += static_cast<float>(acc);
                }
        }
        if (b->requires_grad) {
            for (int i = 0; i < m; ++i)
                for (int l = 0; l < k; ++l) {
                    const float av = a->t.v[static_cast<size_t>(i) * k + l];
                    const float* grow = &node.t.g[static_cast<size_t>(i) * n];
                    float* brow = &b->t.g[static_cast<size_t>(l) * n];
                    for (int j = 0; j < n; ++j) brow[j] += av * grow[j];
                }
        }
    });
}

Var linear(const Var& x, const Var& w, const Var& b) {
    if (x->t.ndim() != 1 || w->t.ndim() != 2 || w->t.dim(1) != x->t.dim(0) ||
        b->t.dim(0) != w->t.dim(0))
        throw ArgError("linear: bad shapes x" + shape_str(x->t.shape) + " w" +
                       shape_str(w->t.shape) + " b" + shape_str(b->t.shape));
    const int out_n = w->t.dim(0), in_n = w->t.dim(1);
    Tensor out({out_n});
    for (int o = 0; o < out_n; ++o) {
        const float* wrow = &w->t.v[static_cast<size_t>(o) * in_n];
        double acc = b->t.v[o];
        for (int i = 0; i < in_n; ++i) acc += static_cast<double>(wrow[i]) * x->t.v[i];
        out.v[o] = static_cast<float>(acc);
    }
    return make_op(std::move(out), {x, w, b}, [x, w, b, out_n, in_n](TensorNode& n) {
        for (int o = 0; o < out_n; ++o) {
            const float go = n.t.g[o];
            if (go == 0.0f && !b->requires_grad) continue;
            if (b->requires_grad) b->t.g[o] += go;
            if (go == 0.0f) continue;
            const float* wrow = &w->t.v[static_cast<size_t>(o) * in_n];
            if (x->requires_grad)
                for (int i = 0; i < in_n; ++i) x->t.g[i] += go * wrow[i];
            if (w->requires_grad) {
                float* gw = &w->t.g[static_cast<size_t>(o) * in_n];
                for (int i = 0; i < in_n; ++i) gw[i] += go * x->t.v[i];
            }
        }
    });
}

// --- conv1d -------------------------------------------------------------------

Var conv1d(const Var& x, const Var& w, const Var& b, int stride, int dilation, int pad_left,
           int pad_right) {
    if (x->t.ndim() != 2 || w->t.ndim() != 3)
        throw ArgError("conv1d: expected x(Cin,T), w(Cout,Cin,K), got x" + shape_str(x->t.shape) +
                       " w" + shape_str(w->t.shape));
    const int c_in = x->t.dim(0), t_in = x->t.dim(1);
    const int c_out = w->t.dim(0), k = w->t.dim(2);
    if (w->t.dim(1) != c_in)
        throw ArgError("conv1d: channel mismatch x" + shape_str(x->t.shape) + " w" +
                       shape_str(w->t.shape));
    if (b->t.ndim() != 1 || b->t.dim(0) != c_out) throw ArgError("conv1d: bad bias shape");
    const int span = (k - 1) * dilation;
    const int t_out = (t_in + pad_left + pad_right - span - 1) / stride + 1;
    if (t_out <= 0) throw ArgError("conv1d: empty output for input " + shape_str(x->t.shape));

    Tensor out({c_out, t_out});
    const float* xv = x->t.v.data();
    float* ov = out.v.data();
    for (int co = 0; co < c_out; ++co) {
        float* orow = ov + static_cast<size_t>(co) * t_out;
        std::fill(orow, orow + t_out, b->t.v[co]);
        for (int ci = 0; ci < c_in; ++ci) {
            const float* xrow = xv + static_cast<size_t>(ci) * t_in;
            const float* wrow = &w->t.v[(static_cast<size_t>(co) * c_in + ci) * k];
            for (int kk = 0; kk < k; ++kk) {
                const float wv = wrow[kk];
                if (wv == 0.0f) continue;
                const int off = kk * dilation - pad_left;  // input index = t*stride + off
                if (stride == 1) {
                    const int t0 = std::max(0, -off);
                    const int t1 = std::min(t_out, t_in - off);
                    const float* xs = xrow + t0 + off;
                    float* os = orow + t0;
                    for (int t = 0; t < t1 - t0; ++t) os[t] += wv * xs[t];
                } else {
                    for (int t = 0; t < t_out; ++t) {
                        const int u = t * stride + off;
                        if (u >= 0 && u < t_in) orow[t] += wv * xrow[u];
                    }
                }
            }
        }
    }

    return make_op(std::move(out), {x, w, b},
                   [x, w, b, c_in, c_out, t_in, k, stride, dilation, pad_left](TensorNode& n) {
        const int t_out = n.t.dim(1);
        if (b->requires_grad) {
            for (int co = 0; co < c_out; ++co) {
                const float* grow = &n.t.g[static_cast<size_t>(co) * t_out];
                double acc = 0.0;
                for (int t = 0; t < t_out; ++t) acc += grow[t];
                b->t.g[co] += static_cast<float>(acc);
            }
        }
        for (int co = 0; co < c_out; ++co) {
            const float* grow = &n.t.g[static_cast<size_t>(co) * t_out];
            for (int ci = 0; ci < c_in; ++ci) {
                const float* xrow = &x->t.v[static_cast<size_t>(ci) * t_in];
                float* xgrow = x->requires_grad ? &x->t.g[static_cast<size_t>(ci) * t_in] : nullptr;
                const size_t wbase = (static_cast<size_t>(co) * c_in + ci) * k;
                for (int kk = 0; kk < k; ++kk) {
                    const int off = kk * dilation - pad_left;
                    if (stride == 1) {
                        const int t0 = std::max(0, -off);
                        const int t1 = std::min(t_out, t_in - off);
                        if (w->requires_grad) {
                            const float* xs = xrow + t0 + off;
                            const float* gs = grow + t0;
                            double acc = 0.0;
                            for (int t = 0; t < t1 - t0; ++t)
                                acc += static_cast<double>(gs[t]) * xs[t];
                            w->t.g[wbase + kk] += static_cast<float>(acc);
                        }
                        if (xgrow) {
                            const float wv = w->t.v[wbase + kk];
                            float* xg = xgrow + t0 + off;
                            const float* gs = grow + t0;
                            for (int t = 0; t < t1 - t0; ++t) xg[t] += wv * gs[t];
                        }
                    } else {
                        double acc = 0.0;
                        const float wv = w->t.v[wbase + kk];
                        for (int t = 0; t < t_out; ++t) {
                            const int u = t * stride + off;
                            if (u < 0 || u >= t_in) continue;
                            acc += static_cast<double>(grow[t]) * xrow[u];
                            if (xgrow) xgrow[u] += wv * grow[t];
                        }
                        if (w->requires_grad) w->t.g[wbase + kk] += static_cast<float>(acc);
                    }
                }
            }
        }
    });
}

// --- conv2d -------------------------------------------------------------------

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    if (x->t.ndim() != 3 || w->t.ndim() != 4)
        throw ArgError("conv2d: expected x(Cin,H,W), w(Cout,Cin,Kh,Kw), got x" +
                       shape_str(x->t.shape) + " w" + shape_str(w->t.shape));
    const int c_in = x->t.dim(0), h_in = x->t.dim(1), w_in = x->t.dim(2);
    const int c_out = w->t.dim(0), kh = w->t.dim(2), kw = w->t.dim(3);
    if (w->t.dim(1) != c_in) throw ArgError("conv2d: channel mismatch");
    const int h_out = (h_in + 2 * pad - kh) / stride + 1;
    const int w_out = (w_in + 2 * pad - kw) / stride + 1;
    if (h_out <= 0 || w_out <= 0) throw ArgError("conv2d: empty output");

    Tensor out({c_out, h_out, w_out});
    auto xat = [&](int c, int i, int j) {
        return x->t.v[(static_cast<size_t>(c) * h_in + i) * w_in + j];
    };
    for (int co = 0; co < c_out; ++co) {
        float* oplane = &out.v[static_cast<size_t>(co) * h_out * w_out];
        std::fill(oplane, oplane + static_cast<size_t>(h_out) * w_out, b->t.v[co]);
        for (int ci = 0; ci < c_in; ++ci)
            for (int ki = 0; ki < kh; ++ki)
                for (int kj = 0; kj < kw; ++kj) {
                    const float wv =
                        w->t.v[((static_cast<size_t>(co) * c_in + ci) * kh + ki) * kw + kj];
                    if (wv == 0.0f) continue;
                    for (int oi = 0; oi < h_out; ++oi) {
                        const int ii = oi * stride + ki - pad;
                        if (ii < 0 || ii >= h_in) continue;
                        float* orow = oplane + static_cast<size_t>(oi) * w_out;
                        for (int oj = 0; oj < w_out; ++oj) {
                            const int jj = oj * stride + kj - pad;
                            if (jj >= 0 && jj < w_in) orow[oj] += wv * xat(ci, ii, jj);
                        }
                    }
                }
    }

    return make_op(std::move(out), {x, w, b},
                   [x, w, b, c_in, c_out, h_in, w_in, kh, kw, stride, pad](TensorNode& n) {
        const int h_out = n.t.dim(1), w_out = n.t.dim(2);
        for (int co = 0; co < c_out; ++co) {
            const float* gplane = &n.t.g[static_cast<size_t>(co) * h_out * w_out];
            if (b->requires_grad) {
                double acc = 0.0;
                for (size_t i = 0; i < static_cast<size_t>(h_out) * w_out; ++i) acc += gplane[i];
                b->t.g[co] += static_cast<float>(acc);
            }
            for (int ci = 0; ci < c_in; ++ci)
                for (int ki = 0; ki < kh; ++ki)
                    for (int kj = 0; kj < kw; ++kj) {
                        const size_t widx =
                            ((static_cast<size_t>(co) * c_in + ci) * kh + ki) * kw + kj;
                        const float wv = w->t.v[widx];
                        double wacc = 0.0;
                        for (int oi = 0; oi < h_out; ++oi) {
                            const int ii = oi * stride + ki - pad;
                            if (ii < 0 || ii >= h_in) continue;
                            const float* grow = gplane + static_cast<size_t>(oi) * w_out;
                            const size_t xbase = (static_cast<size_t>(ci) * h_in + ii) * w_in;
                            for (int oj = 0; oj < w_out; ++oj) {
                                const int jj = oj * stride + kj - pad;
                                if (jj < 0 || jj >= w_in) continue;
                                wacc += static_cast<double>(grow[oj]) * x->t.v[xbase + jj];
                                if (x->requires_grad) x->t.g[xbase + jj] += wv * grow[oj];
                            }
                        }
                        if (w->requires_grad) w->t.g[widx] += static_cast<float>(wacc);
                    }
        }
    });
}

Var dropout(const Var& x, double p, bool train, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw ArgError("dropout: p must be in [0,1)");
    if (!train || p == 0.0) return x;
    const float keep_scale = static_cast<float>(1.0 / (1.0 - p));
    auto mask = std::make_shared<std::vector<float>>(x->t.numel());
    Tensor out(x->t.shape);
    for (size_t i = 0; i < out.numel(); ++i) {
        (*mask)[i] = rng.uniform() < p ? 0.0f : keep_scale;
        out.v[i] = x->t.v[i] * (*mask)[i];
    }
    return make_op(std::move(out), {x}, [x, mask](TensorNode& n) {
        for (size_t i = 0; i < n.t.numel(); ++i) x->t.g[i] += n.t.g[i] * (*mask)[i];
    });
}

Var log_softmax(const Var& x) {
    const int ndim = x->t.ndim();
    if (ndim != 1 && ndim != 2) throw ArgError("log_softmax: expected vector or matrix");
    const int rows = ndim == 1 ? 1 : x->t.dim(0);
    const int cols = ndim == 1 ? x->t.dim(0) : x->t.dim(1);
    Tensor out(x->t.shape);
    for (int r = 0; r < rows; ++r) {
        const float* xi = &x->t.v[static_cast<size_t>(r) * cols];
        float* oi = &out.v[static_cast<size_t>(r) * cols];
        float mx = xi[0];
        for (int c = 1; c < cols; ++c) mx = std::max(mx, xi[c]);
        double z = 0.0;
        for (int c = 0; c < cols; ++c) z += std::exp(static_cast<double>(xi[c]) - mx);
        const float lz = static_cast<float>(std::log(z)) + mx;
        for (int c = 0; c < cols; ++c) oi[c] = xi[c] - lz;
    }
    return make_op(std::move(out), {x}, [x, rows, cols](TensorNode& n) {
        for (int r = 0; r < rows; ++r) {
            const float* oi = &n.t.v[static_cast<size_t>(r) * cols];
            const float* gi = &n.t.g[static_cast<size_t>(r) * cols];
            float* xg = &x->t.g[static_cast<size_t>(r) * cols];
            double gsum = 0.0;
            for (int c = 0; c < cols; ++c) gsum += gi[c];
            for (int c = 0; c < cols; ++c)
                xg[c] += gi[c] - static_cast<float>(std::exp(static_cast<double>(oi[c])) * gsum);
        }
    });
}

Var mean_pool_time(const Var& x, int valid_len) {
    if (x->t.ndim() != 2) throw ArgError("mean_pool_time: expected (C,T)");
    const int c_n = x->t.dim(0), t_n = x->t.dim(1);
    const int valid = valid_len > 0 ? std::min(valid_len, t_n) : t_n;
    Tensor out({c_n});
    for (int c = 0; c < c_n; ++c) {
        const float* row = &x->t.v[static_cast<size_t>(c) * t_n];
        double acc = 0.0;
        for (int t = 0; t < valid; ++t) acc += row[t];
        out.v[c] = static_cast<float>(acc / valid);
    }
    return make_op(std::move(out), {x}, [x, c_n, t_n, valid](TensorNode& n) {
        const float inv = 1.0f / static_cast<float>(valid);
        for (int c = 0; c < c_n; ++c) {
            const float go = n.t.g[c] * inv;
            float* row = &x->t.g[static_cast<size_t>(c) * t_n];
            for (int t = 0; t < valid; ++t) row[t] += go;
        }
    });
}

Var last_step_time(const Var& x, int valid_len) {
    if (x->t.ndim() != 2) throw ArgError("last_step_time: expected (C,T)");
    const int c_n = x->t.dim(0), t_n = x->t.dim(1);
    const int idx = (valid_len > 0 ? std::min(valid_len, t_n) : t_n) - 1;
    Tensor out({c_n});
    for (int c = 0; c < c_n; ++c) out.v[c] = x->t.v[static_cast<size_t>(c) * t_n + idx];
    return make_op(std::move(out), {x}, [x, c_n, t_n, idx](TensorNode& n) {
        for (int c = 0; c < c_n; ++c) x->t.g[static_cast<size_t>(c) * t_n + idx] += n.t.g[c];
    });
}

Var reshape(const Var& x, std::vector<int> shape) {
    if (Tensor::numel_of(shape) != x->t.numel())
        throw ArgError("reshape: element count mismatch " + shape_str(x->t.shape) + " -> " +
                       shape_str(shape));
    Tensor out(std::move(shape));
    out.v = x->t.v;
    return make_op(std::move(out), {x}, [x](TensorNode& n) {
        for (size_t i = 0; i < n.t.numel(); ++i) x->t.g[i] += n.t.g[i];
    });
}

Var concat(const Var& a, const Var& b) {
    if (a->t.ndim() != 1 || b->t.ndim() != 1) throw ArgError("concat: expected vectors");
    const int na = a->t.dim(0), nb = b->t.dim(0);
    Tensor out({na + nb});
    std::copy(a->t.v.begin(), a->t.v.end(), out.v.begin());
    std::copy(b->t.v.begin(), b->t.v.end(), out.v.begin() + na);
    return make_op(std::move(out), {a, b}, [a, b, na, nb](TensorNode& n) {
        if (a->requires_grad)
            for (int i = 0; i < na; ++i) a->t.g[i] += n.t.g[i];
        if (b->requires_grad)
            for (int i = 0; i < nb; ++i) b->t.g[i] += n.t.g[na + i];
    });
}

Var upsample_nearest_1d(const Var& x, int factor, int out_len) {
    if (x->t.ndim() != 2) throw ArgError("upsample_nearest_1d: expected (C,T)");
    const int c_n = x->t.dim(0), t_n = x->t.dim(1);
    if (out_len <= 0 || out_len > factor * t_n) throw ArgError("upsample_nearest_1d: bad out_len");
    Tensor out({c_n, out_len});
    for (int c = 0; c < c_n; ++c)
        for (int t = 0; t < out_len; ++t)
            out.v[static_cast<size_t>(c) * out_len + t] =
                x->t.v[static_cast<size_t>(c) * t_n + t / factor];
    return make_op(std::move(out), {x}, [x, c_n, t_n, factor, out_len](TensorNode& n) {
        for (int c = 0; c < c_n; ++c)
            for (int t = 0; t < out_len; ++t)
                x->t.g[static_cast<size_t>(c) * t_n + t / factor] +=
                    n.t.g[static_cast<size_t>(c) * out_len + t];
    });
}

Var upsample_nearest_2d(const Var& x) {
    if (x->t.ndim() != 3) throw ArgError("upsample_nearest_2d: expected (C,H,W)");
    const int c_n = x->t.dim(0), h = x->t.dim(1), w = x->t.dim(2);
    Tensor out({c_n, 2 * h, 2 * w});
    for (int c = 0; c < c_n; ++c)
        for (int i = 0; i < 2 * h; ++i)
            for (int j = 0; j < 2 * w; ++j)
                out.v[(static_cast<size_t>(c) * 2 * h + i) * 2 * w + j] =
                    x->t.v[(static_cast<size_t>(c) * h + i / 2) * w + j / 2];
    return make_op(std::move(out), {x}, [x, c_n, h, w](TensorNode& n) {
        for (int c = 0; c < c_n; ++c)
            for (int i = 0; i < 2 * h; ++i)
                for (int j = 0; j < 2 * w; ++j)
                    x->t.g[(static_cast<size_t>(c) * h + i / 2) * w + j / 2] +=
                        n.t.g[(static_cast<size_t>(c) * 2 * h + i) * 2 * w + j];
    });
}

Var weight_norm(const Var& v, const Var& g) {
    if (v->t.ndim() < 2 || g->t.ndim() != 1 || g->t.dim(0) != v->t.dim(0))
        throw ArgError("weight_norm: expected v(Cout,...), g(Cout)");
    const int c_out = v->t.dim(0);
    const int m = static_cast<int>(v->t.numel()) / c_out;
    Tensor out(v->t.shape);
    auto norms = std::make_shared<std::vector<double>>(c_out);
    for (int c = 0; c < c_out; ++c) {
        const float* row = &v->t.v[static_cast<size_t>(c) * m];
        double ss = 0.0;
        for (int i = 0; i < m; ++i) ss += static_cast<double>(row[i]) * row[i];
        const double nrm = std::sqrt(std::max(ss, 1e-24));
        (*norms)[c] = nrm;
        const float s = static_cast<float>(g->t.v[c] / nrm);
        float* orow = &out.v[static_cast<size_t>(c) * m];
        for (int i = 0; i < m; ++i) orow[i] = row[i] * s;
    }
    return make_op(std::move(out), {v, g}, [v, g, norms, c_out, m](TensorNode& n) {
        for (int c = 0; c < c_out; ++c) {
            const float* vrow = &v->t.v[static_cast<size_t>(c) * m];
            const float* grow = &n.t.g[static_cast<size_t>(c) * m];
            const double nrm = (*norms)[c];
            double dot = 0.0;
            for (int i = 0; i < m; ++i) dot += static_cast<double>(grow[i]) * vrow[i];
            if (g->requires_grad) g->t.g[c] += static_cast<float>(dot / nrm);
            if (v->requires_grad) {
                const double gs = g->t.v[c] / nrm;
                float* vg = &v->t.g[static_cast<size_t>(c) * m];
                for (int i = 0; i < m; ++i)
                    vg[i] += static_cast<float>(gs * (grow[i] - vrow[i] * dot / (nrm * nrm)));
            }
        }
    });
}

Var nll_loss(const Var& log_probs, const std::vector<int>& targets) {
    const int ndim = log_probs->t.ndim();
    if (ndim != 1 && ndim != 2) throw ArgError("nll_loss: expected (C) or (N,C)");
    const int rows = ndim == 1 ? 1 : log_probs->t.dim(0);
    const int cols = ndim == 1 ? log_probs->t.dim(0) : log_probs->t.dim(1);
    if (static_cast<int>(targets.size()) != rows)
        throw ArgError("nll_loss: target count mismatch");
    Tensor out({1});
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) {
        const int t = targets[r];
        if (t < 0 || t >= cols) throw ArgError("nll_loss: target out of range");
        acc -= log_probs->t.v[static_cast<size_t>(r) * cols + t];
    }
    out.v[0] = static_cast<float>(acc / rows);
    return make_op(std::move(out), {log_probs}, [log_probs, targets, rows, cols](TensorNode& n) {
        const float go = n.t.g[0] / static_cast<float>(rows);
        for (int r = 0; r < rows; ++r)
            log_probs->t.g[static_cast<size_t>(r) * cols + targets[r]] -= go;
    });
}

}  // namespace cks::nn
