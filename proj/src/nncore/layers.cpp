#include "min2net/nncore/layers.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

namespace min2net::nn {
namespace {

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MapMat = Eigen::Map<RowMat<S>>;
template <typename S>
using MapConstMat = Eigen::Map<const RowMat<S>>;

struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t long_len = 0;   // time length on the "wide" side (conv input / transposed output)
  std::size_t short_len = 0;  // time length on the "narrow" side
  std::size_t kernel = 0;
  std::size_t wide_ch = 0;    // channels on the wide side
  std::size_t narrow_ch = 0;  // channels on the narrow side
  std::size_t stride = 1;
  SamePadding pad;
};

void check_stride(std::size_t stride) {
  if (stride < 1) throw DimensionError("stride must be >= 1");
}

// Rows t of the column matrix hold x[t*stride + k - pad.left, c] for all (k, c).
template <typename S>
void im2col(const S* x, const ConvGeometry& g, S* col) {
  const std::size_t row_len = g.kernel * g.wide_ch;
  for (std::size_t t = 0; t < g.short_len; ++t) {
    S* row = col + t * row_len;
    for (std::size_t k = 0; k < g.kernel; ++k) {
      const auto src = static_cast<std::ptrdiff_t>(t * g.stride + k) - static_cast<std::ptrdiff_t>(g.pad.left);
      S* dst = row + k * g.wide_ch;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(g.long_len)) {
        std::fill(dst, dst + g.wide_ch, S{0});
      } else {
        const S* s = x + static_cast<std::size_t>(src) * g.wide_ch;
        std::copy(s, s + g.wide_ch, dst);
      }
    }
  }
}

// Adjoint of im2col: scatter-add column rows back onto the wide signal.
template <typename S>
void col2im_add(const S* col, const ConvGeometry& g, S* x) {
  const std::size_t row_len = g.kernel * g.wide_ch;
  for (std::size_t t = 0; t < g.short_len; ++t) {
    const S* row = col + t * row_len;
    for (std::size_t k = 0; k < g.kernel; ++k) {
      const auto dst = static_cast<std::ptrdiff_t>(t * g.stride + k) - static_cast<std::ptrdiff_t>(g.pad.left);
      if (dst < 0 || dst >= static_cast<std::ptrdiff_t>(g.long_len)) continue;
      S* d = x + static_cast<std::size_t>(dst) * g.wide_ch;
      const S* s = row + k * g.wide_ch;
      for (std::size_t c = 0; c < g.wide_ch; ++c) d[c] += s[c];
    }
  }
}

template <typename S>
ConvGeometry conv_geometry(const BasicTensor<S>& input, const BasicTensor<S>& weight, std::size_t stride) {
  require_rank(input.shape(), 4, "conv_time input");
  require_rank(weight.shape(), 4, "conv_time weight");
  check_stride(stride);
  if (input.dim(1) != 1 || weight.dim(0) != 1) throw DimensionError("conv_time expects height-1 tensors");
  ConvGeometry g;
  g.batch = input.dim(0);
  g.long_len = input.dim(2);
  g.kernel = weight.dim(1);
  g.wide_ch = weight.dim(2);
  g.narrow_ch = weight.dim(3);
  g.stride = stride;
  if (input.dim(3) != g.wide_ch) {
    throw DimensionError("conv_time: input has " + std::to_string(input.dim(3)) + " channels, kernel expects " +
                         std::to_string(g.wide_ch));
  }
  if (stride > 1 && g.long_len % stride != 0) {
    throw DimensionError("conv_time: stride " + std::to_string(stride) + " does not divide length " +
                         std::to_string(g.long_len));
  }
  g.short_len = (g.long_len + stride - 1) / stride;
  g.pad = same_padding(g.long_len, g.kernel, stride);
  return g;
}

template <typename S>
ConvGeometry transpose_geometry(const BasicTensor<S>& input, const BasicTensor<S>& weight, std::size_t stride) {
  require_rank(input.shape(), 4, "conv_transpose_time input");
  require_rank(weight.shape(), 4, "conv_transpose_time weight");
  check_stride(stride);
  if (input.dim(1) != 1 || weight.dim(0) != 1) throw DimensionError("conv_transpose_time expects height-1 tensors");
  ConvGeometry g;
  g.batch = input.dim(0);
  g.short_len = input.dim(2);
  g.kernel = weight.dim(1);
  g.wide_ch = weight.dim(2);
  g.narrow_ch = weight.dim(3);
  g.stride = stride;
  if (g.kernel < stride) throw DimensionError("conv_transpose_time: kernel shorter than stride");
  if (input.dim(3) != g.narrow_ch) {
    throw DimensionError("conv_transpose_time: input has " + std::to_string(input.dim(3)) +
                         " channels, kernel expects " + std::to_string(g.narrow_ch));
  }
  g.long_len = g.short_len * stride;
  g.pad = same_padding(g.long_len, g.kernel, stride);
  return g;
}

template <typename S>
void check_bias(const BasicTensor<S>& bias, std::size_t channels, const char* what) {
  if (bias.rank() != 1 || bias.dim(0) != channels) {
    throw DimensionError(std::string(what) + ": bias shape " + shape_str(bias.shape()) + " does not match " +
                         std::to_string(channels) + " output channels");
  }
}

template <typename S>
void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": shape " + shape_str(a) + " vs " + shape_str(b));
}

}  // namespace

SamePadding same_padding(std::size_t length, std::size_t kernel, std::size_t stride) {
  const std::size_t out = (length + stride - 1) / stride;
  const std::size_t needed = (out - 1) * stride + kernel;
  const std::size_t total = needed > length ? needed - length : 0;
  return {total / 2, total - total / 2};
}

template <typename S>
BasicTensor<S> conv_time(const BasicTensor<S>& input, const BasicTensor<S>& weight, const BasicTensor<S>& bias,
                         std::size_t stride) {
  const ConvGeometry g = conv_geometry(input, weight, stride);
  check_bias(bias, g.narrow_ch, "conv_time");
  BasicTensor<S> out({g.batch, 1, g.short_len, g.narrow_ch});
  std::vector<S> col(g.short_len * g.kernel * g.wide_ch);
  MapConstMat<S> w(weight.data(), g.kernel * g.wide_ch, g.narrow_ch);
  Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>> b(bias.data(), g.narrow_ch);
  for (std::size_t n = 0; n < g.batch; ++n) {
    im2col(input.data() + n * g.long_len * g.wide_ch, g, col.data());
    MapConstMat<S> c(col.data(), g.short_len, g.kernel * g.wide_ch);
    MapMat<S> y(out.data() + n * g.short_len * g.narrow_ch, g.short_len, g.narrow_ch);
    y.noalias() = c * w;
    y.rowwise() += b;
  }
  return out;
}

template <typename S>
ConvGrads<S> conv_time_backward(const BasicTensor<S>& input, const BasicTensor<S>& weight, std::size_t stride,
                                const BasicTensor<S>& grad_output) {
  const ConvGeometry g = conv_geometry(input, weight, stride);
  require_same_shape<S>(grad_output.shape(), {g.batch, 1, g.short_len, g.narrow_ch}, "conv_time_backward");
  ConvGrads<S> grads{BasicTensor<S>(input.shape()), BasicTensor<S>(weight.shape()), BasicTensor<S>({g.narrow_ch})};
  const std::size_t kc = g.kernel * g.wide_ch;
  std::vector<S> col(g.short_len * kc);
  std::vector<S> dcol(g.short_len * kc);
  MapConstMat<S> w(weight.data(), kc, g.narrow_ch);
  MapMat<S> dw(grads.weight.data(), kc, g.narrow_ch);
  Eigen::Map<Eigen::Matrix<S, 1, Eigen::Dynamic>> db(grads.bias.data(), g.narrow_ch);
  for (std::size_t n = 0; n < g.batch; ++n) {
    im2col(input.data() + n * g.long_len * g.wide_ch, g, col.data());
    MapConstMat<S> c(col.data(), g.short_len, kc);
    MapConstMat<S> dy(grad_output.data() + n * g.short_len * g.narrow_ch, g.short_len, g.narrow_ch);
    dw.noalias() += c.transpose() * dy;
    db += dy.colwise().sum();
    MapMat<S> dc(dcol.data(), g.short_len, kc);
    dc.noalias() = dy * w.transpose();
    col2im_add(dcol.data(), g, grads.input.data() + n * g.long_len * g.wide_ch);
  }
  return grads;
}

template <typename S>
BasicTensor<S> conv_transpose_time(const BasicTensor<S>& input, const BasicTensor<S>& weight,
                                   const BasicTensor<S>& bias, std::size_t stride) {
  const ConvGeometry g = transpose_geometry(input, weight, stride);
  check_bias(bias, g.wide_ch, "conv_transpose_time");
  BasicTensor<S> out({g.batch, 1, g.long_len, g.wide_ch});
  const std::size_t kc = g.kernel * g.wide_ch;
  std::vector<S> col(g.short_len * kc);
  MapConstMat<S> w(weight.data(), kc, g.narrow_ch);
  for (std::size_t n = 0; n < g.batch; ++n) {
    MapConstMat<S> v(input.data() + n * g.short_len * g.narrow_ch, g.short_len, g.narrow_ch);
    MapMat<S> c(col.data(), g.short_len, kc);
    c.noalias() = v * w.transpose();
    S* y = out.data() + n * g.long_len * g.wide_ch;
    col2im_add(col.data(), g, y);
    for (std::size_t t = 0; t < g.long_len; ++t) {
      for (std::size_t ch = 0; ch < g.wide_ch; ++ch) y[t * g.wide_ch + ch] += bias[ch];
    }
  }
  return out;
}

template <typename S>
ConvGrads<S> conv_transpose_time_backward(const BasicTensor<S>& input, const BasicTensor<S>& weight,
                                          std::size_t stride, const BasicTensor<S>& grad_output) {
  const ConvGeometry g = transpose_geometry(input, weight, stride);
  require_same_shape<S>(grad_output.shape(), {g.batch, 1, g.long_len, g.wide_ch}, "conv_transpose_time_backward");
  ConvGrads<S> grads{BasicTensor<S>(input.shape()), BasicTensor<S>(weight.shape()), BasicTensor<S>({g.wide_ch})};
  const std::size_t kc = g.kernel * g.wide_ch;
  std::vector<S> col(g.short_len * kc);
  MapConstMat<S> w(weight.data(), kc, g.narrow_ch);
  MapMat<S> dw(grads.weight.data(), kc, g.narrow_ch);
  for (std::size_t n = 0; n < g.batch; ++n) {
    const S* dy = grad_output.data() + n * g.long_len * g.wide_ch;
    im2col(dy, g, col.data());
    MapConstMat<S> a(col.data(), g.short_len, kc);
    MapConstMat<S> v(input.data() + n * g.short_len * g.narrow_ch, g.short_len, g.narrow_ch);
    MapMat<S> dv(grads.input.data() + n * g.short_len * g.narrow_ch, g.short_len, g.narrow_ch);
    dv.noalias() = a * w;
    dw.noalias() += a.transpose() * v;
    for (std::size_t t = 0; t < g.long_len; ++t) {
      for (std::size_t ch = 0; ch < g.wide_ch; ++ch) grads.bias[ch] += dy[t * g.wide_ch + ch];
    }
  }
  return grads;
}

template <typename S>
BasicTensor<S> batch_norm(const BasicTensor<S>& input, const BasicTensor<S>& gamma, const BasicTensor<S>& beta,
                          Mode mode, BatchNormState<S>& state, BatchNormCache<S>* cache) {
  require_rank(input.shape(), 4, "batch_norm input");
  const std::size_t channels = input.dim(3);
  if (gamma.size() != channels || beta.size() != channels || state.running_mean.size() != channels ||
      state.running_var.size() != channels) {
    throw DimensionError("batch_norm: parameter width does not match " + std::to_string(channels) + " channels");
  }
  const std::size_t rows = input.size() / channels;
  BasicTensor<S> out(input.shape());
  std::vector<S> inv_std(channels);
  std::vector<S> mean(channels);

  if (mode == Mode::Train) {
    if (input.dim(0) < 2) throw DimensionError("batch_norm: train mode needs a batch of at least 2");
    std::vector<double> sum(channels, 0.0);
    std::vector<double> sq(channels, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < channels; ++c) sum[c] += input[r * channels + c];
    }
    for (std::size_t c = 0; c < channels; ++c) sum[c] /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double d = input[r * channels + c] - sum[c];
        sq[c] += d * d;
      }
    }
    const double m = state.momentum;
    for (std::size_t c = 0; c < channels; ++c) {
      const double var = sq[c] / static_cast<double>(rows);
      mean[c] = static_cast<S>(sum[c]);
      inv_std[c] = static_cast<S>(1.0 / std::sqrt(var + state.epsilon));
      const double unbiased = var * static_cast<double>(rows) / static_cast<double>(rows - 1);
      state.running_mean[c] = static_cast<S>(m * state.running_mean[c] + (1.0 - m) * sum[c]);
      state.running_var[c] = static_cast<S>(m * state.running_var[c] + (1.0 - m) * unbiased);
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mean[c] = state.running_mean[c];
      inv_std[c] = static_cast<S>(1.0 / std::sqrt(static_cast<double>(state.running_var[c]) + state.epsilon));
    }
  }

  BasicTensor<S> normalized(input.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      normalized[i] = (input[i] - mean[c]) * inv_std[c];
      out[i] = gamma[c] * normalized[i] + beta[c];
    }
  }
  if (cache) {
    cache->mode = mode;
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

template <typename S>
BatchNormGrads<S> batch_norm_backward(const BatchNormCache<S>& cache, const BasicTensor<S>& gamma,
                                      const BasicTensor<S>& grad_output) {
  require_same_shape<S>(grad_output.shape(), cache.normalized.shape(), "batch_norm_backward");
  const std::size_t channels = gamma.size();
  const std::size_t rows = grad_output.size() / channels;
  BatchNormGrads<S> g{BasicTensor<S>(grad_output.shape()), BasicTensor<S>({channels}), BasicTensor<S>({channels})};
  std::vector<double> sum_dxhat(channels, 0.0);
  std::vector<double> sum_dxhat_xhat(channels, 0.0);
  std::vector<double> dgamma(channels, 0.0);
  std::vector<double> dbeta(channels, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      const double dy = grad_output[i];
      const double xh = cache.normalized[i];
      dgamma[c] += dy * xh;
      dbeta[c] += dy;
      sum_dxhat[c] += dy * gamma[c];
      sum_dxhat_xhat[c] += dy * gamma[c] * xh;
    }
  }
  for (std::size_t c = 0; c < channels; ++c) {
    g.gamma[c] = static_cast<S>(dgamma[c]);
    g.beta[c] = static_cast<S>(dbeta[c]);
  }
  const double n = static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      const double dxhat = static_cast<double>(grad_output[i]) * gamma[c];
      if (cache.mode == Mode::Train) {
        g.input[i] = static_cast<S>(cache.inv_std[c] / n *
                                    (n * dxhat - sum_dxhat[c] - cache.normalized[i] * sum_dxhat_xhat[c]));
      } else {
        g.input[i] = static_cast<S>(dxhat * cache.inv_std[c]);
      }
    }
  }
  return g;
}

template <typename S>
BasicTensor<S> avg_pool_time(const BasicTensor<S>& input, std::size_t pool) {
  require_rank(input.shape(), 4, "avg_pool_time input");
  if (pool < 1 || input.dim(2) % pool != 0) {
    throw DimensionError("avg_pool_time: pool " + std::to_string(pool) + " does not divide length " +
                         std::to_string(input.dim(2)));
  }
  const std::size_t batch = input.dim(0), len = input.dim(2), ch = input.dim(3), out_len = len / pool;
  BasicTensor<S> out({batch, 1, out_len, ch});
  const S scale = S{1} / static_cast<S>(pool);
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t t = 0; t < out_len; ++t) {
      S* dst = out.data() + (n * out_len + t) * ch;
      for (std::size_t p = 0; p < pool; ++p) {
        const S* src = input.data() + (n * len + t * pool + p) * ch;
        for (std::size_t c = 0; c < ch; ++c) dst[c] += src[c];
      }
      for (std::size_t c = 0; c < ch; ++c) dst[c] *= scale;
    }
  }
  return out;
}

template <typename S>
BasicTensor<S> avg_pool_time_backward(const Shape& input_shape, std::size_t pool, const BasicTensor<S>& grad_output) {
  require_rank(input_shape, 4, "avg_pool_time_backward");
  if (pool < 1 || input_shape[2] % pool != 0) throw DimensionError("avg_pool_time_backward: bad pool size");
  const std::size_t batch = input_shape[0], len = input_shape[2], ch = input_shape[3], out_len = len / pool;
  require_same_shape<S>(grad_output.shape(), {batch, 1, out_len, ch}, "avg_pool_time_backward");
  BasicTensor<S> dx(input_shape);
  const S scale = S{1} / static_cast<S>(pool);
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t t = 0; t < out_len; ++t) {
      const S* g = grad_output.data() + (n * out_len + t) * ch;
      for (std::size_t p = 0; p < pool; ++p) {
        S* dst = dx.data() + (n * len + t * pool + p) * ch;
        for (std::size_t c = 0; c < ch; ++c) dst[c] = g[c] * scale;
      }
    }
  }
  return dx;
}

template <typename S>
BasicTensor<S> fully_connected(const BasicTensor<S>& input, const BasicTensor<S>& weight, const BasicTensor<S>& bias) {
  require_rank(input.shape(), 2, "fully_connected input");
  require_rank(weight.shape(), 2, "fully_connected weight");
  const std::size_t batch = input.dim(0), din = input.dim(1), dout = weight.dim(1);
  if (weight.dim(0) != din) {
    throw DimensionError("fully_connected: input width " + std::to_string(din) + " vs weight rows " +
                         std::to_string(weight.dim(0)));
  }
  check_bias(bias, dout, "fully_connected");
  BasicTensor<S> out({batch, dout});
  MapConstMat<S> x(input.data(), batch, din);
  MapConstMat<S> w(weight.data(), din, dout);
  MapMat<S> y(out.data(), batch, dout);
  y.noalias() = x * w;
  y.rowwise() += Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>>(bias.data(), dout);
  return out;
}

template <typename S>
DenseGrads<S> fully_connected_backward(const BasicTensor<S>& input, const BasicTensor<S>& weight,
                                       const BasicTensor<S>& grad_output) {
  const std::size_t batch = input.dim(0), din = input.dim(1), dout = weight.dim(1);
  require_same_shape<S>(grad_output.shape(), {batch, dout}, "fully_connected_backward");
  DenseGrads<S> g{BasicTensor<S>(input.shape()), BasicTensor<S>(weight.shape()), BasicTensor<S>({dout})};
  MapConstMat<S> x(input.data(), batch, din);
  MapConstMat<S> w(weight.data(), din, dout);
  MapConstMat<S> dy(grad_output.data(), batch, dout);
  MapMat<S>(g.input.data(), batch, din).noalias() = dy * w.transpose();
  MapMat<S>(g.weight.data(), din, dout).noalias() = x.transpose() * dy;
  Eigen::Map<Eigen::Matrix<S, 1, Eigen::Dynamic>>(g.bias.data(), dout) = dy.colwise().sum();
  return g;
}

template <typename S>
BasicTensor<S> elu(const BasicTensor<S>& input) {
  BasicTensor<S> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const S x = input[i];
    out[i] = x > S{0} ? x : std::expm1(x);
  }
  return out;
}

template <typename S>
BasicTensor<S> elu_backward(const BasicTensor<S>& input, const BasicTensor<S>& grad_output) {
  require_same_shape<S>(grad_output.shape(), input.shape(), "elu_backward");
  BasicTensor<S> dx(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const S x = input[i];
    dx[i] = grad_output[i] * (x > S{0} ? S{1} : std::exp(x));
  }
  return dx;
}

template <typename S>
BasicTensor<S> softmax(const BasicTensor<S>& input) {
  require_rank(input.shape(), 2, "softmax input");
  const std::size_t rows = input.dim(0), cols = input.dim(1);
  BasicTensor<S> out(input.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const S* x = input.data() + r * cols;
    S* y = out.data() + r * cols;
    const S mx = *std::max_element(x, x + cols);
    S sum{0};
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      sum += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= sum;
  }
  return out;
}

template <typename S>
BasicTensor<S> softmax_backward(const BasicTensor<S>& output, const BasicTensor<S>& grad_output) {
  require_same_shape<S>(grad_output.shape(), output.shape(), "softmax_backward");
  const std::size_t rows = output.dim(0), cols = output.dim(1);
  BasicTensor<S> dx(output.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const S* y = output.data() + r * cols;
    const S* g = grad_output.data() + r * cols;
    S dot{0};
    for (std::size_t c = 0; c < cols; ++c) dot += y[c] * g[c];
    for (std::size_t c = 0; c < cols; ++c) dx[r * cols + c] = y[c] * (g[c] - dot);
  }
  return dx;
}

#define MIN2NET_INSTANTIATE_LAYERS(S)                                                                                \
  template BasicTensor<S> conv_time(const BasicTensor<S>&, const BasicTensor<S>&, const BasicTensor<S>&,            \
                                    std::size_t);                                                                    \
  template ConvGrads<S> conv_time_backward(const BasicTensor<S>&, const BasicTensor<S>&, std::size_t,               \
                                           const BasicTensor<S>&);                                                   \
  template BasicTensor<S> conv_transpose_time(const BasicTensor<S>&, const BasicTensor<S>&, const BasicTensor<S>&,  \
                                              std::size_t);                                                          \
  template ConvGrads<S> conv_transpose_time_backward(const BasicTensor<S>&, const BasicTensor<S>&, std::size_t,     \
                                                     const BasicTensor<S>&);                                         \
  template BasicTensor<S> batch_norm(const BasicTensor<S>&, const BasicTensor<S>&, const BasicTensor<S>&, Mode,     \
                                     BatchNormState<S>&, BatchNormCache<S>*);                                        \
  template BatchNormGrads<S> batch_norm_backward(const BatchNormCache<S>&, const BasicTensor<S>&,                   \
                                                 const BasicTensor<S>&);                                             \
  template BasicTensor<S> avg_pool_time(const BasicTensor<S>&, std::size_t);                                        \
  template BasicTensor<S> avg_pool_time_backward(const Shape&, std::size_t, const BasicTensor<S>&);                 \
  template BasicTensor<S> fully_connected(const BasicTensor<S>&, const BasicTensor<S>&, const BasicTensor<S>&);     \
  template DenseGrads<S> fully_connected_backward(const BasicTensor<S>&, const BasicTensor<S>&,                     \
                                                  const BasicTensor<S>&);                                            \
  template BasicTensor<S> elu(const BasicTensor<S>&);                                                               \
  template BasicTensor<S> elu_backward(const BasicTensor<S>&, const BasicTensor<S>&);                               \
  template BasicTensor<S> softmax(const BasicTensor<S>&);                                                           \
  template BasicTensor<S> softmax_backward(const BasicTensor<S>&, const BasicTensor<S>&);

MIN2NET_INSTANTIATE_LAYERS(float)
MIN2NET_INSTANTIATE_LAYERS(double)

}  // namespace min2net::nn
