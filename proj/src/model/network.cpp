#include "min2net/model/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "min2net/errors.hpp"
#include "min2net/model/losses.hpp"

namespace min2net::model {

void Min2NetConfig::validate() const {
  if (channels < 1) throw ConfigError("channels must be >= 1");
  if (samples < 100 || samples % 100 != 0) {
    throw ConfigError("samples (T=" + std::to_string(samples) + ") must be a positive multiple of 100");
  }
  if (samples / 100 > kDeconv2Kernel) throw ConfigError("samples / 100 must not exceed the decoder kernel (32)");
  if (latent < 1) throw ConfigError("latent width must be >= 1");
  if (classes < 2) throw ConfigError("classes must be >= 2");
  if (!(margin > 0.0)) throw ConfigError("margin must be > 0");
  if (beta_mse < 0.0 || beta_triplet < 0.0 || beta_ce < 0.0) throw ConfigError("loss weights must be >= 0");
  if (beta_mse == 0.0 && beta_triplet == 0.0 && beta_ce == 0.0) throw ConfigError("loss weights are all zero");
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) throw ConfigError("bn_momentum must be in [0, 1)");
  if (!(bn_epsilon > 0.0)) throw ConfigError("bn_epsilon must be > 0");
}

template <typename S>
std::array<ParamTensor<S>*, kParamCount> Min2NetParams<S>::parameters() {
  return {&conv1_w,  &conv1_b,  &bn1_gamma, &bn1_beta,  &conv2_w,   &conv2_b,   &bn2_gamma, &bn2_beta, &latent_w,
          &latent_b, &dec_w,    &dec_b,     &deconv1_w, &deconv1_b, &deconv2_w, &deconv2_b, &cls_w,    &cls_b};
}

template <typename S>
std::array<const ParamTensor<S>*, kParamCount> Min2NetParams<S>::parameters() const {
  return {&conv1_w,  &conv1_b,  &bn1_gamma, &bn1_beta,  &conv2_w,   &conv2_b,   &bn2_gamma, &bn2_beta, &latent_w,
          &latent_b, &dec_w,    &dec_b,     &deconv1_w, &deconv1_b, &deconv2_w, &deconv2_b, &cls_w,    &cls_b};
}

template <typename S>
std::size_t Min2NetParams<S>::trainable_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

template <typename S>
void Min2NetParams<S>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename S>
template <typename T>
Min2NetParams<T> Min2NetParams<S>::cast() const {
  Min2NetParams<T> out;
  out.config = config;
  out.seed = seed;
  auto dst = out.parameters();
  auto src = parameters();
  for (std::size_t i = 0; i < kParamCount; ++i) *dst[i] = ParamTensor<T>(src[i]->name, src[i]->value.template cast<T>());
  auto cast_bn = [](const nn::BatchNormState<S>& s) {
    nn::BatchNormState<T> d;
    d.running_mean = s.running_mean.template cast<T>();
    d.running_var = s.running_var.template cast<T>();
    d.momentum = s.momentum;
    d.epsilon = s.epsilon;
    return d;
  };
  out.bn1 = cast_bn(bn1);
  out.bn2 = cast_bn(bn2);
  return out;
}

namespace {

template <typename S>
ParamTensor<S> glorot(std::string name, nn::Shape shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  BasicTensor<S> v(std::move(shape));
  for (auto& x : v.values()) x = static_cast<S>(dist(rng));
  return ParamTensor<S>(std::move(name), std::move(v));
}

template <typename S>
ParamTensor<S> constant(std::string name, std::size_t n, S value) {
  return ParamTensor<S>(std::move(name), BasicTensor<S>({n}, value));
}

template <typename S>
void add_into(BasicTensor<S>& dst, const BasicTensor<S>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename S>
BasicTensor<S> scaled(const BasicTensor<S>& t, double factor) {
  BasicTensor<S> out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<S>(t[i] * factor);
  return out;
}

void record(ShapeTrace* trace, const char* name, const nn::Shape& shape) {
  if (trace) trace->emplace_back(name, shape);
}

}  // namespace

template <typename S>
Min2NetParams<S> build(const Min2NetConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t C = config.channels, z = config.latent, N = config.classes, F = kConv2Filters;
  std::mt19937_64 rng(seed);
  Min2NetParams<S> p;
  p.config = config;
  p.seed = seed;
  p.conv1_w = glorot<S>("encoder.conv1.kernel", {1, kConv1Kernel, C, C}, kConv1Kernel * C, kConv1Kernel * C, rng);
  p.conv1_b = constant<S>("encoder.conv1.bias", C, S{0});
  p.bn1_gamma = constant<S>("encoder.bn1.gamma", C, S{1});
  p.bn1_beta = constant<S>("encoder.bn1.beta", C, S{0});
  p.conv2_w = glorot<S>("encoder.conv2.kernel", {1, kConv2Kernel, C, F}, kConv2Kernel * C, kConv2Kernel * F, rng);
  p.conv2_b = constant<S>("encoder.conv2.bias", F, S{0});
  p.bn2_gamma = constant<S>("encoder.bn2.gamma", F, S{1});
  p.bn2_beta = constant<S>("encoder.bn2.beta", F, S{0});
  p.latent_w = glorot<S>("latent.kernel", {kFlatWidth, z}, kFlatWidth, z, rng);
  p.latent_b = constant<S>("latent.bias", z, S{0});
  p.dec_w = glorot<S>("decoder.dense.kernel", {z, kFlatWidth}, z, kFlatWidth, rng);
  p.dec_b = constant<S>("decoder.dense.bias", kFlatWidth, S{0});
  p.deconv1_w =
      glorot<S>("decoder.deconv1.kernel", {1, kDeconv1Kernel, F, F}, kDeconv1Kernel * F, kDeconv1Kernel * F, rng);
  p.deconv1_b = constant<S>("decoder.deconv1.bias", F, S{0});
  p.deconv2_w =
      glorot<S>("decoder.deconv2.kernel", {1, kDeconv2Kernel, C, F}, kDeconv2Kernel * C, kDeconv2Kernel * F, rng);
  p.deconv2_b = constant<S>("decoder.deconv2.bias", C, S{0});
  p.cls_w = glorot<S>("classifier.kernel", {z, N}, z, N, rng);
  p.cls_b = constant<S>("classifier.bias", N, S{0});
  p.bn1 = nn::BatchNormState<S>(C, config.bn_momentum, config.bn_epsilon);
  p.bn2 = nn::BatchNormState<S>(F, config.bn_momentum, config.bn_epsilon);
  return p;
}

template <typename S>
BasicTensor<S> encode(Min2NetParams<S>& params, const BasicTensor<S>& x, Mode mode, EncodeCache<S>* cache,
                      ShapeTrace* trace) {
  const auto& cfg = params.config;
  nn::require_rank(x.shape(), 4, "encode input");
  if (x.dim(1) != 1 || x.dim(2) != cfg.samples || x.dim(3) != cfg.channels) {
    throw DimensionError("encode: input " + nn::shape_str(x.shape()) + " does not match (B,1," +
                         std::to_string(cfg.samples) + "," + std::to_string(cfg.channels) + ")");
  }
  const std::size_t B = x.dim(0);
  record(trace, "input", {1, cfg.samples, cfg.channels});

  BasicTensor<S> c1 = nn::conv_time(x, params.conv1_w.value, params.conv1_b.value, 1);
  BasicTensor<S> a1 = nn::elu(c1);
  record(trace, "conv1", {1, a1.dim(2), a1.dim(3)});
  nn::BatchNormCache<S> bn1c;
  BasicTensor<S> n1 = nn::batch_norm(a1, params.bn1_gamma.value, params.bn1_beta.value, mode, params.bn1, &bn1c);
  record(trace, "bn1", {1, n1.dim(2), n1.dim(3)});
  BasicTensor<S> p1 = nn::avg_pool_time(n1, cfg.first_pool());
  record(trace, "pool1", {1, p1.dim(2), p1.dim(3)});

  BasicTensor<S> c2 = nn::conv_time(p1, params.conv2_w.value, params.conv2_b.value, 1);
  BasicTensor<S> a2 = nn::elu(c2);
  record(trace, "conv2", {1, a2.dim(2), a2.dim(3)});
  nn::BatchNormCache<S> bn2c;
  BasicTensor<S> n2 = nn::batch_norm(a2, params.bn2_gamma.value, params.bn2_beta.value, mode, params.bn2, &bn2c);
  record(trace, "bn2", {1, n2.dim(2), n2.dim(3)});
  BasicTensor<S> p2 = nn::avg_pool_time(n2, 4);
  record(trace, "pool2", {1, p2.dim(2), p2.dim(3)});

  BasicTensor<S> flat = p2.reshaped({B, kFlatWidth});
  record(trace, "flatten", {flat.dim(1)});
  BasicTensor<S> z = nn::fully_connected(flat, params.latent_w.value, params.latent_b.value);
  record(trace, "latent", {z.dim(1)});

  if (cache) {
    cache->input = x;
    cache->conv1_out = std::move(c1);
    cache->bn1_shape = n1.shape();
    cache->bn1 = std::move(bn1c);
    cache->pool1_out = std::move(p1);
    cache->conv2_out = std::move(c2);
    cache->bn2_shape = n2.shape();
    cache->bn2 = std::move(bn2c);
    cache->flat = std::move(flat);
  }
  return z;
}

template <typename S>
BasicTensor<S> decode(const Min2NetParams<S>& params, const BasicTensor<S>& latent, DecodeCache<S>* cache,
                      ShapeTrace* trace) {
  const auto& cfg = params.config;
  nn::require_rank(latent.shape(), 2, "decode latent");
  if (latent.dim(1) != cfg.latent) {
    throw DimensionError("decode: latent width " + std::to_string(latent.dim(1)) + " but model expects " +
                         std::to_string(cfg.latent));
  }
  const std::size_t B = latent.dim(0);
  BasicTensor<S> d = nn::fully_connected(latent, params.dec_w.value, params.dec_b.value);
  record(trace, "decoder.dense", {d.dim(1)});
  BasicTensor<S> r = d.reshaped({B, 1, kPooledLength, kConv2Filters});
  record(trace, "reshape", {1, kPooledLength, kConv2Filters});
  BasicTensor<S> u1 = nn::conv_transpose_time(r, params.deconv1_w.value, params.deconv1_b.value, 4);
  BasicTensor<S> e1 = nn::elu(u1);
  record(trace, "deconv1", {1, e1.dim(2), e1.dim(3)});
  BasicTensor<S> u2 =
      nn::conv_transpose_time(e1, params.deconv2_w.value, params.deconv2_b.value, cfg.first_pool());
  BasicTensor<S> x_hat = nn::elu(u2);
  record(trace, "deconv2", {1, x_hat.dim(2), x_hat.dim(3)});
  if (cache) {
    cache->latent = latent;
    cache->reshaped = std::move(r);
    cache->deconv1_out = std::move(u1);
    cache->act1 = std::move(e1);
    cache->deconv2_out = std::move(u2);
  }
  return x_hat;
}

template <typename S>
BasicTensor<S> classify(const Min2NetParams<S>& params, const BasicTensor<S>& latent, ClassifyCache<S>* cache) {
  nn::require_rank(latent.shape(), 2, "classify latent");
  if (latent.dim(1) != params.config.latent) {
    throw DimensionError("classify: latent width " + std::to_string(latent.dim(1)) + " but model expects " +
                         std::to_string(params.config.latent));
  }
  BasicTensor<S> probs = nn::softmax(nn::fully_connected(latent, params.cls_w.value, params.cls_b.value));
  if (cache) {
    cache->latent = latent;
    cache->probs = probs;
  }
  return probs;
}

template <typename S>
BasicTensor<S> encode_backward(Min2NetParams<S>& params, const EncodeCache<S>& cache,
                               const BasicTensor<S>& grad_latent) {
  const std::size_t B = cache.input.dim(0);
  auto fc = nn::fully_connected_backward(cache.flat, params.latent_w.value, grad_latent);
  add_into(params.latent_w.grad, fc.weight);
  add_into(params.latent_b.grad, fc.bias);

  BasicTensor<S> d_p2 = fc.input.reshaped({B, 1, kPooledLength, kConv2Filters});
  BasicTensor<S> d_n2 = nn::avg_pool_time_backward(cache.bn2_shape, 4, d_p2);
  auto bn2 = nn::batch_norm_backward(cache.bn2, params.bn2_gamma.value, d_n2);
  add_into(params.bn2_gamma.grad, bn2.gamma);
  add_into(params.bn2_beta.grad, bn2.beta);
  BasicTensor<S> d_c2 = nn::elu_backward(cache.conv2_out, bn2.input);
  auto conv2 = nn::conv_time_backward(cache.pool1_out, params.conv2_w.value, 1, d_c2);
  add_into(params.conv2_w.grad, conv2.weight);
  add_into(params.conv2_b.grad, conv2.bias);

  BasicTensor<S> d_n1 = nn::avg_pool_time_backward(cache.bn1_shape, params.config.first_pool(), conv2.input);
  auto bn1 = nn::batch_norm_backward(cache.bn1, params.bn1_gamma.value, d_n1);
  add_into(params.bn1_gamma.grad, bn1.gamma);
  add_into(params.bn1_beta.grad, bn1.beta);
  BasicTensor<S> d_c1 = nn::elu_backward(cache.conv1_out, bn1.input);
  auto conv1 = nn::conv_time_backward(cache.input, params.conv1_w.value, 1, d_c1);
  add_into(params.conv1_w.grad, conv1.weight);
  add_into(params.conv1_b.grad, conv1.bias);
  return std::move(conv1.input);
}

template <typename S>
BasicTensor<S> decode_backward(Min2NetParams<S>& params, const DecodeCache<S>& cache,
                               const BasicTensor<S>& grad_recon) {
  const std::size_t B = cache.latent.dim(0);
  BasicTensor<S> d_u2 = nn::elu_backward(cache.deconv2_out, grad_recon);
  auto dc2 = nn::conv_transpose_time_backward(cache.act1, params.deconv2_w.value, params.config.first_pool(), d_u2);
  add_into(params.deconv2_w.grad, dc2.weight);
  add_into(params.deconv2_b.grad, dc2.bias);
  BasicTensor<S> d_u1 = nn::elu_backward(cache.deconv1_out, dc2.input);
  auto dc1 = nn::conv_transpose_time_backward(cache.reshaped, params.deconv1_w.value, 4, d_u1);
  add_into(params.deconv1_w.grad, dc1.weight);
  add_into(params.deconv1_b.grad, dc1.bias);
  BasicTensor<S> d_d = dc1.input.reshaped({B, kFlatWidth});
  auto fc = nn::fully_connected_backward(cache.latent, params.dec_w.value, d_d);
  add_into(params.dec_w.grad, fc.weight);
  add_into(params.dec_b.grad, fc.bias);
  return std::move(fc.input);
}

template <typename S>
BasicTensor<S> classify_backward(Min2NetParams<S>& params, const ClassifyCache<S>& cache,
                                 const BasicTensor<S>& grad_probs) {
  BasicTensor<S> d_logits = nn::softmax_backward(cache.probs, grad_probs);
  auto fc = nn::fully_connected_backward(cache.latent, params.cls_w.value, d_logits);
  add_into(params.cls_w.grad, fc.weight);
  add_into(params.cls_b.grad, fc.bias);
  return std::move(fc.input);
}

template <typename S>
LossBreakdown forward_losses(Min2NetParams<S>& params, const BasicTensor<S>& x, std::span<const int> labels, Mode mode,
                             bool accumulate_grads) {
  const auto& cfg = params.config;
  EncodeCache<S> ec;
  DecodeCache<S> dc;
  ClassifyCache<S> cc;
  BasicTensor<S> z = encode(params, x, mode, &ec);
  BasicTensor<S> x_hat = decode(params, z, &dc);
  BasicTensor<S> probs = classify(params, z, &cc);

  LossBreakdown out;
  auto mse = mse_loss(x, x_hat, cfg.mse_elementwise);
  auto ce = cross_entropy_loss(labels, probs);
  out.mse = mse.value;
  out.ce = ce.value;
  LossGrad<S> trip;
  const bool use_triplet = cfg.beta_triplet > 0.0;
  if (use_triplet) {
    trip = triplet_semihard_loss(z, labels, cfg.margin);
    out.triplet = trip.value;
  }
  out.total = total_loss(out.mse, out.triplet, out.ce, cfg);

  if (accumulate_grads) {
    BasicTensor<S> dz = decode_backward(params, dc, scaled(mse.grad, cfg.beta_mse));
    add_into(dz, classify_backward(params, cc, scaled(ce.grad, cfg.beta_ce)));
    if (use_triplet) add_into(dz, scaled(trip.grad, cfg.beta_triplet));
    encode_backward(params, ec, dz);
  }
  return out;
}

template <typename S>
BasicTensor<S> predict_proba(Min2NetParams<S>& params, const BasicTensor<S>& x) {
  return classify(params, encode(params, x, Mode::Infer));
}

#define MIN2NET_INSTANTIATE_NETWORK(S)                                                                              \
  template struct Min2NetParams<S>;                                                                                 \
  template Min2NetParams<S> build(const Min2NetConfig&, std::uint64_t);                                             \
  template BasicTensor<S> encode(Min2NetParams<S>&, const BasicTensor<S>&, Mode, EncodeCache<S>*, ShapeTrace*);     \
  template BasicTensor<S> decode(const Min2NetParams<S>&, const BasicTensor<S>&, DecodeCache<S>*, ShapeTrace*);     \
  template BasicTensor<S> classify(const Min2NetParams<S>&, const BasicTensor<S>&, ClassifyCache<S>*);              \
  template BasicTensor<S> encode_backward(Min2NetParams<S>&, const EncodeCache<S>&, const BasicTensor<S>&);         \
  template BasicTensor<S> decode_backward(Min2NetParams<S>&, const DecodeCache<S>&, const BasicTensor<S>&);         \
  template BasicTensor<S> classify_backward(Min2NetParams<S>&, const ClassifyCache<S>&, const BasicTensor<S>&);     \
  template LossBreakdown forward_losses(Min2NetParams<S>&, const BasicTensor<S>&, std::span<const int>, Mode, bool); \
  template BasicTensor<S> predict_proba(Min2NetParams<S>&, const BasicTensor<S>&);

MIN2NET_INSTANTIATE_NETWORK(float)
MIN2NET_INSTANTIATE_NETWORK(double)

template Min2NetParams<double> Min2NetParams<float>::cast<double>() const;
template Min2NetParams<float> Min2NetParams<double>::cast<float>() const;

}  // namespace min2net::model
