#include <doctest.h>

#include <cmath>
#include <vector>

#include "min2net/nncore/adam.hpp"
#include "min2net/nncore/gradcheck.hpp"
#include "min2net/nncore/layers.hpp"
#include "test_util.hpp"

using namespace min2net;
using namespace min2net::nn;
using min2net::testing::dot;
using min2net::testing::random_tensor;

namespace {

// Scalar probe L = <f(x), R> so that dL/df = R.
double project(const TensorD& out, const TensorD& r) { return dot(out, r); }

}  // namespace

TEST_CASE("conv_time: zero padded boxcar and identity kernel") {
  TensorD x({1, 1, 4, 1}, {1, 1, 1, 1});
  TensorD box({1, 3, 1, 1}, {1, 1, 1});
  TensorD zero_bias({1}, {0});
  auto y = conv_time(x, box, zero_bias, 1);
  CHECK(y.shape() == Shape{1, 1, 4, 1});
  CHECK(y.vector() == std::vector<double>{2, 3, 3, 2});

  TensorD ramp({1, 1, 4, 1}, {0.5, -1.25, 3, 7});
  TensorD ident({1, 3, 1, 1}, {0, 1, 0});
  CHECK(conv_time(ramp, ident, zero_bias, 1) == ramp);
}

TEST_CASE("conv_time: rejects channel mismatch and non-dividing stride") {
  TensorD x({1, 1, 8, 3});
  TensorD w({1, 3, 2, 4});
  TensorD b({4});
  CHECK_THROWS_AS(conv_time(x, w, b, 1), DimensionError);
  TensorD w3({1, 3, 3, 4});
  CHECK_THROWS_AS(conv_time(x, w3, b, 3), DimensionError);
  CHECK_THROWS_AS(conv_time(x, w3, TensorD({5}), 1), DimensionError);
}

TEST_CASE("same padding splits odd and even kernels left-floor / right-ceil") {
  CHECK(same_padding(400, 64, 1).left == 31);
  CHECK(same_padding(400, 64, 1).right == 32);
  CHECK(same_padding(100, 32, 1).left == 15);
  CHECK(same_padding(100, 32, 1).right == 16);
  CHECK(same_padding(100, 64, 4).left == 30);
  CHECK(same_padding(400, 32, 4).left == 14);
}

TEST_CASE("conv_time: gradients match finite differences") {
  const auto x = random_tensor({2, 1, 16, 3}, 1);
  const auto w = random_tensor({1, 5, 3, 2}, 2);
  const auto b = random_tensor({2}, 3);
  const auto r = random_tensor({2, 1, 16, 2}, 4);
  auto grads = conv_time_backward(x, w, 1, r);

  auto wrt_input = [&](const TensorD& in, TensorD* g) {
    if (g) *g = conv_time_backward(in, w, 1, r).input;
    return project(conv_time(in, w, b, 1), r);
  };
  auto wrt_weight = [&](const TensorD& in, TensorD* g) {
    if (g) *g = conv_time_backward(x, in, 1, r).weight;
    return project(conv_time(x, in, b, 1), r);
  };
  auto wrt_bias = [&](const TensorD& in, TensorD* g) {
    if (g) *g = grads.bias;
    return project(conv_time(x, w, in, 1), r);
  };
  CHECK(grad_check(wrt_input, x).max_rel_error <= 1e-4);
  CHECK(grad_check(wrt_weight, w).max_rel_error <= 1e-4);
  CHECK(grad_check(wrt_bias, b).max_rel_error <= 1e-4);

  // Strided variant.
  const auto r2 = random_tensor({2, 1, 4, 2}, 5);
  auto strided = [&](const TensorD& in, TensorD* g) {
    if (g) *g = conv_time_backward(in, w, 4, r2).input;
    return project(conv_time(in, w, b, 4), r2);
  };
  CHECK(grad_check(strided, x).max_rel_error <= 1e-4);
}

TEST_CASE("conv_transpose_time: output lengths for the decoder strides") {
  TensorD w1({1, 64, 10, 10});
  TensorD b1({10});
  CHECK(conv_transpose_time(TensorD({2, 1, 25, 10}), w1, b1, 4).shape() == Shape{2, 1, 100, 10});
  TensorD w2({1, 32, 20, 10});
  TensorD b2({20});
  CHECK(conv_transpose_time(TensorD({2, 1, 100, 10}), w2, b2, 4).shape() == Shape{2, 1, 400, 20});
  CHECK_THROWS_AS(conv_transpose_time(TensorD({1, 1, 4, 10}), w1, b1, 0), DimensionError);
  CHECK_THROWS_AS(conv_transpose_time(TensorD({1, 1, 4, 10}), TensorD({1, 2, 10, 10}), b1, 4), DimensionError);
}

TEST_CASE("conv_transpose_time: coefficients match direct summation") {
  // Length-2 input, 1x4 kernel, stride 2 -> length 4; pad_left = 1.
  TensorD v({1, 1, 2, 1}, {1.5, -2.0});
  TensorD w({1, 4, 1, 1}, {0.25, -1.0, 2.0, 0.5});
  TensorD b({1}, {0.1});
  const std::size_t stride = 2, kernel = 4, out_len = 4, pad_left = 1;
  std::vector<double> expected(out_len, 0.1);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t k = 0; k < kernel; ++k) {
      const long n = static_cast<long>(t * stride + k) - static_cast<long>(pad_left);
      if (n >= 0 && n < static_cast<long>(out_len)) expected[static_cast<std::size_t>(n)] += w[k] * v[t];
    }
  }
  auto y = conv_transpose_time(v, w, b, stride);
  REQUIRE(y.size() == out_len);
  for (std::size_t i = 0; i < out_len; ++i) CHECK(y[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("conv_transpose_time is the adjoint of strided conv_time") {
  struct Case {
    std::size_t len, kernel, stride, wide, narrow;
  };
  // Decoder geometries: (25 -> 100, K64, 10->10) and (100 -> 400, K32, 10->C).
  for (Case c : {Case{100, 64, 4, 10, 10}, Case{400, 32, 4, 20, 10}, Case{400, 32, 4, 15, 10}, Case{12, 5, 3, 2, 3}}) {
    const auto w = random_tensor({1, c.kernel, c.wide, c.narrow}, 11);
    TensorD zero_wide({c.wide});
    TensorD zero_narrow({c.narrow});
    const auto u = random_tensor({2, 1, c.len, c.wide}, 12);
    const auto v = random_tensor({2, 1, c.len / c.stride, c.narrow}, 13);
    const double lhs = dot(conv_time(u, w, zero_narrow, c.stride), v);
    const double rhs = dot(u, conv_transpose_time(v, w, zero_wide, c.stride));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));

    const auto wf = w.cast<float>();
    const double lhs_f = dot(conv_time(u.cast<float>(), wf, zero_narrow.cast<float>(), c.stride), v.cast<float>());
    const double rhs_f = dot(u.cast<float>(), conv_transpose_time(v.cast<float>(), wf, zero_wide.cast<float>(), c.stride));
    CHECK(std::abs(lhs_f - rhs_f) <= 1e-5 * std::max(1.0, std::abs(lhs_f)));
  }
}

TEST_CASE("conv_transpose_time: gradients match finite differences") {
  const auto v = random_tensor({2, 1, 5, 3}, 21);
  const auto w = random_tensor({1, 6, 2, 3}, 22);
  const auto b = random_tensor({2}, 23);
  const auto r = random_tensor({2, 1, 10, 2}, 24);
  auto wrt_input = [&](const TensorD& in, TensorD* g) {
    if (g) *g = conv_transpose_time_backward(in, w, 2, r).input;
    return project(conv_transpose_time(in, w, b, 2), r);
  };
  auto wrt_weight = [&](const TensorD& in, TensorD* g) {
    if (g) *g = conv_transpose_time_backward(v, in, 2, r).weight;
    return project(conv_transpose_time(v, in, b, 2), r);
  };
  auto wrt_bias = [&](const TensorD& in, TensorD* g) {
    if (g) *g = conv_transpose_time_backward(v, w, 2, r).bias;
    return project(conv_transpose_time(v, w, in, 2), r);
  };
  CHECK(grad_check(wrt_input, v).max_rel_error <= 1e-4);
  CHECK(grad_check(wrt_weight, w).max_rel_error <= 1e-4);
  CHECK(grad_check(wrt_bias, b).max_rel_error <= 1e-4);
}

TEST_CASE("batch_norm: constant channel maps to beta") {
  TensorD x({4, 1, 5, 2}, 3.7);
  TensorD gamma({2}, {2.0, -0.5});
  TensorD beta({2}, {0.0, 0.0});
  BatchNormState<double> st(2);
  auto y = batch_norm(x, gamma, beta, Mode::Train, st);
  for (double v : y.values()) CHECK(std::abs(v) <= 1e-3);
}

TEST_CASE("batch_norm: standardized input passes through scaled by (1+eps)^-1/2") {
  // Each channel takes values +-1 with zero mean and unit variance.
  TensorD x({2, 1, 2, 1}, {1, -1, -1, 1});
  TensorD gamma({1}, {1.0});
  TensorD beta({1}, {0.0});
  BatchNormState<double> st(1);
  auto y = batch_norm(x, gamma, beta, Mode::Train, st);
  const double scale = 1.0 / std::sqrt(1.0 + 1e-3);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i] * scale).epsilon(1e-12));
}

TEST_CASE("batch_norm: batch statistics of the output") {
  const auto x = random_tensor({6, 1, 20, 3}, 31, 2.5);
  TensorD gamma({3}, {0.5, 1.0, 2.0});
  TensorD beta({3});
  BatchNormState<double> st(3);
  auto y = batch_norm(x, gamma, beta, Mode::Train, st);
  const std::size_t rows = y.size() / 3;
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, v = 0, vin = 0, min = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      m += y[r * 3 + c];
      min += x[r * 3 + c];
    }
    m /= rows;
    min /= rows;
    for (std::size_t r = 0; r < rows; ++r) {
      v += (y[r * 3 + c] - m) * (y[r * 3 + c] - m);
      vin += (x[r * 3 + c] - min) * (x[r * 3 + c] - min);
    }
    v /= rows;
    vin /= rows;
    CHECK(std::abs(m) <= 1e-5);
    CHECK(v == doctest::Approx(gamma[c] * gamma[c] * vin / (vin + 1e-3)).epsilon(1e-9));
  }
}

TEST_CASE("batch_norm: running statistics, infer mode and guards") {
  TensorD x({2, 1, 1, 1}, {1.0, 3.0});
  TensorD gamma({1}, {1.0});
  TensorD beta({1}, {0.0});
  BatchNormState<double> st(1);
  batch_norm(x, gamma, beta, Mode::Train, st);
  CHECK(st.running_mean[0] == doctest::Approx(0.01 * 2.0));
  // unbiased batch variance is 2
  CHECK(st.running_var[0] == doctest::Approx(0.99 + 0.01 * 2.0));
  auto y = batch_norm(x, gamma, beta, Mode::Infer, st);
  CHECK(y[0] == doctest::Approx((1.0 - st.running_mean[0]) / std::sqrt(st.running_var[0] + 1e-3)));
  CHECK_THROWS_AS(batch_norm(TensorD({1, 1, 4, 1}), gamma, beta, Mode::Train, st), DimensionError);
}

TEST_CASE("batch_norm: gradients match finite differences in both modes") {
  const auto x = random_tensor({3, 1, 6, 2}, 41, 1.5);
  const auto gamma = random_tensor({2}, 42);
  const auto beta = random_tensor({2}, 43);
  const auto r = random_tensor({3, 1, 6, 2}, 44);
  for (Mode mode : {Mode::Train, Mode::Infer}) {
    BatchNormState<double> base(2);
    base.running_mean = random_tensor({2}, 45);
    base.running_var = TensorD({2}, {0.7, 1.9});
    auto run = [&](const TensorD& in, const TensorD& g, const TensorD& bt, BatchNormCache<double>* cache) {
      BatchNormState<double> st = base;
      return batch_norm(in, g, bt, mode, st, cache);
    };
    auto wrt_input = [&](const TensorD& in, TensorD* g) {
      BatchNormCache<double> cache;
      auto y = run(in, gamma, beta, &cache);
      if (g) *g = batch_norm_backward(cache, gamma, r).input;
      return project(y, r);
    };
    auto wrt_gamma = [&](const TensorD& in, TensorD* g) {
      BatchNormCache<double> cache;
      auto y = run(x, in, beta, &cache);
      if (g) *g = batch_norm_backward(cache, in, r).gamma;
      return project(y, r);
    };
    auto wrt_beta = [&](const TensorD& in, TensorD* g) {
      BatchNormCache<double> cache;
      auto y = run(x, gamma, in, &cache);
      if (g) *g = batch_norm_backward(cache, gamma, r).beta;
      return project(y, r);
    };
    CHECK(grad_check(wrt_input, x).max_rel_error <= 1e-4);
    CHECK(grad_check(wrt_gamma, gamma).max_rel_error <= 1e-4);
    CHECK(grad_check(wrt_beta, beta).max_rel_error <= 1e-4);
  }
}

TEST_CASE("avg_pool_time: means, shapes, gradient") {
  TensorD x({1, 1, 4, 1}, {1, 3, 5, 7});
  CHECK(avg_pool_time(x, 2).vector() == std::vector<double>{2, 6});
  CHECK(avg_pool_time(TensorD({2, 1, 400, 20}), 4).shape() == Shape{2, 1, 100, 20});
  CHECK_THROWS_AS(avg_pool_time(TensorD({1, 1, 10, 1}), 4), DimensionError);

  const auto in = random_tensor({2, 1, 12, 3}, 51);
  const auto r = random_tensor({2, 1, 4, 3}, 52);
  auto fn = [&](const TensorD& t, TensorD* g) {
    if (g) *g = avg_pool_time_backward(t.shape(), 3, r);
    return project(avg_pool_time(t, 3), r);
  };
  CHECK(grad_check(fn, in).max_rel_error <= 1e-6);
}

TEST_CASE("fully_connected: identity, parameter count, gradient, guards") {
  TensorD x({2, 3}, {1, 2, 3, -4, 5, -6});
  TensorD eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  CHECK(fully_connected(x, eye, TensorD({3})) == x);

  TensorD w({250, 20});
  TensorD b({20});
  CHECK(w.size() + b.size() == 5020);

  const auto in = random_tensor({4, 5}, 61);
  const auto wr = random_tensor({5, 3}, 62);
  const auto br = random_tensor({3}, 63);
  const auto r = random_tensor({4, 3}, 64);
  auto wrt_input = [&](const TensorD& t, TensorD* g) {
    if (g) *g = fully_connected_backward(t, wr, r).input;
    return project(fully_connected(t, wr, br), r);
  };
  auto wrt_weight = [&](const TensorD& t, TensorD* g) {
    if (g) *g = fully_connected_backward(in, t, r).weight;
    return project(fully_connected(in, t, br), r);
  };
  auto wrt_bias = [&](const TensorD& t, TensorD* g) {
    if (g) *g = fully_connected_backward(in, wr, r).bias;
    return project(fully_connected(in, wr, t), r);
  };
  CHECK(grad_check(wrt_input, in).max_rel_error <= 1e-5);
  CHECK(grad_check(wrt_weight, wr).max_rel_error <= 1e-5);
  CHECK(grad_check(wrt_bias, br).max_rel_error <= 1e-5);
  CHECK_THROWS_AS(fully_connected(in, TensorD({4, 3}), br), DimensionError);
}

TEST_CASE("elu: values, monotonicity, gradient") {
  TensorD x({3}, {1.0, 0.0, -1.0});
  auto y = elu(x);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-15));
  CHECK(y[2] == doctest::Approx(-0.63212).epsilon(1e-5));

  auto s = random_tensor({200}, 71, 3.0);
  std::vector<double> sorted(s.values().begin(), s.values().end());
  std::sort(sorted.begin(), sorted.end());
  TensorD st({sorted.size()}, sorted);
  auto ys = elu(st);
  for (std::size_t i = 1; i < ys.size(); ++i) {
    if (sorted[i] > sorted[i - 1]) CHECK(ys[i] > ys[i - 1]);
  }
  const auto r = random_tensor({200}, 72);
  auto fn = [&](const TensorD& t, TensorD* g) {
    if (g) *g = elu_backward(t, r);
    return project(elu(t), r);
  };
  CHECK(grad_check(fn, s).max_rel_error <= 1e-4);
}

TEST_CASE("softmax: symmetry, shift invariance, stability, gradient") {
  auto half = softmax(TensorD({1, 2}, {0, 0}));
  CHECK(half[0] == 0.5);
  CHECK(half[1] == 0.5);

  auto v = random_tensor({3, 4}, 81);
  auto shifted = v;
  for (auto& x : shifted.values()) x += 17.25;
  CHECK(min2net::testing::max_abs_diff(softmax(v), softmax(shifted)) <= 1e-7);

  auto big = softmax(Tensor({1, 2}, {1000.0f, 0.0f}));
  CHECK(big[0] == 1.0f);
  CHECK(big[1] == 0.0f);

  const auto r = random_tensor({3, 4}, 82);
  auto fn = [&](const TensorD& t, TensorD* g) {
    auto y = softmax(t);
    if (g) *g = softmax_backward(y, r);
    return project(y, r);
  };
  CHECK(grad_check(fn, v).max_rel_error <= 1e-4);
}

TEST_CASE("kernels are deterministic") {
  const auto x = random_tensor<float>({3, 1, 400, 4}, 91);
  const auto w = random_tensor<float>({1, 64, 4, 4}, 92);
  Tensor b({4});
  CHECK(conv_time(x, w, b, 1) == conv_time(x, w, b, 1));
  BatchNormState<float> s1(4), s2(4);
  Tensor g({4}, 1.0f), bt({4});
  CHECK(batch_norm(x, g, bt, Mode::Train, s1) == batch_norm(x, g, bt, Mode::Train, s2));
}

TEST_CASE("adam: first step, null update, descent, non-finite guard") {
  ParamTensor<double> p("w", TensorD({1}, {0.0}));
  p.grad[0] = 1.0;
  AdamState<double> adam(AdamOptions{1e-3});
  std::vector<ParamTensor<double>*> params{&p};
  adam.step(params);
  CHECK(p.value[0] == doctest::Approx(-1e-3).epsilon(1e-6));
  CHECK(adam.step_count() == 1);

  ParamTensor<double> q("q", TensorD({2}, {0.3, -0.2}));
  AdamState<double> adam2;
  std::vector<ParamTensor<double>*> qs{&q};
  adam2.step(qs);
  CHECK(q.value[0] == 0.3);
  CHECK(q.value[1] == -0.2);
  CHECK(adam2.step_count() == 1);
  for (const auto& v : adam2.second_moments()) {
    for (double x : v.values()) CHECK(x >= 0.0);
  }

  ParamTensor<double> w("w", TensorD({1}, {1.0}));
  AdamState<double> adam3(AdamOptions{0.05});
  std::vector<ParamTensor<double>*> ws{&w};
  double prev = 1.0;
  for (int i = 0; i < 10; ++i) {
    w.grad[0] = 2.0 * w.value[0];
    adam3.step(ws);
    const double f = w.value[0] * w.value[0];
    CHECK(f < prev);
    prev = f;
  }

  ParamTensor<double> bad("encoder.conv1.kernel", TensorD({2}, {0.0, 0.0}));
  bad.grad[1] = NAN;
  std::vector<ParamTensor<double>*> bs{&bad};
  AdamState<double> adam4;
  try {
    adam4.step(bs);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("encoder.conv1.kernel") != std::string::npos);
  }
  CHECK(adam4.step_count() == 0);
}

TEST_CASE("grad_check: exact quadratic passes, corrupted gradient fails") {
  const auto x = random_tensor({12}, 101);
  auto sq = [](const TensorD& t, TensorD* g) {
    double acc = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      acc += t[i] * t[i];
      if (g) (*g)[i] = 2 * t[i];
    }
    return acc;
  };
  CHECK(grad_check(sq, x).max_rel_error <= 1e-8);
  auto corrupted = [&](const TensorD& t, TensorD* g) {
    double v = sq(t, g);
    if (g) {
      for (auto& e : g->values()) e *= 1.01;
    }
    return v;
  };
  auto res = grad_check(corrupted, x);
  CHECK(res.max_rel_error >= 1e-3);
  CHECK_FALSE(res.passed);
  auto nan_grad = [&](const TensorD& t, TensorD* g) {
    double v = sq(t, g);
    if (g) (*g)[3] = NAN;
    return v;
  };
  CHECK_FALSE(grad_check(nan_grad, x).passed);
}

TEST_CASE("tensor shape algebra rejects mismatches") {
  CHECK_THROWS_AS(TensorD({2, 3}, std::vector<double>(5)), DimensionError);
  CHECK_THROWS_AS(TensorD({2, 3}).reshaped({4, 2}), DimensionError);
  CHECK_THROWS_AS(TensorD({2, 0}), DimensionError);
  CHECK(TensorD({0, 3}).size() == 0);
}
