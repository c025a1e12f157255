// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//   acceptance [--only <substring>] [--workdir <dir>]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "filter_reference.hpp"
#include "min2net/cli/commands.hpp"
#include "min2net/dataio/augment.hpp"
#include "min2net/dataio/synth.hpp"
#include "min2net/harness/experiment.hpp"
#include "min2net/model/losses.hpp"
#include "min2net/model/network.hpp"
#include "min2net/nncore/gradcheck.hpp"
#include "min2net/nncore/layers.hpp"
#include "min2net/preproc/filter.hpp"

using namespace min2net;
using nn::TensorD;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

struct Criterion {
  std::string name;
  double budget_s;  // CPU seconds
  std::function<Outcome()> run;
};

std::filesystem::path g_workdir;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

TensorD random_tensor(nn::Shape shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  TensorD t(std::move(shape));
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

double dot(const TensorD& a, const TensorD& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

model::Min2NetConfig config(std::uint32_t c, std::uint32_t z, std::uint32_t n) {
  auto k = model::Min2NetConfig::make(c, 400, n);
  k.latent = z;
  return k;
}

// ---------------------------------------------------------------------------

Outcome param_counts() {
  Outcome o;
  const auto a = model::build<float>(config(20, 20, 2), 0).trainable_count();
  const auto b = model::build<float>(config(15, 15, 2), 0).trainable_count();
  o.require(a == 55232, "C=20 gives " + std::to_string(a));
  o.require(b == 38297, "C=15 gives " + std::to_string(b));
  if (o.ok) o.detail = "55232 / 38297";
  return o;
}

Outcome shape_trace() {
  Outcome o;
  auto p = model::build<float>(config(20, 20, 2), 1);
  nn::BasicTensor<float> x({2, 1, 400, 20});
  model::ShapeTrace trace;
  const auto z = model::encode<float>(p, x, nn::Mode::Infer, nullptr, &trace);
  const auto r = model::decode<float>(p, z, nullptr, &trace);
  const std::vector<nn::Shape> expected = {{1, 400, 20}, {1, 400, 20}, {1, 400, 20}, {1, 100, 20}, {1, 100, 10},
                                           {1, 100, 10}, {1, 25, 10},  {250},        {20},         {250},
                                           {1, 25, 10},  {1, 100, 10}, {1, 400, 20}};
  o.require(trace.size() == expected.size(), "trace has " + std::to_string(trace.size()) + " entries");
  for (std::size_t i = 0; i < std::min(trace.size(), expected.size()); ++i) {
    o.require(trace[i].second == expected[i], "row " + std::to_string(i) + " (" + trace[i].first + ") differs");
  }
  o.require(r.shape() == x.shape(), "reconstruction shape differs from input");
  if (o.ok) o.detail = std::to_string(trace.size()) + " rows match";
  return o;
}

Outcome gradient_suite() {
  Outcome o;
  double worst = 0.0;
  auto check = [&](const std::string& name, const nn::ScalarFunction& fn, const TensorD& at,
                   nn::GradCheckOptions opt = {}) {
    const auto res = nn::grad_check(fn, at, opt);
    worst = std::max(worst, res.max_rel_error);
    o.require(res.max_rel_error <= 1e-4, name + " " + fmt("%.2e", res.max_rel_error));
  };

  // conv_time, stride 1 and 4
  {
    const auto x = random_tensor({2, 1, 16, 3}, 1);
    const auto w = random_tensor({1, 5, 3, 2}, 2);
    const auto b = random_tensor({2}, 3);
    for (std::size_t stride : {1u, 4u}) {
      const auto r = random_tensor({2, 1, 16 / stride, 2}, 4 + stride);
      check("conv_time.input", [&](const TensorD& t, TensorD* g) {
        if (g) *g = nn::conv_time_backward(t, w, stride, r).input;
        return dot(nn::conv_time(t, w, b, stride), r);
      }, x);
      check("conv_time.weight", [&](const TensorD& t, TensorD* g) {
        if (g) *g = nn::conv_time_backward(x, t, stride, r).weight;
        return dot(nn::conv_time(x, t, b, stride), r);
      }, w);
      check("conv_time.bias", [&](const TensorD& t, TensorD* g) {
        if (g) *g = nn::conv_time_backward(x, w, stride, r).bias;
        return dot(nn::conv_time(x, w, t, stride), r);
      }, b);
    }
  }
  // conv_transpose_time at the decoder stride
  {
    const auto v = random_tensor({2, 1, 5, 3}, 21);
    const auto w = random_tensor({1, 8, 2, 3}, 22);
    const auto b = random_tensor({2}, 23);
    const auto r = random_tensor({2, 1, 20, 2}, 24);
    check("conv_transpose_time.input", [&](const TensorD& t, TensorD* g) {
      if (g) *g = nn::conv_transpose_time_backward(t, w, 4, r).input;
      return dot(nn::conv_transpose_time(t, w, b, 4), r);
    }, v);
    check("conv_transpose_time.weight", [&](const TensorD& t, TensorD* g) {
      if (g) *g = nn::conv_transpose_time_backward(v, t, 4, r).weight;
      return dot(nn::conv_transpose_time(v, t, b, 4), r);
    }, w);
    check("conv_transpose_time.bias", [&](const TensorD& t, TensorD* g) {
      if (g) *g = nn::conv_transpose_time_backward(v, w, 4, r).bias;
      return dot(nn::conv_transpose_time(v, w, t, 4), r);
    }, b);
  }
  // batch_norm, both modes
  {
    const auto x = random_tensor({3, 1, 6, 2}, 41, 1.5);
    const auto gamma = random_tensor({2}, 42);
    const auto beta = random_tensor({2}, 43);
    const auto r = random_tensor({3, 1, 6, 2}, 44);
    for (nn::Mode mode : {nn::Mode::Train, nn::Mode::Infer}) {
      nn::BatchNormState<double> base(2);
      base.running_mean = random_tensor({2}, 45);
      base.running_var = TensorD({2}, {0.7, 1.9});
      auto run = [&](const TensorD& in, const TensorD& gm, const TensorD& bt, const std::string& part, TensorD* g) {
        auto st = base;
        nn::BatchNormCache<double> cache;
        const auto y = nn::batch_norm(in, gm, bt, mode, st, &cache);
        if (g) {
          const auto grads = nn::batch_norm_backward(cache, gm, r);
          *g = part == "input" ? grads.input : part == "gamma" ? grads.gamma : grads.beta;
        }
        return dot(y, r);
      };
      const std::string tag = mode == nn::Mode::Train ? "batch_norm[train]." : "batch_norm[infer].";
      check(tag + "input", [&](const TensorD& t, TensorD* g) { return run(t, gamma, beta, "input", g); }, x);
      check(tag + "gamma", [&](const TensorD& t, TensorD* g) { return run(x, t, beta, "gamma", g); }, gamma);
      check(tag + "beta", [&](const TensorD& t, TensorD* g) { return run(x, gamma, t, "beta", g); }, beta);
    }
  }
  // avg_pool_time
  {
    const auto x = random_tensor({2, 1, 12, 3}, 51);
    const auto r = random_tensor({2, 1, 3, 3}, 52);
    check("avg_pool_time", [&](const TensorD& t, TensorD* g) {
      if (g) *g = nn::avg_pool_time_backward(t.shape(), 4, r);
      return dot(nn::avg_pool_time(t, 4), r);
    }, x);
  }
  // fully_connected
  {
    const auto x = random_tensor({4, 5}, 61);
    const auto w = random_tensor({5, 3}, 62);
    const auto b = random_tensor({3}, 63);
    const auto r = random_tensor({4, 3}, 64);
    check("fully_connected.input", [&](const TensorD& t, TensorD* g) {
      if (g) *g = nn::fully_connected_backward(t, w, r).input;
      return dot(nn::fully_connected(t, w, b), r);
    }, x);
    check("fully_connected.weight", [&](const TensorD& t, TensorD* g) {
      if (g) *g = nn::fully_connected_backward(x, t, r).weight;
      return dot(nn::fully_connected(x, t, b), r);
    }, w);
    check("fully_connected.bias", [&](const TensorD& t, TensorD* g) {
      if (g) *g = nn::fully_connected_backward(x, w, r).bias;
      return dot(nn::fully_connected(x, w, t), r);
    }, b);
  }
  // elu, softmax
  {
    const auto x = random_tensor({60}, 71, 3.0);
    const auto r = random_tensor({60}, 72);
    check("elu", [&](const TensorD& t, TensorD* g) {
      if (g) *g = nn::elu_backward(t, r);
      return dot(nn::elu(t), r);
    }, x);
    const auto s = random_tensor({3, 4}, 81);
    const auto rs = random_tensor({3, 4}, 82);
    check("softmax", [&](const TensorD& t, TensorD* g) {
      const auto y = nn::softmax(t);
      if (g) *g = nn::softmax_backward(y, rs);
      return dot(y, rs);
    }, s);
  }
  // losses
  {
    const auto a = random_tensor({3, 1, 8, 4}, 20);
    const auto b = random_tensor({3, 1, 8, 4}, 21);
    check("mse", [&](const TensorD& t, TensorD* g) {
      auto l = model::mse_loss(a, t);
      if (g) *g = l.grad;
      return l.value;
    }, b);
    const std::vector<int> y{0, 2, 1, 2};
    check("cross_entropy", [&](const TensorD& t, TensorD* g) {
      auto l = model::cross_entropy_loss<double>(y, t);
      if (g) *g = l.grad;
      return l.value;
    }, nn::softmax(random_tensor({4, 3}, 30)));
    const std::vector<int> yt{0, 1, 0, 1, 1, 0};
    check("triplet", [&](const TensorD& t, TensorD* g) {
      auto l = model::triplet_semihard_loss(t, yt, 2.0);
      if (g) *g = l.grad;
      return l.value;
    }, random_tensor({6, 3}, 50));
  }
  // weighted joint objective over every parameter of a tiny network
  {
    auto params = model::build<double>(config(4, 4, 2), 11);
    for (auto* p : params.parameters()) {
      if (p->value.rank() == 1) p->value = random_tensor({p->value.size()}, p->value.size() + 3, 0.3);
    }
    const auto x = random_tensor({6, 1, 400, 4}, 12);
    const std::vector<int> y{0, 1, 0, 1, 1, 0};
    std::size_t total = 0;
    for (const auto* p : params.parameters()) total += p->size();
    TensorD flat({total});
    std::size_t off = 0;
    for (const auto* p : params.parameters())
      for (double v : p->value.values()) flat[off++] = v;
    nn::GradCheckOptions opt;
    opt.max_coords = 0;  // every coordinate
    opt.step = 1e-4;
    check("joint objective", [&](const TensorD& t, TensorD* g) {
      auto work = params;
      std::size_t k = 0;
      for (auto* p : work.parameters())
        for (auto& v : p->value.values()) v = t[k++];
      work.zero_grad();
      const auto loss = model::forward_losses<double>(work, x, y, nn::Mode::Train, g != nullptr);
      if (g) {
        k = 0;
        for (const auto* p : work.parameters())
          for (double v : p->grad.values()) (*g)[k++] = v;
      }
      return loss.total;
    }, flat, opt);
  }
  if (o.ok) o.detail = "worst relative error " + fmt("%.2e", worst);
  return o;
}

// Exhaustive (a, p, n) search with the semi-hard rule.
double brute_force_triplet(const TensorD& z, const std::vector<int>& y, double margin) {
  const std::size_t B = z.dim(0), D = z.dim(1);
  auto d2 = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < D; ++k) s += (z[i * D + k] - z[j * D + k]) * (z[i * D + k] - z[j * D + k]);
    return s;
  };
  double total = 0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < B; ++a) {
    for (std::size_t p = 0; p < B; ++p) {
      if (p == a || y[p] != y[a]) continue;
      const double dap = d2(a, p);
      double semi = INFINITY, hardest = -INFINITY;
      for (std::size_t n = 0; n < B; ++n) {
        if (y[n] == y[a]) continue;
        const double dan = d2(a, n);
        if (dan > dap) semi = std::min(semi, dan);
        hardest = std::max(hardest, dan);
      }
      const double dan = std::isfinite(semi) ? semi : hardest;
      total += 0.5 * std::max(dap - dan + margin, 0.0);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

Outcome triplet_oracle() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t B = 4 + rng() % 29, D = 1 + rng() % 16;
    const int classes = 2 + static_cast<int>(rng() % 2);
    std::vector<int> y(B);
    do {
      for (auto& v : y) v = static_cast<int>(rng() % static_cast<unsigned>(classes));
    } while (!model::has_valid_triplet(y));
    const auto z = random_tensor({B, D}, rng(), 0.5 + static_cast<double>(trial % 4));
    const double margin = trial % 2 ? 1.0 : 0.2;
    const double diff = std::abs(model::triplet_semihard_loss(z, y, margin).value - brute_force_triplet(z, y, margin));
    worst = std::max(worst, diff);
  }
  o.require(worst <= 1e-6, "max difference " + fmt("%.2e", worst));
  if (o.ok) o.detail = "200 batches, max difference " + fmt("%.2e", worst);
  return o;
}

Outcome filter_properties() {
  Outcome o;
  const auto c = preproc::butter_bandpass({5, 8.0, 30.0, 100.0});
  const double lo = c.magnitude_db(8.0, 100.0), hi = c.magnitude_db(30.0, 100.0);
  o.require(std::abs(lo + 3.0) <= 0.1, "8 Hz at " + fmt("%.3f dB", lo));
  o.require(std::abs(hi + 3.0) <= 0.1, "30 Hz at " + fmt("%.3f dB", hi));
  o.require(c.stable(), "unstable poles");

  const auto [b, a] = c.to_ba();
  double coef = 0.0;
  if (b.size() != testing::kRefB.size() || a.size() != testing::kRefA.size()) {
    o.require(false, "coefficient count differs");
  } else {
    for (std::size_t i = 0; i < b.size(); ++i) coef = std::max(coef, std::abs(b[i] - testing::kRefB[i]));
    for (std::size_t i = 0; i < a.size(); ++i) coef = std::max(coef, std::abs(a[i] - testing::kRefA[i]));
    o.require(coef <= 1e-8, "coefficients off by " + fmt("%.2e", coef));
  }

  // 19 Hz tone: least-squares amplitude/phase over the interior, plus lag of the cross-correlation peak.
  const double pi = std::numbers::pi;
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * pi * 19.0 * static_cast<double>(i) / 100.0 + 0.3);
  const auto y = preproc::filtfilt(c, x);
  double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
  for (std::size_t i = 200; i < 800; ++i) {
    const double w = 2 * pi * 19.0 * static_cast<double>(i) / 100.0;
    const double s = std::sin(w), co = std::cos(w);
    ss += s * s;
    cc += co * co;
    sc += s * co;
    ys += y[i] * s;
    yc += y[i] * co;
  }
  const double det = ss * cc - sc * sc;
  const double ca = (ys * cc - yc * sc) / det, cb = (yc * ss - ys * sc) / det;
  const double amp = std::hypot(ca, cb), phase = std::atan2(cb, ca);
  o.require(std::abs(amp - 1.0) <= 0.01, "amplitude " + fmt("%.5f", amp));
  const double lag_samples = (phase - 0.3) / (2 * pi * 19.0 / 100.0);
  o.require(std::abs(lag_samples) <= 1e-3, "lag " + fmt("%.2e samples", lag_samples));
  long best_lag = 0;
  double best = -INFINITY;
  for (long lag = -5; lag <= 5; ++lag) {
    double acc = 0;
    for (long i = 200; i < 800; ++i) acc += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i + lag)];
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  o.require(best_lag == 0, "cross-correlation peak at lag " + std::to_string(best_lag));
  if (o.ok) {
    o.detail = "edges " + fmt("%.3f", lo) + "/" + fmt("%.3f dB", hi) + ", coef err " + fmt("%.1e", coef) +
               ", 19 Hz gain " + fmt("%.5f", amp) + ", lag " + fmt("%.1e", lag_samples);
  }
  return o;
}

// Independent re-statement of the schedule: LR halves after 5 epochs without
// improvement (floor 1e-4), training stops after 20.
struct ScheduleReplay {
  std::vector<double> lr;
  int stop_epoch = 0;  // 0 if never triggered
};

ScheduleReplay replay_schedule(const std::vector<double>& val, const harness::TrainConfig& tc) {
  ScheduleReplay out;
  double best = INFINITY, lr = tc.lr_start;
  int wait = 0, since_best = 0;
  for (std::size_t e = 0; e < val.size(); ++e) {
    out.lr.push_back(lr);
    if (val[e] < best) {
      best = val[e];
      wait = since_best = 0;
      continue;
    }
    ++wait;
    ++since_best;
    if (wait >= tc.plateau_patience && lr > tc.lr_floor) {
      lr = std::max(lr * 0.5, tc.lr_floor);
      wait = 0;
    }
    if (since_best >= tc.earlystop_patience) {
      out.stop_epoch = static_cast<int>(e) + 1;
      break;
    }
  }
  return out;
}

bool lr_of_form(double lr) {
  if (std::abs(lr - 1e-4) <= 1e-15) return true;
  for (int m = 0; m < 10; ++m) {
    const double v = 1e-3 * std::pow(0.5, m);
    if (v < 1e-4) break;
    if (std::abs(lr - v) <= 1e-15) return true;
  }
  return false;
}

Outcome protocol_properties() {
  Outcome o;
  dataio::SynthSpec spec;
  spec.n_subjects = 6;
  spec.trials_per_class = 10;
  spec.seed = 31;
  const auto ds = dataio::synth_generate(spec);

  harness::ExperimentOptions opt;
  opt.scheme = harness::Scheme::Independent;
  opt.train = harness::TrainConfig::defaults(true, 2);
  opt.train.max_epochs = 80;
  opt.train.seed = 5;
  const auto res = harness::run_experiment(ds, opt);

  o.require(res.folds.size() == 30, std::to_string(res.folds.size()) + " fold rows");
  o.require(res.failed == 0, std::to_string(res.failed) + " failed rows");
  std::set<std::uint32_t> test_subjects;
  std::size_t early = 0, reductions = 0;
  for (const auto& f : res.folds) {
    const std::string tag = "s" + std::to_string(f.subject) + "f" + std::to_string(f.fold) + ": ";
    test_subjects.insert(f.subject);
    for (auto i : f.test_idx) o.require(ds.subject_ids[i] == f.subject, tag + "foreign trial in test");
    for (const auto* part : {&f.train_idx, &f.val_idx}) {
      for (auto i : *part) o.require(ds.subject_ids[i] != f.subject, tag + "test subject in training data");
    }
    std::set<std::size_t> tr(f.train_idx.begin(), f.train_idx.end());
    for (auto i : f.val_idx) o.require(!tr.count(i), tag + "train/val overlap");

    std::vector<double> val;
    for (const auto& e : f.history.epochs) {
      val.push_back(e.val.total);
      o.require(lr_of_form(e.lr), tag + "lr " + fmt("%.6g", e.lr) + " not of the form 1e-3*0.5^m");
    }
    for (std::size_t e = 1; e < f.history.epochs.size(); ++e) {
      if (f.history.epochs[e].lr < f.history.epochs[e - 1].lr) ++reductions;
    }
    const auto replay = replay_schedule(val, opt.train);
    for (std::size_t e = 0; e < val.size(); ++e) {
      if (std::abs(replay.lr[e] - f.history.epochs[e].lr) > 1e-15) {
        o.require(false, tag + "lr at epoch " + std::to_string(e + 1) + " differs from the plateau rule");
        break;
      }
    }
    const bool ran_out = f.epochs_run == opt.train.max_epochs && !f.early_stopped;
    o.require(f.early_stopped == (replay.stop_epoch != 0), tag + "early-stop flag differs from the 20-epoch rule");
    if (f.early_stopped) {
      o.require(f.epochs_run == replay.stop_epoch, tag + "stopped at " + std::to_string(f.epochs_run));
      o.require(f.epochs_run - f.best_epoch == 20, tag + "stopped " + std::to_string(f.epochs_run - f.best_epoch) +
                                                       " epochs after the best one");
      ++early;
    } else {
      o.require(ran_out, tag + "neither stopped early nor reached max_epochs");
    }
  }
  o.require(test_subjects.size() == 6, "held-out subjects: " + std::to_string(test_subjects.size()));
  // The rules must actually have been exercised.
  o.require(early > 0, "no run stopped early");
  o.require(reductions > 0, "no learning-rate reduction observed");
  if (o.ok) {
    o.detail = "30 rows, no leakage, " + std::to_string(early) + " early stops, " + std::to_string(reductions) +
               " lr reductions";
  }
  return o;
}

Outcome learning_sanity() {
  Outcome o;
  // Subject-dependent: one subject, 200 trials, offline half for training.
  dataio::SynthSpec dep;
  dep.n_subjects = 1;
  dep.trials_per_class = 100;
  dep.contrast = 0.8;
  dep.seed = 11;
  harness::ExperimentOptions d;
  d.scheme = harness::Scheme::Dependent;
  d.train = harness::TrainConfig::defaults(false, 2);
  d.train.max_epochs = 100;
  d.train.seed = 1;
  const auto rd = harness::run_experiment(dataio::synth_generate(dep), d);
  o.require(rd.failed == 0, std::to_string(rd.failed) + " dependent rows failed");
  o.require(rd.accuracy.mean >= 0.90, "dependent accuracy " + fmt("%.4f", rd.accuracy.mean));

  // Leave-one-subject-out over six subjects.
  dataio::SynthSpec loso;
  loso.n_subjects = 6;
  loso.trials_per_class = 40;
  loso.contrast = 0.8;
  loso.seed = 12;
  harness::ExperimentOptions l;
  l.scheme = harness::Scheme::Independent;
  l.train = harness::TrainConfig::defaults(true, 2);
  l.train.max_epochs = 30;
  l.train.seed = 1;
  const auto rl = harness::run_experiment(dataio::synth_generate(loso), l);
  o.require(rl.failed == 0, std::to_string(rl.failed) + " LOSO rows failed");
  o.require(rl.accuracy.mean >= 0.65, "LOSO accuracy " + fmt("%.4f", rl.accuracy.mean));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("dependent ") + fmt("%.2f%%", 100 * rd.accuracy.mean) +
              ", LOSO " + fmt("%.2f%%", 100 * rl.accuracy.mean) + " (chance 50%)";
  return o;
}

Outcome augmentation_invariants() {
  Outcome o;
  dataio::SynthSpec spec;
  spec.n_subjects = 2;
  spec.trials_per_class = 6;
  spec.seed = 3;
  const auto ds = dataio::synth_generate(spec);
  auto same_meta = [&](const EpochedDataset& a, const std::string& name) {
    o.require(a.channels == ds.channels && a.samples == ds.samples && a.data.size() == ds.data.size(),
              name + " changed dimensions");
    o.require(a.labels == ds.labels && a.subject_ids == ds.subject_ids && a.sessions == ds.sessions,
              name + " changed labels or metadata");
  };
  const std::map<std::string, std::function<EpochedDataset(double, std::uint64_t)>> transforms = {
      {"jitter", [&](double s, std::uint64_t seed) { return dataio::augment_jitter(ds, s, seed); }},
      {"scale", [&](double s, std::uint64_t seed) { return dataio::augment_scale(ds, s, seed); }},
      {"magwarp", [&](double s, std::uint64_t seed) { return dataio::augment_magwarp(ds, s, 4, seed); }},
      {"timewarp", [&](double s, std::uint64_t seed) { return dataio::augment_timewarp(ds, s, 4, seed); }},
  };
  for (const auto& [name, fn] : transforms) {
    const auto out = fn(0.2, 7);
    same_meta(out, name);
    o.require(out.data != ds.data, name + " with sigma 0.2 left the data unchanged");
    o.require(fn(0.0, 7) == ds, name + " with sigma 0 is not the identity");
  }
  for (int segments : {2, 4, 5, 8}) {
    const auto out = dataio::augment_permute(ds, segments, 9);
    same_meta(out, "permute");
    for (std::size_t i = 0; i < ds.n_trials() * ds.channels; ++i) {
      std::vector<float> a(ds.data.begin() + static_cast<std::ptrdiff_t>(i * ds.samples),
                           ds.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * ds.samples));
      std::vector<float> b(out.data.begin() + static_cast<std::ptrdiff_t>(i * ds.samples),
                           out.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * ds.samples));
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) {
        o.require(false, "permute(" + std::to_string(segments) + ") changed a value multiset");
        break;
      }
    }
  }
  o.require(dataio::augment_permute(ds, 1, 9) == ds, "permute with one segment is not the identity");
  if (o.ok) o.detail = "5 transforms";
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const auto root = g_workdir / "determinism";
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);
  std::ostringstream sink;
  {
    std::ofstream spec(root / "synth.toml");
    spec << "[synth]\nn_subjects = 3\ntrials_per_class = 10\nseed = 4\n";
  }
  int rc = cli::run_cli({"synth", "--spec", (root / "synth.toml").string(), "--out", (root / "data").string()}, sink,
                        sink);
  o.require(rc == 0, "synth exited " + std::to_string(rc));
  std::vector<double> seconds;
  for (const char* run : {"a", "b"}) {
    const auto t0 = std::chrono::steady_clock::now();
    rc = cli::run_cli({"run", "--data", (root / "data").string(), "--scheme", "independent", "--out",
                       (root / run).string(), "--seed", "77", "--max-epochs", "15"},
                      sink, sink);
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    o.require(rc == 0, std::string("run ") + run + " exited " + std::to_string(rc));
  }
  const auto a = slurp(root / "a" / "results.csv"), b = slurp(root / "b" / "results.csv");
  o.require(!a.empty(), "results.csv missing");
  o.require(a == b, "results.csv differs between runs");
  if (o.ok) {
    o.detail = std::to_string(a.size()) + " identical bytes, runs " + fmt("%.1f s", seconds[0]) + " / " +
               fmt("%.1f s", seconds[1]);
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  g_workdir = std::filesystem::temp_directory_path() / "min2net_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") {
      only = argv[i + 1];
    } else if (flag == "--workdir") {
      g_workdir = argv[i + 1];
    } else {
      std::cerr << "usage: acceptance [--only <substring>] [--workdir <dir>]\n";
      return 2;
    }
  }
  std::filesystem::create_directories(g_workdir);

  const std::vector<Criterion> criteria = {
      {"param_counts", 1.0, param_counts},
      {"shape_trace", 1.0, shape_trace},
      {"gradient_suite", 120.0, gradient_suite},
      {"triplet_oracle", 60.0, triplet_oracle},
      {"filter_properties", 10.0, filter_properties},
      {"protocol_properties", 900.0, protocol_properties},
      {"learning_sanity", 1800.0, learning_sanity},
      {"augmentation_invariants", 60.0, augmentation_invariants},
      {"determinism", 600.0, determinism},
  };

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && c.name.find(only) == std::string::npos) continue;
    ++ran;
    const std::clock_t c0 = std::clock();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double cpu = static_cast<double>(std::clock() - c0) / CLOCKS_PER_SEC;
    if (cpu > c.budget_s) o.require(false, "over budget (" + fmt("%.0f s", c.budget_s) + ")");
    if (!o.ok) ++failed;
    std::printf("%s  %-24s %8.2f s cpu  %s\n", o.ok ? "PASS" : "FAIL", c.name.c_str(), cpu, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
