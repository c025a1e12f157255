#include "min2net/harness/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "min2net/dataio/storage.hpp"
#include "min2net/harness/split.hpp"
#include "min2net/model/checkpoint.hpp"

namespace min2net::harness {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

double pop_sd(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

struct Job {
  std::uint32_t subject;
  std::size_t fold;
  std::vector<std::size_t> train, val, test;
};

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::Dependent ? "dependent" : "independent"; }

Scheme parse_scheme(const std::string& text) {
  if (text == "dependent") return Scheme::Dependent;
  if (text == "independent") return Scheme::Independent;
  throw ConfigError("scheme must be 'dependent' or 'independent', got '" + text + "'");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

Summary summarize(const std::vector<FoldResult>& folds, double Metrics::*field) {
  Summary s;
  std::vector<double> rows;
  std::map<std::uint32_t, std::vector<double>> per_subject;
  for (const auto& f : folds) {
    if (!f.ok) continue;
    rows.push_back(f.metrics.*field);
    per_subject[f.subject].push_back(f.metrics.*field);
  }
  s.n = rows.size();
  if (rows.empty()) return s;
  double sum = 0;
  for (double v : rows) sum += v;
  s.mean = sum / static_cast<double>(rows.size());
  s.sd_folds = pop_sd(rows, s.mean);
  std::vector<double> means;
  for (const auto& [subject, v] : per_subject) {
    double m = 0;
    for (double x : v) m += x;
    means.push_back(m / static_cast<double>(v.size()));
  }
  double mm = 0;
  for (double v : means) mm += v;
  mm /= static_cast<double>(means.size());
  s.sd_subjects = pop_sd(means, mm);
  return s;
}

std::filesystem::path history_path(const std::filesystem::path& dir, std::uint32_t subject, std::size_t fold) {
  return dir / ("history_" + std::to_string(subject) + "_" + std::to_string(fold) + ".csv");
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint32_t subject, std::size_t fold) {
  return dir / "checkpoints" / ("model_" + std::to_string(subject) + "_" + std::to_string(fold) + ".mn2c");
}

ExperimentResult run_experiment(const EpochedDataset& input, const ExperimentOptions& opt) {
  input.validate();
  opt.train.validate();
  if (opt.inner_folds < 2) throw ConfigError("inner_folds must be >= 2");
  if (opt.jobs < 1) throw ConfigError("jobs must be >= 1");
  opt.augment.validate(input.samples);
  auto log = [&](const std::string& line) {
    if (opt.log) opt.log(line);
  };

  std::size_t n_classes = input.class_names.size();
  for (int y : input.labels) n_classes = std::max(n_classes, static_cast<std::size_t>(y) + 1);
  if (n_classes < 2) throw ConfigError("at least two classes are required");

  const auto rest_it = std::find(input.class_names.begin(), input.class_names.end(), "rest");
  const bool balance = opt.balance_rest.value_or(rest_it != input.class_names.end());
  EpochedDataset ds;
  if (balance) {
    if (rest_it == input.class_names.end()) throw ConfigError("balance_rest needs a class named 'rest'");
    ds = dataio::balance_rest(input, static_cast<int>(rest_it - input.class_names.begin()),
                              derive_seed(opt.train.seed, 0xBA1A, 0));
    log("balanced rest class: " + std::to_string(ds.n_trials()) + " of " + std::to_string(input.n_trials()) +
        " trials kept");
  } else {
    ds = input;
  }

  model::Min2NetConfig mcfg = opt.model;
  mcfg.channels = static_cast<std::uint32_t>(ds.channels);
  mcfg.samples = static_cast<std::uint32_t>(ds.samples);
  mcfg.classes = static_cast<std::uint32_t>(n_classes);
  if (mcfg.latent == 0) mcfg.latent = model::Min2NetConfig::default_latent(mcfg.channels, mcfg.classes);
  opt.train.apply_overrides(mcfg);
  mcfg.validate();

  const auto filter = designated_test_sessions(ds);
  const auto splits = opt.scheme == Scheme::Independent ? loso_split(ds, filter) : dependent_split(ds, filter);

  std::vector<Job> jobs;
  for (const auto& split : splits) {
    std::vector<int> pool_labels;
    for (std::size_t i : split.train) pool_labels.push_back(ds.labels[i]);
    const auto folds = stratified_kfold(pool_labels, opt.inner_folds, derive_seed(opt.train.seed, split.subject, 0xF01D));
    for (std::size_t f = 0; f < folds.size(); ++f) {
      Job job{split.subject, f, {}, {}, split.test};
      for (std::size_t k : folds[f].train) job.train.push_back(split.train[k]);
      for (std::size_t k : folds[f].val) job.val.push_back(split.train[k]);
      jobs.push_back(std::move(job));
    }
  }
  log(to_string(opt.scheme) + " scheme: " + std::to_string(splits.size()) + " subjects, " +
      std::to_string(jobs.size()) + " trainings");

  ExperimentResult result;
  result.scheme = opt.scheme;
  result.class_names = ds.class_names;
  result.folds.resize(jobs.size());

  if (!opt.out_dir.empty()) std::filesystem::create_directories(opt.out_dir / "checkpoints");

  std::mutex log_mutex;
  auto run_job = [&](std::size_t j) {
    const Job& job = jobs[j];
    FoldResult& r = result.folds[j];
    r.subject = job.subject;
    r.fold = job.fold;
    r.train_idx = job.train;
    r.val_idx = job.val;
    r.test_idx = job.test;
    const std::uint64_t seed = derive_seed(opt.train.seed, job.subject, job.fold + 1);
    try {
      EpochedDataset train_set = ds.subset(job.train);
      if (!opt.augment.transforms.empty()) train_set = dataio::augment_pool(train_set, opt.augment, seed);
      const EpochedDataset val_set = ds.subset(job.val);
      const EpochedDataset test_set = ds.subset(job.test);
      TrainConfig tc = opt.train;
      tc.seed = seed;
      auto outcome = train(model::build<float>(mcfg, seed), train_set, val_set, tc);
      r.metrics = evaluate(outcome.params, test_set);
      r.history = std::move(outcome.history);
      r.ok = true;
      if (!opt.out_dir.empty() && opt.save_checkpoints) {
        model::save_checkpoint(outcome.params, checkpoint_path(opt.out_dir, job.subject, job.fold));
      }
    } catch (const TrainingAborted& e) {
      r.error = e.what();
      r.history = e.history;
      if (!opt.out_dir.empty() && opt.save_checkpoints) {
        auto p = checkpoint_path(opt.out_dir, job.subject, job.fold);
        p.replace_extension(".last_finite.mn2c");
        model::save_checkpoint(e.last_finite, p);
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.epochs_run = static_cast<int>(r.history.epochs.size());
    r.best_epoch = r.history.best_epoch;
    r.early_stopped = r.history.early_stopped;
    if (!opt.out_dir.empty()) write_history_csv(r.history, history_path(opt.out_dir, job.subject, job.fold));
    std::lock_guard lock(log_mutex);
    std::ostringstream os;
    os << "subject " << job.subject << " fold " << job.fold << ": ";
    if (r.ok) {
      os << "accuracy " << num(r.metrics.accuracy) << ", macro-F1 " << num(r.metrics.macro_f1) << ", " << r.epochs_run
         << " epochs (best " << r.best_epoch << ")";
    } else {
      os << "FAILED: " << r.error;
    }
    log(os.str());
  };

  if (opt.jobs == 1 || jobs.size() == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < std::min(opt.jobs, jobs.size()); ++w) {
      workers.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) run_job(j);
      });
    }
    for (auto& t : workers) t.join();
  }

  for (const auto& f : result.folds) result.failed += f.ok ? 0 : 1;
  result.accuracy = summarize(result.folds, &Metrics::accuracy);
  result.macro_f1 = summarize(result.folds, &Metrics::macro_f1);
  if (!opt.out_dir.empty()) {
    write_results_csv(result, opt.out_dir / "results.csv");
    write_results_json(result, opt.out_dir / "results.json");
  }
  return result;
}

ExperimentResult run_experiment(const std::filesystem::path& data_dir, const ExperimentOptions& options) {
  return run_experiment(dataio::read_dataset(data_dir), options);
}

void write_results_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "scheme,subject,fold,status,accuracy,macro_f1";
  std::size_t n_classes = result.class_names.size();
  for (const auto& f : result.folds) n_classes = std::max(n_classes, f.metrics.f1.size());
  for (std::size_t k = 0; k < n_classes; ++k) {
    out << ",f1_" << (k < result.class_names.size() ? result.class_names[k] : std::to_string(k));
  }
  out << ",epochs_run,best_epoch\n";
  for (const auto& f : result.folds) {
    out << to_string(result.scheme) << ',' << f.subject << ',' << f.fold << ',' << (f.ok ? "ok" : "failed");
    if (f.ok) {
      out << ',' << num(f.metrics.accuracy) << ',' << num(f.metrics.macro_f1);
      for (std::size_t k = 0; k < n_classes; ++k) out << ',' << (k < f.metrics.f1.size() ? num(f.metrics.f1[k]) : "");
    } else {
      out << ",,";
      for (std::size_t k = 0; k < n_classes; ++k) out << ',';
    }
    out << ',' << f.epochs_run << ',' << f.best_epoch << '\n';
  }
}

void write_results_json(const ExperimentResult& result, const std::filesystem::path& path) {
  using nlohmann::json;
  auto summary = [](const Summary& s) {
    return json{{"mean", s.mean}, {"sd_folds", s.sd_folds}, {"sd_subjects", s.sd_subjects}, {"n", s.n}};
  };
  json j;
  j["scheme"] = to_string(result.scheme);
  j["class_names"] = result.class_names;
  j["accuracy"] = summary(result.accuracy);
  j["macro_f1"] = summary(result.macro_f1);
  j["failed"] = result.failed;
  j["folds"] = json::array();
  for (const auto& f : result.folds) {
    json row{{"subject", f.subject},
             {"fold", f.fold},
             {"status", f.ok ? "ok" : "failed"},
             {"epochs_run", f.epochs_run},
             {"best_epoch", f.best_epoch},
             {"early_stopped", f.early_stopped},
             {"n_train", f.train_idx.size()},
             {"n_val", f.val_idx.size()},
             {"n_test", f.test_idx.size()}};
    if (f.ok) {
      row["accuracy"] = f.metrics.accuracy;
      row["macro_f1"] = f.metrics.macro_f1;
      row["precision"] = f.metrics.precision;
      row["recall"] = f.metrics.recall;
      row["f1"] = f.metrics.f1;
      row["confusion"] = f.metrics.confusion;
    } else {
      row["error"] = f.error;
    }
    j["folds"].push_back(std::move(row));
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "epoch,lr,train_mse,train_triplet,train_ce,train_total,val_mse,val_triplet,val_ce,val_total,seconds\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << ',' << num(e.lr) << ',' << num(e.train.mse) << ',' << num(e.train.triplet) << ','
        << num(e.train.ce) << ',' << num(e.train.total) << ',' << num(e.val.mse) << ',' << num(e.val.triplet) << ','
        << num(e.val.ce) << ',' << num(e.val.total) << ',' << num(e.seconds) << '\n';
  }
}

std::string format_summary(const ExperimentResult& r) {
  char buf[256];
  std::string out = to_string(r.scheme) + " scheme, " + std::to_string(r.accuracy.n) + " evaluations";
  if (r.failed) out += ", " + std::to_string(r.failed) + " failed";
  out += "\n";
  out += "metric     mean     sd(folds)  sd(subjects)\n";
  for (const auto& [name, s] : {std::pair{"accuracy", r.accuracy}, std::pair{"macro_f1", r.macro_f1}}) {
    std::snprintf(buf, sizeof buf, "%-9s  %6.2f%%  %6.2f     %6.2f\n", name, 100 * s.mean, 100 * s.sd_folds,
                  100 * s.sd_subjects);
    out += buf;
  }
  return out;
}

void export_latents(model::Min2NetParams<float>& params, const EpochedDataset& ds, const std::filesystem::path& path) {
  if (ds.channels != params.config.channels || ds.samples != params.config.samples) {
    throw ConfigError("checkpoint expects " + std::to_string(params.config.channels) + " channels x " +
                      std::to_string(params.config.samples) + " samples, data has " + std::to_string(ds.channels) +
                      " x " + std::to_string(ds.samples));
  }
  auto out = open_out(path);
  out << "subject,trial,label";
  for (std::size_t k = 1; k <= params.config.latent; ++k) out << ",z" << k;
  out << '\n';
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> idx;
  char buf[32];
  for (std::size_t start = 0; start < ds.n_trials(); start += kChunk) {
    idx.clear();
    for (std::size_t i = start; i < std::min(ds.n_trials(), start + kChunk); ++i) idx.push_back(i);
    const auto z = model::encode(params, gather_input(ds, idx), nn::Mode::Infer);
    const std::size_t w = z.dim(1);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      out << ds.subject_ids[idx[b]] << ',' << idx[b] << ',' << ds.labels[idx[b]];
      for (std::size_t k = 0; k < w; ++k) {
        std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(z[b * w + k]));
        out << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace min2net::harness
