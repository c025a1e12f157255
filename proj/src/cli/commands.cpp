#include "min2net/cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "min2net/cli/config.hpp"
#include "min2net/dataio/storage.hpp"
#include "min2net/harness/experiment.hpp"
#include "min2net/model/checkpoint.hpp"

namespace min2net::cli {
namespace {

std::pair<double, double> parse_range(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const double a = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument(text);
    const std::string rest = text.substr(colon + 1);
    const double b = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::logic_error&) {
    throw ConfigError(flag + " expects <from>:<to>, got '" + text + "'");
  }
}

Config load_optional(const std::string& path) {
  Config cfg = path.empty() ? Config{} : Config::load(path);
  cfg.reject_unknown(known_keys());
  return cfg;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("MIN2NET_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string("MIN2NET_SEED must be a non-negative integer, got '") + v + "'");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::vector<std::string> read_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open channel list " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (auto& name : dataio::parse_transform_list(line)) out.push_back(name);
  }
  if (out.empty()) throw ConfigError("channel list " + path + " is empty");
  return out;
}

struct SynthArgs {
  std::string spec, out;
  std::optional<std::int64_t> seed;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
  const Config cfg = load_optional(a.spec);
  dataio::SynthSpec spec;
  apply(cfg, spec);
  if (const auto s = env_seed()) spec.seed = *s;
  if (a.seed) {
    if (*a.seed < 0) throw ConfigError("--seed must be >= 0");
    spec.seed = static_cast<std::uint64_t>(*a.seed);
  }
  spec.validate();
  const EpochedDataset ds = dataio::synth_generate(spec);
  const auto m = dataio::write_dataset(ds, a.out, "synthetic");
  write_text(std::filesystem::path(a.out) / "synth.resolved.toml", to_toml(spec));
  out << "synthetic dataset: " << m.subjects.size() << " subjects, " << ds.n_trials() << " trials, "
      << ds.channels << " channels x " << ds.samples << " samples at " << ds.fs << " Hz -> " << a.out << "\n";
  return kExitOk;
}

struct PreprocessArgs {
  std::string in, out, config, band, window, rest_window, channels;
  std::optional<int> order;
  std::optional<double> fs;
  bool standardize = false;
};

int cmd_preprocess(const PreprocessArgs& a, std::ostream& out, std::ostream& err) {
  const Config cfg = load_optional(a.config);
  preproc::PipelineSpec spec;
  apply(cfg, spec);
  if (!a.band.empty()) std::tie(spec.band.low_hz, spec.band.high_hz) = parse_range(a.band, "--band");
  if (a.order) spec.band.order = *a.order;
  if (a.fs) spec.target_fs = *a.fs;
  if (!a.window.empty()) std::tie(spec.window.start_s, spec.window.end_s) = parse_range(a.window, "--window");
  if (!a.rest_window.empty()) {
    const auto [s, e] = parse_range(a.rest_window, "--rest-window");
    spec.rest_window = preproc::EpochWindow{s, e};
  }
  if (!a.channels.empty()) spec.channels = read_channel_file(a.channels);
  if (a.standardize) spec.standardize = true;
  spec.validate();

  const auto manifest = preproc::read_raw_manifest(a.in);
  const EpochedDataset ds = preproc::preprocess_directory(a.in, spec, [&](const preproc::RawEntry& e, std::size_t n) {
    err << "subject " << e.subject << " (" << (e.session.online ? "online" : "offline") << " session "
        << int(e.session.index) << "): " << n << " trials\n";
  });
  const auto m = dataio::write_dataset(ds, a.out, manifest.dataset.empty() ? "dataset" : manifest.dataset);
  write_text(std::filesystem::path(a.out) / "preprocess.resolved.toml", to_toml(spec));
  out << "epoched dataset: " << m.subjects.size() << " subjects, " << ds.n_trials() << " trials, " << ds.channels
      << " channels x " << ds.samples << " samples at " << ds.fs << " Hz -> " << a.out << "\n";
  return kExitOk;
}

struct RunArgs {
  std::string data, scheme, config, out, augment;
  std::optional<std::int64_t> seed;
  std::optional<int> jobs, max_epochs;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const Config cfg = load_optional(a.config);
  const std::string scheme_text = !a.scheme.empty() ? a.scheme : cfg.string("run.scheme").value_or("independent");
  const harness::Scheme scheme = harness::parse_scheme(scheme_text);
  const EpochedDataset ds = dataio::read_dataset(a.data);

  harness::ExperimentOptions opt;
  opt.scheme = scheme;
  const std::size_t n_classes = std::max<std::size_t>(ds.class_names.size(), 2);
  opt.train = harness::TrainConfig::defaults(scheme == harness::Scheme::Independent, n_classes);
  apply(cfg, opt.train);
  if (const auto s = env_seed()) opt.train.seed = *s;
  if (a.seed) {
    if (*a.seed < 0) throw ConfigError("--seed must be >= 0");
    opt.train.seed = static_cast<std::uint64_t>(*a.seed);
  }
  if (a.max_epochs) opt.train.max_epochs = *a.max_epochs;

  opt.model.latent = 0;
  apply(cfg, opt.model);
  apply(cfg, opt.augment);
  if (!a.augment.empty()) opt.augment.transforms = dataio::parse_transform_list(a.augment);
  if (const auto v = cfg.integer("run.inner_folds")) {
    if (*v < 2) throw ConfigError("run.inner_folds must be >= 2");
    opt.inner_folds = static_cast<std::size_t>(*v);
  }
  std::int64_t jobs = cfg.integer("run.jobs").value_or(1);
  if (a.jobs) jobs = *a.jobs;
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  opt.jobs = static_cast<std::size_t>(jobs);
  if (const auto v = cfg.boolean("run.balance_rest")) opt.balance_rest = *v;
  if (const auto v = cfg.boolean("run.save_checkpoints")) opt.save_checkpoints = *v;
  opt.out_dir = a.out;
  opt.log = [&err](const std::string& line) { err << line << "\n" << std::flush; };

  // Resolve model dimensions here so the echoed config is complete.
  model::Min2NetConfig shown = opt.model;
  shown.channels = static_cast<std::uint32_t>(ds.channels);
  shown.samples = static_cast<std::uint32_t>(ds.samples);
  shown.classes = static_cast<std::uint32_t>(n_classes);
  if (shown.latent == 0) shown.latent = model::Min2NetConfig::default_latent(shown.channels, shown.classes);
  opt.model.latent = shown.latent;
  std::ostringstream resolved;
  resolved << "[run]\nscheme = \"" << harness::to_string(scheme) << "\"\nseed = " << opt.train.seed
           << "\ninner_folds = " << opt.inner_folds << "\njobs = " << opt.jobs << "\n";
  if (opt.balance_rest) resolved << "balance_rest = " << (*opt.balance_rest ? "true" : "false") << "\n";
  resolved << "save_checkpoints = " << (opt.save_checkpoints ? "true" : "false") << "\n\n"
           << to_toml(shown) << "\n" << to_toml(opt.train) << "\n" << to_toml(opt.augment);
  write_text(std::filesystem::path(a.out) / "config.resolved.toml", resolved.str());

  const auto result = harness::run_experiment(ds, opt);
  out << harness::format_summary(result);
  if (result.failed == result.folds.size()) {
    err << "every fold failed\n";
    return kExitIo;
  }
  return kExitOk;
}

struct ExportArgs {
  std::string checkpoint, data, out;
};

int cmd_export(const ExportArgs& a, std::ostream& out, std::ostream&) {
  auto params = model::load_checkpoint(a.checkpoint);
  const EpochedDataset ds = dataio::read_dataset(a.data);
  harness::export_latents(params, ds, a.out);
  out << ds.n_trials() << " latent rows of width " << params.config.latent << " -> " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-task autoencoder toolkit for motor-imagery EEG", "min2net"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ERD/ERS dataset");
  synth->add_option("--spec", sa.spec, "Config file with a [synth] section");
  synth->add_option("--out", sa.out, "Output dataset directory")->required();
  synth->add_option("--seed", sa.seed, "Seed (overrides config and MIN2NET_SEED)");

  PreprocessArgs pa;
  auto* prep = app.add_subcommand("preprocess", "Filter, resample and epoch a canonical raw directory");
  prep->add_option("--in", pa.in, "Raw directory with manifest.json")->required();
  prep->add_option("--out", pa.out, "Output dataset directory")->required();
  prep->add_option("--config", pa.config, "Config file with a [preprocess] section");
  prep->add_option("--band", pa.band, "Pass band in Hz as low:high (default 8:30)");
  prep->add_option("--order", pa.order, "Butterworth order (default 5)");
  prep->add_option("--fs", pa.fs, "Target sampling rate in Hz (default 100)");
  prep->add_option("--window", pa.window, "Epoch window in seconds after onset (default 0:4)");
  prep->add_option("--rest-window", pa.rest_window, "Adds a rest class cut from this window, e.g. 4:8");
  prep->add_option("--channels", pa.channels, "File listing channel names (default: all)");
  prep->add_flag("--standardize", pa.standardize, "Z-score each trial and channel");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Train and evaluate under one evaluation scheme");
  run->add_option("--data", ra.data, "Dataset directory")->required();
  run->add_option("--scheme", ra.scheme, "dependent or independent (default: run.scheme or independent)");
  run->add_option("--config", ra.config, "Config file");
  run->add_option("--out", ra.out, "Results directory")->required();
  run->add_option("--augment", ra.augment, "Comma list of jitter,scale,magwarp,timewarp,permute (default none)");
  run->add_option("--jobs", ra.jobs, "Folds trained concurrently (default 1)");
  run->add_option("--seed", ra.seed, "Seed (overrides config and MIN2NET_SEED)");
  run->add_option("--max-epochs", ra.max_epochs, "Epoch cap (default 200)");

  ExportArgs ea;
  auto* exp = app.add_subcommand("export-latents", "Write infer-mode latent vectors as CSV");
  exp->add_option("--checkpoint", ea.checkpoint, "Model checkpoint")->required();
  exp->add_option("--data", ea.data, "Dataset directory")->required();
  exp->add_option("--out", ea.out, "Output CSV")->required();

  std::vector<std::string> argv_store{"min2net"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (*synth) return cmd_synth(sa, out, err);
    if (*prep) return cmd_preprocess(pa, out, err);
    if (*run) return cmd_run(ra, out, err);
    return cmd_export(ea, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace min2net::cli
