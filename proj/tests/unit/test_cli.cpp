#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "min2net/cli/commands.hpp"
#include "min2net/cli/config.hpp"
#include "min2net/dataio/storage.hpp"
#include "min2net/dataio/synth.hpp"
#include "min2net/model/checkpoint.hpp"
#include "min2net/preproc/recording.hpp"

using namespace min2net;
using namespace min2net::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("min2net_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* kSmallSpec =
    "[synth]\n"
    "n_subjects = 4  # four subjects\n"
    "trials_per_class = 10\n"
    "channels = 4\n"
    "samples = 100\n"
    "seed = 3\n";

// Two subjects, one session each, 6 events per class at 250 Hz.
void make_raw_dir(const fs::path& dir) {
  preproc::RawManifest m;
  m.dataset = "fixture";
  m.classes = {{"right", 1}, {"left", 2}};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 5.0);
  for (std::uint32_t s = 1; s <= 2; ++s) {
    preproc::RawRecording rec;
    rec.fs = 250;
    rec.n_samples = 250 * 60;
    rec.channel_names = {"C3", "Cz", "C4", "EOG"};
    rec.samples.resize(4 * rec.n_samples);
    for (auto& v : rec.samples) v = noise(rng);
    for (std::uint32_t k = 0; k < 12; ++k) rec.events.push_back({250 + k * 1200, static_cast<std::int32_t>(1 + k % 2)});
    rec.subject = s;
    rec.session = {false, 1};
    m.recordings.push_back(preproc::add_raw_recording(rec, dir, "s" + std::to_string(s) + ".mirw"));
  }
  preproc::write_raw_manifest(m, dir);
}

}  // namespace

TEST_CASE("config parser reads the supported subset") {
  const Config c = Config::parse(
      "# comment\n"
      "top = 1\n"
      "[train]\n"
      "lr_start = 1e-3\n"
      "max_epochs = 1_000 # inline\n"
      "[augment]\n"
      "transforms = [\"jitter\", \"scale\",]\n"
      "[run]\n"
      "scheme = \"dep\\\"x\"\n"
      "balance_rest = false\n");
  CHECK(*c.integer("top") == 1);
  CHECK(*c.real("train.lr_start") == 1e-3);
  CHECK(*c.integer("train.max_epochs") == 1000);
  CHECK(*c.real("train.max_epochs") == 1000.0);
  CHECK(*c.strings("augment.transforms") == std::vector<std::string>{"jitter", "scale"});
  CHECK(*c.string("run.scheme") == "dep\"x");
  CHECK(*c.boolean("run.balance_rest") == false);
  CHECK_FALSE(c.integer("train.missing").has_value());
  CHECK_THROWS_AS(c.integer("train.lr_start"), ConfigError);
  CHECK_THROWS_AS(c.reject_unknown(known_keys()), ConfigError);
}

TEST_CASE("config parser reports the line of a syntax error") {
  auto message = [](const std::string& text) {
    try {
      Config::parse(text, "f.toml");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("a = 1\nb 2\n").find("f.toml:2") != std::string::npos);
  CHECK(message("a = 1\na = 2\n").find("duplicate") != std::string::npos);
  CHECK(message("[x\n").find("f.toml:1") != std::string::npos);
  CHECK(message("a = \"open\n").find("unterminated") != std::string::npos);
  CHECK(message("a = nan\n").find("f.toml:1") != std::string::npos);
  CHECK(message("a = yes\n").find("invalid") != std::string::npos);
  CHECK(message("a = [1, [2]]\n").find("nested") != std::string::npos);
}

TEST_CASE("resolved sections parse back to the same settings") {
  harness::TrainConfig t;
  t.lr_start = 3e-4;
  t.max_epochs = 17;
  dataio::AugmentSpec a;
  a.transforms = {"permute", "timewarp"};
  dataio::SynthSpec s;
  s.contrast = 0.35;
  const Config c = Config::parse(to_toml(t) + to_toml(a) + to_toml(s));
  c.reject_unknown(known_keys());
  harness::TrainConfig t2;
  dataio::AugmentSpec a2;
  dataio::SynthSpec s2;
  apply(c, t2);
  apply(c, a2);
  apply(c, s2);
  CHECK(t2.lr_start == t.lr_start);
  CHECK(t2.max_epochs == 17);
  CHECK(a2.transforms == a.transforms);
  CHECK(s2.contrast == s.contrast);
}

TEST_CASE("synth writes a dataset and is deterministic") {
  TempDir d("synth");
  write(d / "spec.toml", kSmallSpec);
  auto r = invoke({"synth", "--spec", d / "spec.toml", "--out", d / "a"});
  CHECK(r.code == 0);
  CHECK(fs::exists(d.path / "a" / "manifest.json"));
  CHECK(fs::exists(d.path / "a" / "synth.resolved.toml"));
  CHECK(invoke({"synth", "--spec", d / "spec.toml", "--out", d / "b"}).code == 0);
  const auto ma = dataio::read_manifest(d.path / "a"), mb = dataio::read_manifest(d.path / "b");
  REQUIRE(ma.subjects.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(ma.subjects[i].crc32 == mb.subjects[i].crc32);
  CHECK(slurp(d.path / "a" / "manifest.json") == slurp(d.path / "b" / "manifest.json"));
}

TEST_CASE("synth validation errors exit 2 naming the field") {
  TempDir d("synthbad");
  write(d / "neg.toml", "[synth]\ntrials_per_class = -5\n");
  auto r = invoke({"synth", "--spec", d / "neg.toml", "--out", d / "x"});
  CHECK(r.code == 2);
  CHECK(r.err.find("synth.trials_per_class") != std::string::npos);
  write(d / "contrast.toml", "[synth]\ncontrast = 1.5\n");
  r = invoke({"synth", "--spec", d / "contrast.toml", "--out", d / "x"});
  CHECK(r.code == 2);
  CHECK(r.err.find("contrast") != std::string::npos);
  write(d / "unknown.toml", "[synth]\nsubjects = 3\n");
  r = invoke({"synth", "--spec", d / "unknown.toml", "--out", d / "x"});
  CHECK(r.code == 2);
  CHECK(r.err.find("synth.subjects") != std::string::npos);
  CHECK(invoke({"synth", "--spec", d / "missing.toml", "--out", d / "x"}).code == 1);
  CHECK(invoke({"synth"}).code == 2);
}

TEST_CASE("MIN2NET_SEED overrides the config seed, --seed overrides both") {
  TempDir d("seed");
  write(d / "spec.toml", kSmallSpec);
  ::setenv("MIN2NET_SEED", "77", 1);
  CHECK(invoke({"synth", "--spec", d / "spec.toml", "--out", d / "env"}).code == 0);
  CHECK(invoke({"synth", "--spec", d / "spec.toml", "--out", d / "flag", "--seed", "5"}).code == 0);
  ::setenv("MIN2NET_SEED", "x1", 1);
  CHECK(invoke({"synth", "--spec", d / "spec.toml", "--out", d / "bad"}).code == 2);
  ::unsetenv("MIN2NET_SEED");
  CHECK(slurp(d.path / "env" / "synth.resolved.toml").find("seed = 77") != std::string::npos);
  CHECK(slurp(d.path / "flag" / "synth.resolved.toml").find("seed = 5") != std::string::npos);
}

TEST_CASE("preprocess epochs a raw directory") {
  TempDir d("prep");
  make_raw_dir(d.path / "raw");
  write(d / "channels.txt", "C3\nCz, C4  # motor strip\n");
  const std::vector<std::string> args{"preprocess", "--in", d / "raw", "--out", d / "ep", "--band", "8:30",
                                      "--order", "5", "--fs", "100", "--window", "0:4", "--channels", d / "channels.txt"};
  auto r = invoke(args);
  REQUIRE(r.code == 0);
  const EpochedDataset ds = dataio::read_dataset(d.path / "ep");
  CHECK(ds.n_trials() == 24);
  CHECK(ds.channels == 3);
  CHECK(ds.samples == 400);
  CHECK(ds.fs == 100.0f);
  CHECK(ds.channel_names == std::vector<std::string>{"C3", "Cz", "C4"});
  CHECK(r.err.find("subject 2") != std::string::npos);

  std::vector<std::string> again = args;
  again[4] = d / "ep2";
  CHECK(invoke(again).code == 0);
  for (const auto& name : {"manifest.json", "subject_001.mieg", "subject_002.mieg"}) {
    CHECK(slurp(d.path / "ep" / name) == slurp(d.path / "ep2" / name));
  }

  std::vector<std::string> bad = args;
  bad[6] = "40:30";
  CHECK(invoke(bad).code == 2);
  bad[6] = "8-30";
  CHECK(invoke(bad).code == 2);
  std::vector<std::string> missing = args;
  missing[2] = d / "nowhere";
  CHECK(invoke(missing).code == 1);
  write(d / "wrong.txt", "C3\nFz\n");
  std::vector<std::string> wrong = args;
  wrong.back() = d / "wrong.txt";
  r = invoke(wrong);
  CHECK(r.code == 2);
  CHECK(r.err.find("Fz") != std::string::npos);
}

TEST_CASE("run writes results, history and the resolved config") {
  TempDir d("run");
  write(d / "spec.toml", kSmallSpec);
  REQUIRE(invoke({"synth", "--spec", d / "spec.toml", "--out", d / "data"}).code == 0);
  write(d / "cfg.toml", "[train]\nbatch_size = 20\n[run]\nseed = 4\n");
  auto r = invoke({"run", "--data", d / "data", "--scheme", "independent", "--config", d / "cfg.toml", "--out",
                d / "res", "--max-epochs", "2", "--jobs", "2", "--augment", "scale"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("accuracy") != std::string::npos);
  std::ifstream csv(d.path / "res" / "results.csv");
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 21);
  CHECK(fs::exists(d.path / "res" / "history_3_4.csv"));
  const std::string resolved = slurp(d.path / "res" / "config.resolved.toml");
  CHECK(resolved.find("batch_size = 20") != std::string::npos);
  CHECK(resolved.find("max_epochs = 2") != std::string::npos);
  CHECK(resolved.find("seed = 4") != std::string::npos);
  CHECK(resolved.find("\"scale\"") != std::string::npos);
  // The echoed config is itself a valid config file.
  CHECK_NOTHROW(Config::load(d.path / "res" / "config.resolved.toml").reject_unknown(known_keys()));

  // Export from one of the fold checkpoints.
  const std::string ckpt = (d.path / "res" / "checkpoints" / "model_1_0.mn2c").string();
  r = invoke({"export-latents", "--checkpoint", ckpt, "--data", d / "data", "--out", d / "z.csv"});
  REQUIRE(r.code == 0);
  std::ifstream z(d / "z.csv");
  lines = 0;
  while (std::getline(z, line)) ++lines;
  CHECK(lines == 81);
}

TEST_CASE("run rejects bad schemes and single-session dependent data") {
  TempDir d("runbad");
  write(d / "spec.toml", std::string(kSmallSpec) + "online_fraction = 0.0\n");
  REQUIRE(invoke({"synth", "--spec", d / "spec.toml", "--out", d / "data"}).code == 0);
  auto r = invoke({"run", "--data", d / "data", "--scheme", "dependent", "--out", d / "res", "--max-epochs", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("single session") != std::string::npos);
  CHECK(invoke({"run", "--data", d / "data", "--scheme", "sideways", "--out", d / "res"}).code == 2);
  CHECK(invoke({"run", "--data", d / "absent", "--out", d / "res"}).code == 1);
  CHECK(invoke({"run", "--data", d / "data", "--out", d / "res", "--augment", "wobble", "--max-epochs", "1"}).code == 2);
}

TEST_CASE("export-latents guards") {
  TempDir d("export");
  write(d / "spec.toml", kSmallSpec);
  REQUIRE(invoke({"synth", "--spec", d / "spec.toml", "--out", d / "data"}).code == 0);
  auto params = model::build<float>(model::Min2NetConfig::make(6, 100, 2), 1);
  model::save_checkpoint(params, d.path / "c6.mn2c");
  auto r = invoke({"export-latents", "--checkpoint", d / "c6.mn2c", "--data", d / "data", "--out", d / "z.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.find("6 channels") != std::string::npos);
  CHECK(r.err.find("4") != std::string::npos);
  r = invoke({"export-latents", "--checkpoint", d / "none.mn2c", "--data", d / "data", "--out", d / "z.csv"});
  CHECK(r.code == 1);
}

TEST_CASE("every subcommand prints help and exits 0") {
  for (const char* sub : {"synth", "preprocess", "run", "export-latents"}) {
    const auto r = invoke({sub, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--") != std::string::npos);
  }
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"bogus"}).code == 2);
}
