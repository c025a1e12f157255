#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "min2net/cli/commands.hpp"
#include "min2net/dataio/augment.hpp"
#include "min2net/dataio/storage.hpp"
#include "min2net/dataio/synth.hpp"
#include "min2net/harness/metrics.hpp"
#include "min2net/model/checkpoint.hpp"
#include "min2net/model/losses.hpp"
#include "min2net/model/network.hpp"
#include "min2net/preproc/filter.hpp"
#include "min2net/preproc/recording.hpp"
#include "min2net/preproc/resample.hpp"

namespace py = pybind11;
using namespace min2net;

namespace {

using f32_array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using f64_array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using i32_array = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

template <typename T>
py::array_t<T> to_numpy(const std::vector<T>& v, std::vector<py::ssize_t> shape) {
  py::array_t<T> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

template <typename T, typename A>
std::vector<T> to_vector(const A& a) {
  return std::vector<T>(a.data(), a.data() + a.size());
}

// Datasets cross the boundary as plain dicts of arrays.
py::dict dataset_to_dict(const EpochedDataset& ds) {
  py::dict d;
  const auto n = static_cast<py::ssize_t>(ds.n_trials());
  d["data"] = to_numpy(ds.data, {n, static_cast<py::ssize_t>(ds.channels), static_cast<py::ssize_t>(ds.samples)});
  d["labels"] = to_numpy(std::vector<std::int32_t>(ds.labels.begin(), ds.labels.end()), {n});
  d["subjects"] = to_numpy(ds.subject_ids, {n});
  std::vector<std::uint8_t> tags;
  for (const auto& s : ds.sessions) tags.push_back(s.encode());
  d["sessions"] = to_numpy(tags, {n});
  d["fs"] = ds.fs;
  d["channel_names"] = ds.channel_names;
  d["class_names"] = ds.class_names;
  return d;
}

EpochedDataset dataset_from_dict(const py::dict& d) {
  EpochedDataset ds;
  const auto data = d["data"].cast<f32_array>();
  if (data.ndim() != 3) throw DimensionError("data must be trials x channels x samples");
  ds.channels = static_cast<std::size_t>(data.shape(1));
  ds.samples = static_cast<std::size_t>(data.shape(2));
  ds.data = to_vector<float>(data);
  const auto labels = d["labels"].cast<i32_array>();
  ds.labels.assign(labels.data(), labels.data() + labels.size());
  const std::size_t n = ds.labels.size();
  if (d.contains("subjects")) {
    const auto s = d["subjects"].cast<py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>>();
    ds.subject_ids = to_vector<std::uint32_t>(s);
  } else {
    ds.subject_ids.assign(n, 1);
  }
  if (d.contains("sessions")) {
    const auto s = d["sessions"].cast<py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>>();
    for (py::ssize_t i = 0; i < s.size(); ++i) ds.sessions.push_back(SessionTag::decode(s.data()[i]));
  } else {
    ds.sessions.assign(n, SessionTag{});
  }
  ds.fs = d.contains("fs") ? d["fs"].cast<float>() : 100.0f;
  if (d.contains("channel_names")) ds.channel_names = d["channel_names"].cast<std::vector<std::string>>();
  if (d.contains("class_names")) ds.class_names = d["class_names"].cast<std::vector<std::string>>();
  ds.validate();
  return ds;
}

py::dict recording_to_dict(const preproc::RawRecording& rec) {
  py::dict d;
  d["fs"] = rec.fs;
  d["channel_names"] = rec.channel_names;
  d["samples"] = to_numpy(rec.samples, {static_cast<py::ssize_t>(rec.n_channels()), static_cast<py::ssize_t>(rec.n_samples)});
  std::vector<std::uint32_t> onsets;
  std::vector<std::int32_t> codes;
  for (const auto& e : rec.events) {
    onsets.push_back(e.onset);
    codes.push_back(e.code);
  }
  const auto ne = static_cast<py::ssize_t>(rec.events.size());
  d["event_onsets"] = to_numpy(onsets, {ne});
  d["event_codes"] = to_numpy(codes, {ne});
  d["subject"] = rec.subject;
  d["session"] = py::make_tuple(rec.session.online ? "online" : "offline", rec.session.index);
  return d;
}

preproc::RawRecording recording_from_dict(const py::dict& d) {
  preproc::RawRecording rec;
  rec.fs = d["fs"].cast<double>();
  rec.channel_names = d["channel_names"].cast<std::vector<std::string>>();
  const auto x = d["samples"].cast<f64_array>();
  if (x.ndim() != 2) throw DimensionError("samples must be channels x time");
  rec.n_samples = static_cast<std::size_t>(x.shape(1));
  rec.samples = to_vector<double>(x);
  const auto onsets = d["event_onsets"].cast<py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>>();
  const auto codes = d["event_codes"].cast<i32_array>();
  if (onsets.size() != codes.size()) throw DimensionError("event onsets and codes differ in length");
  for (py::ssize_t i = 0; i < onsets.size(); ++i) rec.events.push_back({onsets.data()[i], codes.data()[i]});
  rec.subject = d["subject"].cast<std::uint32_t>();
  const auto session = d["session"].cast<std::pair<std::string, int>>();
  if (session.first != "online" && session.first != "offline") throw ConfigError("session kind must be online or offline");
  rec.session = {session.first == "online", static_cast<std::uint8_t>(session.second)};
  rec.validate();
  return rec;
}

nn::BasicTensor<float> input_tensor(const f32_array& x) {
  // trials x channels x samples -> [B,1,T,C]
  if (x.ndim() != 3) throw DimensionError("input must be trials x channels x samples");
  const auto b = static_cast<std::size_t>(x.shape(0)), c = static_cast<std::size_t>(x.shape(1)),
             t = static_cast<std::size_t>(x.shape(2));
  nn::BasicTensor<float> out({b, 1, t, c});
  const float* src = x.data();
  float* dst = out.data();
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t k = 0; k < t; ++k) dst[(i * t + k) * c + ch] = src[(i * c + ch) * t + k];
  return out;
}

py::array_t<float> tensor_to_numpy(const nn::BasicTensor<float>& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<float> out(shape);
  std::copy(t.data(), t.data() + t.size(), out.mutable_data());
  return out;
}

class Model {
 public:
  explicit Model(model::Min2NetParams<float> p) : params_(std::move(p)) {}

  static Model create(std::uint32_t channels, std::uint32_t samples, std::uint32_t classes, std::uint32_t latent,
                      std::uint64_t seed) {
    auto cfg = model::Min2NetConfig::make(channels, samples, classes);
    if (latent != 0) cfg.latent = latent;
    cfg.validate();
    return Model(model::build<float>(cfg, seed));
  }

  std::size_t param_count() const { return params_.trainable_count(); }

  py::dict config() const {
    const auto& c = params_.config;
    py::dict d;
    d["channels"] = c.channels;
    d["samples"] = c.samples;
    d["latent"] = c.latent;
    d["classes"] = c.classes;
    d["margin"] = c.margin;
    d["beta_mse"] = c.beta_mse;
    d["beta_triplet"] = c.beta_triplet;
    d["beta_ce"] = c.beta_ce;
    return d;
  }

  py::array_t<float> encode(const f32_array& x) {
    const auto in = input_tensor(x);
    return tensor_to_numpy(model::encode(params_, in, nn::Mode::Infer));
  }

  py::array_t<float> reconstruct(const f32_array& x) {
    const auto in = input_tensor(x);
    auto r = model::decode(params_, model::encode(params_, in, nn::Mode::Infer));
    return tensor_to_numpy(r);
  }

  py::array_t<float> predict_proba(const f32_array& x) {
    const auto in = input_tensor(x);
    return tensor_to_numpy(model::predict_proba(params_, in));
  }

  std::vector<std::pair<std::string, std::vector<std::size_t>>> shape_trace(std::size_t batch) {
    model::ShapeTrace trace;
    nn::BasicTensor<float> x({batch, 1, params_.config.samples, params_.config.channels});
    const auto z = model::encode<float>(params_, x, nn::Mode::Infer, nullptr, &trace);
    model::decode<float>(params_, z, nullptr, &trace);
    return {trace.begin(), trace.end()};
  }

  py::dict losses(const f32_array& x, const i32_array& labels) {
    const auto in = input_tensor(x);
    const std::vector<int> y(labels.data(), labels.data() + labels.size());
    const auto l = model::forward_losses(params_, in, y, nn::Mode::Infer, false);
    py::dict d;
    d["mse"] = l.mse;
    d["triplet"] = l.triplet;
    d["ce"] = l.ce;
    d["total"] = l.total;
    return d;
  }

  void save(const std::filesystem::path& path) const { model::save_checkpoint(params_, path); }

 private:
  model::Min2NetParams<float> params_;
};

}  // namespace

PYBIND11_MODULE(_min2net, m) {
  m.doc() = "MIN2Net motor-imagery EEG toolkit (native core)";

  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", config_error.ptr());
  auto io_error = py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<IntegrityError>(m, "IntegrityError", io_error.ptr());
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<BatchCompositionError>(m, "BatchCompositionError", PyExc_RuntimeError);

  // Signal processing.
  m.def(
      "butter_bandpass",
      [](int order, double low_hz, double high_hz, double fs) {
        const auto f = preproc::butter_bandpass({order, low_hz, high_hz, fs});
        std::vector<double> sos;
        for (const auto& s : f.sections) sos.insert(sos.end(), {s.b0, s.b1, s.b2, 1.0, s.a1, s.a2});
        return to_numpy(sos, {static_cast<py::ssize_t>(f.sections.size()), 6});
      },
      py::arg("order"), py::arg("low_hz"), py::arg("high_hz"), py::arg("fs"),
      "Second-order sections (n, 6) as b0 b1 b2 a0 a1 a2.");
  m.def(
      "filtfilt",
      [](const f64_array& x, int order, double low_hz, double high_hz, double fs) {
        const auto f = preproc::butter_bandpass({order, low_hz, high_hz, fs});
        const auto y = preproc::filtfilt(f, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        return to_numpy(y, {static_cast<py::ssize_t>(y.size())});
      },
      py::arg("x"), py::arg("order"), py::arg("low_hz"), py::arg("high_hz"), py::arg("fs"));
  m.def(
      "resample",
      [](const f64_array& x, double fs_in, double fs_out) {
        const auto y = preproc::resample(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), fs_in,
                                         fs_out);
        return to_numpy(y, {static_cast<py::ssize_t>(y.size())});
      },
      py::arg("x"), py::arg("fs_in"), py::arg("fs_out"));

  // Raw recordings.
  m.def("read_raw", [](const std::filesystem::path& p) { return recording_to_dict(preproc::read_raw(p)); });
  m.def("write_raw", [](const py::dict& d, const std::filesystem::path& p) { preproc::write_raw(recording_from_dict(d), p); });
  m.def("write_raw_directory", [](const std::filesystem::path& dir, const std::vector<py::dict>& recordings,
                                  const std::vector<std::pair<std::string, std::int32_t>>& classes,
                                  const std::string& dataset, const std::vector<std::uint32_t>& absent) {
    preproc::RawManifest man;
    man.dataset = dataset;
    for (const auto& [name, code] : classes) man.classes.push_back({name, code});
    for (const auto& d : recordings) {
      const auto rec = recording_from_dict(d);
      const std::string file = "subject_" + std::to_string(rec.subject) + "_" + (rec.session.online ? "on" : "off") +
                               std::to_string(rec.session.index) + ".mirw";
      man.recordings.push_back(preproc::add_raw_recording(rec, dir, file));
    }
    man.absent_subjects = absent;
    preproc::write_raw_manifest(man, dir);
  }, py::arg("dir"), py::arg("recordings"), py::arg("classes"), py::arg("dataset") = "raw",
     py::arg("absent_subjects") = std::vector<std::uint32_t>{});
  m.def("read_raw_manifest", [](const std::filesystem::path& dir) {
    const auto man = preproc::read_raw_manifest(dir);
    py::dict d;
    d["dataset"] = man.dataset;
    py::list classes, recs;
    for (const auto& c : man.classes) classes.append(py::make_tuple(c.name, c.code));
    for (const auto& e : man.recordings) {
      recs.append(py::dict(py::arg("file") = e.file, py::arg("subject") = e.subject,
                           py::arg("session") = py::make_tuple(e.session.online ? "online" : "offline", e.session.index),
                           py::arg("crc32") = e.crc32));
    }
    d["classes"] = classes;
    d["recordings"] = recs;
    d["absent_subjects"] = man.absent_subjects;
    return d;
  });

  // Epoched datasets.
  m.def("read_dataset", [](const std::filesystem::path& dir) { return dataset_to_dict(dataio::read_dataset(dir)); });
  m.def(
      "write_dataset",
      [](const py::dict& d, const std::filesystem::path& dir, const std::string& name) {
        dataio::write_dataset(dataset_from_dict(d), dir, name);
      },
      py::arg("dataset"), py::arg("dir"), py::arg("name") = "dataset");
  m.def(
      "synth",
      [](std::uint32_t n_subjects, std::uint32_t trials_per_class, std::uint32_t n_classes, std::uint32_t channels,
         std::uint32_t samples, double contrast, double noise, std::uint64_t seed) {
        dataio::SynthSpec s;
        s.n_subjects = n_subjects;
        s.trials_per_class = trials_per_class;
        s.n_classes = n_classes;
        s.channels = channels;
        s.samples = samples;
        s.contrast = contrast;
        s.noise = noise;
        s.seed = seed;
        return dataset_to_dict(dataio::synth_generate(s));
      },
      py::arg("n_subjects") = 6, py::arg("trials_per_class") = 20, py::arg("n_classes") = 2, py::arg("channels") = 8,
      py::arg("samples") = 400, py::arg("contrast") = 0.8, py::arg("noise") = 0.5, py::arg("seed") = 0);
  m.def(
      "augment",
      [](const py::dict& d, const std::string& transform, double sigma, int knots, int segments, std::uint64_t seed) {
        const auto ds = dataset_from_dict(d);
        if (transform == "jitter") return dataset_to_dict(dataio::augment_jitter(ds, sigma, seed));
        if (transform == "scale") return dataset_to_dict(dataio::augment_scale(ds, sigma, seed));
        if (transform == "magwarp") return dataset_to_dict(dataio::augment_magwarp(ds, sigma, knots, seed));
        if (transform == "timewarp") return dataset_to_dict(dataio::augment_timewarp(ds, sigma, knots, seed));
        if (transform == "permute") return dataset_to_dict(dataio::augment_permute(ds, segments, seed));
        throw ConfigError("unknown augmentation '" + transform + "'");
      },
      py::arg("dataset"), py::arg("transform"), py::arg("sigma") = 0.1, py::arg("knots") = 4, py::arg("segments") = 4,
      py::arg("seed") = 0);

  // Losses.
  m.def(
      "triplet_loss",
      [](const f64_array& z, const i32_array& labels, double margin) {
        if (z.ndim() != 2) throw DimensionError("latents must be batch x width");
        nn::BasicTensor<double> t({static_cast<std::size_t>(z.shape(0)), static_cast<std::size_t>(z.shape(1))},
                                  to_vector<double>(z));
        const std::vector<int> y(labels.data(), labels.data() + labels.size());
        return model::triplet_semihard_loss(t, y, margin).value;
      },
      py::arg("latents"), py::arg("labels"), py::arg("margin") = 1.0);
  m.def("mine_triplets", [](const f64_array& z, const i32_array& labels) {
    if (z.ndim() != 2) throw DimensionError("latents must be batch x width");
    nn::BasicTensor<double> t({static_cast<std::size_t>(z.shape(0)), static_cast<std::size_t>(z.shape(1))},
                              to_vector<double>(z));
    const std::vector<int> y(labels.data(), labels.data() + labels.size());
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
    for (const auto& tr : model::mine_triplets(t, y)) out.emplace_back(tr.anchor, tr.positive, tr.negative);
    return out;
  });

  py::class_<Model>(m, "Model")
      .def(py::init(&Model::create), py::arg("channels"), py::arg("samples"), py::arg("classes") = 2,
           py::arg("latent") = 0, py::arg("seed") = 0)
      .def_static("load", [](const std::filesystem::path& p) { return Model(model::load_checkpoint(p)); })
      .def("save", &Model::save)
      .def_property_readonly("param_count", &Model::param_count)
      .def_property_readonly("config", &Model::config)
      .def("encode", &Model::encode)
      .def("reconstruct", &Model::reconstruct)
      .def("predict_proba", &Model::predict_proba)
      .def("shape_trace", &Model::shape_trace, py::arg("batch") = 1)
      .def("losses", &Model::losses);

  m.def(
      "metrics",
      [](const i32_array& truth, const i32_array& pred, std::size_t n_classes) {
        const std::vector<int> t(truth.data(), truth.data() + truth.size());
        const std::vector<int> p(pred.data(), pred.data() + pred.size());
        const auto r = harness::compute_metrics(t, p, n_classes);
        py::dict d;
        d["accuracy"] = r.accuracy;
        d["macro_f1"] = r.macro_f1;
        d["f1"] = r.f1;
        d["confusion"] = r.confusion;
        return d;
      },
      py::arg("truth"), py::arg("predicted"), py::arg("n_classes"));

  // Same entry point as the command-line tool; returns (exit code, stdout, stderr).
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release nogil;
      code = cli::run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
