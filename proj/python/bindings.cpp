// Copyright 2026 The accentlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings: DSP, metrics, model summaries and the command line.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "accentlab/audio/features.hpp"
#include "accentlab/audio/griffin_lim.hpp"
#include "accentlab/audio/wav.hpp"
#include "accentlab/cli/cli.hpp"
#include "accentlab/corpus/corpus.hpp"
#include "accentlab/error.hpp"
#include "accentlab/eval/metrics.hpp"
#include "accentlab/models/architectures.hpp"

namespace py = pybind11;
using namespace accentlab;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const audio::FeatureMatrix& m) {
  py::array_t<double> out({m.rows, m.cols});
  std::copy(m.values.begin(), m.values.end(), out.mutable_data());
  return out;
}

audio::FeatureMatrix from_numpy(const DoubleArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  audio::FeatureMatrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.values.begin());
  return m;
}

audio::Signal to_signal(const DoubleArray& a) {
  audio::Signal s;
  s.samples.assign(a.data(), a.data() + a.size());
  return s;
}

py::array_t<float> samples(const audio::Signal& s) {
  py::array_t<float> out(static_cast<py::ssize_t>(s.samples.size()));
  std::copy(s.samples.begin(), s.samples.end(), out.mutable_data());
  return out;
}

template <typename Graph>
py::list summary(const Graph& g) {
  py::list rows;
  for (const auto& r : g.summary()) rows.append(py::make_tuple(r.name, r.kind, r.output_shape, r.params));
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Accent recognition and conversion toolkit";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("stft_magnitude", [](const DoubleArray& x) { return to_numpy(audio::stft_magnitude(to_signal(x))); },
        py::arg("samples"));
  m.def("mfcc", [](const DoubleArray& x) { return to_numpy(audio::mfcc(to_signal(x))); }, py::arg("samples"));
  m.def("griffin_lim",
        [](const DoubleArray& mag, int iterations) { return samples(audio::griffin_lim(from_numpy(mag), iterations)); },
        py::arg("magnitude"), py::arg("iterations") = 60);
  m.def("relative_spectral_error",
        [](const DoubleArray& a, const DoubleArray& b) {
          return audio::relative_spectral_error(from_numpy(a), from_numpy(b));
        });
  m.def("read_wav", [](const std::string& path) { return samples(audio::read_wav(path)); });
  m.def("write_wav", [](const std::string& path, const DoubleArray& x) { audio::write_wav(path, to_signal(x)); });

  m.def("eer", [](std::vector<double> s, std::vector<int> y) { return eval::eer({std::move(s), std::move(y)}); },
        py::arg("scores"), py::arg("labels"));
  m.def("min_dcf",
        [](std::vector<double> s, std::vector<int> y, double p) {
          return eval::min_dcf({std::move(s), std::move(y)}, p);
        },
        py::arg("scores"), py::arg("labels"), py::arg("p_target"));
  m.def("classification_report",
        [](const std::vector<int>& truth, const std::vector<int>& pred, int n) {
          const auto r = eval::classification_report(truth, pred, n);
          py::dict d;
          d["accuracy"] = r.accuracy;
          d["macro_f1"] = r.macro_f1;
          d["precision"] = r.precision;
          d["recall"] = r.recall;
          d["f1"] = r.f1;
          d["confusion"] = r.confusion.counts;
          return d;
        },
        py::arg("truth"), py::arg("pred"), py::arg("n_classes"));

  m.def("class_names", [] {
    const auto& n = corpus::class_names();
    return std::vector<std::string>(n.begin(), n.end());
  });
  m.def("model_summary", [](const std::string& name) {
    if (name == "cnn") return summary(models::build_cnn_classifier<float>());
    if (name == "tdnn") return summary(models::build_tdnn_classifier<float>());
    if (name == "encoder") return summary(models::build_encoder<float>());
    if (name == "decoder") return summary(models::build_decoder<float>());
    throw py::value_error("unknown model: " + name);
  });

  m.def("run_cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "accentlab");
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
