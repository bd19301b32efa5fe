// Copyright 2026 The eend Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "eend/config.h"
#include "eend/errors.h"
#include "eend/features.h"
#include "eend/infer.h"
#include "eend/loss.h"
#include "eend/model.h"
#include "eend/platform.h"
#include "eend/score.h"

namespace py = pybind11;

namespace eend {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor ToTensor(const Array& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array, got " + std::to_string(a.ndim()));
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Tensor({rows, cols}, std::vector<Real>(a.data(), a.data() + rows * cols));
}

Array ToArray(const Tensor& t) {
  Array a({t.rows(), t.cols()});
  std::copy(t.values().begin(), t.values().end(), a.mutable_data());
  return a;
}

Waveform ToWaveform(const Array& samples, int sample_rate) {
  if (samples.ndim() != 1) throw DimensionError("expected 1-d samples");
  Waveform w;
  w.samples.assign(samples.data(), samples.data() + samples.shape(0));
  w.sample_rate = sample_rate;
  return w;
}

FeatureOptions Options(int context_left, int context_right, int subsample) {
  FeatureOptions o;
  o.context_left = context_left;
  o.context_right = context_right;
  o.subsample = subsample;
  return o;
}

py::dict ReportDict(const DerReport& r) {
  py::dict d;
  d["der"] = r.der;
  d["mi"] = r.miss;
  d["fa"] = r.false_alarm;
  d["cf"] = r.confusion;
  d["sad_mi"] = r.sad_miss;
  d["sad_fa"] = r.sad_fa;
  d["scored_time"] = r.scored_time;
  return d;
}

}  // namespace
}  // namespace eend

PYBIND11_MODULE(eend, m) {
  using namespace eend;
  ConfigureAllocator();
  m.doc() = "End-to-end neural speaker diarization";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<ScoreError>(m, "ScoreError", error.ptr());

  m.def("version", &Version);

  m.def(
      "read_wav",
      [](const std::string& path) {
        const Waveform w = ReadWav(path);
        return Array(static_cast<py::ssize_t>(w.samples.size()), w.samples.data());
      },
      py::arg("path"), "16-bit mono PCM samples scaled to [-1, 1).");

  m.def(
      "extract_features",
      [](const Array& samples, int sample_rate, int context_left, int context_right,
         int subsample) {
        return ToArray(ExtractFeatures(ToWaveform(samples, sample_rate),
                                       Options(context_left, context_right, subsample))
                           .frames);
      },
      py::arg("samples"), py::arg("sample_rate") = kSampleRate, py::arg("context_left") = 7,
      py::arg("context_right") = 7, py::arg("subsample") = 10,
      "Spliced, subsampled log-mel features [T x F].");

  py::class_<Model>(m, "Model")
      .def_static(
          "init",
          [](const std::string& config_text, std::uint64_t seed) {
            return InitModel(ModelConfig::FromText(config_text), seed);
          },
          py::arg("config"), py::arg("seed") = 0,
          "Fresh model from key=value configuration lines.")
      .def_static("load", py::overload_cast<const std::string&>(&LoadModel), py::arg("path"))
      .def("save", [](const Model& model, const std::string& path) { SaveModel(model, path); })
      .def_property_readonly("config", [](const Model& model) { return model.config.ToText(); })
      .def_property_readonly("in_dim", [](const Model& model) { return model.config.in_dim(); })
      .def_property_readonly("speakers",
                             [](const Model& model) { return model.config.speakers(); })
      .def(
          "posteriors",
          [](const Model& model, const Array& features) {
            return ToArray(Posteriors(model, ToTensor(features)));
          },
          py::arg("features"))
      .def(
          "diarize",
          [](const Model& model, const Array& samples, double threshold, int median_window,
             const std::string& recording, int sample_rate) {
            const DiarizationResult r =
                DiarizeWaveform(model, ToWaveform(samples, sample_rate),
                                {threshold, median_window}, FeatureOptions{}, recording);
            return EmitRttm(ToRttm(r.hypothesis));
          },
          py::arg("samples"), py::arg("threshold") = 0.5, py::arg("median_window") = 11,
          py::arg("recording") = "rec", py::arg("sample_rate") = kSampleRate,
          "RTTM text of the diarization of one recording.");

  m.def(
      "pit_loss",
      [](const Array& z, const Array& labels) {
        Graph g(false);
        const PermutationResult r = PermutationFreeLoss(g.Constant(ToTensor(z)), ToTensor(labels));
        return py::make_tuple(r.loss.value().item(), r.best_perm);
      },
      py::arg("z"), py::arg("labels"),
      "Permutation-free BCE and the label permutation that attains it.");

  m.def(
      "score",
      [](const std::string& ref, const std::string& hyp, double collar) {
        ScoreOptions o;
        o.collar = collar;
        return ReportDict(ScoreDer(ParseRttm(ref), ParseRttm(hyp), o));
      },
      py::arg("ref"), py::arg("hyp"), py::arg("collar") = 0.25,
      "DER components in percent from two RTTM texts.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::Run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool; returns (exit_code, stdout, stderr).");
}
