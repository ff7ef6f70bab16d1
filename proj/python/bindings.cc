#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cubelens/cli.h"
#include "cubelens/deviation.h"
#include "cubelens/ingest.h"
#include "cubelens/service.h"
#include "cubelens/synth.h"

namespace py = pybind11;
using namespace cubelens;

namespace {

py::object DeviationValue(const Deviation& d) {
  if (d.status == DeviationStatus::kUnsupported) return py::none();
  return py::float_(d.value);
}

Dataset DatasetFromText(const std::string& text, const std::string& tz) {
  return BuildDataset(ParseLogText(text), ParseUtcOffset(tz));
}

}  // namespace

PYBIND11_MODULE(_cubelens, m) {
  m.doc() = "Native core of cubelens";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def("poisson_cdf", &PoissonCdf, py::arg("k"), py::arg("lam"));
  m.def("log_poisson_cdf", &LogPoissonCdf, py::arg("k"), py::arg("lam"));
  m.def(
      "deviation_poisson",
      [](std::uint64_t observed, double expected, const std::string& survival) {
        return DeviationValue(DeviationPoisson(observed, expected, ParseSurvivalMode(survival)));
      },
      py::arg("observed"), py::arg("expected"), py::arg("survival") = "gt");
  m.def(
      "deviation_ratio",
      [](std::uint64_t observed, double expected) {
        return DeviationValue(DeviationRatio(observed, expected));
      },
      py::arg("observed"), py::arg("expected"));
  m.def("normalize_hashtag", &NormalizeHashtag, py::arg("raw"));
  m.def(
      "bin_time",
      [](std::int64_t ts, const std::string& tz) {
        DayHour dh = BinTime(ts, ParseUtcOffset(tz));
        return py::make_tuple(dh.day, dh.hour);
      },
      py::arg("timestamp"), py::arg("tz") = "UTC");
  m.def(
      "parse_log",
      [](const std::string& text) {
        ParsedLog log = ParseLogText(text);
        py::list entries;
        for (const auto& e : log.entries) {
          entries.append(py::make_tuple(e.line, e.timestamp, e.spreader, e.author, e.hashtags));
        }
        py::list errors;
        for (const auto& e : log.errors) errors.append(py::make_tuple(e.line, e.message));
        return py::make_tuple(entries, errors);
      },
      py::arg("text"));
  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = RunCommand(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
  m.def(
      "synth",
      [](const std::string& preset, std::uint64_t seed) {
        SynthResult r = Generate(PresetScenario(preset, seed));
        std::ostringstream log;
        WriteLog(log, r.entries);
        return py::make_tuple(log.str(), ManifestJson(r));
      },
      py::arg("preset") = "fixture", py::arg("seed") = 1);
  m.def("preset_names", &PresetNames);

  py::class_<Service>(m, "Service")
      .def(py::init<>())
      .def_static(
          "from_text",
          [](const std::string& text, const std::string& tz,
             std::optional<std::string> communities) {
            std::optional<CommunityAssignment> c;
            if (communities) c = ParseCommunities(*communities);
            return std::make_unique<Service>(DatasetFromText(text, tz), std::move(c));
          },
          py::arg("text"), py::arg("tz") = "UTC", py::arg("communities") = py::none())
      .def_static(
          "from_file",
          [](const std::string& path, const std::string& tz,
             std::optional<std::string> communities) {
            std::optional<CommunityAssignment> c;
            if (communities) c = LoadCommunities(*communities);
            return std::make_unique<Service>(LoadDataset(path, ParseUtcOffset(tz)), std::move(c));
          },
          py::arg("path"), py::arg("tz") = "UTC", py::arg("communities") = py::none())
      .def_property_readonly("loaded", &Service::loaded)
      .def(
          "query",
          [](const Service& s, const std::string& method, const std::string& path,
             const std::map<std::string, std::string>& params, const std::string& body) {
            QueryParams q(params.begin(), params.end());
            ServiceResponse r;
            {
              py::gil_scoped_release release;
              r = s.HandleQuery(method, path, q, body);
            }
            return py::make_tuple(r.status, r.body);
          },
          py::arg("method"), py::arg("path"),
          py::arg("params") = std::map<std::string, std::string>{}, py::arg("body") = "");
}
