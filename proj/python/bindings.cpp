#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "semlabels/attribution.hpp"
#include "semlabels/cli.hpp"
#include "semlabels/clustermetrics.hpp"
#include "semlabels/dataio.hpp"
#include "semlabels/encoding.hpp"
#include "semlabels/error.hpp"
#include "semlabels/hiermetrics.hpp"
#include "semlabels/taxonomy.hpp"

namespace py = pybind11;
using namespace semlabels;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> ToNumpy(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Matrix FromNumpy(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  return Matrix(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

std::vector<double> Flat(const Array& a) { return {a.data(), a.data() + a.size()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semantically augmented labels: taxonomy encoding, metrics and attribution distances.";

  // Messages start with the error code name, e.g. "CycleDetected: ...".
  py::register_exception<Error>(m, "SemlabelsError", PyExc_ValueError);

  py::class_<Taxonomy>(m, "Taxonomy")
      .def_static("parse", &Taxonomy::Parse, py::arg("edge_text"))
      .def_static("load", [](const std::string& path) { return Taxonomy::Load(path); },
                  py::arg("path"))
      .def_property_readonly("num_classes", &Taxonomy::num_classes)
      .def_property_readonly("num_levels", &Taxonomy::num_levels)
      .def_property_readonly("class_names", &Taxonomy::class_names)
      .def("level_size", &Taxonomy::level_size, py::arg("level"))
      .def("node_name", &Taxonomy::node_name, py::arg("level"), py::arg("index"))
      .def("ancestor_at_level", &Taxonomy::ancestor_at_level, py::arg("cls"), py::arg("level"))
      .def("lca_height", &Taxonomy::lca_height, py::arg("class_i"), py::arg("class_j"))
      .def("to_edge_text", &Taxonomy::ToEdgeText);

  m.def(
      "hierarchy_embedding",
      [](const Taxonomy& tax, bool include_root) {
        return ToNumpy(BuildHierarchyEmbedding(tax, {include_root}).rows);
      },
      py::arg("taxonomy"), py::arg("include_root") = false,
      "Stacked per-level one-hot embedding, one row per class.");

  m.def(
      "augmented_labels",
      [](const Array& embedding, double beta) {
        EmbeddingMatrix em{FromNumpy(embedding), {}, EmbeddingSource::kHierarchy};
        const AugmentedLabels out = BuildAugmentedLabels(em, beta);
        return py::make_tuple(ToNumpy(out.labels.values), ToNumpy(out.auxiliary.values));
      },
      py::arg("embedding"), py::arg("beta") = kDefaultHierarchyBeta,
      "Returns (labels, auxiliary) for a C x D embedding matrix.");

  m.def(
      "silhouette",
      [](const Array& points, std::vector<int> labels) {
        return Silhouette({FromNumpy(points), std::move(labels)});
      },
      py::arg("points"), py::arg("labels"));
  m.def(
      "calinski_harabasz",
      [](const Array& points, std::vector<int> labels) {
        return CalinskiHarabasz({FromNumpy(points), std::move(labels)});
      },
      py::arg("points"), py::arg("labels"));
  m.def(
      "s_dbw",
      [](const Array& points, std::vector<int> labels) {
        return SDbw({FromNumpy(points), std::move(labels)});
      },
      py::arg("points"), py::arg("labels"));

  m.def(
      "hierarchical_report",
      [](const Rankings& ranked, const std::vector<int>& truths, const Taxonomy& tax) {
        return ReportToCsv(FullReport(ranked, truths, tax));
      },
      py::arg("rankings"), py::arg("truths"), py::arg("taxonomy"),
      "Error@k, mistake severity and HD@k as `level,metric,value` CSV text.");

  m.def(
      "heatmap_distance",
      [](const std::string& metric, const Array& truth, const Array& explanation) {
        return HeatmapDistance(ParseHeatmapMetric(metric), Flat(truth), Flat(explanation));
      },
      py::arg("metric"), py::arg("truth"), py::arg("explanation"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "semlabels");
        std::ostringstream out, err;
        const int code = RunCli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one subcommand and returns (exit_code, stdout, stderr).");

  m.attr("__version__") = std::string(kToolVersion);
}
