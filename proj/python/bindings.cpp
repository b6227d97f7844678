/*
 * Copyright 2026 The fairrecourse Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "fairrecourse/blockrerank.hpp"
#include "fairrecourse/counterfactual.hpp"
#include "fairrecourse/io.hpp"
#include "fairrecourse/metrics.hpp"
#include "fairrecourse/pipeline.hpp"
#include "fairrecourse/rerank.hpp"

namespace py = pybind11;
using namespace fairrecourse;

namespace {

std::vector<std::string> ids_for(const Prepared& p, const std::vector<std::size_t>& order) {
  std::vector<std::string> ids;
  ids.reserve(order.size());
  for (std::size_t i : order) ids.push_back(p.dataset.records[i].id);
  return ids;
}

py::dict intervention_dict(const Prepared& p, const Schema& s, const Intervention& iv) {
  py::dict d;
  d["id"] = p.dataset.records[iv.record].id;
  std::vector<std::string> names;
  for (std::size_t k : iv.attributes) names.push_back(s.attribute(k).name);
  d["attributes"] = names;
  d["old_values"] = iv.old_values;
  d["new_values"] = iv.new_values;
  d["old_cost"] = iv.old_cost;
  d["new_cost"] = iv.new_cost;
  d["distance"] = iv.distance;
  return d;
}

template <typename Result>
py::list interventions_of(const Prepared& p, const Schema& s, const Result& r) {
  py::list out;
  for (const Intervention& iv : r.interventions) out.append(intervention_dict(p, s, iv));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Recourse-aware fair re-ranking";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<SchemaError>(m, "SchemaError", error);
  py::register_exception<InputError>(m, "InputError", error);
  py::register_exception<NoRecourseError>(m, "NoRecourseError", error);
  py::register_exception<StreamError>(m, "StreamError", error);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<InvariantError>(m, "InvariantError", error);

  py::class_<Schema>(m, "Schema")
      .def_static("from_json", [](const std::string& text) { return parse_schema(text); }, py::arg("text"))
      .def_static("load", &load_schema, py::arg("path"))
      .def("to_json", [](const Schema& s) { return schema_to_json(s); })
      .def_property_readonly("attributes",
                             [](const Schema& s) {
                               std::vector<std::string> names;
                               for (const auto& a : s.attributes()) names.push_back(a.name);
                               return names;
                             })
      .def_property_readonly("groups", &Schema::group_labels)
      .def("__len__", &Schema::size)
      .def("__repr__", [](const Schema& s) { return "<Schema with " + std::to_string(s.size()) + " attributes>"; });

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("ids",
                             [](const Dataset& d) {
                               std::vector<std::string> ids;
                               for (const auto& r : d.records) ids.push_back(r.id);
                               return ids;
                             })
      .def_property_readonly("values",
                             [](const Dataset& d) {
                               std::vector<std::vector<double>> rows;
                               for (const auto& r : d.records) rows.push_back(r.values);
                               return rows;
                             })
      .def("__len__", &Dataset::size);

  m.def(
      "load_dataset",
      [](const std::filesystem::path& path, const Schema& schema, bool skip_bad_rows) {
        return load_dataset(path, schema, LoadOptions{skip_bad_rows});
      },
      py::arg("path"), py::arg("schema"), py::arg("skip_bad_rows") = false);
  m.def(
      "parse_dataset",
      [](const std::string& text, const Schema& schema) { return parse_dataset(text, schema); },
      py::arg("text"), py::arg("schema"));
  m.def(
      "synthetic",
      [](const std::string& spec_json) {
        SyntheticData data = generate_synthetic(parse_synthetic_spec(spec_json));
        return py::make_tuple(data.schema, data.dataset);
      },
      py::arg("spec_json"), "Returns (schema, dataset) for a JSON generator spec.");

  py::class_<FairnessConfig>(m, "FairnessConfig")
      .def(py::init([](double tau, double phi, std::size_t cutoff_step) {
             FairnessConfig c{tau, phi, cutoff_step};
             c.validate();
             return c;
           }),
           py::arg("tau") = 1.0 / 3.0, py::arg("phi") = 0.2, py::arg("cutoff_step") = 0)
      .def_readonly("tau", &FairnessConfig::tau)
      .def_readonly("phi", &FairnessConfig::phi)
      .def_readonly("cutoff_step", &FairnessConfig::cutoff_step);

  m.def(
      "counterfactual",
      [](const std::vector<double>& x, const Schema& schema) {
        const Counterfactual cf = counterfactual_for(x, schema);
        return py::make_tuple(cf.point, cf.cost);
      },
      py::arg("x"), py::arg("schema"), "Nearest accepted point and its recourse cost.");

  py::class_<Prepared>(m, "Prepared")
      .def_property_readonly("ids", [](const Prepared& p) { return ids_for(p, p.ranking.order); })
      .def_property_readonly("costs",
                             [](const Prepared& p) {
                               std::vector<double> costs;
                               for (std::size_t i : p.ranking.order) costs.push_back(p.ranking.cost_of[i]);
                               return costs;
                             })
      .def_readonly("excluded", &Prepared::excluded)
      .def("__len__", [](const Prepared& p) { return p.dataset.size(); });

  m.def("prepare", &prepare, py::arg("dataset"), py::arg("schema"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "audit_json",
      [](const Prepared& p, const FairnessConfig& config) { return metrics_to_json(audit_metrics(p, config)); },
      py::arg("prepared"), py::arg("config"));

  m.def(
      "rerank",
      [](const Prepared& p, const Schema& schema, const FairnessConfig& config) {
        ReRankResult r;
        {
          py::gil_scoped_release release;
          r = rerank(p.ranking, p.dataset, p.counterfactuals, p.partition, schema, config);
        }
        py::dict out;
        out["order"] = ids_for(p, r.order);
        out["interventions"] = interventions_of(p, schema, r);
        out["metrics_json"] = metrics_to_json(rerank_metrics(p, config, r));
        return out;
      },
      py::arg("prepared"), py::arg("schema"), py::arg("config"));

  m.def(
      "block_rerank",
      [](const Prepared& p, const Schema& schema, const FairnessConfig& config, std::size_t blocks) {
        BlockResult r;
        {
          py::gil_scoped_release release;
          r = block_rerank(p.ranking, p.dataset, p.counterfactuals, p.partition, schema, config, blocks);
        }
        py::dict out;
        out["order"] = ids_for(p, r.order);
        out["interventions"] = interventions_of(p, schema, r);
        out["metrics_json"] = metrics_to_json(block_metrics(p, config, r));
        return out;
      },
      py::arg("prepared"), py::arg("schema"), py::arg("config"), py::arg("blocks"));

  m.def("ratio_from_means", [](const std::vector<double>& means) { return ratio_from_means(means); },
        py::arg("means"));
  m.def("beta_bound", &beta_bound, py::arg("m1"), py::arg("m2"), py::arg("s1"), py::arg("s2"), py::arg("c_bar"));
  m.def("exchange_admits", &exchange_admits, py::arg("m1"), py::arg("m2"), py::arg("s1"), py::arg("s2"),
        py::arg("c_bar"), py::arg("c"));
  m.def("exchanged_ratio", &exchanged_ratio, py::arg("m1"), py::arg("m2"), py::arg("s1"), py::arg("s2"),
        py::arg("c_bar"), py::arg("c"));
}
