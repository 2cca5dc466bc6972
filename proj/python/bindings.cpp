#include "poca/config.hpp"
#include "poca/curriculum.hpp"
#include "poca/grpo.hpp"
#include "poca/pareto.hpp"
#include "poca/rewards.hpp"
#include "poca/trainer.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;

namespace {

py::dict partition_dict(const poca::ParetoPartition& p) {
  py::dict d;
  d["positive"] = p.positive;
  d["negative"] = p.negative;
  d["neutral"] = p.neutral;
  d["raw_nondominated"] = p.raw_nondominated;
  d["raw_fully_dominated"] = p.raw_fully_dominated;
  return d;
}

}  // namespace

PYBIND11_MODULE(_poca, m) {
  m.doc() = "Bindings for the poca library";

  m.def("edit_distance", &poca::edit_distance, py::arg("a"), py::arg("b"));
  m.def("ned", &poca::ned, py::arg("a"), py::arg("b"));
  m.def("diversity", &poca::diversity, py::arg("s"));

  m.def("nd_set", &poca::nd_set, py::arg("rewards"));
  m.def("bi_nd_set", [](const poca::RewardMatrix& r) { return partition_dict(poca::bi_nd_set(r)); }, py::arg("rewards"));
  m.def("standardize",
        [](const std::vector<double>& v, double floor) { return poca::standardize(v, floor); },
        py::arg("values"), py::arg("std_floor") = 1e-8);
  m.def("count_conflicts", &poca::count_conflicts, py::arg("rewards"), py::arg("std_floor") = 1e-8);
  m.def("hypervolume_2d",
        [](const poca::RewardMatrix& pts, std::array<double, 2> ref) { return poca::hypervolume_2d(pts, ref); },
        py::arg("points"), py::arg("reference") = std::array<double, 2>{0.0, 0.0});
  m.def("ecdf_ranks", &poca::ecdf_ranks, py::arg("values"));

  m.def("load_config_json", [](const std::filesystem::path& p) { return poca::run_config_to_json(poca::load_run_config(p)); },
        py::arg("path"), "Parsed and normalized configuration, as JSON text.");

  // Runs one configuration without writing files; returns the eval series.
  m.def(
      "train",
      [](const std::filesystem::path& config_path, std::optional<std::uint64_t> seed, std::optional<std::size_t> total_steps) {
        auto c = poca::load_run_config(config_path);
        if (seed) c.seed = *seed;
        if (total_steps) c.total_steps = c.curriculum.total_steps = *total_steps;
        c.output_dir.clear();
        poca::TrainResult r;
        {
          py::gil_scoped_release release;
          r = poca::train(c);
        }
        py::list out;
        for (const auto& rep : r.reports) {
          py::dict d;
          d["step"] = rep.step;
          for (const auto& [name, value] : rep.metrics()) d[py::str(name)] = value;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("total_steps") = py::none());
}
