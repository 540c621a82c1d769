// Python bindings: the end-to-end pieces most useful from a notebook.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "regraph/analysis.hpp"
#include "regraph/dissemination.hpp"
#include "regraph/error.hpp"
#include "regraph/repair.hpp"

namespace py = pybind11;
using namespace regraph;

namespace {

struct Run {
  Network net{1};
  RfaState state;
  std::vector<Decomposition> decs;
};

Run build(int flows, std::uint32_t n, int k, double c, std::uint64_t seed) {
  const RandomSource master(seed);
  Run r;
  r.net = grow_network(flows, n, master.derive(1));
  r.state = compute_rfa(r.net, c, master.derive(2));
  r.net.extend_layers(k, master.derive(3));
  r.decs = decompose_all(r.net, r.state);
  return r;
}

py::dict result_dict(const CheckResult& r) {
  py::dict d;
  d["check"] = r.check;
  d["N"] = r.n;
  d["M"] = r.flows;
  d["params"] = r.params.dump();
  d["empirical"] = r.empirical;
  d["bound"] = r.bound;
  d["margin"] = r.margin;
  d["pass"] = r.pass;
  return d;
}

}  // namespace

PYBIND11_MODULE(_regraph, m) {
  m.doc() = "Union-of-random-permutations overlay: topology, flow assignment, dissemination, repair";

  static py::exception<Error> error(m, "RegraphError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def("dstar", &dstar, py::arg("n"), py::arg("c") = 0.5);

  m.def(
      "layers",
      [](int flows, std::uint32_t n, std::uint64_t seed) {
        const Network net = grow_network(flows, n, RandomSource(seed));
        std::vector<std::vector<std::uint32_t>> out;
        for (int l = 0; l < net.layer_count(); ++l) out.push_back(layer_image(net, l));
        return out;
      },
      py::arg("flows"), py::arg("n"), py::arg("seed"),
      "Successor table of every layer, peers 1..n in order.");

  m.def(
      "simulate",
      [](int flows, std::uint32_t n, int k, double c, std::uint64_t seed) {
        const Run r = build(flows, n, k, c, seed);
        const DelayTable table = distance_delay_table(r.net, r.decs);
        const DeliveryLog log = simulate(r.net, r.state, 2 * (table.max_delay + 1));
        const DelayReport delay = verify_delay_equals_distance(log, table);
        const RepairPlan plan = resolve_repairs(r.net, r.state, r.decs, k);
        py::dict d;
        d["peers"] = r.net.size();
        d["dstar"] = r.state.dstar;
        d["depth"] = r.state.depth;
        d["main_flow"] = r.state.main_flow;
        d["max_delay"] = table.max_delay;
        d["delay_mismatches"] = delay.mismatches.size();
        d["disconnected_before"] = plan.disconnected_before;
        d["disconnected_after"] = plan.disconnected_after;
        d["extra_uploaders"] = plan.extra_uploaders.size();
        d["max_delay_after_repair"] = plan.max_delay_after;
        d["summary_csv"] = summary_csv(log, table);
        return d;
      },
      py::arg("flows") = 2, py::arg("n") = 100, py::arg("k") = 0, py::arg("c") = 0.5, py::arg("seed") = 1);

  m.def(
      "sweep",
      [](std::vector<std::uint32_t> sizes, int flows, std::vector<int> extra, int replicas, std::uint64_t seed,
         int jobs) {
        SweepConfig cfg;
        cfg.sizes = std::move(sizes);
        cfg.flows = flows;
        cfg.extra = std::move(extra);
        cfg.replicas = replicas;
        cfg.seed = seed;
        cfg.jobs = jobs;
        return sweep_csv(run_sweep(cfg));
      },
      py::arg("sizes"), py::arg("flows") = 4, py::arg("extra") = std::vector<int>{0, 1, 2},
      py::arg("replicas") = 10, py::arg("seed") = 1, py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());

  m.def(
      "verify",
      [](const std::string& suite, std::uint64_t n, int replicas, std::uint64_t seed) {
        SuiteConfig cfg;
        cfg.n = n;
        cfg.replicas = replicas;
        cfg.seed = seed;
        std::vector<CheckResult> rs;
        {
          py::gil_scoped_release release;
          if (suite == "uniformity") rs = verify_uniformity(cfg);
          else if (suite == "expansion") rs = verify_expansion(cfg);
          else if (suite == "halfsplit") rs = verify_half_split(cfg, 0.05, 0.95);
          else if (suite == "contraction") rs = verify_contraction(cfg, ContractionOptions{});
          else if (suite == "delay") rs = verify_delay(cfg);
          else if (suite == "properties") rs = verify_properties(cfg);
          else fail(Errc::invalid_parameter, "unknown suite '" + suite + "'");
        }
        py::list out;
        for (const auto& r : rs) out.append(result_dict(r));
        return out;
      },
      py::arg("suite"), py::arg("n") = 0, py::arg("replicas") = 0, py::arg("seed") = 1);

  m.def("hypergeom_pmf", &hypergeom_pmf, py::arg("pop"), py::arg("successes"), py::arg("draws"), py::arg("k"));
}
