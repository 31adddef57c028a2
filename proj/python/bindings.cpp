#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dbrules/census.hpp"
#include "dbrules/classifier.hpp"
#include "dbrules/debruijn.hpp"
#include "dbrules/errors.hpp"
#include "dbrules/feasibility.hpp"

namespace py = pybind11;
using namespace dbrules;

namespace {

// Arbitrary-size integers cross the boundary as decimal text.
py::int_ to_py(const BigNat& n) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(n.str().c_str(), nullptr, 10));
}

BigNat from_py(const py::int_& n) { return BigNat(py::str(n).cast<std::string>()); }

RuleTable make_rule(int mu, const py::int_& n) { return RuleTable::from_decimal(MemoryLength(mu), from_py(n)); }

py::dict orbit_dict(const OrbitReport& r) {
  py::dict d;
  d["transient"] = r.transient_length;
  d["period"] = r.period;
  d["cycle"] = to_string(r.emitted_cycle);
  py::list states;
  for (const auto& s : r.cycle_states) states.append(s.to_string());
  d["cycle_states"] = states;
  return d;
}

py::dict profile_dict(const FeasibilityProfile& p) {
  py::dict d;
  d["boundary"] = p.boundary_ok;
  d["symmetry"] = p.symmetry_ok;
  d["pair"] = p.pair_ok ? py::cast(*p.pair_ok) : py::none();
  d["evil_factor"] = p.evil_factor ? py::object(to_py(*p.evil_factor)) : py::none();
  d["phi"] = p.phi ? py::object(to_py(*p.phi)) : py::none();
  d["feasible"] = p.feasible();
  return d;
}

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  d["tp"] = m.counts.tp;
  d["fp"] = m.counts.fp;
  d["tn"] = m.counts.tn;
  d["fn"] = m.counts.fn;
  auto put = [&](const char* key, const std::optional<double>& v) { d[key] = v ? py::cast(*v) : py::none(); };
  put("accuracy", m.accuracy);
  put("sensitivity", m.sensitivity);
  put("specificity", m.specificity);
  put("precision", m.precision);
  put("npv", m.npv);
  put("balanced_accuracy", m.balanced_accuracy);
  put("detection_rate", m.detection_rate);
  put("detection_prevalence", m.detection_prevalence);
  put("true_prevalence", m.true_prevalence);
  d["degenerate"] = m.degenerate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dbrules, m) {
  m.doc() = "Binary shift-register rules, de Bruijn rules and their classification";

  static py::exception<Error> base(m, "DbrulesError");
  py::register_exception<RangeError>(m, "RangeError", base);
  py::register_exception<ArityError>(m, "ArityError", base);
  py::register_exception<NotDeBruijnError>(m, "NotDeBruijnError", base);
  py::register_exception<NotFoundError>(m, "NotFoundError", base);
  py::register_exception<StructureError>(m, "StructureError", base);
  py::register_exception<CapacityError>(m, "CapacityError", base);
  py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<ParseError>(m, "ParseError", base);

  py::class_<RuleTable>(m, "Rule")
      .def(py::init(&make_rule), py::arg("mu"), py::arg("decimal"))
      .def_static("from_binary", py::overload_cast<std::string_view>(&RuleTable::from_binary), py::arg("bits"))
      .def_static(
          "parse",
          [](const std::string& text, std::optional<int> mu) {
            return RuleTable::parse(text, mu ? std::optional<MemoryLength>(MemoryLength(*mu)) : std::nullopt);
          },
          py::arg("text"), py::arg("mu") = py::none())
      .def_property_readonly("mu", [](const RuleTable& r) { return r.mu().value(); })
      .def_property_readonly("decimal", [](const RuleTable& r) { return to_py(r.decimal()); })
      .def_property_readonly("binary", &RuleTable::to_binary)
      .def("output", [](const RuleTable& r, std::uint32_t window) { return r.output(StateWord::make(r.mu(), window).value); })
      .def("__eq__", [](const RuleTable& a, const RuleTable& b) { return a == b; })
      .def("__hash__", [](const RuleTable& r) { return std::hash<std::string>{}(r.to_binary()); })
      .def("__repr__", [](const RuleTable& r) { return "Rule(mu=" + std::to_string(r.mu().value()) + ", " + r.decimal().str() + ")"; });

  m.def("next_state", [](const RuleTable& r, const std::string& s) {
    return next_state(r, StateWord::parse(r.mu(), s)).to_string();
  });
  m.def("generate_sequence", [](const RuleTable& r, const std::string& init, std::size_t length) {
    return to_string(generate_sequence(r, StateWord::parse(r.mu(), init), length));
  });
  m.def("detect_orbit",
        [](const RuleTable& r, const std::string& init) { return orbit_dict(detect_orbit(r, StateWord::parse(r.mu(), init))); });
  m.def("total_configuration_count", [](int mu) { return to_py(total_configuration_count(MemoryLength(mu))); });

  m.def("is_debruijn_rule", &is_debruijn_rule);
  m.def("sequence_of_rule", [](const RuleTable& r) { return sequence_of_rule(r).to_string(); });
  m.def("rule_of_sequence", [](int mu, const std::string& seq) {
    return rule_of_sequence(MemoryLength(mu), parse_symbols(seq));
  });
  m.def("canonical_rotation", [](const std::string& s) { return to_string(canonical_rotation(parse_symbols(s))); });
  m.def("verify_debruijn_sequence",
        [](const std::string& s, int mu) { return verify_debruijn_sequence(parse_symbols(s), MemoryLength(mu)); });
  m.def("debruijn_count", [](int mu) { return to_py(debruijn_count(MemoryLength(mu))); });
  m.def(
      "granddaddy",
      [](int mu, std::optional<std::vector<RuleTable>> candidates) {
        const MemoryLength len(mu);
        const auto result = candidates ? granddaddy(len, *candidates) : granddaddy(len, enumerate_feasible(len));
        return py::make_tuple(result.rule, result.sequence.to_string());
      },
      py::arg("mu"), py::arg("candidates") = py::none());
  m.def("export_state_graph", &export_state_graph);

  m.def("is_feasible", [](const RuleTable& r) { return profile_dict(is_feasible(r)); });
  m.def("factorize_rule", [](const RuleTable& r) -> py::object {
    const auto f = factorize_rule(r);
    if (!f) return py::none();
    return py::make_tuple(to_py(f->evil_factor), to_py(f->phi));
  });
  m.def("constrained_pair", [](int mu) -> py::object {
    const auto p = constrained_pair(MemoryLength(mu));
    if (!p) return py::none();
    return py::make_tuple(p->first, p->second, p->forbidden_value);
  });
  m.def("mirror_rule", &mirror_rule);
  m.def("phi", [](int mu) { return to_py(phi(MemoryLength(mu))); });
  m.def("is_evil_odd", [](const py::int_& n) { return is_evil_odd(from_py(n)); });
  m.def("count_feasible", [](int mu) { return to_py(count_feasible(MemoryLength(mu))); });
  m.def(
      "enumerate_feasible",
      [](int mu, std::uint64_t start, std::optional<std::uint64_t> end, bool allow_large) {
        EnumerationOptions opts;
        opts.start = start;
        opts.end = end;
        opts.allow_large = allow_large;
        py::gil_scoped_release release;
        return enumerate_feasible(MemoryLength(mu), opts);
      },
      py::arg("mu"), py::arg("start") = 0, py::arg("end") = py::none(), py::arg("allow_large") = false);
  m.def(
      "sample_feasible", [](int mu, std::uint64_t seed, std::size_t n) { return sample_feasible(MemoryLength(mu), seed, n); },
      py::arg("mu"), py::arg("seed"), py::arg("n"));

  m.def(
      "period_histogram",
      [](int mu, const std::string& policy, unsigned workers) {
        CensusOptions opts;
        opts.workers = workers;
        PeriodHistogram h = [&] {
          py::gil_scoped_release release;
          return period_histogram(MemoryLength(mu), InitPolicy::parse(policy), opts);
        }();
        return h.counts;
      },
      py::arg("mu"), py::arg("policy") = default_init_policy().to_string(), py::arg("workers") = 1);
  m.def(
      "reduction_table",
      [](const std::vector<int>& mus) {
        std::vector<MemoryLength> lens(mus.begin(), mus.end());
        return reduction_table_csv(reduction_table(lens));
      },
      py::arg("mus"));

  m.def("extract_features", [](const RuleTable& r) { return to_string(extract_features(r)); });

  py::class_<LabeledDataset>(m, "Dataset")
      .def_static("exhaustive", [](int mu) { return build_dataset_exhaustive(MemoryLength(mu)); }, py::arg("mu"))
      .def_static(
          "sampled",
          [](int mu, std::size_t rows, bool balance, std::uint64_t seed) {
            py::gil_scoped_release release;
            return build_dataset_sampled(MemoryLength(mu), SampledSource{rows, balance, seed});
          },
          py::arg("mu"), py::arg("rows"), py::arg("balance") = true, py::arg("seed") = 1)
      .def_static(
          "from_csv",
          [](const std::string& text, bool trust) {
            std::istringstream in(text);
            return read_dataset_csv(in, trust);
          },
          py::arg("text"), py::arg("trust_labels") = false)
      .def("to_csv",
           [](const LabeledDataset& d) {
             std::ostringstream out;
             write_dataset_csv(out, d);
             return out.str();
           })
      .def("split",
           [](const LabeledDataset& d, double fraction, std::uint64_t seed) { return split_dataset(d, fraction, seed); },
           py::arg("train_fraction") = 0.8, py::arg("seed") = 1)
      .def_property_readonly("mu", [](const LabeledDataset& d) { return d.mu.value(); })
      .def_property_readonly("positives", &LabeledDataset::positives)
      .def("__len__", &LabeledDataset::size)
      .def("rows", [](const LabeledDataset& d) {
        py::list out;
        for (const auto& row : d.rows) out.append(py::make_tuple(row.rule.to_binary(), row.label));
        return out;
      });

  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_static("defaults_for", [](int mu) { return NetworkConfig::defaults_for(MemoryLength(mu)); })
      .def_readwrite("hidden_layers", &NetworkConfig::hidden_layers)
      .def_readwrite("learning_rate", &NetworkConfig::learning_rate)
      .def_readwrite("batch_size", &NetworkConfig::batch_size)
      .def_readwrite("epochs", &NetworkConfig::epochs)
      .def_readwrite("threshold", &NetworkConfig::threshold)
      .def_readwrite("seed", &NetworkConfig::seed)
      .def("__repr__", [](const NetworkConfig& c) { return "NetworkConfig(" + c.to_string() + ")"; });

  py::class_<Mlp>(m, "Model")
      .def_property_readonly("widths", &Mlp::widths)
      .def("dumps",
           [](const Mlp& model) {
             std::ostringstream out;
             model.save(out);
             return out.str();
           })
      .def_static("loads",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return Mlp::load(in);
                  })
      .def(
          "predict",
          [](const Mlp& model, const RuleTable& r, double threshold) {
            const Prediction p = predict(model, extract_features(r), threshold);
            return py::make_tuple(p.probability, p.label);
          },
          py::arg("rule"), py::arg("threshold") = 0.5)
      .def("__eq__", [](const Mlp& a, const Mlp& b) { return a == b; });

  m.def(
      "train",
      [](const LabeledDataset& data, const NetworkConfig& config) {
        py::gil_scoped_release release;
        return train(data, config);
      },
      py::arg("data"), py::arg("config"));
  m.def(
      "evaluate", [](const Mlp& model, const LabeledDataset& test, double threshold) {
        return metrics_dict(evaluate(model, test, threshold));
      },
      py::arg("model"), py::arg("test"), py::arg("threshold") = 0.5);
  m.def("metrics_from_counts", [](std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
    return metrics_dict(MetricsReport::from_counts({tp, fp, tn, fn}));
  });
  m.def(
      "verify_predictions",
      [](const Mlp& model, const std::vector<RuleTable>& candidates, double threshold) {
        const VerificationResult r = verify_predictions(model, candidates, threshold);
        return py::make_tuple(r.confirmed, r.predicted_positive);
      },
      py::arg("model"), py::arg("candidates"), py::arg("threshold") = 0.5);
}
