// Python bindings: trajectories cross as float64 numpy arrays (frames x channels).

#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "aai/align.hpp"
#include "aai/consist.hpp"
#include "aai/error.hpp"
#include "aai/eval.hpp"
#include "aai/featio.hpp"
#include "aai/minpair.hpp"
#include "aai/signal.hpp"
#include "aai/version.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

aai::Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw aai::DataError("expected a 2-D array (frames x channels)");
  aai::Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

Array to_array(const aai::Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

aai::FeatureTrajectory to_traj(const Array& a, double frame_rate = 1.0) {
  return aai::FeatureTrajectory(to_matrix(a), frame_rate);
}

aai::ConsistencyBatch make_batch(const Array& y_hat, const Array& y_frozen, const Array& y_hat_star,
                                 std::vector<std::size_t> phi, std::vector<double> c, double alpha,
                                 bool clamp) {
  aai::ConsistencyBatch b{to_matrix(y_hat), to_matrix(y_frozen), to_matrix(y_hat_star),
                          std::move(phi), std::move(c), alpha, clamp};
  b.validate();
  return b;
}

aai::TargetTable table_from(const std::vector<std::vector<double>>& vectors,
                            const std::vector<std::string>& labels, const std::vector<std::string>& speakers,
                            const std::vector<std::string>& set_ids) {
  const std::size_t n = vectors.size();
  if (labels.size() != n || speakers.size() != n || (!set_ids.empty() && set_ids.size() != n)) {
    throw aai::DataError("vectors, labels, speakers and set_ids must have equal length");
  }
  aai::TargetTable t;
  for (std::size_t k = 0; k < n; ++k) {
    t.rows.push_back({"row" + std::to_string(k), speakers[k], labels[k], set_ids.empty() ? "all" : set_ids[k], 0,
                      vectors[k]});
  }
  t.validate();
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Minimal-pair articulatory target evaluation core";
  m.attr("__version__") = std::string(aai::kVersion);

  static py::exception<aai::Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<aai::ParseError> parse_error(m, "ParseError", error.ptr());
  static py::exception<aai::DataError> data_error(m, "DataError", error.ptr());
  static py::exception<aai::InvariantError> invariant_error(m, "InvariantError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const aai::ParseError& e) {
      PyErr_SetString(parse_error.ptr(), e.what());
    } catch (const aai::DataError& e) {
      PyErr_SetString(data_error.ptr(), e.what());
    } catch (const aai::InvariantError& e) {
      PyErr_SetString(invariant_error.ptr(), e.what());
    }
  });

  // -- featio
  m.def(
      "read_trajectory",
      [](const std::filesystem::path& path) {
        const auto t = aai::read_trajectory_file(path);
        return py::make_tuple(to_array(t.data()), t.frame_rate_hz());
      },
      "path"_a, "Read an AFT1 file; returns (array, frame_rate_hz).");
  m.def(
      "write_trajectory",
      [](const std::filesystem::path& path, const Array& data, double frame_rate_hz) {
        aai::write_trajectory_file(to_traj(data, frame_rate_hz), path);
      },
      "path"_a, "data"_a, "frame_rate_hz"_a);

  // -- signal
  m.def(
      "butterworth_lowpass",
      [](int order, double cutoff_hz, double sample_rate_hz) {
        const auto f = aai::design_butterworth_lowpass({order, cutoff_hz, sample_rate_hz});
        py::list sos;
        for (const auto& s : f.sections) sos.append(py::make_tuple(s.b0, s.b1, s.b2, 1.0, s.a1, s.a2));
        return sos;
      },
      "order"_a, "cutoff_hz"_a, "sample_rate_hz"_a,
      "Second-order sections as (b0, b1, b2, 1, a1, a2) rows.");
  m.def(
      "filtfilt",
      [](const Array& data, double sample_rate_hz, int order, double cutoff_hz) {
        const auto f = aai::design_butterworth_lowpass({order, cutoff_hz, sample_rate_hz});
        return to_array(aai::filtfilt(f, to_traj(data, sample_rate_hz)).data());
      },
      "data"_a, "sample_rate_hz"_a, "order"_a = 5, "cutoff_hz"_a = 10.0,
      "Zero-phase Butterworth low-pass, per channel.");

  // -- align
  m.def(
      "dtw",
      [](const Array& reference, const Array& query, const std::string& metric) {
        const auto r = aai::dtw(to_traj(reference), to_traj(query), aai::parse_metric(metric));
        py::dict d;
        d["path"] = r.path;
        d["local_costs"] = r.local_costs;
        d["total_cost"] = r.total_cost;
        d["phi"] = r.phi;
        d["weights"] = r.weights;
        return d;
      },
      "reference"_a, "query"_a, "metric"_a = "euclidean");
  m.def(
      "extract_target",
      [](const Array& reference, const std::vector<Array>& others, const std::string& metric) {
        std::vector<aai::FeatureTrajectory> held;
        held.reserve(others.size());
        for (const auto& o : others) held.push_back(to_traj(o));
        aai::SampleRefs refs;
        for (const auto& h : held) refs.push_back(&h);
        const auto t = aai::extract_target(to_traj(reference), refs, aai::parse_metric(metric));
        return py::make_tuple(t.frame, t.vector);
      },
      "reference"_a, "others"_a, "metric"_a = "euclidean",
      "Frame of highest average local cost against `others`; returns (frame, vector).");

  // -- minpair
  m.def(
      "parse_mfa_dict",
      [](const std::string& text) {
        std::istringstream in(text);
        std::vector<std::pair<std::string, std::vector<std::string>>> out;
        for (auto& p : aai::parse_mfa_dict(in).entries) out.emplace_back(p.word, p.phones);
        return out;
      },
      "text"_a, "Returns [(word, phones)] in file order.");
  m.def(
      "build_graph",
      [](const std::vector<std::pair<std::string, std::vector<std::string>>>& entries) {
        aai::PronDict dict;
        for (const auto& [w, p] : entries) dict.entries.push_back({w, p});
        const auto g = aai::build_graph(dict);
        std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> edges;
        for (const auto& e : g.edges()) edges.emplace_back(e.a, e.b, e.position);
        return edges;
      },
      "entries"_a, "Minimal-pair edges (a, b, position) over entry indices.");
  m.def(
      "enumerate_cliques",
      [](const std::vector<std::vector<std::size_t>>& adjacency, std::size_t min_size) {
        return aai::enumerate_cliques(adjacency, min_size);
      },
      "adjacency"_a, "min_size"_a = 2, "Maximal cliques of an undirected graph given as neighbour lists.");
  m.def(
      "minimal_pair_sets",
      [](const std::string& dict_text, const std::string& position_class,
         const std::map<std::string, std::string>& inventory, std::size_t min_size, std::size_t max_sets,
         std::uint64_t seed) {
        std::istringstream in(dict_text);
        const auto graph = aai::build_graph(aai::parse_mfa_dict(in));
        aai::PhoneInventory inv;
        for (const auto& [phone, cls] : inventory) inv[phone] = aai::parse_phone_class(cls);
        auto sets = aai::cliques_to_sets(aai::enumerate_cliques(graph, min_size), graph,
                                         aai::parse_phone_class(position_class), inv);
        py::list out;
        for (const auto& s : aai::sample_sets(std::move(sets), max_sets, seed)) {
          std::vector<std::string> words;
          for (const auto& p : s.members) words.push_back(p.word);
          out.append(py::dict("set_id"_a = s.set_id, "position"_a = s.position, "contrasts"_a = s.contrasts,
                              "words"_a = words));
        }
        return out;
      },
      "dict_text"_a, "position_class"_a = "any", "inventory"_a = std::map<std::string, std::string>{},
      "min_size"_a = 2, "max_sets"_a = 0, "seed"_a = 0);

  // -- eval
  m.def(
      "extract_targets",
      [](const std::filesystem::path& manifest, const std::string& metric, bool znorm,
         std::optional<std::pair<int, double>> lowpass, unsigned threads) {
        const auto man = aai::load_manifest_file(manifest);
        const auto table = aai::build_targets(man, aai::load_trajectories(man), aai::parse_metric(metric),
                                              aai::Preprocess{znorm, lowpass}, threads);
        py::list rows;
        for (const auto& r : table.rows) {
          rows.append(py::dict("id"_a = r.id, "speaker"_a = r.speaker, "label"_a = r.label,
                               "set_id"_a = r.set_id, "frame"_a = r.frame, "vector"_a = r.vector));
        }
        return rows;
      },
      "manifest"_a, "metric"_a = "euclidean", "znorm"_a = true,
      "lowpass"_a = std::optional<std::pair<int, double>>{std::pair{5, 10.0}}, "threads"_a = 1,
      "Target rows for every manifest sample; `lowpass` is (order, cutoff_hz) or None.");
  m.def(
      "loo_accuracy",
      [](const std::vector<std::vector<double>>& vectors, const std::vector<std::string>& labels,
         const std::vector<std::string>& speakers, const std::vector<std::string>& set_ids, double c,
         std::size_t epochs, std::uint64_t seed, unsigned threads) {
        const auto r = aai::loo_classification_accuracy(table_from(vectors, labels, speakers, set_ids),
                                                        {c, epochs, seed}, threads);
        py::dict per_set;
        for (const auto& [id, acc] : r.per_set) per_set[py::str(id)] = acc.accuracy();
        return py::dict("accuracy"_a = r.pooled, "macro_accuracy"_a = r.macro, "per_set"_a = per_set);
      },
      "vectors"_a, "labels"_a, "speakers"_a, "set_ids"_a = std::vector<std::string>{}, "c"_a = 1.0,
      "epochs"_a = 200, "seed"_a = 0, "threads"_a = 1, "Leave-one-out linear SVM accuracy within each set.");
  m.def(
      "voicing_score",
      [](const std::vector<std::vector<double>>& vectors, const std::vector<std::string>& labels,
         const std::vector<std::string>& speakers,
         const std::vector<std::pair<std::string, std::string>>& anchor_pairs,
         const std::vector<std::string>& contrast_labels,
         const std::vector<std::pair<std::string, std::string>>& contrast_pairs) {
        aai::VoicingSpec spec{anchor_pairs, contrast_labels, contrast_pairs};
        spec.validate();
        const auto r = aai::voicing_score(table_from(vectors, labels, speakers, {}), spec);
        return py::dict("score"_a = r.score, "correct"_a = r.correct, "total"_a = r.total,
                        "per_unit"_a = r.per_unit);
      },
      "vectors"_a, "labels"_a, "speakers"_a, "anchor_pairs"_a, "contrast_labels"_a,
      "contrast_pairs"_a = std::vector<std::pair<std::string, std::string>>{});
  m.def(
      "random_projection",
      [](const Array& data, std::size_t out_dim, std::uint64_t seed) {
        const auto p = aai::random_projection_matrix(static_cast<std::size_t>(data.shape(1)), out_dim, seed);
        return to_array(aai::project(to_traj(data), p).data());
      },
      "data"_a, "out_dim"_a, "seed"_a);

  // -- consist
  m.def(
      "consistency_losses",
      [](const Array& y_hat, const Array& y_frozen, const Array& y_hat_star, std::vector<std::size_t> phi,
         std::vector<double> c, double alpha, bool clamp) {
        const auto b = make_batch(y_hat, y_frozen, y_hat_star, std::move(phi), std::move(c), alpha, clamp);
        return py::dict("l_st"_a = aai::self_training_loss(b), "l_c"_a = aai::consistency_loss(b),
                        "total"_a = aai::total_loss(b));
      },
      "y_hat"_a, "y_frozen"_a, "y_hat_star"_a, "phi"_a, "c"_a, "alpha"_a = 0.25,
      "clamp_negative_weights"_a = false);
  m.def(
      "consistency_grad",
      [](const Array& y_hat, const Array& y_frozen, const Array& y_hat_star, std::vector<std::size_t> phi,
         std::vector<double> c, double alpha, bool clamp) {
        const auto g = aai::total_loss_grad(
            make_batch(y_hat, y_frozen, y_hat_star, std::move(phi), std::move(c), alpha, clamp));
        return py::make_tuple(to_array(g.y_hat), to_array(g.y_hat_star));
      },
      "y_hat"_a, "y_frozen"_a, "y_hat_star"_a, "phi"_a, "c"_a, "alpha"_a = 0.25,
      "clamp_negative_weights"_a = false, "Gradient of the total loss w.r.t. (y_hat, y_hat_star).");
}
