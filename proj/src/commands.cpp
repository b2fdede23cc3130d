#include "aai/commands.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include "aai/consist.hpp"
#include "aai/error.hpp"
#include "aai/eval.hpp"
#include "aai/featio.hpp"
#include "aai/minpair.hpp"
#include "aai/version.hpp"

namespace aai::cli {
namespace {

using ojson = nlohmann::ordered_json;

std::ifstream open_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ParseError(std::string("cannot open ") + what + " '" + path.string() + "'");
  return in;
}

ojson report_header(const char* command, const RunConfig* config) {
  ojson j;
  j["command"] = command;
  j["version"] = kVersion;
  if (config) j["config"] = config->to_json();
  return j;
}

Manifest select_set(Manifest m, const std::optional<std::string>& set_id) {
  if (!set_id) return m;
  std::erase_if(m.records, [&](const SampleRecord& r) { return r.set_id != *set_id; });
  if (m.records.empty()) throw DataError("no manifest records in set '" + *set_id + "'");
  return m;
}

Preprocess preprocess_of(const RunConfig& c) {
  Preprocess p;
  p.znorm = c.znorm;
  if (c.filter_order) p.lowpass = std::pair{*c.filter_order, c.cutoff_hz};
  else p.lowpass.reset();
  return p;
}

std::uint64_t require_seed(const RunConfig& c, const char* command) {
  if (!c.seed) throw ParseError(std::string(command) + " requires --seed (or \"seed\" in --config)");
  return *c.seed;
}

}  // namespace

ojson RunConfig::to_json() const {
  ojson j;
  j["metric"] = to_string(metric);
  if (filter_order) {
    j["filter"] = {{"order", *filter_order}, {"cutoff_hz", cutoff_hz}};
  } else {
    j["filter"] = nullptr;
  }
  j["znorm"] = znorm;
  j["svm_c"] = svm_c;
  j["svm_epochs"] = svm_epochs;
  j["seed"] = seed ? ojson(*seed) : ojson(nullptr);
  j["alpha"] = alpha;
  j["clamp_negative_weights"] = clamp_negative_weights;
  return j;
}

void RunConfig::merge_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    if (j.contains("metric")) metric = parse_metric(j.at("metric").get<std::string>());
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      if (f.is_null()) {
        filter_order.reset();
      } else {
        filter_order = f.value("order", 5);
        cutoff_hz = f.value("cutoff_hz", 10.0);
      }
    }
    if (j.contains("znorm")) znorm = j.at("znorm").get<bool>();
    if (j.contains("svm_c")) svm_c = j.at("svm_c").get<double>();
    if (j.contains("svm_epochs")) svm_epochs = j.at("svm_epochs").get<std::size_t>();
    if (j.contains("seed") && !j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("alpha")) alpha = j.at("alpha").get<double>();
    if (j.contains("clamp_negative_weights")) {
      clamp_negative_weights = j.at("clamp_negative_weights").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  auto in = open_text(path, "config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config '" + path.string() + "': " + e.what());
  }
  merge_json(j);
}

void find_pairs(const FindPairsArgs& args, std::ostream& out, std::ostream& log) {
  auto dict_in = open_text(args.dict, "dictionary");
  const PronDict dict = parse_mfa_dict(dict_in);
  PhoneInventory inventory;
  if (!args.inventory.empty()) {
    auto inv_in = open_text(args.inventory, "phone inventory");
    inventory = parse_inventory(inv_in);
  }
  const PhoneClass cls = parse_phone_class(args.class_filter);
  if (cls != PhoneClass::any && inventory.empty()) {
    throw ParseError("--class " + args.class_filter + " requires --inventory");
  }
  const auto graph = build_graph(dict);
  const auto cliques = enumerate_cliques(graph, args.min_size);
  auto sets = cliques_to_sets(cliques, graph, cls, inventory);
  log << "find-pairs: " << dict.entries.size() << " pronunciations, " << graph.edges().size()
      << " edges, " << cliques.size() << " maximal cliques, " << sets.size() << " sets\n";
  sets = sample_sets(std::move(sets), args.max_sets, args.seed);
  for (const auto& s : sets) out << set_to_json_line(s) << '\n';
}

void extract_targets(const ExtractArgs& args, std::ostream& out, std::ostream& log) {
  const Manifest manifest = load_manifest_file(args.manifest);
  TrajectoryMap trajectories = load_trajectories(manifest);
  log << "extract-targets: loaded " << trajectories.size() << " trajectories\n";
  if (args.project_dim) {
    const auto seed = require_seed(args.config, "extract-targets --project-dim");
    trajectories = random_projection_baseline(trajectories, *args.project_dim, seed);
    log << "extract-targets: projected to " << *args.project_dim << " dims\n";
  }
  const TargetTable table = build_targets(manifest, trajectories, args.config.metric,
                                          preprocess_of(args.config), args.threads);
  write_target_table(table, out);
  log << "extract-targets: wrote " << table.rows.size() << " targets\n";
}

void classify(const ClassifyArgs& args, std::ostream& out, std::ostream& log) {
  auto in = open_text(args.table, "target table");
  const TargetTable table = read_target_table(in);
  const SvmOptions options{args.config.svm_c, args.config.svm_epochs,
                           require_seed(args.config, "classify")};
  const LooResult loo = loo_classification_accuracy(table, options, args.threads);
  log << "classify: " << table.rows.size() << " targets in " << loo.per_set.size() << " sets\n";

  ojson report = report_header("classify", &args.config);
  report["accuracy"] = loo.pooled;
  report["macro_accuracy"] = loo.macro;
  report["samples"] = table.rows.size();
  ojson per_set = ojson::object();
  for (const auto& [id, acc] : loo.per_set) {
    per_set[id] = {{"accuracy", acc.accuracy()}, {"correct", acc.correct}, {"total", acc.total}};
  }
  report["per_set"] = std::move(per_set);
  out << report.dump(2) << '\n';
}

void voicing(const VoicingArgs& args, std::ostream& out, std::ostream& log) {
  auto table_in = open_text(args.table, "target table");
  TargetTable table = read_target_table(table_in);
  if (args.set_id) {
    std::erase_if(table.rows, [&](const TargetRow& r) { return r.set_id != *args.set_id; });
  }
  auto spec_in = open_text(args.spec, "voicing spec");
  const VoicingSpec spec = parse_voicing_spec(spec_in);
  const VoicingResult result = voicing_score(table, spec);
  log << "voicing-score: " << result.per_unit.size() << " units, " << result.total << " contrasts\n";

  ojson report = report_header("voicing-score", nullptr);
  report["voicing_score"] = result.score;
  report["correct"] = result.correct;
  report["total"] = result.total;
  report["per_unit"] = result.per_unit;
  report["anchor_pairs"] = spec.anchor_pairs;
  report["contrast_pairs"] = spec.effective_contrast_pairs();
  if (args.set_id) report["set_id"] = *args.set_id;
  out << report.dump(2) << '\n';
}

void similarity(const SimMatrixArgs& args, std::ostream& out, std::ostream& log) {
  const Manifest manifest = select_set(load_manifest_file(args.manifest), args.set_id);
  const TrajectoryMap raw = load_trajectories(manifest);
  TrajectoryMap work;
  if (args.config.znorm) {
    work = znorm_by_speaker(manifest, raw).trajectories;
  } else {
    work = raw;
  }
  if (args.config.filter_order) {
    for (auto& [id, t] : work) {
      const auto f = design_butterworth_lowpass(
          FilterSpec{*args.config.filter_order, args.config.cutoff_hz, t.frame_rate_hz()});
      try {
        t = filtfilt(f, t);
      } catch (const DataError& e) {
        throw DataError("sample '" + id + "': " + e.what());
      }
    }
  }
  std::map<std::string, std::vector<SpeakerSample>> groups;
  for (const auto& r : manifest.records) groups[r.label].push_back({r.speaker, &work.at(r.id)});
  const SimilarityMatrix sim = similarity_matrix(groups, args.threads);
  log << "similarity-matrix: " << sim.labels.size() << " labels\n";

  ojson report = report_header("similarity-matrix", &args.config);
  report["config"]["metric"] = "cosine";
  report["labels"] = sim.labels;
  ojson rows = ojson::array();
  for (std::size_t a = 0; a < sim.labels.size(); ++a) {
    auto r = sim.values.row(a);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  report["matrix"] = std::move(rows);
  if (args.set_id) report["set_id"] = *args.set_id;
  out << report.dump(2) << '\n';
}

void consistency(const ConsistencyArgs& args, std::ostream& out, std::ostream& log) {
  Matrix y_hat = read_trajectory_file(args.y_hat).data();
  Matrix y_frozen = read_trajectory_file(args.y_frozen).data();
  const FeatureTrajectory star = read_trajectory_file(args.y_hat_star);
  Matrix y_hat_star = star.data();

  RunConfig config = args.config;
  ConsistencyBatch batch;
  if (args.w && args.w_star) {
    batch = build_batch_from_features(read_trajectory_file(*args.w), read_trajectory_file(*args.w_star),
                                      std::move(y_hat), std::move(y_frozen), std::move(y_hat_star),
                                      config.alpha);
  } else if (args.sidecar) {
    auto in = open_text(*args.sidecar, "batch sidecar");
    const BatchSidecar side = read_sidecar(in);
    if (!args.alpha_from_flag) config.alpha = side.alpha;
    batch = ConsistencyBatch{std::move(y_hat), std::move(y_frozen), std::move(y_hat_star),
                             side.phi, side.c, config.alpha};
  } else {
    throw ParseError("consistency-loss needs --sidecar or both --w and --w-star");
  }
  batch.clamp_negative_weights = config.clamp_negative_weights;
  batch.validate();

  const double l_st = self_training_loss(batch);
  const double l_c = consistency_loss(batch);
  const double total = total_loss(batch);
  log << "consistency-loss: N=" << batch.y_hat.rows() << " M=" << batch.y_hat_star.rows()
      << " D=" << batch.y_hat.cols() << '\n';

  if (args.grad_y_hat || args.grad_y_hat_star) {
    const ConsistencyGrad g = total_loss_grad(batch);
    if (args.grad_y_hat) {
      write_trajectory_file(FeatureTrajectory(g.y_hat, star.frame_rate_hz()), *args.grad_y_hat);
    }
    if (args.grad_y_hat_star) {
      write_trajectory_file(FeatureTrajectory(g.y_hat_star, star.frame_rate_hz()),
                            *args.grad_y_hat_star);
    }
  }

  ojson report = report_header("consistency-loss", &config);
  report["l_st"] = l_st;
  report["l_c"] = l_c;
  report["total"] = total;
  report["alpha"] = batch.alpha;
  report["n"] = batch.y_hat.rows();
  report["m"] = batch.y_hat_star.rows();
  report["d"] = batch.y_hat.cols();
  out << report.dump(2) << '\n';
}

int guarded(const std::function<void()>& body, std::ostream& err) {
  auto emit = [&](const char* kind, int code, const std::string& message) {
    ojson j;
    j["error"] = {{"kind", kind}, {"exit_code", code}, {"message", message}};
    err << j.dump() << '\n';
    return code;
  };
  try {
    body();
    return 0;
  } catch (const ParseError& e) {
    return emit("parse", e.exit_code(), e.what());
  } catch (const DataError& e) {
    return emit("data", e.exit_code(), e.what());
  } catch (const Error& e) {
    return emit("invariant", e.exit_code(), e.what());
  } catch (const std::exception& e) {
    return emit("invariant", static_cast<int>(ErrorKind::invariant), e.what());
  }
}

}  // namespace aai::cli
