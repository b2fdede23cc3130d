// aai: minimal-pair articulatory evaluation toolkit.
//
//   aai find-pairs --dict lexicon.dict --inventory phones.json --class vowel --seed 1
//   aai extract-targets --manifest samples.jsonl --config run.json --out targets.jsonl
//   aai classify --table targets.jsonl --seed 1
//   aai voicing-score --table targets.jsonl --spec voicing.json
//   aai similarity-matrix --manifest samples.jsonl
//   aai consistency-loss --y-hat a.aft --y-frozen b.aft --y-hat-star c.aft --sidecar batch.json

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "aai/commands.hpp"
#include "aai/error.hpp"
#include "aai/version.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  unsigned threads = 1;
  std::optional<std::string> metric;
  std::optional<std::uint64_t> seed;
  bool no_filter = false;
  bool no_znorm = false;
  std::optional<double> cutoff;
  std::optional<int> order;
  std::optional<double> svm_c;
  std::optional<double> alpha;
  bool clamp = false;

  aai::cli::RunConfig resolve() const {
    aai::cli::RunConfig c;
    if (!config.empty()) c.load_file(config);
    if (metric) c.metric = aai::parse_metric(*metric);
    if (seed) c.seed = *seed;
    if (no_filter) c.filter_order.reset();
    if (order) c.filter_order = *order;
    if (cutoff) c.cutoff_hz = *cutoff;
    if (no_znorm) c.znorm = false;
    if (svm_c) c.svm_c = *svm_c;
    if (alpha) c.alpha = *alpha;
    if (clamp) c.clamp_negative_weights = true;
    return c;
  }
};

void add_config_flags(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "Write data output here instead of stdout");
  sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

// Runs `body` against stdout or the --out file.
int with_output(const std::string& out_path,
                const std::function<void(std::ostream&)>& body) {
  return aai::cli::guarded(
      [&] {
        if (out_path.empty()) {
          body(std::cout);
          std::cout.flush();
          return;
        }
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw aai::DataError("cannot open output '" + out_path + "'");
        body(out);
        if (!out) throw aai::DataError("failed writing '" + out_path + "'");
      },
      std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal-pair articulatory target evaluation toolkit"};
  app.set_version_flag("--version", std::string(aai::kVersion));
  app.require_subcommand(1);
  Common common;

  aai::cli::FindPairsArgs fp;
  auto* find = app.add_subcommand("find-pairs", "Mine minimal-pair sets from a pronunciation dictionary");
  find->add_option("--dict", fp.dict, "MFA pronunciation dictionary")->required();
  find->add_option("--inventory", fp.inventory, "Phone class inventory (JSON)");
  find->add_option("--class", fp.class_filter, "Contrast class: vowel, consonant or any")
      ->check(CLI::IsMember({"vowel", "consonant", "any"}));
  find->add_option("--min-size", fp.min_size, "Minimum set size")->check(CLI::Range(2, 1 << 20));
  find->add_option("--max-sets", fp.max_sets, "Cap on emitted sets (0 = all)");
  find->add_option("--seed", fp.seed, "Sampling seed")->required();
  find->add_option("--out", common.out, "Write sets here instead of stdout");

  aai::cli::ExtractArgs ex;
  std::optional<std::size_t> project_dim;
  auto* extract = app.add_subcommand("extract-targets", "Extract DTW local-cost targets per sample");
  extract->add_option("--manifest", ex.manifest, "JSON-lines sample manifest")->required();
  add_config_flags(extract, common);
  extract->add_option("--metric", common.metric, "euclidean or cosine");
  extract->add_flag("--no-filter", common.no_filter, "Skip the low-pass filter");
  extract->add_option("--filter-order", common.order, "Butterworth order");
  extract->add_option("--cutoff", common.cutoff, "Low-pass cutoff (Hz)");
  extract->add_flag("--no-znorm", common.no_znorm, "Skip per-speaker z-normalization");
  extract->add_option("--project-dim", project_dim, "Random Gaussian projection to this many dims");
  extract->add_option("--seed", common.seed, "Projection seed");

  aai::cli::ClassifyArgs cl;
  auto* classify = app.add_subcommand("classify", "Leave-one-out linear SVM accuracy");
  classify->add_option("--table", cl.table, "Target table (JSON-lines)")->required();
  add_config_flags(classify, common);
  classify->add_option("--svm-c", common.svm_c, "SVM regularization C");
  classify->add_option("--seed", common.seed, "Shuffle seed");

  aai::cli::VoicingArgs vo;
  auto* voicing = app.add_subcommand("voicing-score", "Voicing/nasality versus place/manner score");
  voicing->add_option("--table", vo.table, "Target table (JSON-lines)")->required();
  voicing->add_option("--spec", vo.spec, "Voicing spec (JSON)")->required();
  voicing->add_option("--set", vo.set_id, "Restrict to one set_id");
  voicing->add_option("--out", common.out, "Write report here instead of stdout");

  aai::cli::SimMatrixArgs sm;
  auto* sim = app.add_subcommand("similarity-matrix", "Cross-speaker DTW cosine similarity by label");
  sim->add_option("--manifest", sm.manifest, "JSON-lines sample manifest")->required();
  sim->add_option("--set", sm.set_id, "Restrict to one set_id");
  add_config_flags(sim, common);
  sim->add_flag("--no-filter", common.no_filter, "Skip the low-pass filter");
  sim->add_flag("--no-znorm", common.no_znorm, "Skip per-speaker z-normalization");

  aai::cli::ConsistencyArgs co;
  std::string sidecar, w, w_star, g1, g2;
  auto* cons = app.add_subcommand("consistency-loss", "Self-training + consistency loss for one batch");
  cons->add_option("--y-hat", co.y_hat, "Trainable prediction on x (AFT1)")->required();
  cons->add_option("--y-frozen", co.y_frozen, "Frozen-copy prediction on x (AFT1)")->required();
  cons->add_option("--y-hat-star", co.y_hat_star, "Trainable prediction on x* (AFT1)")->required();
  cons->add_option("--sidecar", sidecar, "JSON with phi, c, alpha");
  cons->add_option("--w", w, "Encoder features of x (AFT1); aligned with --w-star");
  cons->add_option("--w-star", w_star, "Encoder features of x* (AFT1)");
  cons->add_option("--grad-y-hat", g1, "Write d(total)/d(y_hat) as AFT1");
  cons->add_option("--grad-y-hat-star", g2, "Write d(total)/d(y_hat_star) as AFT1");
  cons->add_option("--alpha", common.alpha, "Self-training weight in [0, 1]");
  cons->add_flag("--clamp-negative-weights", common.clamp, "Clamp negative alignment weights to 0");
  cons->add_option("--config", common.config, "JSON run configuration")->check(CLI::ExistingFile);
  cons->add_option("--out", common.out, "Write report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(aai::ErrorKind::parse);
  }

  aai::cli::RunConfig config;
  const int config_status = aai::cli::guarded([&] { config = common.resolve(); }, std::cerr);
  if (config_status != 0) return config_status;

  if (*find) {
    return with_output(common.out, [&](std::ostream& o) { aai::cli::find_pairs(fp, o, std::cerr); });
  }
  if (*extract) {
    ex.config = config;
    ex.project_dim = project_dim;
    ex.threads = common.threads;
    return with_output(common.out, [&](std::ostream& o) { aai::cli::extract_targets(ex, o, std::cerr); });
  }
  if (*classify) {
    cl.config = config;
    cl.threads = common.threads;
    return with_output(common.out, [&](std::ostream& o) { aai::cli::classify(cl, o, std::cerr); });
  }
  if (*voicing) {
    return with_output(common.out, [&](std::ostream& o) { aai::cli::voicing(vo, o, std::cerr); });
  }
  if (*sim) {
    sm.config = config;
    sm.threads = common.threads;
    return with_output(common.out, [&](std::ostream& o) { aai::cli::similarity(sm, o, std::cerr); });
  }
  co.config = config;
  co.alpha_from_flag = common.alpha.has_value();
  if (!sidecar.empty()) co.sidecar = sidecar;
  if (!w.empty()) co.w = w;
  if (!w_star.empty()) co.w_star = w_star;
  if (!g1.empty()) co.grad_y_hat = g1;
  if (!g2.empty()) co.grad_y_hat_star = g2;
  return with_output(common.out, [&](std::ostream& o) { aai::cli::consistency(co, o, std::cerr); });
}
