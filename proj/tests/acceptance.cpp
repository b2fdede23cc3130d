// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Usage: aai_acceptance [path/to/aai]
// The determinism check needs the executable path.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aai/align.hpp"
#include "aai/commands.hpp"
#include "aai/consist.hpp"
#include "aai/eval.hpp"
#include "aai/minpair.hpp"
#include "aai/random.hpp"
#include "aai/signal.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

oracle::Frames frames_of(const aai::Matrix& m) {
  oracle::Frames f;
  for (std::size_t i = 0; i < m.rows(); ++i) f.emplace_back(m.row(i).begin(), m.row(i).end());
  return f;
}

aai::Matrix gaussian(aai::Rng& rng, std::size_t rows, std::size_t cols) {
  aai::Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

// ---------------------------------------------------------------- dtw

Outcome dtw_oracle() {
  const auto start = std::chrono::steady_clock::now();
  aai::Rng rng(20240101);
  std::size_t compared = 0, identical = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t f = 1 + rng.index(8), g = 1 + rng.index(8), d = 1 + rng.index(3);
    const aai::FeatureTrajectory x(gaussian(rng, f, d), 100.0), y(gaussian(rng, g, d), 100.0);
    for (auto metric : {aai::CostMetric::euclidean, aai::CostMetric::cosine_distance}) {
      const auto r = aai::dtw(x, y, metric);
      const auto o = oracle::brute_force_dtw(frames_of(x.data()), frames_of(y.data()),
                                             metric == aai::CostMetric::cosine_distance);
      ++compared;
      if (r.total_cost == o.cost) ++identical;
      const double rel = std::abs(r.total_cost - o.cost) / std::max(std::abs(o.cost), 1e-300);
      worst = std::max(worst, o.cost == 0.0 ? std::abs(r.total_cost) : rel);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-12 && secs < 30.0,
          std::to_string(identical) + "/" + std::to_string(compared) + " bit-identical, max rel err " +
              fmt(worst) + ", " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------- cliques

Outcome clique_oracle() {
  const auto start = std::chrono::steady_clock::now();
  aai::Rng rng(77);
  std::size_t matched = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    const double p = rng.uniform(0.1, 0.9);
    std::vector<std::vector<bool>> dense(n, std::vector<bool>(n, false));
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (rng.uniform() < p) {
          dense[a][b] = dense[b][a] = true;
          adj[a].push_back(b);
          adj[b].push_back(a);
        }
      }
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    if (aai::enumerate_cliques(adj, 2) == oracle::subset_maximal_cliques(dense, 2)) ++matched;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {matched == 200 && secs < 30.0, std::to_string(matched) + "/200 graphs match, " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------- graph

Outcome graph_oracle() {
  aai::Rng rng(4242);
  std::size_t matched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t alphabet = 1 + rng.index(6);
    const std::size_t entries = rng.index(51);
    aai::PronDict dict;
    std::set<std::vector<std::string>> seen;
    for (std::size_t e = 0; e < entries; ++e) {
      std::vector<std::string> phones(1 + rng.index(5));
      for (auto& ph : phones) ph = std::string(1, static_cast<char>('a' + rng.index(alphabet)));
      // Occasional homophone under a second spelling.
      if (!seen.insert(phones).second && rng.uniform() < 0.5) continue;
      dict.entries.push_back({"w" + std::to_string(e), phones});
    }
    std::vector<std::vector<std::string>> prons;
    for (const auto& p : dict.entries) prons.push_back(p.phones);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> got;
    const auto graph = aai::build_graph(dict);
    for (const auto& e : graph.edges()) got.emplace(e.a, e.b, e.position);
    if (got == oracle::hamming_edges(prons)) ++matched;
  }
  return {matched == 100, std::to_string(matched) + "/100 dictionaries match"};
}

// ---------------------------------------------------------------- butterworth

double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

std::vector<double> sine(double freq, double fs, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * freq * i / fs);
  return x;
}

Outcome butterworth() {
  const auto f = aai::design_butterworth_lowpass(aai::FilterSpec{5, 10.0, 200.0});
  const double dc = f.magnitude(0.0, 200.0);
  const double cut = f.magnitude(10.0, 200.0);
  // 500 whole cycles with the closing sample, so both edges sit at zero.
  // Ending on a peak instead makes the odd-reflection padding inject a step,
  // whose transient is reported separately and not counted as leakage.
  const auto pass_in = sine(1.0, 200.0, 2001), stop_in = sine(50.0, 200.0, 2001);
  const auto peak_in = sine(50.0, 200.0, 2000);
  const double pass = rms(aai::filtfilt(f, pass_in)) / rms(pass_in);
  const double stop = rms(aai::filtfilt(f, stop_in)) / rms(stop_in);
  const double peak = rms(aai::filtfilt(f, peak_in)) / rms(peak_in);
  const bool ok = std::abs(dc - 1.0) <= 1e-9 && std::abs(cut - 1.0 / std::sqrt(2.0)) <= 1e-6 &&
                  pass >= 0.99 && pass <= 1.01 && stop <= 0.01;
  return {ok, "|H(0)|=" + fmt(dc, 12) + " |H(10)|=" + fmt(cut, 10) + " pass rms ratio " + fmt(pass, 6) +
                  " stop rms ratio " + fmt(stop, 3) + " (edge-peak variant " + fmt(peak, 3) + ")"};
}

// ---------------------------------------------------------------- end to end

Outcome synthetic_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const synth::ArticulatoryOptions opt;  // 6 speakers x 5 classes x 4 repetitions
  const auto corpus = synth::make_articulatory_corpus(1, opt);
  const auto table =
      aai::build_targets(corpus.manifest, corpus.trajectories, aai::CostMetric::euclidean, aai::Preprocess{}, 4);
  const double acc = aai::loo_classification_accuracy(table, {1.0, 200, 1}, 4).pooled;

  double mean = 0.0, lo = 1.0, hi = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = synth::make_articulatory_corpus(100 + seed, opt);
    auto t = aai::build_targets(c.manifest, c.trajectories, aai::CostMetric::euclidean, aai::Preprocess{}, 4);
    std::vector<std::string> labels;
    for (const auto& r : t.rows) labels.push_back(r.label);
    aai::Rng rng(seed);
    rng.shuffle(labels);
    for (std::size_t k = 0; k < labels.size(); ++k) t.rows[k].label = labels[k];
    const double a = aai::loo_classification_accuracy(t, {1.0, 200, seed}, 4).pooled;
    mean += a / 20.0;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  const double chance = 1.0 / static_cast<double>(opt.classes);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = acc >= 0.95 && std::abs(lo - chance) <= 0.12 && std::abs(hi - chance) <= 0.12 && secs < 120.0;
  return {ok, "accuracy " + fmt(acc) + ", permuted mean " + fmt(mean) + " range [" + fmt(lo) + ", " + fmt(hi) +
                  "], " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------- voicing

Outcome voicing_baseline() {
  aai::VoicingSpec spec;
  spec.anchor_pairs = {{"b", "p"}};
  spec.contrast_labels = {"f", "d", "g", "s"};
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto corpus = synth::make_feature_corpus(seed);
    const auto projected = aai::random_projection_baseline(corpus.trajectories, 16, 1000 + seed);
    const auto table =
        aai::build_targets(corpus.manifest, projected, aai::CostMetric::euclidean, aai::Preprocess{}, 4);
    mean += aai::voicing_score(table, spec).score / 50.0;
  }
  return {mean >= 0.35 && mean <= 0.65, "mean voicing score " + fmt(mean) + " over 50 seeds"};
}

// ---------------------------------------------------------------- gradients

double max_abs(const aai::Matrix& m) {
  double v = 0.0;
  for (double x : m.data()) v = std::max(v, std::abs(x));
  return v;
}

// max |analytic - numeric| / max(|analytic|, |numeric|) over one gradient.
double grad_error(aai::ConsistencyBatch& b, aai::Matrix aai::ConsistencyBatch::*field,
                  const aai::Matrix& analytic) {
  const double h = 1e-5;
  aai::Matrix numeric(analytic.rows(), analytic.cols());
  auto& m = b.*field;
  for (std::size_t k = 0; k < m.data().size(); ++k) {
    const double keep = m.data()[k];
    m.data()[k] = keep + h;
    const double up = aai::total_loss(b);
    m.data()[k] = keep - h;
    const double down = aai::total_loss(b);
    m.data()[k] = keep;
    numeric.data()[k] = (up - down) / (2.0 * h);
  }
  double diff = 0.0;
  for (std::size_t k = 0; k < numeric.data().size(); ++k) {
    diff = std::max(diff, std::abs(numeric.data()[k] - analytic.data()[k]));
  }
  const double scale = std::max(max_abs(numeric), max_abs(analytic));
  return scale == 0.0 ? diff : diff / scale;
}

Outcome gradient_check() {
  aai::Rng rng(99);
  const double alphas[] = {0.0, 0.25, 0.5, 1.0};
  double worst = 0.0;
  bool endpoints = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(20), m = 1 + rng.index(20), d = 1 + rng.index(8);
    aai::ConsistencyBatch b;
    b.y_hat = gaussian(rng, n, d);
    b.y_frozen = gaussian(rng, n, d);
    b.y_hat_star = gaussian(rng, m, d);
    for (std::size_t i = 0; i < n; ++i) b.phi.push_back(rng.index(m));
    std::sort(b.phi.begin(), b.phi.end());
    for (std::size_t i = 0; i < n; ++i) b.c.push_back(rng.uniform(-1.0, 1.0));
    b.alpha = alphas[trial % 4];
    const auto g = aai::total_loss_grad(b);
    worst = std::max(worst, grad_error(b, &aai::ConsistencyBatch::y_hat, g.y_hat));
    worst = std::max(worst, grad_error(b, &aai::ConsistencyBatch::y_hat_star, g.y_hat_star));

    b.alpha = 0.0;
    endpoints = endpoints && aai::total_loss(b) == aai::consistency_loss(b);
    b.alpha = 1.0;
    endpoints = endpoints && aai::total_loss(b) == aai::self_training_loss(b);
    b.alpha = 0.25;
    const double expect = 0.25 * aai::self_training_loss(b) + 0.75 * aai::consistency_loss(b);
    endpoints = endpoints && std::abs(aai::total_loss(b) - expect) <= 1e-12 * std::max(1.0, std::abs(expect));
  }
  return {worst < 1e-5 && endpoints,
          "max relative gradient error " + fmt(worst) + ", endpoints " + (endpoints ? "exact" : "differ")};
}

// ---------------------------------------------------------------- determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// Runs one command twice (or once per variant) and compares every output file.
class DeterminismRun {
 public:
  DeterminismRun(std::string exe, fs::path dir) : exe_(std::move(exe)), dir_(std::move(dir)) {}

  // `args` may contain {OUT}; extra output files are named in `also`.
  void check(const std::string& name, const std::vector<std::string>& variants,
             const std::vector<std::string>& also = {}) {
    std::vector<std::string> outputs;
    for (std::size_t v = 0; v < variants.size(); ++v) {
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path out = dir_ / (name + ".out");
        std::string cmd = variants[v];
        replace(cmd, "{OUT}", quote(out));
        const int status = std::system((quote(exe_) + " " + cmd + " 2>" + quote(dir_ / "stderr.txt")).c_str());
        std::string bytes = slurp(out);
        for (const auto& extra : also) bytes += "\x1f" + slurp(dir_ / extra);
        if (status != 0 || bytes.empty()) {
          failures_.push_back(name + " failed: " + slurp(dir_ / "stderr.txt"));
          return;
        }
        outputs.push_back(std::move(bytes));
      }
    }
    if (std::adjacent_find(outputs.begin(), outputs.end(), std::not_equal_to<>()) != outputs.end()) {
      failures_.push_back(name + " differs");
    }
    ++checked_;
  }

  const std::vector<std::string>& failures() const { return failures_; }
  std::size_t checked() const { return checked_; }

 private:
  static void replace(std::string& s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
      s.replace(pos, from.size(), to);
    }
  }

  std::string exe_;
  fs::path dir_;
  std::vector<std::string> failures_;
  std::size_t checked_ = 0;
};

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

Outcome cli_determinism(const std::string& exe) {
  if (exe.empty()) return {false, "no aai executable given"};
  const auto dir = synth::temp_dir("accept_cli");

  write_file(dir / "lexicon.dict",
             "bat\tb æ t\ncat\tk æ t\nmat\tm æ t\npat\tp æ t\nbit\tb ɪ t\nbet\tb ɛ t\nbut\tb ʌ t\n"
             "kit\tk ɪ t\npit\tp ɪ t\nsat\ts æ t\nsit\ts ɪ t\nset\ts ɛ t\n");
  write_file(dir / "inventory.json",
             R"({"b":"consonant","k":"consonant","m":"consonant","p":"consonant","s":"consonant",)"
             R"("t":"consonant","æ":"vowel","ɪ":"vowel","ɛ":"vowel","ʌ":"vowel"})");
  synth::ArticulatoryOptions opt;
  opt.speakers = 3;
  opt.repetitions = 2;
  const auto manifest = synth::write_corpus(synth::make_articulatory_corpus(5, opt), dir / "art");
  synth::VoicingOptions vopt;
  vopt.units = 3;
  vopt.dim = 64;
  const auto feat_manifest = synth::write_corpus(synth::make_feature_corpus(5, vopt), dir / "feat");
  write_file(dir / "voicing.json", R"({"anchor_pairs":[["b","p"]],"contrast_labels":["f","d","g","s"]})");

  aai::Rng rng(8);
  aai::write_trajectory_file(aai::FeatureTrajectory(gaussian(rng, 12, 4), 50.0), dir / "yh.aft");
  aai::write_trajectory_file(aai::FeatureTrajectory(gaussian(rng, 12, 4), 50.0), dir / "yf.aft");
  aai::write_trajectory_file(aai::FeatureTrajectory(gaussian(rng, 9, 4), 50.0), dir / "ys.aft");
  aai::write_trajectory_file(aai::FeatureTrajectory(gaussian(rng, 12, 6), 50.0), dir / "w.aft");
  aai::write_trajectory_file(aai::FeatureTrajectory(gaussian(rng, 9, 6), 50.0), dir / "ws.aft");

  DeterminismRun run(exe, dir);
  run.check("find_pairs", {"find-pairs --dict " + quote(dir / "lexicon.dict") + " --inventory " +
                           quote(dir / "inventory.json") + " --class any --max-sets 3 --seed 4 --out {OUT}"});
  run.check("extract", {"extract-targets --manifest " + quote(manifest) + " --threads 1 --out {OUT}",
                        "extract-targets --manifest " + quote(manifest) + " --threads 4 --out {OUT}"});
  write_file(dir / "targets.jsonl", slurp(dir / "extract.out"));
  run.check("extract_projected",
            {"extract-targets --manifest " + quote(feat_manifest) + " --project-dim 16 --seed 3 --out {OUT}"});
  write_file(dir / "feat_targets.jsonl", slurp(dir / "extract_projected.out"));
  run.check("classify", {"classify --table " + quote(dir / "targets.jsonl") + " --seed 2 --threads 1 --out {OUT}",
                         "classify --table " + quote(dir / "targets.jsonl") + " --seed 2 --threads 3 --out {OUT}"});
  run.check("voicing", {"voicing-score --table " + quote(dir / "feat_targets.jsonl") + " --spec " +
                        quote(dir / "voicing.json") + " --out {OUT}"});
  run.check("similarity", {"similarity-matrix --manifest " + quote(manifest) + " --threads 1 --out {OUT}",
                           "similarity-matrix --manifest " + quote(manifest) + " --threads 4 --out {OUT}"});
  run.check("consistency",
            {"consistency-loss --y-hat " + quote(dir / "yh.aft") + " --y-frozen " + quote(dir / "yf.aft") +
             " --y-hat-star " + quote(dir / "ys.aft") + " --w " + quote(dir / "w.aft") + " --w-star " +
             quote(dir / "ws.aft") + " --grad-y-hat " + quote(dir / "g1.aft") + " --grad-y-hat-star " +
             quote(dir / "g2.aft") + " --out {OUT}"},
            {"g1.aft", "g2.aft"});

  std::string detail = std::to_string(run.checked()) + "/7 commands byte-identical";
  for (const auto& f : run.failures()) detail += "; " + f;
  const bool ok = run.failures().empty() && run.checked() == 7;
  if (ok) fs::remove_all(dir);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string exe = argc > 1 ? argv[1] : "";
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"dtw matches brute-force path enumeration", dtw_oracle},
      {"bron-kerbosch matches subset enumeration", clique_oracle},
      {"build_graph matches all-pairs hamming", graph_oracle},
      {"butterworth response and zero-phase rms", butterworth},
      {"synthetic end-to-end loo accuracy", synthetic_end_to_end},
      {"random projection voicing baseline", voicing_baseline},
      {"consistency loss gradients", gradient_check},
      {"cli determinism", [&] { return cli_determinism(exe); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
