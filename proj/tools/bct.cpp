// Command-line front end: MAP model, entropy rate posterior, prediction,
// posterior sampling, baseline estimators and fixture experiments.
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bct/bct.hpp"

namespace {

using namespace bct;

struct Config {
  std::string input;
  std::size_t depth = 10;
  std::optional<double> beta;
  std::optional<std::size_t> alphabet;
  std::size_t samples = 100'000;
  std::uint64_t seed = 1;
  std::size_t bins = 100;
  std::string format = "human";
  bool context_in_file = false;
  unsigned workers = 1;
  std::string histogram;
};

bool machine(const Config& c) { return c.format == "records"; }

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

double beta_for(const Config& c, const Alphabet& a) { return c.beta ? *c.beta : default_beta(a); }

// Reads the data file and applies the context convention: with the flag,
// the first D symbols are the initial context only; otherwise the head of
// the series doubles as its own context.
TimeSeries load(const Config& c) {
  std::vector<Symbol> all;
  if (c.input == "-") {
    all = read_symbols(std::cin);
  } else {
    std::ifstream in(c.input);
    if (!in) throw DataError("cannot open '" + c.input + "'");
    all = read_symbols(in);
  }
  if (all.empty()) throw DataError("no data in '" + c.input + "'");

  const Symbol top = *std::max_element(all.begin(), all.end());
  std::size_t m = c.alphabet ? *c.alphabet : std::max<std::size_t>(2, top + 1);
  if (c.alphabet && top >= m)
    throw DataError("symbol " + std::to_string(top) + " outside the alphabet of size " + std::to_string(m));
  const Alphabet alphabet(m);
  std::vector<bool> used(m, false);
  for (Symbol s : all) used[s] = true;
  for (std::size_t j = 0; j < m; ++j)
    if (!used[j]) warn("symbol " + std::to_string(j) + " never occurs; check the alphabet size (m=" + std::to_string(m) + ")");

  const std::size_t d = c.depth;
  if (c.context_in_file) {
    if (all.size() < d)
      throw DataError("file has " + std::to_string(all.size()) + " symbols, fewer than the context length " + std::to_string(d));
    return TimeSeries(alphabet, std::vector<Symbol>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(d)),
                      std::vector<Symbol>(all.begin() + static_cast<std::ptrdiff_t>(d), all.end()));
  }
  if (all.size() < d)
    throw DataError("series has " + std::to_string(all.size()) + " symbols, fewer than the depth " + std::to_string(d));
  if (d > 0) warn("no initial context given; reusing the first " + std::to_string(d) + " symbols as context");
  std::vector<Symbol> ctx(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(d));
  return TimeSeries(alphabet, std::move(ctx), std::move(all));
}

void write_histogram(const Config& c, const Histogram& h) {
  if (c.histogram.empty()) return;
  std::ofstream out(c.histogram);
  if (!out) throw DataError("cannot write '" + c.histogram + "'");
  write_histogram_csv(out, h);
}

void print_summary(const Config& c, const std::string& kind, const PosteriorSummary& s,
                   std::vector<std::pair<std::string, std::string>> extra = {}) {
  if (machine(c)) {
    Record r(kind);
    for (auto& [k, v] : extra) r.add(k, v);
    r.add("samples", s.samples.size())
        .add("mean", s.mean)
        .add("sd", s.sd)
        .add("mode", s.mode)
        .add("ci_level", s.credible_level)
        .add("ci_lower", s.credible_lower)
        .add("ci_upper", s.credible_upper)
        .add("degenerate", std::string(s.samples.size() < 2 ? "1" : "0"));
    if (s.bimodal) {
      r.add("split", s.bimodal->split_point)
          .add("w1", s.bimodal->dominant.weight)
          .add("mean1", s.bimodal->dominant.mean)
          .add("sd1", s.bimodal->dominant.sd)
          .add("w2", s.bimodal->secondary.weight)
          .add("mean2", s.bimodal->secondary.mean)
          .add("sd2", s.bimodal->secondary.sd);
    }
    std::cout << r.str() << '\n';
    return;
  }
  for (auto& [k, v] : extra) std::cout << k << ": " << v << '\n';
  std::cout << "samples: " << s.samples.size() << '\n'
            << "posterior mean: " << fmt(s.mean) << " nats/symbol\n"
            << "posterior sd: " << fmt(s.sd) << (s.samples.size() < 2 ? " (single sample, sd undefined)" : "") << '\n'
            << "mode: " << fmt(s.mode) << '\n'
            << s.credible_level * 100 << "% interval: [" << fmt(s.credible_lower) << ", " << fmt(s.credible_upper) << "]\n";
  if (s.bimodal)
    std::cout << "bimodal: split at " << fmt(s.bimodal->split_point) << "; dominant mode w=" << fmt(s.bimodal->dominant.weight, 3)
              << " mean=" << fmt(s.bimodal->dominant.mean) << " sd=" << fmt(s.bimodal->dominant.sd)
              << "; secondary mode w=" << fmt(s.bimodal->secondary.weight, 3) << " mean=" << fmt(s.bimodal->secondary.mean)
              << " sd=" << fmt(s.bimodal->secondary.sd) << '\n';
}

EntropyPosteriorOptions entropy_options(const Config& c) {
  EntropyPosteriorOptions opt;
  opt.summary.bins = c.bins;
  opt.workers = c.workers;
  return opt;
}

// ---- subcommands ----------------------------------------------------------

int cmd_map(const Config& c) {
  const auto x = load(c);
  const auto counts = build_counts(x, c.depth);
  const WeightedTree wt(counts, beta_for(c, x.alphabet()));
  const auto map = map_tree(wt);
  if (machine(c)) {
    std::cout << Record("map")
                     .add("tree", map.tree.to_string())
                     .add("depth", map.tree.depth())
                     .add("leaves", map.tree.num_leaves())
                     .add("log_posterior", map.log_posterior)
                     .add("posterior", std::exp(map.log_posterior))
                     .add("log_evidence", wt.log_evidence())
                     .str()
              << '\n';
  } else {
    std::cout << "MAP tree: " << map.tree.to_string() << '\n'
              << "depth: " << map.tree.depth() << ", leaves: " << map.tree.num_leaves() << '\n'
              << "posterior probability: " << fmt(std::exp(map.log_posterior)) << '\n'
              << "log P(x): " << fmt(wt.log_evidence(), 10) << '\n';
  }
  return 0;
}

int cmd_entropy(const Config& c) {
  const auto x = load(c);
  const auto s = entropy_posterior(x, c.samples, c.depth, beta_for(c, x.alphabet()), c.seed, entropy_options(c));
  write_histogram(c, s.histogram);
  print_summary(c, "entropy", s, {{"n", std::to_string(x.size())}});
  return 0;
}

int cmd_predict(const Config& c, std::size_t horizon, const std::vector<Symbol>& given) {
  const auto x = load(c);
  SequentialPredictor sp(x.alphabet(), c.depth, beta_for(c, x.alphabet()), x.initial_context());
  for (Symbol s : x.body()) sp.append(s);
  Rng rng(mix_seed(c.seed));
  for (std::size_t step = 1; step <= horizon; ++step) {
    const auto p = sp.predict();
    Symbol next;
    if (step <= given.size()) {
      next = given[step - 1];
      if (!x.alphabet().contains(next)) throw DataError("supplied symbol " + std::to_string(next) + " outside alphabet");
    } else {
      next = draw_symbol(p.probabilities, rng);
    }
    if (machine(c)) {
      Record r("predict");
      r.add("step", step);
      for (std::size_t j = 0; j < p.probabilities.size(); ++j) r.add("p" + std::to_string(j), p.probabilities[j]);
      r.add("next", std::size_t{next});
      std::cout << r.str() << '\n';
    } else {
      std::cout << "step " << step << ":";
      for (double v : p.probabilities) std::cout << ' ' << fmt(v, 8);
      std::cout << "  -> " << next << '\n';
    }
    sp.append(next);
  }
  return 0;
}

int cmd_sample(const Config& c, bool prior, bool params, const std::string& depth_csv) {
  std::vector<JointSample> joint;
  std::vector<ContextTree> trees;
  std::optional<TimeSeries> x;
  std::optional<CountTable> counts;
  if (prior) {
    if (!c.alphabet) throw DomainError("prior mode needs --alphabet");
    const Alphabet a(*c.alphabet);
    trees = sample_prior_trees(a, c.depth, beta_for(c, a), c.samples, c.seed);
    if (params) {
      counts.emplace(a, c.depth);
      for (std::size_t i = 0; i < trees.size(); ++i) {
        Rng rng = substream(c.seed ^ 0x9a3ULL, i);
        joint.push_back({trees[i], sample_params(trees[i], *counts, rng)});
      }
    }
  } else {
    x.emplace(load(c));
    counts.emplace(build_counts(*x, c.depth));
    const WeightedTree wt(*counts, beta_for(c, x->alphabet()));
    if (params) {
      joint = sample_joint(wt, c.samples, c.seed, c.workers);
      for (const auto& s : joint) trees.push_back(s.tree);
    } else {
      trees = sample_posterior_trees(wt, c.samples, c.seed, c.workers);
    }
  }
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (machine(c)) {
      Record r("sample");
      r.add("index", i).add("tree", trees[i].to_string());
      if (params) {
        std::string theta;
        for (std::size_t l = 0; l < joint[i].params.size(); ++l) {
          if (l) theta += ';';
          for (std::size_t j = 0; j < joint[i].params[l].size(); ++j) {
            if (j) theta += ',';
            theta += fmt(joint[i].params[l][j], 17);
          }
        }
        r.add("theta", theta);
      }
      std::cout << r.str() << '\n';
    } else {
      std::cout << trees[i].to_string();
      if (params) {
        std::cout << "  ";
        for (std::size_t l = 0; l < joint[i].params.size(); ++l) {
          std::cout << (l ? " " : "") << context_to_string(trees[i].leaves()[l], trees[i].alphabet()) << ":(";
          for (std::size_t j = 0; j < joint[i].params[l].size(); ++j) std::cout << (j ? "," : "") << fmt(joint[i].params[l][j], 4);
          std::cout << ')';
        }
      }
      std::cout << '\n';
    }
  }
  if (!depth_csv.empty()) {
    std::ofstream out(depth_csv);
    if (!out) throw DataError("cannot write '" + depth_csv + "'");
    const auto h = order_posterior(trees, c.depth);
    out << "depth,probability\n";
    for (std::size_t d = 0; d < h.size(); ++d) out << d << ',' << fmt(h[d], 17) << '\n';
  }
  return 0;
}

std::vector<BaselineReport> run_baselines(const TimeSeries& x, const Config& c, const std::vector<std::size_t>& ks) {
  std::vector<BaselineReport> out;
  const std::size_t m = x.alphabet().size();
  for (std::size_t k : ks)
    if (k <= x.size()) out.push_back({"plugin", "k=" + std::to_string(k), plugin_entropy(x.body(), m, k)});
  if (x.size() >= 2) out.push_back({"lz", "window=increasing", lz_entropy(x.body(), m)});
  const double beta = beta_for(c, x.alphabet());
  out.push_back({"ctw", "D=" + std::to_string(c.depth) + ",beta=" + fmt(beta, 17), ctw_entropy(x, c.depth, beta)});
  return out;
}

void print_baselines(const Config& c, const std::vector<BaselineReport>& rows, const std::string& tag = "") {
  for (const auto& r : rows) {
    if (machine(c)) {
      Record rec("baseline");
      if (!tag.empty()) rec.add("data", tag);
      std::cout << rec.add("name", r.name).add("parameters", r.parameters).add("estimate", r.estimate).str() << '\n';
    } else {
      std::cout << (tag.empty() ? "" : tag + "  ") << r.name << " (" << r.parameters << "): " << fmt(r.estimate) << '\n';
    }
  }
}

int cmd_baselines(const Config& c, const std::vector<std::size_t>& ks, bool with_bct) {
  const auto x = load(c);
  auto rows = run_baselines(x, c, ks);
  if (with_bct) {
    const auto s = entropy_posterior(x, c.samples, c.depth, beta_for(c, x.alphabet()), c.seed, entropy_options(c));
    rows.push_back({"bct", "N=" + std::to_string(c.samples), s.mean});
  }
  print_baselines(c, rows);
  return 0;
}

int cmd_simulate(const Config& c, const std::string& name, std::size_t n, const std::string& output) {
  const auto f = fixture(name);
  const auto x = generate_fixture_series(f, n, c.depth, c.seed);
  if (output.empty() || output == "-") {
    write_series(std::cout, x);
  } else {
    std::ofstream out(output);
    if (!out) throw DataError("cannot write '" + output + "'");
    write_series(out, x);
  }
  return 0;
}

// ---- desk-scale experiments ------------------------------------------------

int reproduce_figure2(const Config& c) {
  const auto f = fixture_ternary5();
  const auto x = generate_fixture_series(f, 1000, c.depth, c.seed);
  const auto counts = build_counts(x, c.depth);
  const WeightedTree wt(counts, beta_for(c, x.alphabet()));
  const auto map = map_tree(wt);
  const auto trees = sample_posterior_trees(wt, c.samples, c.seed, c.workers);
  std::map<ContextTree, std::size_t> freq;
  for (const auto& t : trees) ++freq[t];
  std::vector<std::pair<std::size_t, ContextTree>> top;
  for (auto& [t, k] : freq) top.emplace_back(k, t);
  std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (machine(c)) {
    std::cout << Record("figure2")
                     .add("map", map.tree.to_string())
                     .add("map_posterior", std::exp(map.log_posterior))
                     .add("true_posterior", std::exp(log_posterior(f.minimal_model, wt)))
                     .str()
              << '\n';
  } else {
    std::cout << "ternary5, n=1000, D=" << c.depth << "\nMAP: " << map.tree.to_string() << "  π=" << fmt(std::exp(map.log_posterior))
              << "\ntrue model π(T*|x)=" << fmt(std::exp(log_posterior(f.minimal_model, wt))) << "\nmost sampled trees:\n";
  }
  for (std::size_t i = 0; i < std::min<std::size_t>(5, top.size()); ++i) {
    const double exact = std::exp(log_posterior(top[i].second, wt));
    const double emp = static_cast<double>(top[i].first) / static_cast<double>(trees.size());
    if (machine(c))
      std::cout << Record("figure2_tree").add("rank", i + 1).add("tree", top[i].second.to_string()).add("frequency", emp).add("exact", exact).str()
                << '\n';
    else
      std::cout << "  " << top[i].second.to_string() << "  freq=" << fmt(emp, 4) << "  exact=" << fmt(exact, 4) << '\n';
  }
  const auto h = order_posterior(trees, c.depth);
  for (std::size_t d = 0; d < h.size(); ++d) {
    if (machine(c))
      std::cout << Record("figure2_order").add("depth", d).add("probability", h[d]).str() << '\n';
    else if (h[d] > 0)
      std::cout << "  depth " << d << ": " << fmt(h[d], 4) << '\n';
  }
  return 0;
}

int reproduce_entropy(const Config& c, const std::string& tag, const std::string& name, std::size_t n) {
  const auto f = fixture(name);
  const auto x = generate_fixture_series(f, n, c.depth, c.seed);
  const auto s = entropy_posterior(x, c.samples, c.depth, beta_for(c, x.alphabet()), c.seed, entropy_options(c));
  write_histogram(c, s.histogram);
  print_summary(c, tag, s, {{"fixture", name}, {"n", std::to_string(n)}, {"true_rate", fmt(f.entropy_rate)}});
  return 0;
}

int reproduce_figure5(const Config& c) {
  // Prior of the entropy rate (no data), then the posterior at n = 1000.
  const Alphabet a(3);
  const TimeSeries empty(a, std::vector<Symbol>(c.depth, 0), {});
  const auto prior = entropy_posterior(empty, c.samples, c.depth, beta_for(c, a), c.seed, entropy_options(c));
  print_summary(c, "figure5_prior", prior);
  return reproduce_entropy(c, "figure5_posterior", "ternary5", 1000);
}

int reproduce_figure6(const Config& c) {
  const auto f = fixture_ternary5();
  const auto x = generate_fixture_series(f, 10'000, c.depth, c.seed);
  for (std::size_t n : {100u, 300u, 1000u, 3000u, 10'000u}) {
    const TimeSeries head(x.alphabet(), std::vector<Symbol>(x.initial_context().begin(), x.initial_context().end()),
                          std::vector<Symbol>(x.body().begin(), x.body().begin() + static_cast<std::ptrdiff_t>(n)));
    Config cc = c;
    auto rows = run_baselines(head, cc, {5});
    const auto s = entropy_posterior(head, c.samples, c.depth, beta_for(c, x.alphabet()), c.seed, entropy_options(c));
    rows.push_back({"bct", "N=" + std::to_string(c.samples), s.mean});
    print_baselines(c, rows, "n=" + std::to_string(n));
  }
  return 0;
}

int reproduce_tables(const Config& c) {
  // Real datasets are not distributed; run the baselines pipeline on fixture
  // exports instead, through the same file path as the `baselines` command.
  for (const auto& name : fixture_names()) {
    const auto f = fixture(name);
    const auto x = generate_fixture_series(f, 10'000, c.depth, c.seed);
    auto rows = run_baselines(x, c, {5, 6, 7});
    const auto s = entropy_posterior(x, c.samples, c.depth, beta_for(c, x.alphabet()), c.seed, entropy_options(c));
    rows.push_back({"bct", "N=" + std::to_string(c.samples), s.mean});
    rows.push_back({"true", "exact", entropy_rate_exact(f.chain)});
    print_baselines(c, rows, name);
  }
  return 0;
}

int cmd_reproduce(const Config& c, const std::string& what) {
  if (what == "figure2") return reproduce_figure2(c);
  if (what == "figure5") return reproduce_figure5(c);
  if (what == "figure6") return reproduce_figure6(c);
  if (what == "figure7a") return reproduce_entropy(c, "figure7a", "bimodal6", 1450);
  if (what == "tables") return reproduce_tables(c);
  throw DomainError("unknown experiment '" + what + "' (figure2, figure5, figure6, figure7a, tables)");
}

void add_common(CLI::App* app, Config& c, bool needs_input = true) {
  if (needs_input) app->add_option("input", c.input, "data file of whitespace-separated symbols ('-' for stdin)")->required();
  app->add_option("--depth,-D", c.depth, "maximum context depth D")->capture_default_str();
  app->add_option("--beta", c.beta, "prior hyperparameter β in (0,1); default 1-2^{-m+1}");
  app->add_option("--alphabet,-m", c.alphabet, "alphabet size m; inferred from the data when omitted");
  app->add_option("--seed", c.seed, "master random seed")->capture_default_str();
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"human", "records"}))->capture_default_str();
  app->add_flag("--context-in-file", c.context_in_file, "the first D symbols of the file are the initial context");
  app->add_option("--workers", c.workers, "sampling threads")->capture_default_str();
}

void add_sampling(CLI::App* app, Config& c) {
  app->add_option("--samples,-N", c.samples, "number of posterior samples")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--bins", c.bins, "histogram bins")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--histogram", c.histogram, "write the histogram as CSV to this path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian context trees: model selection, entropy rate and prediction for discrete time series"};
  app.require_subcommand(1);
  Config c;

  auto* map = app.add_subcommand("map", "MAP context-tree model");
  add_common(map, c);

  auto* entropy = app.add_subcommand("entropy", "posterior of the entropy rate");
  add_common(entropy, c);
  add_sampling(entropy, c);

  std::size_t horizon = 1;
  std::vector<Symbol> given;
  auto* predict = app.add_subcommand("predict", "posterior predictive distribution of the next symbols");
  add_common(predict, c);
  predict->add_option("--horizon,-H", horizon, "number of steps ahead")->capture_default_str();
  predict->add_option("--given", given, "hypothesised future symbols; later steps are drawn from the predictive");

  bool prior = false, params = false;
  std::string depth_csv;
  auto* sample = app.add_subcommand("sample", "i.i.d. samples of trees (and parameters) from the posterior or prior");
  add_common(sample, c, false);
  add_sampling(sample, c);
  sample->add_option("input", c.input, "data file (omit with --prior)");
  sample->add_flag("--prior", prior, "sample from the prior instead of the posterior");
  sample->add_flag("--params", params, "also draw leaf parameters");
  sample->add_option("--depth-histogram", depth_csv, "write the sampled model-order distribution as CSV");

  std::vector<std::size_t> ks{5, 6, 7};
  bool with_bct = false;
  auto* baselines = app.add_subcommand("baselines", "plug-in, Lempel-Ziv and CTW entropy rate estimators");
  add_common(baselines, c);
  add_sampling(baselines, c);
  baselines->add_option("--k", ks, "plug-in block lengths")->capture_default_str();
  baselines->add_flag("--bct", with_bct, "also report the posterior mean of the entropy rate");

  std::string fixture_name, output;
  std::size_t length = 1000;
  auto* simulate = app.add_subcommand("simulate", "export a series from a built-in chain (ternary5, binary3, bimodal6)");
  add_common(simulate, c, false);
  simulate->add_option("fixture", fixture_name, "fixture name")->required();
  simulate->add_option("-n,--length", length, "number of observations after the context")->capture_default_str();
  simulate->add_option("-o,--output", output, "output path (default stdout)");

  std::string what;
  auto* reproduce = app.add_subcommand("reproduce", "desk-scale experiments on the built-in chains");
  add_common(reproduce, c, false);
  add_sampling(reproduce, c);
  reproduce->add_option("experiment", what, "figure2, figure5, figure6, figure7a or tables")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c.beta) check_beta(*c.beta);
    if (c.workers < 1) c.workers = 1;
    if (*map) return cmd_map(c);
    if (*entropy) return cmd_entropy(c);
    if (*predict) return cmd_predict(c, horizon, given);
    if (*sample) {
      if (!prior && c.input.empty()) throw DomainError("posterior mode needs a data file (or use --prior)");
      return cmd_sample(c, prior, params, depth_csv);
    }
    if (*baselines) return cmd_baselines(c, ks, with_bct);
    if (*simulate) return cmd_simulate(c, fixture_name, length, output);
    if (*reproduce) return cmd_reproduce(c, what);
  } catch (const bct::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
