#ifndef BCT_INFERENCE_HPP
#define BCT_INFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bct/core_types.hpp"
#include "bct/ctw.hpp"
#include "bct/sampler.hpp"

namespace bct {

// Posterior predictive distribution of the next symbol, together with the
// posterior probabilities γ_i that the length-i context is the active leaf.
struct PredictiveDistribution {
  std::vector<double> probabilities;
  std::vector<double> leaf_weights;  // γ_0, ..., γ_D
};

// P(x_{n+1} = a | x) = Σ_i γ_i (a_{s(i)}(a) + 1/2) / (M_{s(i)} + m/2), where
// s(i) is the length-i context of `recent_past` (exactly D symbols, most
// recent first).
inline PredictiveDistribution predictive(const WeightedTree& wt, const CountTable& counts,
                                         std::span<const Symbol> recent_past) {
  const std::size_t depth = wt.depth();
  const std::size_t m = wt.alphabet().size();
  if (recent_past.size() != depth)
    throw DomainError("predictive needs exactly " + std::to_string(depth) + " past symbols, got " +
                      std::to_string(recent_past.size()));
  if (&counts != &wt.counts()) throw DomainError("weighted tree was built from a different count table");

  PredictiveDistribution out{std::vector<double>(m, 0.0), std::vector<double>(depth + 1, 0.0)};
  NodeId node = 0;
  double log_survive = 0.0;  // log Π_{k<i} (1 - P_b,s(k))
  for (std::size_t i = 0; i <= depth; ++i) {
    double log_stop = 0.0;
    double log_go = -std::numeric_limits<double>::infinity();
    if (i < depth) {
      log_stop = node == kNoNode ? wt.log_beta() : wt.log_pb(node);
      log_go = node == kNoNode ? wt.log_1m_beta() : wt.log_1m_pb(node);
    }
    const double gamma = std::exp(log_survive + log_stop);
    out.leaf_weights[i] = gamma;
    const double total = node == kNoNode ? 0.0 : static_cast<double>(counts.total(node));
    for (std::size_t a = 0; a < m; ++a) {
      const double count = node == kNoNode ? 0.0 : static_cast<double>(counts.counts(node)[a]);
      out.probabilities[a] += gamma * (count + 0.5) / (total + 0.5 * static_cast<double>(m));
    }
    log_survive += log_go;
    if (i < depth) {
      if (!wt.alphabet().contains(recent_past[i])) throw DataError("symbol outside alphabet in past");
      if (node != kNoNode) node = counts.child(node, recent_past[i]);
    }
  }
  return out;
}

// Online one-step-ahead prediction: counts and weighted probabilities are
// updated along a single context path per appended symbol.
class SequentialPredictor {
 public:
  // `initial_context` is chronological and supplies at least D symbols.
  SequentialPredictor(Alphabet alphabet, std::size_t depth, double beta, std::span<const Symbol> initial_context)
      : counts_(std::make_unique<CountTable>(alphabet, depth)),
        wt_(std::make_unique<WeightedTree>(*counts_, beta)),
        history_(initial_context.begin(), initial_context.end()) {
    if (history_.size() < depth) throw DomainError("initial context shorter than the depth");
    for (Symbol s : history_)
      if (!alphabet.contains(s)) throw DataError("symbol outside alphabet in initial context");
  }

  PredictiveDistribution predict() const { return predictive(*wt_, *counts_, recent_past()); }

  // Adds x_{n+1} and returns log P(x_{n+1} | x_{<=n}) under the predictive
  // before the update.
  double append(Symbol next) {
    if (!counts_->alphabet().contains(next)) throw DataError("symbol outside alphabet");
    const double logp = std::log(predict().probabilities[next]);
    counts_->add(recent_past(), next, &path_);
    wt_->refresh_path(path_);
    history_.push_back(next);
    return logp;
  }

  const CountTable& counts() const noexcept { return *counts_; }
  const WeightedTree& weighted() const noexcept { return *wt_; }
  double log_evidence() const { return wt_->log_evidence(); }

  Context recent_past() const {
    const std::size_t depth = counts_->depth();
    Context past(depth);
    for (std::size_t k = 0; k < depth; ++k) past[k] = history_[history_.size() - 1 - k];
    return past;
  }

 private:
  std::unique_ptr<CountTable> counts_;
  std::unique_ptr<WeightedTree> wt_;
  std::vector<Symbol> history_;
  std::vector<NodeId> path_;
};

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
};

// One mode of a bimodal summary.
struct ModeComponent {
  double weight = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

struct BimodalSplit {
  double split_point = 0.0;
  ModeComponent dominant;
  ModeComponent secondary;
};

struct SummaryOptions {
  std::size_t bins = 100;
  double credible_level = 0.95;
  bool detect_bimodal = true;
  // A valley qualifies when its smoothed height is below this fraction of
  // the lower of the two flanking peaks...
  double valley_ratio = 0.35;
  // ...and each side holds at least this share of the samples.
  double min_mode_weight = 0.02;
};

// Monte Carlo summary of the posterior of a scalar functional.
struct PosteriorSummary {
  std::vector<double> samples;
  double mean = 0.0;
  double sd = 0.0;
  double mode = 0.0;
  double credible_level = 0.95;
  double credible_lower = 0.0;
  double credible_upper = 0.0;
  Histogram histogram;
  std::optional<BimodalSplit> bimodal;

  // Nearest-rank order statistic.
  double quantile(double q) const {
    if (samples.empty()) throw DomainError("empty summary");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    return order_statistic(sorted, q);
  }

  static double order_statistic(const std::vector<double>& sorted, double q) {
    q = std::clamp(q, 0.0, 1.0);
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
  }
};

namespace detail {

inline ModeComponent describe(std::span<const double> xs, std::size_t total) {
  ModeComponent c;
  if (xs.empty()) return c;
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  c.weight = static_cast<double>(xs.size()) / static_cast<double>(total);
  c.mean = mean;
  c.sd = xs.size() > 1 ? std::sqrt(m2 / static_cast<double>(xs.size() - 1)) : 0.0;
  return c;
}

// Deepest interior minimum of a lightly smoothed histogram, if it separates
// two modes per the options.
inline std::optional<std::size_t> find_valley(const Histogram& h, std::size_t total, const SummaryOptions& opt) {
  const std::size_t b = h.counts.size();
  if (b < 5) return std::nullopt;
  std::vector<double> smooth(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    double s = 0.0;
    int k = 0;
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) - 2; j <= static_cast<std::ptrdiff_t>(i) + 2; ++j) {
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(b)) continue;
      s += static_cast<double>(h.counts[static_cast<std::size_t>(j)]);
      ++k;
    }
    smooth[i] = s / k;
  }
  std::vector<double> left_max(b), right_max(b);
  std::vector<std::size_t> left_mass(b);
  double run = 0.0;
  std::size_t mass = 0;
  for (std::size_t i = 0; i < b; ++i) {
    run = std::max(run, smooth[i]);
    left_max[i] = run;
    mass += h.counts[i];
    left_mass[i] = mass;  // includes bin i
  }
  run = 0.0;
  for (std::size_t i = b; i-- > 0;) {
    run = std::max(run, smooth[i]);
    right_max[i] = run;
  }
  std::optional<std::size_t> best;
  double best_ratio = opt.valley_ratio;
  const double min_count = opt.min_mode_weight * static_cast<double>(total);
  for (std::size_t i = 1; i + 1 < b; ++i) {
    const double below = static_cast<double>(left_mass[i - 1]);
    const double above = static_cast<double>(total - left_mass[i]);
    if (below < min_count || above < min_count) continue;
    const double peak = std::min(left_max[i], right_max[i]);
    if (peak <= 0.0) continue;
    const double ratio = smooth[i] / peak;
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

inline PosteriorSummary summarize(std::vector<double> samples, const SummaryOptions& opt = {}) {
  if (samples.empty()) throw DomainError("cannot summarise zero samples");
  if (opt.bins < 1) throw DomainError("histogram needs at least one bin");
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!std::isfinite(samples[i])) throw EstimationError("non-finite functional value at sample " + std::to_string(i));

  PosteriorSummary out;
  const std::size_t n = samples.size();
  double sum = 0.0;
  for (double x : samples) sum += x;
  out.mean = sum / static_cast<double>(n);
  out.sd = detail::describe(samples, n).sd;

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  out.credible_level = opt.credible_level;
  const double tail = 0.5 * (1.0 - opt.credible_level);
  out.credible_lower = PosteriorSummary::order_statistic(sorted, tail);
  out.credible_upper = PosteriorSummary::order_statistic(sorted, 1.0 - tail);

  const double lo = sorted.front();
  const double hi = sorted.back();
  const std::size_t bins = hi > lo ? opt.bins : 1;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 0.0;
  out.histogram.counts.assign(bins, 0);
  out.histogram.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) out.histogram.edges[i] = lo + width * static_cast<double>(i);
  out.histogram.edges.back() = hi;
  for (double x : samples) {
    std::size_t k = width > 0.0 ? static_cast<std::size_t>((x - lo) / width) : 0;
    out.histogram.counts[std::min(k, bins - 1)]++;
  }
  const auto peak = static_cast<std::size_t>(
      std::max_element(out.histogram.counts.begin(), out.histogram.counts.end()) - out.histogram.counts.begin());
  out.mode = 0.5 * (out.histogram.edges[peak] + out.histogram.edges[peak + 1]);

  if (opt.detect_bimodal) {
    if (auto valley = detail::find_valley(out.histogram, n, opt)) {
      const double split = 0.5 * (out.histogram.edges[*valley] + out.histogram.edges[*valley + 1]);
      const auto mid = std::upper_bound(sorted.begin(), sorted.end(), split);
      auto lower = detail::describe(std::span<const double>(sorted.begin(), mid), n);
      auto upper = detail::describe(std::span<const double>(mid, sorted.end()), n);
      BimodalSplit b;
      b.split_point = split;
      b.dominant = lower.weight >= upper.weight ? lower : upper;
      b.secondary = lower.weight >= upper.weight ? upper : lower;
      out.bimodal = b;
    }
  }
  out.samples = std::move(samples);
  return out;
}

// Summary of F(T^(i), θ^(i)) over joint posterior samples.
template <typename Functional>
PosteriorSummary estimate_functional(std::span<const JointSample> samples, Functional&& f,
                                     const SummaryOptions& opt = {}) {
  if (samples.empty()) throw DomainError("need at least one sample");
  std::vector<double> values;
  values.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = f(samples[i].tree, samples[i].params);
    if (!std::isfinite(v)) throw EstimationError("functional is not finite at sample " + std::to_string(i));
    values.push_back(v);
  }
  return summarize(std::move(values), opt);
}

// Dirichlet posterior mean (a_s(j) + 1/2)/(M_s + m/2) of the context s.
inline std::vector<double> dirichlet_mean(const CountTable& counts, std::span<const Symbol> s) {
  const std::size_t m = counts.alphabet().size();
  const auto a = counts.counts_of(s);
  double total = 0.0;
  for (auto v : a) total += static_cast<double>(v);
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j)
    out[j] = (static_cast<double>(a[j]) + 0.5) / (total + 0.5 * static_cast<double>(m));
  return out;
}

// Rao-Blackwellised estimate of the next-symbol distribution in the given
// context: average over sampled trees of the Dirichlet posterior mean at the
// leaf governing that context.
inline std::vector<double> rao_blackwell_params(std::span<const ContextTree> trees, const CountTable& counts,
                                                std::span<const Symbol> context) {
  if (trees.empty()) throw DomainError("need at least one tree");
  if (context.size() > counts.depth()) throw DomainError("queried context is longer than the maximum depth");
  std::vector<double> out(counts.alphabet().size(), 0.0);
  for (const auto& t : trees) {
    const auto mean = dirichlet_mean(counts, t.matching_leaf(context));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += mean[j];
  }
  for (double& v : out) v /= static_cast<double>(trees.size());
  return out;
}

// Plain Monte Carlo counterpart of rao_blackwell_params using the sampled θ.
inline std::vector<double> monte_carlo_params(std::span<const JointSample> samples, std::span<const Symbol> context) {
  if (samples.empty()) throw DomainError("need at least one sample");
  std::vector<double> out(samples.front().tree.alphabet().size(), 0.0);
  for (const auto& s : samples) {
    const auto row = s.params[s.tree.leaf_index(context)];
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j];
  }
  for (double& v : out) v /= static_cast<double>(samples.size());
  return out;
}

// Empirical distribution of the sampled trees' depths over 0..D.
inline std::vector<double> order_posterior(std::span<const ContextTree> trees, std::size_t max_depth) {
  if (trees.empty()) throw DomainError("need at least one tree");
  std::vector<double> out(max_depth + 1, 0.0);
  for (const auto& t : trees) {
    if (t.depth() > max_depth) throw DomainError("sampled tree deeper than the maximum depth");
    out[t.depth()] += 1.0;
  }
  for (double& v : out) v /= static_cast<double>(trees.size());
  return out;
}

}  // namespace bct

#endif  // BCT_INFERENCE_HPP
