#ifndef BCT_SAMPLER_HPP
#define BCT_SAMPLER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "bct/core_types.hpp"
#include "bct/ctw.hpp"

namespace bct {

using Rng = std::mt19937_64;

// SplitMix64 finaliser, used to derive per-sample seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent generator for sample `index` of a stream with master `seed`.
// Sample i depends only on (seed, i), so any split of the indices across
// workers yields the same samples.
inline Rng substream(std::uint64_t seed, std::uint64_t index) { return Rng(mix_seed(mix_seed(seed) ^ mix_seed(index + 1))); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Runs fn(i) for i in [0, n), splitting contiguous blocks over `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::jthread> pool;
  const std::size_t block = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * block;
    const std::size_t hi = std::min(n, lo + block);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

// Prior sampler: Galton-Watson process with offspring distribution
// (β, 1-β) on {0, m}, stopped at generation D.
inline ContextTree sample_prior_tree(const Alphabet& alphabet, std::size_t depth, double beta, Rng& rng) {
  check_beta(beta);
  std::vector<Context> leaves;
  std::deque<Context> frontier{Context{}};
  while (!frontier.empty()) {
    Context s = std::move(frontier.front());
    frontier.pop_front();
    if (s.size() == depth || uniform01(rng) < beta) {
      leaves.push_back(std::move(s));
      continue;
    }
    for (Symbol c = 0; c < alphabet.size(); ++c) {
      frontier.push_back(s);
      frontier.back().push_back(c);
    }
  }
  return ContextTree(alphabet, std::move(leaves));
}

// Posterior sampler: the same branching process with node-dependent
// stopping probabilities P_b,s (β off the data support).
inline ContextTree sample_posterior_tree(const WeightedTree& wt, Rng& rng) {
  const CountTable& counts = wt.counts();
  const std::size_t depth = wt.depth();
  const std::size_t m = wt.alphabet().size();
  std::vector<Context> leaves;
  std::deque<std::pair<Context, NodeId>> frontier;
  frontier.emplace_back(Context{}, NodeId{0});
  while (!frontier.empty()) {
    auto [s, node] = std::move(frontier.front());
    frontier.pop_front();
    bool stop = s.size() == depth;
    if (!stop) {
      const double pb = node == kNoNode ? wt.beta() : std::exp(wt.log_pb(node));
      stop = uniform01(rng) < pb;
    }
    if (stop) {
      leaves.push_back(std::move(s));
      continue;
    }
    for (std::size_t c = 0; c < m; ++c) {
      Context child = s;
      child.push_back(static_cast<Symbol>(c));
      frontier.emplace_back(std::move(child), node == kNoNode ? kNoNode : counts.child(node, static_cast<Symbol>(c)));
    }
  }
  return ContextTree(wt.alphabet(), std::move(leaves));
}

// Draws from Dirichlet(shape) by normalising independent Gamma variates.
// An all-finite draw containing an exact zero is redrawn once.
inline std::vector<double> sample_dirichlet(std::span<const double> shape, Rng& rng) {
  std::vector<double> out(shape.size());
  for (int attempt = 0; attempt < 2; ++attempt) {
    double sum = 0.0;
    bool zero = false;
    for (std::size_t j = 0; j < shape.size(); ++j) {
      out[j] = std::gamma_distribution<double>(shape[j], 1.0)(rng);
      sum += out[j];
      zero = zero || out[j] == 0.0;
    }
    if (sum > 0.0) {
      for (double& v : out) v /= sum;
      if (!zero) break;
    }
  }
  return out;
}

// θ_s ~ Dirichlet(1/2 + a_s(0), ..., 1/2 + a_s(m-1)) independently per leaf.
inline ParamSet sample_params(const ContextTree& tree, const CountTable& counts, Rng& rng) {
  if (tree.depth() > counts.depth()) throw DomainError("tree deeper than the count table");
  const std::size_t m = tree.alphabet().size();
  std::vector<std::vector<double>> rows;
  rows.reserve(tree.num_leaves());
  std::vector<double> shape(m);
  for (const auto& s : tree.leaves()) {
    const NodeId n = counts.find(s);
    for (std::size_t j = 0; j < m; ++j)
      shape[j] = 0.5 + (n == kNoNode ? 0.0 : static_cast<double>(counts.counts(n)[j]));
    auto row = sample_dirichlet(shape, rng);
    // Renormalise to absorb rounding in the division above.
    double sum = 0.0;
    for (double v : row) sum += v;
    for (double& v : row) v /= sum;
    rows.push_back(std::move(row));
  }
  return ParamSet(tree.alphabet(), std::move(rows));
}

struct JointSample {
  ContextTree tree;
  ParamSet params;
};

// Reproducible stream of exact i.i.d. draws (T, θ) from the joint posterior.
class JointSampler {
 public:
  JointSampler(const WeightedTree& wt, std::uint64_t seed) : wt_(&wt), seed_(seed) {}

  JointSample draw(std::size_t index) const {
    Rng rng = substream(seed_, index);
    ContextTree tree = sample_posterior_tree(*wt_, rng);
    ParamSet params = sample_params(tree, wt_->counts(), rng);
    return {std::move(tree), std::move(params)};
  }

  ContextTree draw_tree(std::size_t index) const {
    Rng rng = substream(seed_, index);
    return sample_posterior_tree(*wt_, rng);
  }

 private:
  const WeightedTree* wt_;
  std::uint64_t seed_;
};

inline std::vector<JointSample> sample_joint(const WeightedTree& wt, std::size_t n, std::uint64_t seed,
                                             unsigned workers = 1) {
  if (n < 1) throw DomainError("sample count must be at least 1");
  JointSampler sampler(wt, seed);
  std::vector<std::optional<JointSample>> slots(n);
  parallel_for(n, workers, [&](std::size_t i) { slots[i] = sampler.draw(i); });
  std::vector<JointSample> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::vector<ContextTree> sample_posterior_trees(const WeightedTree& wt, std::size_t n, std::uint64_t seed,
                                                       unsigned workers = 1) {
  JointSampler sampler(wt, seed);
  std::vector<std::optional<ContextTree>> slots(n);
  parallel_for(n, workers, [&](std::size_t i) { slots[i] = sampler.draw_tree(i); });
  std::vector<ContextTree> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::vector<ContextTree> sample_prior_trees(const Alphabet& alphabet, std::size_t depth, double beta,
                                                   std::size_t n, std::uint64_t seed) {
  std::vector<ContextTree> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = substream(seed, i);
    out.push_back(sample_prior_tree(alphabet, depth, beta, rng));
  }
  return out;
}

}  // namespace bct

#endif  // BCT_SAMPLER_HPP
