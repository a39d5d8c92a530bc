#ifndef BCT_ENTROPY_HPP
#define BCT_ENTROPY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bct/core_types.hpp"
#include "bct/ctw.hpp"
#include "bct/inference.hpp"
#include "bct/sampler.hpp"

namespace bct {

struct EntropyOptions {
  // State counts up to this size use a dense LU solve for π.
  std::size_t dense_state_limit = 64;
  // Above this many states the exact route is abandoned.
  std::size_t state_cap = 1'000'000;
  double power_tolerance = 1e-13;
  std::size_t power_max_iterations = 1'000'000;
  // Path length of the Monte Carlo fallback.
  std::size_t mc_length = 1'000'000;
};

// Shannon entropy in nats, with 0 log 0 = 0.
inline double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

// The first-order chain induced by a variable-memory chain. Its states are
// the leaves of the smallest refinement T' of T that is closed under
// appending a symbol: for every leaf s of T' and symbol j, the leaf of T'
// matching (j, s) has length at most |s| + 1. The next state is then a
// function of the current state and the emitted symbol, and the chain is an
// exact lumping of the chain on blocks of depth(T) symbols.
class InducedChain {
 public:
  explicit InducedChain(const VariableMemoryChain& chain, const EntropyOptions& opt = {})
      : m_(chain.alphabet().size()) {
    build_closure(chain, opt.state_cap);
    const std::size_t n = num_states();
    next_.assign(n * m_, 0);
    probs_.resize(n * m_);
    for (std::size_t z = 0; z < n; ++z) {
      const Context& s = contexts_[z];
      const auto r = chain.params()[emission_leaf_[z]];
      std::copy(r.begin(), r.end(), probs_.begin() + static_cast<std::ptrdiff_t>(z * m_));
      Context js(s.size() + 1);
      std::copy(s.begin(), s.end(), js.begin() + 1);
      for (std::size_t j = 0; j < m_; ++j) {
        js[0] = static_cast<Symbol>(j);
        next_[z * m_ + j] = static_cast<std::uint32_t>(state_of(js));
      }
    }
    for (const auto& r : chain.params().rows())
      for (double p : r) has_zero_ = has_zero_ || p == 0.0;
  }

  std::size_t num_states() const noexcept { return contexts_.size(); }
  std::size_t alphabet_size() const noexcept { return m_; }
  // The context (most recent first) carried by state z.
  const Context& state_context(std::size_t z) const { return contexts_[z]; }
  // Index of the leaf of the original tree that governs state z.
  std::size_t leaf_of(std::size_t z) const { return emission_leaf_[z]; }
  std::span<const double> row(std::size_t z) const { return {probs_.data() + z * m_, m_}; }
  std::size_t successor(std::size_t z, Symbol j) const { return next_[z * m_ + j]; }
  bool has_zero_transitions() const noexcept { return has_zero_; }

  // π ↦ πP.
  void step(std::span<const double> pi, std::span<double> next) const {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t z = 0; z < num_states(); ++z) {
      const double w = pi[z];
      if (w == 0.0) continue;
      const auto r = row(z);
      const std::uint32_t* to = next_.data() + z * m_;
      for (std::size_t j = 0; j < m_; ++j) next[to[j]] += w * r[j];
    }
  }

  // ‖πP − π‖₁.
  double residual(std::span<const double> pi) const {
    std::vector<double> next(num_states());
    step(pi, next);
    double r = 0.0;
    for (std::size_t z = 0; z < num_states(); ++z) r += std::abs(next[z] - pi[z]);
    return r;
  }

  // Number of closed communicating classes of the transition graph; the
  // stationary distribution is unique exactly when this is 1.
  std::size_t closed_classes() const {
    // Iterative Tarjan SCC.
    const std::size_t n = num_states();
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> call;
    std::size_t counter = 0, ncomp = 0;
    for (std::size_t root = 0; root < n; ++root) {
      if (index[root] != kUnset) continue;
      call.emplace_back(root, 0);
      while (!call.empty()) {
        auto& [v, j] = call.back();
        if (j == 0 && index[v] == kUnset) {
          index[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack[v] = 1;
        }
        bool descended = false;
        while (j < m_) {
          const auto sym = static_cast<Symbol>(j++);
          if (row(v)[sym] <= 0.0) continue;
          const std::size_t w = successor(v, sym);
          if (index[w] == kUnset) {
            call.emplace_back(w, 0);
            descended = true;
            break;
          }
          if (on_stack[w]) low[v] = std::min(low[v], index[w]);
        }
        if (descended) continue;
        const std::size_t vv = v;
        if (low[vv] == index[vv]) {
          while (true) {
            const std::size_t w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = ncomp;
            if (w == vv) break;
          }
          ++ncomp;
        }
        call.pop_back();
        if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[vv]);
      }
    }
    std::vector<char> closed(ncomp, 1);
    for (std::size_t z = 0; z < n; ++z)
      for (std::size_t j = 0; j < m_; ++j)
        if (row(z)[j] > 0.0 && comp[successor(z, static_cast<Symbol>(j))] != comp[z]) closed[comp[z]] = 0;
    return static_cast<std::size_t>(std::count(closed.begin(), closed.end(), 1));
  }

  std::vector<double> stationary(const EntropyOptions& opt = {}) const {
    if (num_states() == 1) return {1.0};
    if (has_zero_ && closed_classes() != 1)
      throw DomainError("chain has several closed classes; its stationary distribution is not unique");
    if (num_states() <= opt.dense_state_limit || (has_zero_ && num_states() <= 4096)) return stationary_dense();
    return stationary_power(opt);
  }

 private:
  static constexpr std::int32_t kNone = -1;

  // Refines T until it is closed, then records the leaves as states.
  void build_closure(const VariableMemoryChain& chain, std::size_t cap) {
    std::vector<std::int32_t> children;  // m per node
    std::vector<std::int32_t> owner;     // governing leaf of T, or kNone for internal nodes
    std::vector<Context> path;
    auto add_node = [&](Context s, std::int32_t leaf) {
      children.resize(children.size() + m_, kNone);
      owner.push_back(leaf);
      path.push_back(std::move(s));
      return static_cast<std::int32_t>(owner.size() - 1);
    };
    add_node(Context{}, kNone);
    const auto& tree = chain.tree();
    for (std::size_t li = 0; li < tree.num_leaves(); ++li) {
      const Context& s = tree.leaves()[li];
      std::int32_t node = 0;
      for (std::size_t d = 0; d < s.size(); ++d) {
        std::int32_t& c = children[static_cast<std::size_t>(node) * m_ + s[d]];
        if (c == kNone) {
          const std::int32_t fresh = add_node(Context(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(d) + 1), kNone);
          children[static_cast<std::size_t>(node) * m_ + s[d]] = fresh;
          node = fresh;
        } else {
          node = c;
        }
      }
      owner[static_cast<std::size_t>(node)] = static_cast<std::int32_t>(li);
    }
    std::size_t leaves = tree.num_leaves();

    // Iterate to a fixpoint; splitting a node can invalidate earlier checks.
    bool changed = true;
    Context js;
    while (changed) {
      changed = false;
      const std::size_t count = owner.size();
      for (std::size_t v = 0; v < count; ++v) {
        if (owner[v] == kNone) continue;
        const Context s = path[v];
        bool split = false;
        for (std::size_t j = 0; j < m_ && !split; ++j) {
          std::int32_t node = 0;
          std::size_t consumed = 0;
          const std::size_t len = s.size() + 1;
          while (owner[static_cast<std::size_t>(node)] == kNone && consumed < len) {
            const Symbol c = consumed == 0 ? static_cast<Symbol>(j) : s[consumed - 1];
            node = children[static_cast<std::size_t>(node) * m_ + c];
            ++consumed;
          }
          split = owner[static_cast<std::size_t>(node)] == kNone;
        }
        if (!split) continue;
        const std::int32_t leaf = owner[v];
        owner[v] = kNone;
        for (std::size_t c = 0; c < m_; ++c) {
          Context child = s;
          child.push_back(static_cast<Symbol>(c));
          const std::int32_t fresh = add_node(std::move(child), leaf);
          children[v * m_ + c] = fresh;
        }
        leaves += m_ - 1;
        if (leaves > cap)
          throw CapacityError("induced chain has more than " + std::to_string(cap) +
                              " states; use entropy_rate_mc instead");
        changed = true;
      }
    }

    node_children_ = std::move(children);
    state_of_node_.assign(owner.size(), kNone);
    for (std::size_t v = 0; v < owner.size(); ++v) {
      if (owner[v] == kNone) continue;
      state_of_node_[v] = static_cast<std::int32_t>(contexts_.size());
      contexts_.push_back(std::move(path[v]));
      emission_leaf_.push_back(static_cast<std::uint32_t>(owner[v]));
    }
  }

  std::size_t state_of(std::span<const Symbol> past) const {
    std::int32_t node = 0;
    std::size_t d = 0;
    while (state_of_node_[static_cast<std::size_t>(node)] == kNone) {
      node = node_children_[static_cast<std::size_t>(node) * m_ + past[d]];
      ++d;
    }
    return static_cast<std::size_t>(state_of_node_[static_cast<std::size_t>(node)]);
  }

  std::vector<double> stationary_dense() const {
    const auto n = static_cast<Eigen::Index>(num_states());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t z = 0; z < num_states(); ++z) {
      const auto r = row(z);
      for (std::size_t j = 0; j < m_; ++j)
        a(static_cast<Eigen::Index>(successor(z, static_cast<Symbol>(j))), static_cast<Eigen::Index>(z)) += r[j];
    }
    a -= Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    const Eigen::VectorXd pi = a.partialPivLu().solve(b);
    std::vector<double> out(num_states());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
      sum += out[static_cast<std::size_t>(i)];
    }
    for (double& v : out) v /= sum;
    return out;
  }

  // Power iteration until the L1 change per step drops below tolerance. The
  // lazy chain (P + I)/2 is iterated when zero transitions could make P
  // periodic; it has the same stationary distribution.
  std::vector<double> stationary_power(const EntropyOptions& opt) const {
    const std::size_t n = num_states();
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (std::size_t it = 0; it < opt.power_max_iterations; ++it) {
      step(pi, next);
      if (has_zero_)
        for (std::size_t z = 0; z < n; ++z) next[z] = 0.5 * (next[z] + pi[z]);
      double diff = 0.0, sum = 0.0;
      for (std::size_t z = 0; z < n; ++z) {
        diff += std::abs(next[z] - pi[z]);
        sum += next[z];
      }
      for (std::size_t z = 0; z < n; ++z) pi[z] = next[z] / sum;
      if (diff < opt.power_tolerance) break;
    }
    return pi;
  }

  std::size_t m_;
  bool has_zero_ = false;
  std::vector<Context> contexts_;
  std::vector<std::uint32_t> emission_leaf_;
  std::vector<double> probs_;  // m per state
  std::vector<std::uint32_t> next_;  // m per state
  std::vector<std::int32_t> node_children_;
  std::vector<std::int32_t> state_of_node_;
};

// Exact entropy rate −Σ_z π(z) Σ_j θ(j) log θ(j) in nats.
inline double entropy_rate_exact(const VariableMemoryChain& chain, const EntropyOptions& opt = {}) {
  InducedChain induced(chain, opt);
  const auto pi = induced.stationary(opt);
  std::vector<double> leaf_entropy;
  leaf_entropy.reserve(chain.params().size());
  for (const auto& r : chain.params().rows()) leaf_entropy.push_back(shannon_entropy(r));
  double h = 0.0;
  for (std::size_t z = 0; z < induced.num_states(); ++z) h += pi[z] * leaf_entropy[induced.leaf_of(z)];
  return h;
}

// Monte Carlo entropy rate −(1/M) log P(Y_1^M | Y_{-k+1}^0) along a
// simulated path started from the all-zero context.
inline double entropy_rate_mc(const VariableMemoryChain& chain, std::size_t length, Rng& rng) {
  if (length < 1) throw DomainError("path length must be at least 1");
  const std::size_t k = chain.depth();
  const std::size_t m = chain.alphabet().size();
  std::vector<std::vector<double>> cumulative;
  for (const auto& r : chain.params().rows()) {
    std::vector<double> c(m);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) c[j] = (s += r[j]);
    cumulative.push_back(std::move(c));
  }
  // Ring buffer of 2k slots so the last k symbols are always contiguous,
  // most recent first.
  std::vector<Symbol> ring(2 * k + 1, 0);
  std::size_t head = k;  // ring[head .. head+k) is the past
  double loss = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    const std::size_t leaf = chain.tree().leaf_index(std::span<const Symbol>(ring.data() + head, k));
    const auto& c = cumulative[leaf];
    const double u = uniform01(rng) * c.back();
    Symbol y = 0;
    while (y + 1 < m && (u >= c[y] || chain.params()[leaf][y] == 0.0)) ++y;
    loss -= std::log(chain.params()[leaf][y]);
    if (k > 0) {
      if (head == 0) {
        std::copy_backward(ring.begin(), ring.begin() + static_cast<std::ptrdiff_t>(k - 1),
                           ring.begin() + static_cast<std::ptrdiff_t>(2 * k));
        head = k + 1;
      }
      ring[--head] = y;
    }
  }
  return loss / static_cast<double>(length);
}

// Entropy rate of one (T, θ), switching to the Monte Carlo route above the
// state cap.
inline double entropy_rate(const VariableMemoryChain& chain, const EntropyOptions& opt, Rng& rng) {
  try {
    return entropy_rate_exact(chain, opt);
  } catch (const CapacityError&) {
    return entropy_rate_mc(chain, opt.mc_length, rng);
  }
}

struct EntropyPosteriorOptions {
  EntropyOptions entropy;
  SummaryOptions summary;
  unsigned workers = 1;
};

// Posterior of the entropy rate: H^(i) = H(T^(i), θ^(i)) over exact joint
// posterior samples.
inline PosteriorSummary entropy_posterior(const WeightedTree& wt, std::size_t n_samples, std::uint64_t seed,
                                          const EntropyPosteriorOptions& opt = {}) {
  if (n_samples < 1) throw DomainError("sample count must be at least 1");
  JointSampler sampler(wt, seed);
  std::vector<double> values(n_samples);
  parallel_for(n_samples, opt.workers, [&](std::size_t i) {
    auto s = sampler.draw(i);
    VariableMemoryChain chain(std::move(s.tree), std::move(s.params));
    Rng mc_rng = substream(seed ^ 0x5bd1e995ULL, i);
    values[i] = entropy_rate(chain, opt.entropy, mc_rng);
  });
  return summarize(std::move(values), opt.summary);
}

inline PosteriorSummary entropy_posterior(const TimeSeries& x, std::size_t n_samples, std::size_t depth, double beta,
                                          std::uint64_t seed, const EntropyPosteriorOptions& opt = {}) {
  const CountTable counts = build_counts(x, depth);
  const WeightedTree wt(counts, beta);
  return entropy_posterior(wt, n_samples, seed, opt);
}

}  // namespace bct

#endif  // BCT_ENTROPY_HPP
