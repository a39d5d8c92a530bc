#ifndef BCT_CTW_HPP
#define BCT_CTW_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "bct/core_types.hpp"

namespace bct {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

// log(e^a + e^b) without overflow.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

// Log of the KT (Dirichlet(1/2, ..., 1/2)) marginal probability of a count
// vector: prod_j Γ(a_j + 1/2)/Γ(1/2) divided by Γ(M + m/2)/Γ(m/2).
template <typename Count>
double log_pe(std::span<const Count> counts) {
  const double half_m = 0.5 * static_cast<double>(counts.size());
  static const double lgamma_half = std::lgamma(0.5);
  double total = 0.0;
  double out = 0.0;
  for (Count a : counts) {
    if (a == 0) continue;
    const double x = static_cast<double>(a);
    out += std::lgamma(x + 0.5) - lgamma_half;
    total += x;
  }
  if (total == 0.0) return 0.0;
  return out - (std::lgamma(total + half_m) - std::lgamma(half_m));
}

inline double log_pe(const std::vector<std::uint64_t>& counts) {
  return log_pe(std::span<const std::uint64_t>(counts));
}

// Count vectors a_s for every context s of length <= D that precedes some
// observation x_1..x_n, stored as a trie rooted at λ. Contexts that never
// occur are not materialised and have all-zero counts.
class CountTable {
 public:
  using Count = std::uint64_t;

  CountTable(Alphabet alphabet, std::size_t depth) : alphabet_(alphabet), depth_(depth) { new_node(kNoNode, 0, 0); }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t num_nodes() const noexcept { return depth_of_.size(); }

  // Records that `next` followed the given past (most recent first, at least
  // depth() symbols). When `path` is supplied it receives the node ids of
  // s^(0), ..., s^(D).
  void add(std::span<const Symbol> past, Symbol next, std::vector<NodeId>* path = nullptr) {
    const std::size_t m = alphabet_.size();
    if (past.size() < depth_) throw DomainError("past shorter than the count table depth");
    if (!alphabet_.contains(next)) throw DataError("symbol " + std::to_string(next) + " outside alphabet");
    if (path) path->clear();
    NodeId node = 0;
    for (std::size_t d = 0;; ++d) {
      ++counts_[node * m + next];
      ++totals_[node];
      if (path) path->push_back(node);
      if (d == depth_) break;
      const Symbol c = past[d];
      if (!alphabet_.contains(c)) throw DataError("symbol " + std::to_string(c) + " outside alphabet");
      NodeId child = children_[node * m + c];
      if (child == kNoNode) {
        child = new_node(node, c, d + 1);
        children_[node * m + c] = child;
      }
      node = child;
    }
  }

  NodeId find(std::span<const Symbol> s) const {
    if (s.size() > depth_) return kNoNode;
    NodeId node = 0;
    for (Symbol c : s) {
      if (c >= alphabet_.size()) return kNoNode;
      node = children_[node * alphabet_.size() + c];
      if (node == kNoNode) return kNoNode;
    }
    return node;
  }

  NodeId child(NodeId node, Symbol c) const { return children_[node * alphabet_.size() + c]; }
  NodeId parent(NodeId node) const { return parent_[node]; }
  std::size_t node_depth(NodeId node) const { return depth_of_[node]; }
  Count total(NodeId node) const { return totals_[node]; }

  std::span<const Count> counts(NodeId node) const {
    return {counts_.data() + static_cast<std::size_t>(node) * alphabet_.size(), alphabet_.size()};
  }

  // Count vector of an arbitrary context; zeros when it never occurs.
  std::vector<Count> counts_of(std::span<const Symbol> s) const {
    const NodeId node = find(s);
    if (node == kNoNode) return std::vector<Count>(alphabet_.size(), 0);
    auto c = counts(node);
    return {c.begin(), c.end()};
  }

  Context context(NodeId node) const {
    Context s(depth_of_[node]);
    for (std::size_t d = s.size(); d > 0; --d) {
      s[d - 1] = symbol_[node];
      node = parent_[node];
    }
    return s;
  }

 private:
  NodeId new_node(NodeId parent, Symbol symbol, std::size_t depth) {
    const auto id = static_cast<NodeId>(depth_of_.size());
    counts_.resize(counts_.size() + alphabet_.size(), 0);
    children_.resize(children_.size() + alphabet_.size(), kNoNode);
    totals_.push_back(0);
    parent_.push_back(parent);
    symbol_.push_back(symbol);
    depth_of_.push_back(static_cast<std::uint16_t>(depth));
    return id;
  }

  Alphabet alphabet_;
  std::size_t depth_;
  std::vector<Count> counts_;      // m per node
  std::vector<NodeId> children_;   // m per node
  std::vector<Count> totals_;
  std::vector<NodeId> parent_;
  std::vector<Symbol> symbol_;     // edge label from the parent
  std::vector<std::uint16_t> depth_of_;
};

// Builds the count table of x at depth D. Only x_1..x_n are counted; the
// initial context supplies conditioning symbols.
inline CountTable build_counts(const TimeSeries& x, std::size_t depth) {
  if (x.initial_context().size() < depth)
    throw DomainError("initial context has " + std::to_string(x.initial_context().size()) +
                      " symbols, depth " + std::to_string(depth) + " requires more");
  CountTable table(x.alphabet(), depth);
  Context past(depth);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = 0; k < depth; ++k) past[k] = x.at(static_cast<std::ptrdiff_t>(i) - 1 - static_cast<std::ptrdiff_t>(k));
    table.add(past, x.body()[i]);
  }
  return table;
}

// Log estimated, weighted and branching probabilities on the support of a
// CountTable. Holds a non-owning reference to the table, which must outlive it.
class WeightedTree {
 public:
  WeightedTree(const CountTable& counts, double beta) : counts_(&counts), beta_(beta) {
    check_beta(beta);
    log_beta_ = std::log(beta);
    log_1m_beta_ = std::log1p(-beta);
    recompute_all();
  }

  const CountTable& counts() const noexcept { return *counts_; }
  const Alphabet& alphabet() const noexcept { return counts_->alphabet(); }
  std::size_t depth() const noexcept { return counts_->depth(); }
  double beta() const noexcept { return beta_; }
  double log_beta() const noexcept { return log_beta_; }
  double log_1m_beta() const noexcept { return log_1m_beta_; }

  // Log prior predictive likelihood log P(x).
  double log_evidence() const { return log_pw_[0]; }

  double log_pe(NodeId n) const { return log_pe_[n]; }
  double log_pw(NodeId n) const { return log_pw_[n]; }
  // log P_b; zero at depth D.
  double log_pb(NodeId n) const { return log_pb_[n]; }
  // log(1 - P_b); -inf at depth D.
  double log_1m_pb(NodeId n) const { return log_1m_pb_[n]; }

  // Branching probabilities for an arbitrary context, using β off-support.
  double log_pb_at(std::span<const Symbol> s) const {
    if (s.size() >= depth()) return 0.0;
    const NodeId n = counts_->find(s);
    return n == kNoNode ? log_beta_ : log_pb_[n];
  }
  double log_1m_pb_at(std::span<const Symbol> s) const {
    if (s.size() >= depth()) return -std::numeric_limits<double>::infinity();
    const NodeId n = counts_->find(s);
    return n == kNoNode ? log_1m_beta_ : log_1m_pb_[n];
  }

  // Recomputes the nodes on a root-to-leaf path after their counts changed.
  void refresh_path(std::span<const NodeId> path) {
    grow();
    for (std::size_t k = path.size(); k > 0; --k) refresh(path[k - 1]);
  }

 private:
  void grow() {
    const std::size_t n = counts_->num_nodes();
    log_pe_.resize(n, 0.0);
    log_pw_.resize(n, 0.0);
    log_pb_.resize(n, log_beta_);
    log_1m_pb_.resize(n, log_1m_beta_);
  }

  void recompute_all() {
    grow();
    // Children always have larger ids than their parents.
    for (std::size_t k = counts_->num_nodes(); k > 0; --k) refresh(static_cast<NodeId>(k - 1));
  }

  void refresh(NodeId n) {
    const std::size_t m = alphabet().size();
    log_pe_[n] = bct::log_pe(counts_->counts(n));
    if (counts_->node_depth(n) == depth()) {
      log_pw_[n] = log_pe_[n];
      log_pb_[n] = 0.0;
      log_1m_pb_[n] = -std::numeric_limits<double>::infinity();
      return;
    }
    if (std::ranges::all_of(counts_->counts(n), [](auto a) { return a == 0; })) {
      // No data below: P_w is exactly one, skip the rounding in log_add.
      log_pw_[n] = 0.0;
      log_pb_[n] = log_beta_;
      log_1m_pb_[n] = log_1m_beta_;
      return;
    }
    double children = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const NodeId ch = counts_->child(n, static_cast<Symbol>(c));
      if (ch != kNoNode) children += log_pw_[ch];
    }
    const double stop = log_beta_ + log_pe_[n];
    const double split = log_1m_beta_ + children;
    log_pw_[n] = log_add(stop, split);
    log_pb_[n] = std::min(0.0, stop - log_pw_[n]);
    log_1m_pb_[n] = std::min(0.0, split - log_pw_[n]);
  }

  const CountTable* counts_;
  double beta_;
  double log_beta_ = 0.0;
  double log_1m_beta_ = 0.0;
  std::vector<double> log_pe_;
  std::vector<double> log_pw_;
  std::vector<double> log_pb_;
  std::vector<double> log_1m_pb_;
};

inline WeightedTree run_ctw(const CountTable& counts, double beta) { return WeightedTree(counts, beta); }

// Log prior π_D(T; β) = (|T|-1) log α + (|T| - L_D(T)) log β.
inline double log_prior(const ContextTree& tree, std::size_t depth, double beta) {
  check_beta(beta);
  if (tree.depth() > depth) throw DomainError("tree deeper than the maximum depth");
  const double m = static_cast<double>(tree.alphabet().size());
  const double log_alpha = std::log1p(-beta) / (m - 1.0);
  const double leaves = static_cast<double>(tree.num_leaves());
  const double at_depth = static_cast<double>(tree.leaves_at_depth(depth));
  return (leaves - 1.0) * log_alpha + (leaves - at_depth) * std::log(beta);
}

// Log marginal likelihood log P(x | T) = Σ_{s ∈ T} log P_e(a_s).
inline double log_marginal_likelihood(const CountTable& counts, const ContextTree& tree) {
  if (tree.depth() > counts.depth()) throw DomainError("tree deeper than the count table");
  if (!(tree.alphabet() == counts.alphabet())) throw DomainError("alphabet mismatch");
  double out = 0.0;
  for (const auto& s : tree.leaves()) {
    const NodeId n = counts.find(s);
    if (n != kNoNode) out += log_pe(counts.counts(n));
  }
  return out;
}

// Log posterior π(T | x) from the branching probabilities:
// Σ_{internal} log(1 - P_b) + Σ_{leaves} log P_b, with P_b = 1 at depth D.
inline double log_posterior(const ContextTree& tree, const WeightedTree& wt) {
  if (tree.depth() > wt.depth()) throw DomainError("tree deeper than the maximum depth");
  if (!(tree.alphabet() == wt.alphabet())) throw DomainError("alphabet mismatch");
  double out = 0.0;
  for (const auto& s : tree.internal_nodes()) out += wt.log_1m_pb_at(s);
  for (const auto& s : tree.leaves()) out += wt.log_pb_at(s);
  return out;
}

struct MapResult {
  ContextTree tree;
  double log_posterior;
};

// A tree of maximal posterior probability, via the max-product version of
// the weighting recursion. Ties are broken towards pruning.
inline MapResult map_tree(const WeightedTree& wt) {
  const CountTable& counts = wt.counts();
  const std::size_t m = wt.alphabet().size();
  const std::size_t depth = wt.depth();

  // Max-product values of subtrees with no data, indexed by depth.
  std::vector<double> empty(depth + 1, 0.0);
  std::vector<char> empty_prune(depth + 1, 1);
  for (std::size_t d = depth; d-- > 0;) {
    const double split = wt.log_1m_beta() + static_cast<double>(m) * empty[d + 1];
    empty_prune[d] = wt.log_beta() >= split;
    empty[d] = std::max(wt.log_beta(), split);
  }

  std::vector<double> best(counts.num_nodes(), 0.0);
  std::vector<char> prune(counts.num_nodes(), 1);
  for (std::size_t k = counts.num_nodes(); k > 0; --k) {
    const auto n = static_cast<NodeId>(k - 1);
    const std::size_t d = counts.node_depth(n);
    if (d == depth) {
      best[n] = wt.log_pe(n);
      continue;
    }
    double split = wt.log_1m_beta();
    for (std::size_t c = 0; c < m; ++c) {
      const NodeId ch = counts.child(n, static_cast<Symbol>(c));
      split += ch == kNoNode ? empty[d + 1] : best[ch];
    }
    const double stop = wt.log_beta() + wt.log_pe(n);
    prune[n] = stop >= split;
    best[n] = std::max(stop, split);
  }

  std::vector<Context> leaves;
  // Depth-first expansion; `node` is kNoNode below the data support.
  auto expand = [&](auto&& self, NodeId node, Context& path) -> void {
    const std::size_t d = path.size();
    const bool stop = d == depth || (node == kNoNode ? empty_prune[d] : prune[node]);
    if (stop) {
      leaves.push_back(path);
      return;
    }
    for (std::size_t c = 0; c < m; ++c) {
      path.push_back(static_cast<Symbol>(c));
      self(self, node == kNoNode ? kNoNode : counts.child(node, static_cast<Symbol>(c)), path);
      path.pop_back();
    }
  };
  Context path;
  expand(expand, 0, path);
  ContextTree tree(wt.alphabet(), std::move(leaves));
  const double lp = log_posterior(tree, wt);
  return {std::move(tree), lp};
}

}  // namespace bct

#endif  // BCT_CTW_HPP
