#ifndef BCT_CORE_TYPES_HPP
#define BCT_CORE_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bct/error.hpp"

namespace bct {

using Symbol = std::uint32_t;

// A context s, most recent symbol first. The empty context is the root.
using Context = std::vector<Symbol>;

// Finite alphabet {0, ..., m-1}.
class Alphabet {
 public:
  explicit Alphabet(std::size_t m) : m_(m) {
    if (m < 2) throw DomainError("alphabet size must be at least 2, got " + std::to_string(m));
  }

  std::size_t size() const noexcept { return m_; }
  bool contains(Symbol s) const noexcept { return s < m_; }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::size_t m_;
};

// Default prior hyperparameter 1 - 2^{-m+1}.
inline double default_beta(const Alphabet& a) {
  return 1.0 - std::ldexp(1.0, -static_cast<int>(a.size()) + 1);
}

inline void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0, 1)");
}

// Renders a context as a string of symbols, most recent first. Alphabets
// larger than 10 separate symbols with '.'; the root renders as "λ".
inline std::string context_to_string(std::span<const Symbol> s, const Alphabet& a) {
  if (s.empty()) return "λ";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (a.size() > 10 && i > 0) out += '.';
    out += std::to_string(s[i]);
  }
  return out;
}

inline Context context_from_string(const std::string& text, const Alphabet& a) {
  Context s;
  if (text.empty() || text == "λ") return s;
  auto push = [&](unsigned long v) {
    if (v >= a.size()) throw DataError("symbol " + std::to_string(v) + " out of range in context '" + text + "'");
    s.push_back(static_cast<Symbol>(v));
  };
  if (a.size() > 10) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto dot = text.find('.', pos);
      if (dot == std::string::npos) dot = text.size();
      push(std::stoul(text.substr(pos, dot - pos)));
      pos = dot + 1;
    }
  } else {
    for (char c : text) {
      if (c < '0' || c > '9') throw DataError("bad context '" + text + "'");
      push(static_cast<unsigned long>(c - '0'));
    }
  }
  return s;
}

// Observations x_1..x_n plus the initial context x_{-D+1}..x_0, both stored
// in chronological order.
class TimeSeries {
 public:
  TimeSeries(Alphabet alphabet, std::vector<Symbol> initial_context, std::vector<Symbol> body)
      : alphabet_(alphabet), initial_(std::move(initial_context)), body_(std::move(body)) {
    auto check = [&](const std::vector<Symbol>& v) {
      for (std::size_t i = 0; i < v.size(); ++i)
        if (!alphabet_.contains(v[i]))
          throw DataError("symbol " + std::to_string(v[i]) + " at index " + std::to_string(i) +
                          " is outside the alphabet of size " + std::to_string(alphabet_.size()));
    };
    check(initial_);
    check(body_);
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::span<const Symbol> initial_context() const noexcept { return initial_; }
  std::span<const Symbol> body() const noexcept { return body_; }
  std::size_t size() const noexcept { return body_.size(); }

  // The symbol at chronological offset t, where t = 0 is x_1 and negative
  // offsets reach into the initial context.
  Symbol at(std::ptrdiff_t t) const {
    if (t >= 0) return body_[static_cast<std::size_t>(t)];
    return initial_[initial_.size() + static_cast<std::size_t>(t)];
  }

  // The `len` symbols preceding body position i (0-based), most recent first.
  Context context_before(std::size_t i, std::size_t len) const {
    if (len > initial_.size() + i) throw DomainError("not enough history for requested context length");
    Context s(len);
    for (std::size_t k = 0; k < len; ++k) s[k] = at(static_cast<std::ptrdiff_t>(i) - 1 - static_cast<std::ptrdiff_t>(k));
    return s;
  }

  // The `len` most recent symbols after the whole series, most recent first.
  Context tail_context(std::size_t len) const { return context_before(body_.size(), len); }

 private:
  Alphabet alphabet_;
  std::vector<Symbol> initial_;
  std::vector<Symbol> body_;
};

// A proper m-ary tree, identified with its set of leaves. Internal nodes are
// kept alongside so posterior products can iterate them directly.
class ContextTree {
 public:
  // The root-only tree {λ}.
  explicit ContextTree(Alphabet alphabet) : ContextTree(alphabet, std::vector<Context>{Context{}}) {}

  // Builds a tree from its leaves, checking properness and prefix-freeness.
  ContextTree(Alphabet alphabet, std::vector<Context> leaves) : alphabet_(alphabet) {
    if (leaves.empty()) throw StructuralError("a context tree needs at least one leaf");
    const std::size_t m = alphabet_.size();
    children_.assign(m, kNone);
    leaf_of_.push_back(kNone);
    std::sort(leaves.begin(), leaves.end());
    if (std::adjacent_find(leaves.begin(), leaves.end()) != leaves.end())
      throw StructuralError("duplicate leaf");
    for (std::size_t li = 0; li < leaves.size(); ++li) {
      const Context& s = leaves[li];
      std::int32_t node = 0;
      for (Symbol c : s) {
        if (!alphabet_.contains(c)) throw StructuralError("leaf symbol outside alphabet");
        if (leaf_of_[node] != kNone)
          throw StructuralError("leaf " + context_to_string(leaves[leaf_of_[node]], alphabet_) +
                                " is a suffix of leaf " + context_to_string(s, alphabet_));
        std::int32_t& child = children_[node * m + c];
        if (child == kNone) {
          child = static_cast<std::int32_t>(leaf_of_.size());
          leaf_of_.push_back(kNone);
          children_.resize(children_.size() + m, kNone);
        }
        node = children_[node * m + c];
      }
      if (has_children(node))
        throw StructuralError("leaf " + context_to_string(s, alphabet_) + " has descendants in the tree");
      leaf_of_[node] = static_cast<std::int32_t>(li);
      depth_ = std::max(depth_, s.size());
    }
    // Every non-leaf node must have all m children.
    for (std::size_t node = 0; node < leaf_of_.size(); ++node) {
      if (leaf_of_[node] != kNone) continue;
      for (std::size_t c = 0; c < m; ++c)
        if (children_[node * m + c] == kNone)
          throw StructuralError("tree is not proper: an internal node is missing child " + std::to_string(c));
    }
    leaves_ = std::move(leaves);
    collect_internal(0, Context{});
    std::sort(internal_.begin(), internal_.end());
  }

  static ContextTree full(Alphabet alphabet, std::size_t depth) {
    std::vector<Context> leaves{Context{}};
    for (std::size_t d = 0; d < depth; ++d) {
      std::vector<Context> next;
      next.reserve(leaves.size() * alphabet.size());
      for (const auto& s : leaves)
        for (Symbol c = 0; c < alphabet.size(); ++c) {
          next.push_back(s);
          next.back().push_back(c);
        }
      leaves = std::move(next);
    }
    return ContextTree(alphabet, std::move(leaves));
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t depth() const noexcept { return depth_; }
  std::span<const Context> leaves() const noexcept { return leaves_; }
  std::span<const Context> internal_nodes() const noexcept { return internal_; }
  std::size_t num_leaves() const noexcept { return leaves_.size(); }

  std::size_t leaves_at_depth(std::size_t d) const {
    return static_cast<std::size_t>(
        std::count_if(leaves_.begin(), leaves_.end(), [d](const Context& s) { return s.size() == d; }));
  }

  // Index into leaves() of the unique leaf that is a suffix of the given
  // past (most recent first). The past must supply at least depth() symbols
  // along the matched path.
  std::size_t leaf_index(std::span<const Symbol> past) const {
    const std::size_t m = alphabet_.size();
    std::int32_t node = 0;
    std::size_t d = 0;
    while (leaf_of_[node] == kNone) {
      if (d >= past.size()) throw DomainError("past is shorter than the matched context");
      if (!alphabet_.contains(past[d])) throw DataError("symbol outside alphabet in past");
      node = children_[node * m + past[d]];
      ++d;
    }
    return static_cast<std::size_t>(leaf_of_[node]);
  }

  const Context& matching_leaf(std::span<const Symbol> past) const { return leaves_[leaf_index(past)]; }

  std::optional<std::size_t> find_leaf(std::span<const Symbol> s) const {
    const std::size_t m = alphabet_.size();
    std::int32_t node = 0;
    for (Symbol c : s) {
      if (c >= m || leaf_of_[node] != kNone) return std::nullopt;
      node = children_[node * m + c];
    }
    if (leaf_of_[node] == kNone) return std::nullopt;
    return static_cast<std::size_t>(leaf_of_[node]);
  }

  bool is_leaf(std::span<const Symbol> s) const { return find_leaf(s).has_value(); }

  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
      if (i) out += ',';
      out += context_to_string(leaves_[i], alphabet_);
    }
    return out + "}";
  }

  friend bool operator==(const ContextTree& a, const ContextTree& b) {
    return a.alphabet_ == b.alphabet_ && a.leaves_ == b.leaves_;
  }
  friend bool operator<(const ContextTree& a, const ContextTree& b) { return a.leaves_ < b.leaves_; }

 private:
  static constexpr std::int32_t kNone = -1;

  bool has_children(std::int32_t node) const {
    const std::size_t m = alphabet_.size();
    for (std::size_t c = 0; c < m; ++c)
      if (children_[node * m + c] != kNone) return true;
    return false;
  }

  void collect_internal(std::int32_t node, Context path) {
    if (leaf_of_[node] != kNone) return;
    internal_.push_back(path);
    for (Symbol c = 0; c < alphabet_.size(); ++c) {
      Context child = path;
      child.push_back(c);
      collect_internal(children_[node * alphabet_.size() + c], std::move(child));
    }
  }

  Alphabet alphabet_;
  std::size_t depth_ = 0;
  std::vector<Context> leaves_;
  std::vector<Context> internal_;
  std::vector<std::int32_t> children_;  // m slots per node
  std::vector<std::int32_t> leaf_of_;   // leaf index, or kNone for internal nodes
};

// Per-leaf next-symbol distributions, stored in the leaf order of the
// associated tree.
class ParamSet {
 public:
  ParamSet() = default;

  ParamSet(const Alphabet& alphabet, std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      if (r.size() != alphabet.size()) throw DomainError("parameter vector has wrong length");
      double sum = 0.0;
      for (double p : r) {
        if (!(p >= 0.0)) throw DomainError("negative or NaN probability in parameter vector " + std::to_string(i));
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw DomainError("parameter vector " + std::to_string(i) + " does not sum to 1");
    }
  }

  std::size_t size() const noexcept { return rows_.size(); }
  std::span<const double> operator[](std::size_t leaf) const { return rows_[leaf]; }
  const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<std::vector<double>> rows_;
};

// A variable-memory Markov chain (T, θ).
class VariableMemoryChain {
 public:
  VariableMemoryChain(ContextTree tree, ParamSet params) : tree_(std::move(tree)), params_(std::move(params)) {
    if (params_.size() != tree_.num_leaves()) throw DomainError("parameter set does not match the tree's leaves");
    for (const auto& r : params_.rows())
      if (r.size() != tree_.alphabet().size()) throw DomainError("parameter vector has wrong length");
  }

  // Convenience constructor from (leaf, probability vector) pairs.
  VariableMemoryChain(Alphabet alphabet, const std::map<Context, std::vector<double>>& table)
      : VariableMemoryChain(build(alphabet, table)) {}

  const ContextTree& tree() const noexcept { return tree_; }
  const ParamSet& params() const noexcept { return params_; }
  const Alphabet& alphabet() const noexcept { return tree_.alphabet(); }
  std::size_t depth() const noexcept { return tree_.depth(); }

  std::span<const double> next_distribution(std::span<const Symbol> past) const {
    return params_[tree_.leaf_index(past)];
  }

 private:
  static VariableMemoryChain build(Alphabet alphabet, const std::map<Context, std::vector<double>>& table) {
    std::vector<Context> leaves;
    for (const auto& [s, row] : table) leaves.push_back(s);
    ContextTree tree(alphabet, leaves);
    std::vector<std::vector<double>> rows;
    for (const auto& s : tree.leaves()) rows.push_back(table.at(s));
    return VariableMemoryChain(std::move(tree), ParamSet(alphabet, std::move(rows)));
  }

  ContextTree tree_;
  ParamSet params_;
};

// Number of proper m-ary trees of depth <= D, saturating at `cap + 1`.
inline std::size_t count_trees(std::size_t m, std::size_t depth, std::size_t cap) {
  std::size_t n = 1;
  for (std::size_t d = 0; d < depth; ++d) {
    std::size_t p = 1;
    for (std::size_t k = 0; k < m; ++k) {
      if (p > (cap + 1) / n) {
        p = cap + 1;
        break;
      }
      p *= n;
    }
    n = std::min(cap + 1, p + 1);
  }
  return n;
}

// Every proper m-ary tree of depth <= D, each exactly once. Brute-force
// oracle for small (m, D).
inline std::vector<ContextTree> enumerate_trees(std::size_t m, std::size_t depth) {
  constexpr std::size_t kCap = 1'000'000;
  Alphabet alphabet(m);
  if (count_trees(m, depth, kCap) > kCap)
    throw CapacityError("tree enumeration for m=" + std::to_string(m) + ", D=" + std::to_string(depth) +
                        " exceeds 10^6 trees");
  // Leaf sets of subtrees with at most `remaining` further levels.
  std::vector<std::vector<std::vector<Context>>> by_height(depth + 1);
  by_height[0] = {{Context{}}};
  for (std::size_t h = 1; h <= depth; ++h) {
    auto& out = by_height[h];
    out.push_back({Context{}});
    const auto& sub = by_height[h - 1];
    std::vector<std::size_t> pick(m, 0);
    while (true) {
      std::vector<Context> leaves;
      for (std::size_t c = 0; c < m; ++c)
        for (const auto& s : sub[pick[c]]) {
          Context t{static_cast<Symbol>(c)};
          t.insert(t.end(), s.begin(), s.end());
          leaves.push_back(std::move(t));
        }
      out.push_back(std::move(leaves));
      std::size_t c = 0;
      while (c < m && ++pick[c] == sub.size()) pick[c++] = 0;
      if (c == m) break;
    }
  }
  std::vector<ContextTree> trees;
  trees.reserve(by_height[depth].size());
  for (auto& leaves : by_height[depth]) trees.emplace_back(alphabet, std::move(leaves));
  return trees;
}

}  // namespace bct

#endif  // BCT_CORE_TYPES_HPP
