#ifndef BCT_BASELINES_HPP
#define BCT_BASELINES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bct/core_types.hpp"
#include "bct/ctw.hpp"

namespace bct {

struct BaselineReport {
  std::string name;        // "plugin", "lz", "ctw" or "ppm"
  std::string parameters;  // e.g. "k=5" or "D=10,beta=0.75"
  double estimate = 0.0;   // nats per symbol
};

// Plug-in estimator (1/k) H(p̂_k) over the n-k+1 overlapping k-blocks.
inline double plugin_entropy(std::span<const Symbol> x, std::size_t alphabet_size, std::size_t k) {
  const std::size_t n = x.size();
  if (k < 1 || k > n) throw DomainError("block length k must satisfy 1 <= k <= n");
  const std::size_t blocks = n - k + 1;
  std::vector<std::size_t> freq;

  // Base-m codes when m^k fits comfortably in 64 bits.
  const double bits = static_cast<double>(k) * std::log2(static_cast<double>(alphabet_size));
  if (bits < 62.0) {
    std::uint64_t modulus = 1;
    for (std::size_t i = 0; i < k; ++i) modulus *= alphabet_size;
    std::vector<std::uint64_t> codes;
    codes.reserve(blocks);
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < n; ++i) {
      code = (code * alphabet_size + x[i]) % modulus;
      if (i + 1 >= k) codes.push_back(code);
    }
    std::sort(codes.begin(), codes.end());
    for (std::size_t i = 0; i < codes.size();) {
      std::size_t j = i;
      while (j < codes.size() && codes[j] == codes[i]) ++j;
      freq.push_back(j - i);
      i = j;
    }
  } else {
    std::map<std::vector<Symbol>, std::size_t> table;
    for (std::size_t i = 0; i < blocks; ++i) ++table[std::vector<Symbol>(x.begin() + i, x.begin() + i + k)];
    for (const auto& [block, c] : table) freq.push_back(c);
  }
  double h = 0.0;
  const double total = static_cast<double>(blocks);
  for (std::size_t c : freq) {
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h / static_cast<double>(k);
}

// Suffix array of x by prefix doubling over cyclic shifts of x + sentinel,
// with counting sorts. The sentinel's own entry is dropped.
inline std::vector<std::int32_t> suffix_array(std::span<const Symbol> x, std::size_t alphabet_size) {
  const std::size_t n = x.size() + 1;
  std::vector<std::int32_t> p(n), c(n), pn(n), cn(n);
  std::vector<std::int32_t> cnt(std::max(alphabet_size + 1, n), 0);
  auto sym = [&](std::size_t i) { return i < x.size() ? static_cast<std::int32_t>(x[i]) + 1 : 0; };
  for (std::size_t i = 0; i < n; ++i) ++cnt[sym(i)];
  for (std::size_t k = 1; k <= alphabet_size; ++k) cnt[k] += cnt[k - 1];
  for (std::size_t i = n; i-- > 0;) p[--cnt[sym(i)]] = static_cast<std::int32_t>(i);
  c[p[0]] = 0;
  std::int32_t classes = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (sym(p[i]) != sym(p[i - 1])) ++classes;
    c[p[i]] = classes - 1;
  }
  for (std::size_t h = 1; h < n && classes < static_cast<std::int32_t>(n); h <<= 1) {
    for (std::size_t i = 0; i < n; ++i)
      pn[i] = static_cast<std::int32_t>((p[i] + n - h) % n);
    std::fill(cnt.begin(), cnt.begin() + classes, 0);
    for (std::size_t i = 0; i < n; ++i) ++cnt[c[pn[i]]];
    for (std::int32_t k = 1; k < classes; ++k) cnt[k] += cnt[k - 1];
    for (std::size_t i = n; i-- > 0;) p[--cnt[c[pn[i]]]] = pn[i];
    cn[p[0]] = 0;
    classes = 1;
    for (std::size_t i = 1; i < n; ++i) {
      const auto a = std::pair{c[p[i]], c[(p[i] + h) % n]};
      const auto b = std::pair{c[p[i - 1]], c[(p[i - 1] + h) % n]};
      if (a != b) ++classes;
      cn[p[i]] = classes - 1;
    }
    c.swap(cn);
  }
  p.erase(p.begin());  // sentinel sorts first
  return p;
}

// Match lengths ℓ_i for i = 2..n (returned at index i-2): the longest prefix
// of x_i^n that also starts somewhere in x_1^{i-1}. Matches may run past i,
// as in LZ77, so a constant run gets ℓ_i = n-i+1.
//
// The best earlier start is the nearest suffix on either side in sorted order
// with a smaller position; LCPs come along on a monotone stack (Kasai LCP).
inline std::vector<std::size_t> lz_match_lengths(std::span<const Symbol> x, std::size_t alphabet_size) {
  std::vector<std::size_t> out;
  const std::size_t n = x.size();
  if (n < 2) return out;
  for (Symbol s : x)
    if (s >= alphabet_size) throw DataError("symbol outside alphabet");
  const auto sa = suffix_array(x, alphabet_size);
  std::vector<std::int32_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[sa[r]] = static_cast<std::int32_t>(r);
  // lcp[r] = LCP(sa[r-1], sa[r])
  std::vector<std::int32_t> lcp(n, 0);
  for (std::size_t i = 0, h = 0; i < n; ++i) {
    if (rank[i] == 0) {
      h = 0;
      continue;
    }
    const std::size_t j = sa[rank[i] - 1];
    while (i + h < n && j + h < n && x[i + h] == x[j + h]) ++h;
    lcp[rank[i]] = static_cast<std::int32_t>(h);
    if (h > 0) --h;
  }
  std::vector<std::size_t> best(n, 0);
  struct Entry {
    std::int32_t pos;
    std::int32_t down;  // LCP with the entry beneath
  };
  std::vector<Entry> stack;
  auto sweep = [&](auto ranks, auto link) {
    stack.clear();
    for (std::size_t r : ranks) {
      std::int32_t h = stack.empty() ? 0 : link(r);
      while (!stack.empty() && stack.back().pos > sa[r]) {
        h = std::min(h, stack.back().down);
        stack.pop_back();
      }
      if (!stack.empty()) best[sa[r]] = std::max(best[sa[r]], static_cast<std::size_t>(h));
      stack.push_back({sa[r], h});
    }
  };
  std::vector<std::size_t> order(n);
  for (std::size_t r = 0; r < n; ++r) order[r] = r;
  sweep(order, [&](std::size_t r) { return lcp[r]; });
  std::reverse(order.begin(), order.end());
  sweep(order, [&](std::size_t r) { return lcp[r + 1]; });
  out.assign(best.begin() + 1, best.end());
  return out;
}

// Increasing-window Lempel-Ziv estimator (1/n) Σ_{i=2}^n log(i) / (1 + ℓ_i).
inline double lz_entropy(std::span<const Symbol> x, std::size_t alphabet_size) {
  if (x.size() < 2) throw DomainError("LZ estimator needs at least 2 symbols");
  const auto ell = lz_match_lengths(x, alphabet_size);
  double sum = 0.0;
  for (std::size_t k = 0; k < ell.size(); ++k) {
    const double i = static_cast<double>(k + 2);
    sum += std::log(i) / (1.0 + static_cast<double>(ell[k]));
  }
  return sum / static_cast<double>(x.size());
}

// CTW estimator −(1/n) log P(x_1^n).
inline double ctw_entropy(const TimeSeries& x, std::size_t depth, double beta) {
  if (x.size() == 0) throw DomainError("CTW estimator needs at least one observation");
  const CountTable counts = build_counts(x, depth);
  const WeightedTree wt(counts, beta);
  return -wt.log_evidence() / static_cast<double>(x.size());
}

}  // namespace bct

#endif  // BCT_BASELINES_HPP
