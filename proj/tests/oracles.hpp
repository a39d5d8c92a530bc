// Brute-force reference implementations. They share no code paths with the
// library beyond plain data types, so agreement is meaningful.
#ifndef BCT_TESTS_ORACLES_HPP
#define BCT_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bct/bct.hpp"

namespace oracle {

using bct::Context;
using bct::ContextTree;
using bct::Symbol;

// Chronological concatenation of context and body.
inline std::vector<Symbol> flatten(const bct::TimeSeries& x) {
  std::vector<Symbol> all(x.initial_context().begin(), x.initial_context().end());
  all.insert(all.end(), x.body().begin(), x.body().end());
  return all;
}

// a_s by scanning every position of the body.
inline std::vector<double> counts(const bct::TimeSeries& x, const Context& s) {
  const auto all = flatten(x);
  const std::size_t off = x.initial_context().size();
  std::vector<double> a(x.alphabet().size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < s.size() && match; ++k) match = all[off + i - 1 - k] == s[k];
    if (match) a[all[off + i]] += 1.0;
  }
  return a;
}

// KT probability by sequential updating: the product of (a_j + 1/2)/(M + m/2)
// as symbols are revealed one at a time (order does not matter).
inline double kt(const std::vector<double>& a) {
  const double half_m = 0.5 * static_cast<double>(a.size());
  double p = 1.0, seen = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    for (double c = 0; c < a[j]; c += 1.0) {
      p *= (c + 0.5) / (seen + half_m);
      seen += 1.0;
    }
  return p;
}

// Prior as a product over nodes of the branching process: (1-β) at each
// internal node and β at each leaf shallower than D.
inline double prior(const ContextTree& t, std::size_t depth, double beta) {
  double p = std::pow(1.0 - beta, static_cast<double>(t.internal_nodes().size()));
  for (const auto& s : t.leaves())
    if (s.size() < depth) p *= beta;
  return p;
}

inline double likelihood(const ContextTree& t, const bct::TimeSeries& x) {
  double p = 1.0;
  for (const auto& s : t.leaves()) p *= kt(counts(x, s));
  return p;
}

struct Posterior {
  std::vector<ContextTree> trees;
  std::vector<double> prob;
  double evidence = 0.0;
};

// π(T|x) over every tree of depth ≤ D by Bayes' rule.
inline Posterior posterior(const bct::TimeSeries& x, std::size_t depth, double beta) {
  Posterior out;
  out.trees = bct::enumerate_trees(x.alphabet().size(), depth);
  for (const auto& t : out.trees) {
    out.prob.push_back(prior(t, depth, beta) * likelihood(t, x));
    out.evidence += out.prob.back();
  }
  for (double& p : out.prob) p /= out.evidence;
  return out;
}

// Next-symbol predictive as a tree mixture weighted by π(T|x).
inline std::vector<double> predictive(const bct::TimeSeries& x, std::size_t depth, double beta) {
  const auto post = posterior(x, depth, beta);
  const auto past = x.tail_context(depth);
  const double m = static_cast<double>(x.alphabet().size());
  std::vector<double> p(x.alphabet().size(), 0.0);
  for (std::size_t i = 0; i < post.trees.size(); ++i) {
    const auto a = counts(x, post.trees[i].matching_leaf(past));
    double total = 0.0;
    for (double v : a) total += v;
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += post.prob[i] * (a[j] + 0.5) / (total + 0.5 * m);
  }
  return p;
}

// Entropy rate through the chain on blocks of k = depth(T) symbols, with
// block state z holding the most recent symbol in its lowest digit.
inline double block_entropy_rate(const bct::VariableMemoryChain& chain) {
  const std::size_t m = chain.alphabet().size();
  const std::size_t k = chain.depth();
  std::size_t n = 1;
  for (std::size_t i = 0; i < k; ++i) n *= m;
  auto past_of = [&](std::size_t z) {
    Context s(k);
    for (std::size_t i = 0; i < k; ++i) {
      s[i] = static_cast<Symbol>(z % m);
      z /= m;
    }
    return s;
  };
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> h(n);
  for (std::size_t z = 0; z < n; ++z) {
    const auto p = chain.next_distribution(past_of(z));
    h[z] = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (p[j] > 0) h[z] -= p[j] * std::log(p[j]);
      const std::size_t to = (z * m + j) % n;
      a(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(z)) += p[j];
    }
  }
  a -= Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.row(static_cast<Eigen::Index>(n) - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  b(static_cast<Eigen::Index>(n) - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(b);
  double rate = 0.0;
  for (std::size_t z = 0; z < n; ++z) rate += pi(static_cast<Eigen::Index>(z)) * h[z];
  return rate;
}

// ℓ_i by direct search over every earlier start; matches may overlap i.
inline std::vector<std::size_t> lz_match_lengths(const std::vector<Symbol>& x) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < x.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t start = 0; start < i; ++start) {
      std::size_t l = 0;
      while (i + l < x.size() && x[start + l] == x[i + l]) ++l;
      best = std::max(best, l);
    }
    out.push_back(best);
  }
  return out;
}

inline bct::TimeSeries random_series(std::size_t m, std::size_t n, std::size_t context, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Symbol> u(0, static_cast<Symbol>(m - 1));
  std::vector<Symbol> ctx(context), body(n);
  for (auto& s : ctx) s = u(rng);
  for (auto& s : body) s = u(rng);
  return bct::TimeSeries(bct::Alphabet(m), std::move(ctx), std::move(body));
}

// Random series from a random sparse-ish chain, so that data favour
// non-trivial trees sometimes.
inline bct::TimeSeries random_markov_series(std::size_t m, std::size_t n, std::size_t context, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> rows(m, std::vector<double>(m));
  for (auto& r : rows) {
    double s = 0.0;
    for (auto& v : r) s += (v = std::pow(u(rng), 3.0));
    for (auto& v : r) v /= s;
  }
  std::vector<Symbol> all(context + n);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& r = rows[i == 0 ? 0 : all[i - 1]];
    double c = 0.0, v = u(rng);
    Symbol j = 0;
    for (; j + 1 < m; ++j) {
      c += r[j];
      if (v < c) break;
    }
    all[i] = j;
  }
  return bct::TimeSeries(bct::Alphabet(m), std::vector<Symbol>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(context)),
                         std::vector<Symbol>(all.begin() + static_cast<std::ptrdiff_t>(context), all.end()));
}

// Total-variation distance between a probability vector and sample counts.
inline double total_variation(const std::vector<double>& p, const std::vector<double>& counts) {
  double n = 0.0;
  for (double c : counts) n += c;
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - counts[i] / n);
  return 0.5 * tv;
}

// Upper-tail probability of χ² with k degrees of freedom (Wilson-Hilferty).
inline double chi2_pvalue(double stat, double k) {
  const double z = (std::cbrt(stat / k) - (1.0 - 2.0 / (9.0 * k))) / std::sqrt(2.0 / (9.0 * k));
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace oracle

#endif  // BCT_TESTS_ORACLES_HPP
