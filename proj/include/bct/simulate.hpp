#ifndef BCT_SIMULATE_HPP
#define BCT_SIMULATE_HPP

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bct/core_types.hpp"
#include "bct/sampler.hpp"

namespace bct {

inline Symbol draw_symbol(std::span<const double> p, Rng& rng) {
  const double u = uniform01(rng);
  double c = 0.0;
  Symbol last = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    c += p[j];
    last = static_cast<Symbol>(j);
    if (u < c) return last;
  }
  return last;
}

// Draws n symbols sequentially from the chain. `initial_context` is
// chronological and must cover the chain's depth; it becomes the series'
// initial context unchanged.
inline TimeSeries generate(const VariableMemoryChain& chain, std::size_t n, std::vector<Symbol> initial_context,
                           std::uint64_t seed) {
  const std::size_t k = chain.depth();
  if (initial_context.size() < k)
    throw DomainError("initial context has " + std::to_string(initial_context.size()) + " symbols, chain depth is " +
                      std::to_string(k));
  Rng rng(mix_seed(seed));
  std::vector<Symbol> history = initial_context;
  history.reserve(history.size() + n);
  Context past(k);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < k; ++i) past[i] = history[history.size() - 1 - i];
    history.push_back(draw_symbol(chain.next_distribution(past), rng));
  }
  std::vector<Symbol> body(history.begin() + static_cast<std::ptrdiff_t>(initial_context.size()), history.end());
  return TimeSeries(chain.alphabet(), std::move(initial_context), std::move(body));
}

struct Fixture {
  std::string name;
  VariableMemoryChain chain;
  double entropy_rate;  // published value, nats
  ContextTree minimal_model;
};

namespace detail {

inline std::map<Context, std::vector<double>> table_from_strings(
    const Alphabet& a, const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  std::map<Context, std::vector<double>> out;
  for (const auto& [s, p] : rows) out.emplace(context_from_string(s, a), p);
  return out;
}

}  // namespace detail

// 5th-order ternary chain; contexts written most recent symbol first.
inline Fixture fixture_ternary5() {
  const Alphabet a(3);
  VariableMemoryChain chain(a, detail::table_from_strings(a, {
                                   {"1", {0.4, 0.4, 0.2}},
                                   {"2", {0.2, 0.4, 0.4}},
                                   {"00", {0.4, 0.2, 0.4}},
                                   {"01", {0.3, 0.6, 0.1}},
                                   {"022", {0.5, 0.3, 0.2}},
                                   {"0212", {0.1, 0.3, 0.6}},
                                   {"0211", {0.05, 0.25, 0.7}},
                                   {"0210", {0.35, 0.55, 0.1}},
                                   {"0202", {0.1, 0.2, 0.7}},
                                   {"0201", {0.8, 0.05, 0.15}},
                                   {"02002", {0.7, 0.2, 0.1}},
                                   {"02001", {0.1, 0.1, 0.8}},
                                   {"02000", {0.3, 0.45, 0.25}},
                               }));
  ContextTree tree = chain.tree();
  return {"ternary5", std::move(chain), 1.02, std::move(tree)};
}

// Third-order binary chain on the complete depth-3 tree pruned at 11.
inline Fixture fixture_binary3() {
  const Alphabet a(2);
  VariableMemoryChain chain(a, detail::table_from_strings(a, {
                                   {"000", {0.9, 0.1}},
                                   {"001", {0.2, 0.8}},
                                   {"010", {0.7, 0.3}},
                                   {"011", {0.1, 0.9}},
                                   {"100", {0.8, 0.2}},
                                   {"101", {0.3, 0.7}},
                                   {"11", {0.2, 0.8}},
                               }));
  ContextTree tree = chain.tree();
  return {"binary3", std::move(chain), 0.4815, std::move(tree)};
}

// Senary chain where X_n depends on the past only through X_{n-3}:
// P(X_n = j | X_{n-1} = a, X_{n-2} = b, X_{n-3} = i) = Q[i][j].
inline Fixture fixture_bimodal6() {
  const Alphabet a(6);
  const std::vector<std::vector<double>> q = {
      {0.5, 0.2, 0.1, 0.0, 0.05, 0.15},  {0.4, 0.0, 0.4, 0.2, 0.0, 0.0},
      {0.3, 0.1, 0.23, 0.12, 0.05, 0.2}, {0.05, 0.1, 0.05, 0.05, 0.03, 0.72},
      {0.0, 0.0, 1.0, 0.0, 0.0, 0.0},    {0.1, 0.2, 0.3, 0.2, 0.05, 0.15},
  };
  std::map<Context, std::vector<double>> table;
  for (Symbol x1 = 0; x1 < 6; ++x1)
    for (Symbol x2 = 0; x2 < 6; ++x2)
      for (Symbol x3 = 0; x3 < 6; ++x3) table.emplace(Context{x1, x2, x3}, q[x3]);
  VariableMemoryChain chain(a, table);
  ContextTree tree = chain.tree();
  return {"bimodal6", std::move(chain), 1.355, std::move(tree)};
}

inline std::vector<std::string> fixture_names() { return {"ternary5", "binary3", "bimodal6"}; }

inline Fixture fixture(const std::string& name) {
  if (name == "ternary5") return fixture_ternary5();
  if (name == "binary3") return fixture_binary3();
  if (name == "bimodal6") return fixture_bimodal6();
  throw DomainError("unknown fixture '" + name + "' (expected ternary5, binary3 or bimodal6)");
}

// A fixture series with a D-symbol initial context obtained by burn-in:
// 10·D steps (at least the chain depth) from the all-zero start are
// simulated and discarded, and the last D of them seed the series.
inline TimeSeries generate_fixture_series(const Fixture& f, std::size_t n, std::size_t context_length,
                                          std::uint64_t seed) {
  const std::size_t k = f.chain.depth();
  const std::size_t burn = std::max<std::size_t>({10 * context_length, k, context_length});
  const TimeSeries warm = generate(f.chain, burn, std::vector<Symbol>(k, 0), mix_seed(seed ^ 0xb0b0ULL));
  std::vector<Symbol> ctx(warm.body().end() - static_cast<std::ptrdiff_t>(std::max(context_length, k)),
                          warm.body().end());
  TimeSeries full = generate(f.chain, n, ctx, seed);
  // Keep exactly `context_length` context symbols.
  std::vector<Symbol> init(full.initial_context().end() - static_cast<std::ptrdiff_t>(context_length),
                           full.initial_context().end());
  return TimeSeries(full.alphabet(), std::move(init), std::vector<Symbol>(full.body().begin(), full.body().end()));
}

}  // namespace bct

#endif  // BCT_SIMULATE_HPP
