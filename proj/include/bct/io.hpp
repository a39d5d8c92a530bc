#ifndef BCT_IO_HPP
#define BCT_IO_HPP

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bct/core_types.hpp"
#include "bct/inference.hpp"

namespace bct {

// Reads whitespace-separated nonnegative integer symbols.
inline std::vector<Symbol> read_symbols(std::istream& in) {
  std::vector<Symbol> out;
  std::string token;
  std::size_t index = 0;
  while (in >> token) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || token.front() == '-' || v > 0xffffffffUL)
      throw DataError("token " + std::to_string(index) + " ('" + token + "') is not a nonnegative integer symbol");
    out.push_back(static_cast<Symbol>(v));
    ++index;
  }
  return out;
}

inline void write_symbols(std::ostream& out, std::span<const Symbol> xs, std::size_t per_line = 40) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << xs[i];
    out << ((i + 1) % per_line == 0 || i + 1 == xs.size() ? '\n' : ' ');
  }
}

// Writes a series in the plain-text data format with its initial context
// first, so that reading it back with the context flag restores it exactly.
inline void write_series(std::ostream& out, const TimeSeries& x) {
  std::vector<Symbol> all(x.initial_context().begin(), x.initial_context().end());
  all.insert(all.end(), x.body().begin(), x.body().end());
  write_symbols(out, all);
}

// Histogram as CSV "bin_left,bin_right,count".
inline void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_left,bin_right,count\n";
  std::ostringstream line;
  line.precision(17);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    line.str("");
    line << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << '\n';
    out << line.str();
  }
}

// One machine-readable record: space-separated key=value pairs.
class Record {
 public:
  explicit Record(std::string kind) { add("record", std::move(kind)); }

  Record& add(const std::string& key, const std::string& value) {
    fields_.emplace_back(key, value);
    return *this;
  }
  Record& add(const std::string& key, double value) {
    std::ostringstream s;
    s.precision(17);
    s << value;
    return add(key, s.str());
  }
  Record& add(const std::string& key, std::size_t value) { return add(key, std::to_string(value)); }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (i) out += ' ';
      out += fields_[i].first + '=' + fields_[i].second;
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

}  // namespace bct

#endif  // BCT_IO_HPP
