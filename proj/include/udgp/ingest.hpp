#pragma once

// Partial-digest data path: FASTA parsing, restriction-site search, and the
// plain-text distance file format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "udgp/domain.hpp"

namespace udgp {

struct Enzyme {
  std::string name;
  std::string recognition;
  std::size_t cut_offset = 0;

  void validate() const {
    require(!recognition.empty(), "recognition sequence is empty");
    require(cut_offset <= recognition.size(), "cut offset lies outside the recognition sequence");
    for (char c : recognition)
      require(c == 'A' || c == 'C' || c == 'G' || c == 'T', "recognition sequence must use A, C, G, T only");
  }
};

inline const std::vector<Enzyme>& builtin_enzymes() {
  static const std::vector<Enzyme> table = {
      {"SmaI", "CCCGGG", 3},
      {"BamHI", "GGATCC", 1},
  };
  return table;
}

inline Enzyme find_enzyme(const std::string& name) {
  for (const auto& e : builtin_enzymes())
    if (e.name == name) return e;
  throw Error(ErrorCode::InvalidArgument, "unknown enzyme '" + name + "'");
}

struct DigestResult {
  std::vector<std::size_t> sites;  // ascending, first 0, last = sequence length
  DistanceMultiset distances;
  std::size_t points() const { return sites.size(); }
};

inline bool is_iupac_nucleotide(char c) {
  static constexpr std::string_view codes = "ACGTURYSWKMBDHVN";
  return codes.find(c) != std::string_view::npos;
}

/// Sequence of the first record, uppercased. Blank lines and trailing
/// whitespace are ignored; '-' and '*' are rejected along with any other
/// non-IUPAC character.
inline std::string parse_fasta(std::istream& in, const std::string& source = "<stream>") {
  std::string line, seq;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      if (header) break;
      header = true;
      continue;
    }
    if (line[0] == ';') continue;
    require(header, source + ": missing FASTA header line", ErrorCode::Data);
    for (char c : line) {
      const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      require(is_iupac_nucleotide(u),
              source + ":" + std::to_string(lineno) + ": illegal nucleotide character '" + std::string(1, c) + "'",
              ErrorCode::Data);
      seq.push_back(u);
    }
  }
  require(header, source + ": missing FASTA header line", ErrorCode::Data);
  require(!seq.empty(), source + ": empty sequence", ErrorCode::Data);
  return seq;
}

inline std::string parse_fasta(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path, ErrorCode::Data);
  return parse_fasta(in, path);
}

/// Cut sites at every (possibly overlapping) occurrence of the recognition
/// sequence, plus both ends; all pairwise fragment lengths.
inline DigestResult digest(std::string_view sequence, const Enzyme& enzyme) {
  enzyme.validate();
  const std::string_view rec = enzyme.recognition;
  std::vector<std::size_t> sites = {0, sequence.size()};
  for (std::size_t pos = sequence.find(rec); pos != std::string_view::npos; pos = sequence.find(rec, pos + 1))
    sites.push_back(pos + enzyme.cut_offset);
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  require(sites.size() >= 2, "sequence too short to digest", ErrorCode::Data);
  std::vector<double> d;
  d.reserve(sites.size() * (sites.size() - 1) / 2);
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j) d.push_back(static_cast<double>(sites[j] - sites[i]));
  const std::size_t n = sites.size();
  return {std::move(sites), DistanceMultiset(std::move(d), MultisetKind::TurnpikeRaw, n)};
}

inline std::string reverse_complement(std::string_view s) {
  std::string out(s.rbegin(), s.rend());
  for (char& c : out) {
    switch (c) {
      case 'A': c = 'T'; break;
      case 'T': c = 'A'; break;
      case 'C': c = 'G'; break;
      case 'G': c = 'C'; break;
      default: c = 'N'; break;
    }
  }
  return out;
}

// ---- distance files ------------------------------------------------------

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline void write_distances(std::ostream& out, const DistanceMultiset& dm) {
  require(!is_augmented(dm.kind()), "distance files hold raw multisets");
  out << "# kind=" << (is_beltway(dm.kind()) ? "beltway" : "turnpike") << " N=" << dm.points() << "\n";
  for (double v : dm.values()) out << format_double(v) << "\n";
}

inline void write_distances(const std::string& path, const DistanceMultiset& dm) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write " + path, ErrorCode::Data);
  write_distances(out, dm);
}

struct DistanceFileHeader {
  std::optional<MultisetKind> kind;
  std::optional<std::size_t> n;
};

namespace detail {

inline void parse_header(const std::string& line, DistanceFileHeader& h, const std::string& where) {
  std::istringstream ss(line.substr(1));
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "kind") {
      if (val == "turnpike") h.kind = MultisetKind::TurnpikeRaw;
      else if (val == "beltway") h.kind = MultisetKind::BeltwayRaw;
      else throw Error(ErrorCode::Data, where + ": unknown kind '" + val + "'");
    } else if (key == "N") {
      std::size_t n = 0;
      const auto r = std::from_chars(val.data(), val.data() + val.size(), n);
      require(r.ec == std::errc() && r.ptr == val.data() + val.size(), where + ": bad N '" + val + "'", ErrorCode::Data);
      h.n = n;
    }
  }
}

// Smallest N with N(N-1)/2 (or N(N-1)) == count.
inline std::optional<std::size_t> infer_points(std::size_t count, bool beltway) {
  for (std::size_t n = 2; n < 1'000'000; ++n) {
    const std::size_t c = beltway ? n * (n - 1) : n * (n - 1) / 2;
    if (c == count) return n;
    if (c > count) break;
  }
  return std::nullopt;
}

}  // namespace detail

/// Reads one value per line; '#' lines are comments except a header of the
/// form "# kind=<turnpike|beltway> N=<int>". Without a header the caller's
/// defaults apply and N is inferred from the count when not given.
inline DistanceMultiset read_distances(std::istream& in, const std::string& source = "<stream>",
                                       std::optional<MultisetKind> kind_default = std::nullopt,
                                       std::optional<std::size_t> n_default = std::nullopt) {
  DistanceFileHeader h;
  std::vector<double> v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      if (line.find("kind=") != std::string::npos || line.find("N=") != std::string::npos)
        detail::parse_header(line.substr(first), h, where);
      continue;
    }
    const auto last = line.find_last_not_of(" \t\r");
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    double d = 0.0;
    const auto r = std::from_chars(b, e, d);
    require(r.ec == std::errc() && r.ptr == e, where + ": malformed distance '" + std::string(b, e) + "'",
            ErrorCode::Data);
    v.push_back(d);
  }
  const MultisetKind kind = h.kind ? *h.kind : kind_default.value_or(MultisetKind::TurnpikeRaw);
  std::optional<std::size_t> n = h.n ? h.n : n_default;
  if (!n) n = detail::infer_points(v.size(), is_beltway(kind));
  require(n.has_value(), source + ": cannot infer N from " + std::to_string(v.size()) + " distances", ErrorCode::Data);
  if (h.n && n_default) require(*h.n == *n_default, source + ": N in header disagrees with the requested N", ErrorCode::Data);
  return DistanceMultiset(std::move(v), kind, *n);
}

inline DistanceMultiset read_distances(const std::string& path, std::optional<MultisetKind> kind_default = std::nullopt,
                                       std::optional<std::size_t> n_default = std::nullopt) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path, ErrorCode::Data);
  return read_distances(in, path, kind_default, n_default);
}

}  // namespace udgp
