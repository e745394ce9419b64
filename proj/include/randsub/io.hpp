#pragma once

// Text formats (JSON documents) for graphs, models, tuple tables, point sets,
// indicator rows and weight vectors, plus report rendering.
//
// Malformed input raises ParseError carrying the 1-based line of the
// offending value, so every message points into the file the user wrote.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "randsub/capacity.hpp"
#include "randsub/errors.hpp"
#include "randsub/graph.hpp"
#include "randsub/measures.hpp"
#include "randsub/ramsey.hpp"

namespace randsub::io {

using Json = nlohmann::json;
using Pointer = nlohmann::json::json_pointer;

namespace detail {

// Maps JSON pointers of a syntactically valid document to the line on which
// each value starts.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) : text_(text) {
    skip_ws();
    if (pos_ < text_.size()) value("");
  }

  std::size_t line_of(std::string pointer) const {
    // Fall back to the closest enclosing value.
    while (true) {
      const auto it = lines_.find(pointer);
      if (it != lines_.end()) return it->second;
      if (pointer.empty()) return 1;
      pointer.erase(pointer.rfind('/'));
    }
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r')) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string string_token() {
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') pos_ += text_[pos_] == '\\' ? 2 : 1;
    ++pos_;
    return Json::parse(text_.substr(start, pos_ - start)).get<std::string>();
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  void value(const std::string& pointer) {
    lines_[pointer] = line_;
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] != '}') {
        const std::string key = string_token();
        skip_ws();
        ++pos_;  // ':'
        skip_ws();
        value(pointer + "/" + escape(key));
        skip_ws();
        if (text_[pos_] == ',') {
          ++pos_;
          skip_ws();
        }
      }
      ++pos_;
    } else if (c == '[') {
      ++pos_;
      skip_ws();
      std::size_t index = 0;
      while (pos_ < text_.size() && text_[pos_] != ']') {
        value(pointer + "/" + std::to_string(index++));
        skip_ws();
        if (text_[pos_] == ',') {
          ++pos_;
          skip_ws();
        }
      }
      ++pos_;
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(text_[pos_]) == std::string_view::npos) ++pos_;
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::map<std::string, std::size_t> lines_;
};

}  // namespace detail

// A parsed document that can report errors at the line of any value.
class Document {
 public:
  Document(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {
    try {
      root_ = Json::parse(text_);
    } catch (const nlohmann::json::parse_error& e) {
      std::size_t line = 1;
      const std::size_t end = std::min<std::size_t>(e.byte, text_.size());
      for (std::size_t i = 0; i + 1 < end; ++i)
        if (text_[i] == '\n') ++line;
      std::string msg = e.what();
      const auto cut = msg.find("syntax error");
      throw ParseError(source_ + ": " + (cut == std::string::npos ? msg : msg.substr(cut)), line);
    }
  }

  static Document from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return Document(ss.str(), path);
  }

  const Json& root() const noexcept { return root_; }
  const std::string& source() const noexcept { return source_; }

  [[noreturn]] void fail(const Pointer& where, const std::string& what) const {
    if (!index_) index_.emplace(text_);
    throw ParseError(source_ + ": " + (where.empty() ? std::string("document") : where.to_string()) + ": " + what,
                     index_->line_of(where.to_string()));
  }

  const Json& at(const Pointer& where) const {
    if (!root_.contains(where)) {
      fail(where.parent_pointer(), "missing field '" + where.back() + "'");
    }
    return root_.at(where);
  }

  bool has(const Pointer& where) const { return root_.contains(where); }

  std::size_t size_value(const Pointer& where) const {
    const Json& v = at(where);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(where, "expected a nonnegative integer");
    }
    return v.get<std::size_t>();
  }

  double real_value(const Pointer& where) const {
    const Json& v = at(where);
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
  }

  std::string string_value(const Pointer& where) const {
    const Json& v = at(where);
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
  }

  std::size_t array_size(const Pointer& where) const {
    const Json& v = at(where);
    if (!v.is_array()) fail(where, "expected a list");
    return v.size();
  }

  std::vector<double> real_list(const Pointer& where) const {
    std::vector<double> out(array_size(where));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = real_value(where / i);
    return out;
  }

  std::vector<std::size_t> size_list(const Pointer& where) const {
    std::vector<std::size_t> out(array_size(where));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = size_value(where / i);
    return out;
  }

  // Runs `build`, re-raising library validation errors at `where`.
  template <class Fn>
  auto guarded(const Pointer& where, Fn&& build) const {
    try {
      return build();
    } catch (const DomainError& e) {
      fail(where, e.what());
    }
  }

 private:
  std::string text_;
  std::string source_;
  Json root_;
  mutable std::optional<detail::LineIndex> index_;
};

// ---------------------------------------------------------------------------
// Graphs: {"vertex_count": n, "edges": [[a, b], ...]}

inline DirectedGraph read_graph(const Document& doc) {
  const Pointer root;
  const std::size_t n = doc.size_value(root / "vertex_count");
  const Pointer edges = root / "edges";
  std::vector<Edge> out;
  std::set<Edge> seen;
  for (std::size_t i = 0; i < doc.array_size(edges); ++i) {
    if (doc.array_size(edges / i) != 2) doc.fail(edges / i, "an edge is a pair [a, b]");
    const Edge e{doc.size_value(edges / i / 0), doc.size_value(edges / i / 1)};
    if (e.first >= n || e.second >= n) doc.fail(edges / i, "endpoint outside [0, vertex_count)");
    if (!seen.insert(e).second) doc.fail(edges / i, "duplicate edge");
    out.push_back(e);
  }
  return DirectedGraph(n, std::move(out));
}

inline Json graph_to_json(const DirectedGraph& g) {
  Json edges = Json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
  return {{"vertex_count", g.vertex_count()}, {"edges", edges}};
}

// ---------------------------------------------------------------------------
// Models
//   {"variant": "bernoulli", "window": N, "lambda": [...]}
//   {"variant": "mixture", "window": N, "components": [{"weight": w, "lambda": [...]}, ...]}
//   {"variant": "atoms", "window": N, "alphabet": p, "atoms": [{"probability": q, "word": [...]}, ...]}

inline SimplexDist read_simplex(const Document& doc, const Pointer& where) {
  auto w = doc.real_list(where);
  return doc.guarded(where, [&] { return SimplexDist(std::move(w)); });
}

inline MeasureModel read_model(const Document& doc) {
  const Pointer root;
  const std::string variant = doc.string_value(root / "variant");
  const std::size_t window = doc.size_value(root / "window");
  if (variant == "bernoulli") {
    SimplexDist lambda = read_simplex(doc, root / "lambda");
    return doc.guarded(root, [&] { return MeasureModel::bernoulli(window, std::move(lambda)); });
  }
  if (variant == "mixture") {
    const Pointer comps = root / "components";
    std::vector<MixtureComponent> out;
    for (std::size_t i = 0; i < doc.array_size(comps); ++i)
      out.push_back({doc.real_value(comps / i / "weight"), read_simplex(doc, comps / i / "lambda")});
    return doc.guarded(comps, [&] { return MeasureModel::mixture(window, std::move(out)); });
  }
  if (variant == "atoms") {
    const std::size_t alphabet = doc.size_value(root / "alphabet");
    const Pointer atoms = root / "atoms";
    std::vector<Atom> out;
    for (std::size_t i = 0; i < doc.array_size(atoms); ++i) {
      Atom a{doc.real_value(atoms / i / "probability"), doc.size_list(atoms / i / "word")};
      if (a.word.size() != window) doc.fail(atoms / i / "word", "word length differs from window");
      for (std::size_t t = 0; t < a.word.size(); ++t)
        if (a.word[t] >= alphabet) doc.fail(atoms / i / "word" / t, "symbol outside the alphabet");
      out.push_back(std::move(a));
    }
    return doc.guarded(atoms, [&] { return MeasureModel::atoms(window, alphabet, std::move(out)); });
  }
  doc.fail(root / "variant", "unknown variant '" + variant + "' (bernoulli, mixture, atoms)");
}

inline Json model_to_json(const MeasureModel& m) {
  Json out{{"variant", to_string(m.kind())}, {"window", m.window()}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BernoulliModel>) {
          out["lambda"] = v.lambda.weights();
        } else if constexpr (std::is_same_v<T, MixtureModel>) {
          Json comps = Json::array();
          for (const auto& c : v.components) comps.push_back({{"weight", c.weight}, {"lambda", c.lambda.weights()}});
          out["components"] = comps;
        } else {
          out["alphabet"] = m.alphabet();
          Json atoms = Json::array();
          for (const auto& a : v.atoms) atoms.push_back({{"probability", a.probability}, {"word", a.word}});
          out["atoms"] = atoms;
        }
      },
      m.variant());
  return out;
}

// ---------------------------------------------------------------------------
// Tuple tables: {"arity": k, "domain": n, "table": [[[i1, ..., ik], point], ...]}

inline Tuple read_tuple(const Document& doc, const Pointer& where, std::size_t arity, std::size_t domain) {
  Tuple t = doc.size_list(where);
  if (t.size() != arity) doc.fail(where, "tuple must have " + std::to_string(arity) + " entries");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= domain) doc.fail(where / i, "index outside [0, domain)");
    if (i > 0 && t[i] <= t[i - 1]) doc.fail(where / i, "tuple must be strictly increasing");
  }
  return t;
}

inline TupleFunction read_tuple_function(const Document& doc) {
  const Pointer root;
  const std::size_t k = doc.size_value(root / "arity");
  const std::size_t n = doc.size_value(root / "domain");
  if (k == 0) doc.fail(root / "arity", "arity must be positive");
  const Pointer table = root / "table";
  const std::size_t expected = doc.guarded(root, [&] { return static_cast<std::size_t>(binomial(n, k)); });
  if (expected > 20'000'000) doc.fail(root, "tuple table too large");
  const TupleFunction index(k, n, iota_indices(expected));
  std::vector<std::size_t> values(expected);
  std::vector<bool> filled(expected, false);
  for (std::size_t i = 0; i < doc.array_size(table); ++i) {
    if (doc.array_size(table / i) != 2) doc.fail(table / i, "an entry is [[tuple], point]");
    const Tuple t = read_tuple(doc, table / i / 0, k, n);
    const std::size_t r = index.rank(t);
    if (filled[r]) doc.fail(table / i, "tuple listed twice");
    filled[r] = true;
    values[r] = doc.size_value(table / i / 1);
  }
  for (std::size_t r = 0; r < expected; ++r)
    if (!filled[r]) doc.fail(table, "table is not total: " + std::to_string(expected) + " tuples required");
  return TupleFunction(k, n, std::move(values));
}

inline Json tuple_function_to_json(const TupleFunction& f) {
  Json table = Json::array();
  for_each_increasing_tuple(iota_indices(f.domain()), f.arity(),
                            [&](const Tuple& t) { table.push_back({t, f(t)}); });
  return {{"arity", f.arity()}, {"domain", f.domain()}, {"table", table}};
}

// ---------------------------------------------------------------------------
// Point sets: {"points": [[x, y, ...], ...]} or {"matrix": [[d00, d01, ...], ...]}

inline MetricPoints read_points(const Document& doc) {
  const Pointer root;
  if (doc.has(root / "points")) {
    const Pointer pts = root / "points";
    std::vector<std::vector<double>> coords;
    for (std::size_t i = 0; i < doc.array_size(pts); ++i) coords.push_back(doc.real_list(pts / i));
    return doc.guarded(pts, [&] { return MetricPoints::euclidean(std::move(coords)); });
  }
  if (doc.has(root / "matrix")) {
    const Pointer mat = root / "matrix";
    std::vector<std::vector<double>> d;
    for (std::size_t i = 0; i < doc.array_size(mat); ++i) d.push_back(doc.real_list(mat / i));
    return doc.guarded(mat, [&] { return MetricPoints::from_matrix(std::move(d)); });
  }
  doc.fail(root, "expected a 'points' or 'matrix' field");
}

inline Json points_to_json(const MetricPoints& m) {
  if (m.has_coordinates()) return {{"points", m.coordinates()}};
  std::vector<std::vector<double>> d(m.size(), std::vector<double>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) d[i][j] = m.distance(i, j);
  return {{"matrix", d}};
}

// ---------------------------------------------------------------------------
// Indicator rows: {"arity": k, "domain": n, "rows": [[[i1, ..., ik], [0, 1, ...]], ...]}
// Weight vectors: {"mu": [...]}

inline TupleRows read_rows(const Document& doc) {
  const Pointer root;
  TupleRows out;
  out.arity = doc.size_value(root / "arity");
  out.domain = doc.size_value(root / "domain");
  if (out.arity == 0) doc.fail(root / "arity", "arity must be positive");
  const std::size_t expected =
      doc.guarded(root, [&] { return static_cast<std::size_t>(binomial(out.domain, out.arity)); });
  if (expected > 1'000'000) doc.fail(root, "row table too large");
  const TupleFunction index(out.arity, out.domain, iota_indices(expected));
  out.rows.assign(expected, {});
  std::vector<bool> filled(expected, false);
  const Pointer rows = root / "rows";
  std::optional<std::size_t> width;
  for (std::size_t i = 0; i < doc.array_size(rows); ++i) {
    if (doc.array_size(rows / i) != 2) doc.fail(rows / i, "an entry is [[tuple], [indicators]]");
    const Tuple t = read_tuple(doc, rows / i / 0, out.arity, out.domain);
    const std::size_t r = index.rank(t);
    if (filled[r]) doc.fail(rows / i, "tuple listed twice");
    filled[r] = true;
    const auto bits = doc.size_list(rows / i / 1);
    if (width && bits.size() != *width) doc.fail(rows / i / 1, "rows have different lengths");
    width = bits.size();
    for (std::size_t w = 0; w < bits.size(); ++w) {
      if (bits[w] > 1) doc.fail(rows / i / 1 / w, "indicator must be 0 or 1");
      out.rows[r].push_back(bits[w] == 1);
    }
  }
  for (std::size_t r = 0; r < expected; ++r)
    if (!filled[r]) doc.fail(rows, "rows are not total: " + std::to_string(expected) + " tuples required");
  return out;
}

inline std::vector<double> read_mu(const Document& doc) {
  const Pointer where = Pointer() / "mu";
  auto mu = doc.real_list(where);
  doc.guarded(where, [&] { return SimplexDist(mu); });
  return mu;
}

inline Json rows_to_json(const TupleRows& rows) {
  Json list = Json::array();
  std::size_t r = 0;
  for_each_increasing_tuple(iota_indices(rows.domain), rows.arity, [&](const Tuple& t) {
    std::vector<int> bits;
    for (bool b : rows.rows[r]) bits.push_back(b ? 1 : 0);
    list.push_back({t, bits});
    ++r;
  });
  return {{"arity", rows.arity}, {"domain", rows.domain}, {"rows", list}};
}

// ---------------------------------------------------------------------------
// Reports

// Rounds to 12 significant digits; the JSON writer then prints the shortest
// representation of the rounded value.
inline double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline Json rounded(const Json& v) {
  if (v.is_number_float()) return round12(v.get<double>());
  if (v.is_array() || v.is_object()) {
    Json out = v;
    for (auto it = out.begin(); it != out.end(); ++it) *it = rounded(*it);
    return out;
  }
  return v;
}

inline std::string render_scalar(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
    return buf;
  }
  return v.dump();
}

// Tagged record: one JSON object per line, keys sorted.
inline std::string render_record(const Json& report) { return rounded(report).dump() + "\n"; }

// Human-readable form: "key: value" lines, nested objects indented.
inline void render_text_into(const Json& v, const std::string& indent, std::string& out) {
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (it->is_object()) {
      out += indent + it.key() + ":\n";
      render_text_into(*it, indent + "  ", out);
    } else if (it->is_array()) {
      out += indent + it.key() + ": " + rounded(*it).dump() + "\n";
    } else {
      out += indent + it.key() + ": " + render_scalar(*it) + "\n";
    }
  }
}

inline std::string render_text(const Json& report) {
  std::string out;
  render_text_into(report, "", out);
  return out;
}

}  // namespace randsub::io
