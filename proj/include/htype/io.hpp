#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "htype/fields.hpp"
#include "htype/group.hpp"

namespace htype::io {

using json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last) throw InvalidArgument(what + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline json module_to_json(const CliffordModule& m) {
  json j;
  j["k"] = m.k;
  j["n2"] = m.n2;
  json gens = json::array();
  for (const auto& g : m.generators) {
    json row = json::array();
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) {
        const double v = g(r, c);
        if (v == static_cast<double>(static_cast<long long>(v)))
          row.push_back(static_cast<long long>(v));
        else
          row.push_back(v);
      }
    gens.push_back(std::move(row));
  }
  j["generators"] = std::move(gens);
  return j;
}

/// Module JSON plus derived group data (ignored on read).
inline json group_to_json(const CliffordModule& m) {
  json j = module_to_json(m);
  j["derived"] = {{"homogeneous_dimension", m.n2 + 2 * m.k}, {"minimal_dimension", minimal_module_dimension(m.k)}};
  return j;
}

inline CliffordModule module_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("group file: top level must be an object");
  auto get_int = [&](const char* key) {
    if (!j.contains(key)) throw SchemaError(std::string("group file: missing field '") + key + "'");
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw SchemaError(std::string("group file: field '") + key + "' must be an integer");
    return v.get<long long>();
  };
  const long long k = get_int("k");
  const long long n2 = get_int("n2");
  if (k < 1) throw SchemaError("group file: field 'k' must be >= 1");
  if (n2 < 2 || n2 % 2 != 0) throw SchemaError("group file: field 'n2' must be a positive even integer");
  if (!j.contains("generators")) throw SchemaError("group file: missing field 'generators'");
  const json& gens = j.at("generators");
  if (!gens.is_array() || static_cast<long long>(gens.size()) != k)
    throw SchemaError("group file: field 'generators' must be an array of k matrices");
  CliffordModule m;
  m.k = static_cast<int>(k);
  m.n2 = static_cast<int>(n2);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const json& g = gens[i];
    const std::string name = "generators[" + std::to_string(i) + "]";
    if (!g.is_array() || static_cast<long long>(g.size()) != n2 * n2)
      throw SchemaError("group file: field '" + name + "' must hold n2*n2 row-major numbers");
    Matrix mat(n2, n2);
    for (long long e = 0; e < n2 * n2; ++e) {
      if (!g[e].is_number()) throw SchemaError("group file: field '" + name + "' has a non-numeric entry");
      mat(e / n2, e % n2) = g[e].get<double>();
    }
    m.generators.push_back(std::move(mat));
  }
  return m;
}

inline CliffordModule read_module(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("group file: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("group file: invalid JSON (" + std::string(e.what()) + ")");
  }
  return module_from_json(j);
}

/// "x1,...,x2n;t1,...,tk"
inline GroupPoint parse_point(std::string_view s, int n2, int k) {
  const auto parts = split(s, ';');
  if (parts.size() != 2) throw InvalidArgument("point: expected 'x1,...,x2n;t1,...,tk'");
  auto read = [](std::string_view part, int count, const char* what) {
    const auto items = split(part, ',');
    if (static_cast<int>(items.size()) != count)
      throw InvalidArgument(std::string("point: expected ") + std::to_string(count) + " " + what + " coordinates");
    Vector v(count);
    for (int i = 0; i < count; ++i) v(i) = parse_double(trim(items[i]), "point");
    return v;
  };
  GroupPoint p{read(parts[0], n2, "horizontal"), read(parts[1], k, "vertical")};
  if (!p.is_finite()) throw InvalidArgument("point: non-finite coordinate");
  return p;
}

inline std::string format_point(const GroupPoint& p) {
  std::string s;
  for (Eigen::Index i = 0; i < p.x.size(); ++i) s += (i ? "," : "") + format_double(p.x(i));
  s += ";";
  for (Eigen::Index i = 0; i < p.t.size(); ++i) s += (i ? "," : "") + format_double(p.t(i));
  return s;
}

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json matrix_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
  return a;
}

namespace detail {

/// Polynomial in x1..x2n, t1..tk, e.g. "1+0.2*x1-0.1*t1^2*x2".
inline std::vector<fields::Monomial> parse_polynomial(std::string_view s, int n2, int k) {
  std::string compact;
  for (char ch : s)
    if (ch != ' ') compact += ch;
  if (compact.empty()) throw InvalidArgument("poly: empty expression");
  // split into signed terms, keeping exponent signs such as 1e-3 inside numbers
  std::vector<std::string> terms;
  std::string cur;
  for (std::size_t i = 0; i < compact.size(); ++i) {
    const char ch = compact[i];
    const bool exponent_sign = i > 0 && (compact[i - 1] == 'e' || compact[i - 1] == 'E') && i > 1 &&
                               std::isdigit(static_cast<unsigned char>(compact[i - 2]));
    if ((ch == '+' || ch == '-') && !exponent_sign && !cur.empty()) {
      terms.push_back(cur);
      cur.clear();
    }
    cur += ch;
  }
  terms.push_back(cur);
  std::vector<fields::Monomial> out;
  for (std::string_view term : terms) {
    fields::Monomial m{1.0, std::vector<int>(n2 + k, 0)};
    if (term.front() == '+' || term.front() == '-') {
      if (term.front() == '-') m.coeff = -1.0;
      term.remove_prefix(1);
    }
    if (term.empty()) throw InvalidArgument("poly: dangling sign");
    for (std::string_view factor : split(term, '*')) {
      if (factor.empty()) throw InvalidArgument("poly: empty factor");
      if (factor.front() == 'x' || factor.front() == 't') {
        const auto caret = factor.find('^');
        const std::string_view name = factor.substr(1, caret == std::string_view::npos ? factor.npos : caret - 1);
        int power = 1;
        if (caret != std::string_view::npos) {
          const std::string_view ps = factor.substr(caret + 1);
          const auto r = std::from_chars(ps.data(), ps.data() + ps.size(), power);
          if (r.ec != std::errc() || r.ptr != ps.data() + ps.size() || power < 0)
            throw InvalidArgument("poly: bad exponent in '" + std::string(factor) + "'");
        }
        int idx = 0;
        const auto r = std::from_chars(name.data(), name.data() + name.size(), idx);
        const int limit = factor.front() == 'x' ? n2 : k;
        if (r.ec != std::errc() || r.ptr != name.data() + name.size() || idx < 1 || idx > limit)
          throw InvalidArgument("poly: unknown variable '" + std::string(factor) + "'");
        m.powers[(factor.front() == 'x' ? 0 : n2) + idx - 1] += power;
      } else {
        m.coeff *= parse_double(factor, "poly");
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

inline std::map<std::string, double> parse_params(std::string_view s, const std::string& family) {
  std::map<std::string, double> out;
  if (trim(s).empty()) return out;
  for (std::string_view kv : split(s, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument(family + ": expected key=value, got '" + std::string(kv) + "'");
    out[std::string(trim(kv.substr(0, eq)))] = parse_double(trim(kv.substr(eq + 1)), family);
  }
  return out;
}

inline double take(std::map<std::string, double>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  params.erase(it);
  return v;
}

inline void require_consumed(const std::map<std::string, double>& params, const std::string& family) {
  if (!params.empty()) throw InvalidArgument(family + ": unknown parameter '" + params.begin()->first + "'");
}

}  // namespace detail

/// Field families on the command line:
///   constant:value=V
///   gaussian:base=B,amp=A,width=W
///   poly:<polynomial in x1.., t1..>
///   exppoly:<polynomial>            (exp of the polynomial)
///   random:seed=S,amp=A,freq=F
///   gv[:C=c]                        (profile; C defaults to `profile_constant`)
///   product:<spec>|<spec>
inline ScalarField parse_field(std::string_view spec, const HTypeGroup& g,
                               const std::function<double()>& profile_constant = {}) {
  spec = trim(spec);
  const auto colon = spec.find(':');
  const std::string family(spec.substr(0, colon));
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  const int dim = g.dim();
  if (family == "product") {
    const auto bar = rest.find('|');
    if (bar == std::string_view::npos) throw InvalidArgument("product: expected '<spec>|<spec>'");
    return fields::product(parse_field(rest.substr(0, bar), g, profile_constant),
                           parse_field(rest.substr(bar + 1), g, profile_constant));
  }
  if (family == "poly") return fields::polynomial(dim, detail::parse_polynomial(rest, g.n2(), g.k()));
  if (family == "exppoly") return fields::exp_polynomial(dim, detail::parse_polynomial(rest, g.n2(), g.k()));
  auto params = detail::parse_params(rest, family);
  if (family == "constant") {
    const double v = detail::take(params, "value", 1.0);
    detail::require_consumed(params, family);
    return fields::constant(dim, v);
  }
  if (family == "gaussian") {
    const double base = detail::take(params, "base", 1.0);
    const double amp = detail::take(params, "amp", 0.5);
    const double width = detail::take(params, "width", 1.0);
    detail::require_consumed(params, family);
    return fields::gaussian(dim, base, amp, width);
  }
  if (family == "random") {
    const double seed = detail::take(params, "seed", 1.0);
    const double amp = detail::take(params, "amp", 0.2);
    const double freq = detail::take(params, "freq", 0.7);
    detail::require_consumed(params, family);
    if (seed < 0.0) throw InvalidArgument("random: seed must be non-negative");
    return fields::random_positive(dim, static_cast<std::uint64_t>(seed), 3, amp, freq);
  }
  if (family == "gv") {
    double c = 0.0;
    if (params.count("C")) {
      c = detail::take(params, "C", 1.0);
    } else {
      if (!profile_constant) throw InvalidArgument("gv: no profile constant available; pass gv:C=...");
      c = profile_constant();
    }
    detail::require_consumed(params, family);
    return fields::gv_profile(g.n2(), g.k(), c);
  }
  throw InvalidArgument("unknown field family '" + family + "'");
}

}  // namespace htype::io
