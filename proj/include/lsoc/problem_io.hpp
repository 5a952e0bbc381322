#pragma once

// JSON serialization of problem instances and constant-policy documents.
//
// Problem document:
//   { "n_nodes": int,
//     "edges": [ {"from": int, "to": int, "b": float}, ... ],
//     "r": [float x N], "g": [float x N], "T": float }
//
// Key order is irrelevant on input; unknown keys are rejected. save_problem
// emits a canonical form (keys in the order above, edges grouped by source
// node) that round-trips bit for bit.

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lsoc/errors.hpp"
#include "lsoc/problem.hpp"

namespace lsoc {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) fail(errc::parse, "unknown key \"" + item.key() + "\" in " + where);
  }
}

inline const nlohmann::json& require_key(const nlohmann::json& obj, const char* key,
                                         const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(errc::parse, "missing field \"" + std::string(key) + "\" in " + where);
  return *it;
}

inline double as_number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) fail(errc::parse, where + " must be a number");
  return v.get<double>();
}

inline int as_int(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(errc::parse, where + " must be an integer");
  return v.get<int>();
}

inline std::vector<double> as_number_array(const nlohmann::json& v, size_t expected,
                                           const std::string& where) {
  if (!v.is_array() || v.size() != expected)
    fail(errc::parse, where + " must be an array of length " + std::to_string(expected));
  std::vector<double> out;
  out.reserve(expected);
  for (size_t i = 0; i < expected; ++i)
    out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline nlohmann::json parse_document(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    fail(errc::parse, ex.what());
  }
  if (!doc.is_object()) fail(errc::parse, "document root must be an object");
  return doc;
}

}  // namespace detail

inline GraphProblem load_problem(const std::string& text) {
  const nlohmann::json doc = detail::parse_document(text);
  detail::reject_unknown_keys(doc, {"n_nodes", "edges", "r", "g", "T"}, "problem document");

  GraphProblem p;
  p.n_nodes = detail::as_int(detail::require_key(doc, "n_nodes", "problem document"), "n_nodes");
  if (p.n_nodes < 2) fail(errc::parse, "n_nodes must be at least 2");
  p.neighborhoods.resize(p.n_nodes);
  p.edge_offsets.resize(p.n_nodes);

  const auto& edges = detail::require_key(doc, "edges", "problem document");
  if (!edges.is_array()) fail(errc::parse, "edges must be an array");
  for (size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "edges[" + std::to_string(k) + "]";
    const auto& e = edges[k];
    if (!e.is_object()) fail(errc::parse, where + " must be an object");
    detail::reject_unknown_keys(e, {"from", "to", "b"}, where);
    const int from = detail::as_int(detail::require_key(e, "from", where), where + ".from");
    const int to = detail::as_int(detail::require_key(e, "to", where), where + ".to");
    const double b = detail::as_number(detail::require_key(e, "b", where), where + ".b");
    if (from < 0 || from >= p.n_nodes)
      fail(errc::index_out_of_range, where + ".from = " + std::to_string(from));
    p.neighborhoods[from].push_back(to);
    p.edge_offsets[from].push_back(b);
  }

  p.rewards = detail::as_number_array(detail::require_key(doc, "r", "problem document"),
                                      static_cast<size_t>(p.n_nodes), "r");
  p.terminal_rewards = detail::as_number_array(detail::require_key(doc, "g", "problem document"),
                                               static_cast<size_t>(p.n_nodes), "g");
  p.horizon = detail::as_number(detail::require_key(doc, "T", "problem document"), "T");

  validate_problem(p);
  return p;
}

inline std::string save_problem(const GraphProblem& p) {
  nlohmann::ordered_json doc;
  doc["n_nodes"] = p.n_nodes;
  auto edges = nlohmann::ordered_json::array();
  for (int i = 0; i < p.n_nodes; ++i) {
    const auto& nbrs = p.neighborhoods[i];
    for (size_t k = 0; k < nbrs.size(); ++k) {
      nlohmann::ordered_json e;
      e["from"] = i;
      e["to"] = nbrs[k];
      e["b"] = p.edge_offsets[i][k];
      edges.push_back(std::move(e));
    }
  }
  doc["edges"] = std::move(edges);
  doc["r"] = p.rewards;
  doc["g"] = p.terminal_rewards;
  doc["T"] = p.horizon;
  return doc.dump(2) + "\n";
}

// Constant-policy document: [ {"from": int, "to": int, "lambda": float}, ... ]
// with exactly one entry per edge of the problem.
inline EdgeValues load_constant_policy(const std::string& text, const GraphProblem& p) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    fail(errc::parse, ex.what());
  }
  if (!doc.is_array()) fail(errc::parse, "policy document root must be an array");

  EdgeValues rates(p.n_nodes);
  std::vector<std::vector<bool>> seen(p.n_nodes);
  for (int i = 0; i < p.n_nodes; ++i) {
    rates[i].assign(p.neighborhoods[i].size(), 0.0);
    seen[i].assign(p.neighborhoods[i].size(), false);
  }
  for (size_t k = 0; k < doc.size(); ++k) {
    const std::string where = "policy[" + std::to_string(k) + "]";
    const auto& e = doc[k];
    if (!e.is_object()) fail(errc::parse, where + " must be an object");
    detail::reject_unknown_keys(e, {"from", "to", "lambda"}, where);
    const int from = detail::as_int(detail::require_key(e, "from", where), where + ".from");
    const int to = detail::as_int(detail::require_key(e, "to", where), where + ".to");
    const double lambda = detail::as_number(detail::require_key(e, "lambda", where), where + ".lambda");
    if (from < 0 || from >= p.n_nodes) fail(errc::parse, where + ": no such node");
    const auto& nbrs = p.neighborhoods[from];
    const auto it = std::find(nbrs.begin(), nbrs.end(), to);
    if (it == nbrs.end())
      fail(errc::parse, where + ": " + std::to_string(from) + " -> " + std::to_string(to) +
                            " is not an edge of the problem");
    const size_t slot = static_cast<size_t>(it - nbrs.begin());
    if (seen[from][slot]) fail(errc::parse, where + ": duplicate edge entry");
    if (!std::isfinite(lambda) || lambda < 0.0)
      fail(errc::parse, where + ": lambda must be finite and nonnegative");
    seen[from][slot] = true;
    rates[from][slot] = lambda;
  }
  for (int i = 0; i < p.n_nodes; ++i)
    for (size_t k = 0; k < seen[i].size(); ++k)
      if (!seen[i][k])
        fail(errc::parse, "policy misses edge " + std::to_string(i) + " -> " +
                              std::to_string(p.neighborhoods[i][k]));
  return rates;
}

}  // namespace lsoc
