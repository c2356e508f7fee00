#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cannings/coalescent.hpp"
#include "cannings/errors.hpp"
#include "cannings/offspring.hpp"
#include "cannings/profile.hpp"
#include "cannings/tree.hpp"

namespace cannings {

using json = nlohmann::json;

// --- profiles ---------------------------------------------------------

inline json profile_to_json(const ContinuousProfile& p) {
  json knots = json::array();
  for (const Knot& k : p.knots()) knots.push_back({k.x, k.v});
  return json{{"knots", knots}};
}

inline ContinuousProfile profile_from_json(const json& j) {
  if (!j.is_object() || !j.contains("knots"))
    throw ParseError("profile JSON must be an object with a \"knots\" array");
  std::vector<Knot> knots;
  for (const auto& pair : j.at("knots")) {
    if (!pair.is_array() || pair.size() != 2)
      throw ParseError("each knot must be a [position, value] pair");
    knots.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return validate_profile(std::move(knots));
}

// --- offspring laws ---------------------------------------------------

inline json law_to_json(const OffspringLaw& law) {
  if (std::holds_alternative<WrightFisher>(law))
    return json{{"law", "wright_fisher"}};
  if (const auto* dm = std::get_if<DirichletMultinomial>(&law))
    return json{{"law", "dirichlet_multinomial"}, {"theta", dm->theta}};
  const auto& ce = std::get<Counterexample>(law);
  return json{{"law", "counterexample"}, {"alpha", ce.alpha}};
}

// The counterexample descriptor omits n in the wire format; it binds to the
// run's population size, so the caller supplies it.
inline OffspringLaw law_from_json(const json& j, std::int64_t n_for_counterexample) {
  if (!j.is_object() || !j.contains("law"))
    throw ParseError("law JSON must be an object with a \"law\" tag");
  const std::string name = j.at("law").get<std::string>();
  OffspringLaw law;
  if (name == "wright_fisher") {
    law = WrightFisher{};
  } else if (name == "dirichlet_multinomial") {
    if (!j.contains("theta")) throw ParseError("dirichlet_multinomial needs theta");
    law = DirichletMultinomial{j.at("theta").get<double>()};
  } else if (name == "counterexample") {
    if (!j.contains("alpha")) throw ParseError("counterexample needs alpha");
    law = Counterexample{j.at("alpha").get<double>(), n_for_counterexample};
  } else {
    throw ParseError("unknown law \"" + name + "\"");
  }
  validate_law(law);
  return law;
}

// --- k-point trees -----------------------------------------------------

inline json k_point_tree_to_json(const KPointTree& t) {
  json merges = json::array();
  for (const auto& m : t.merges)
    merges.push_back(
        {{"height", m.height}, {"left", m.left}, {"right", m.right}, {"id", m.id}});
  return json{{"leaves", t.leaf_heights},
              {"merges", merges},
              {"root_order", t.root_order}};
}

inline KPointTree k_point_tree_from_json(const json& j) {
  KPointTree t;
  t.leaf_heights = j.at("leaves").get<std::vector<double>>();
  t.k = static_cast<int>(t.leaf_heights.size());
  for (const auto& m : j.at("merges"))
    t.merges.push_back({m.at("height").get<double>(), m.at("left").get<int>(),
                        m.at("right").get<int>(), m.at("id").get<int>()});
  t.root_order = j.at("root_order").get<std::vector<int>>();
  return t;
}

// --- CSV dumps (stable column orders, documented in FORMATS.md) ---------

inline std::string tree_to_csv(const CanningsTree& t) {
  std::ostringstream out;
  out << "generation,child_index,parent_index\n";
  for (std::int64_t i = 0; i < t.profile().size(1); ++i)
    out << "1," << i << ",0\n";
  for (std::int64_t s = 2; s <= t.top_generation(); ++s) {
    const auto& row = t.parent_row(s);
    for (std::size_t i = 0; i < row.size(); ++i)
      out << s << ',' << i << ',' << row[i] << '\n';
  }
  return out.str();
}

inline std::string lattice_path_to_csv(const LatticePath& p) {
  std::ostringstream out;
  out << (p.kind == LatticePath::Kind::height ? "height\n" : "contour\n");
  for (std::int64_t v : p.values) out << v << '\n';
  return out.str();
}

inline std::string trace_to_csv(const CoalescentTrace& tr) {
  std::ostringstream out;
  out << "j,x_j\n";
  for (std::int64_t j = tr.base_height; j >= 0; --j)
    out << j << ',' << tr.at(j) << '\n';
  return out.str();
}

inline json marked_trace_to_json(const MarkedTrace& m) {
  json events = json::array();
  for (const auto& rec : m.merges)
    events.push_back({{"generation", rec.generation},
                      {"blocks_before", rec.blocks_before},
                      {"blocks_after", rec.blocks_after}});
  return events;
}

// --- small file helpers --------------------------------------------------

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a 64-bit content hash for the run manifest.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace cannings
