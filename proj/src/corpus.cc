#include "pcp/corpus.h"

#include <istream>
#include <ostream>
#include <utility>

#include "json.hpp"
#include "pcp/error.h"
#include "pcp/text.h"

namespace pcp {
namespace {

using nlohmann::json;

// Rewrites applied before matching a sense against the CoNLL16 label list.
// A rule matches the sense itself or any of its subtypes.
const std::pair<const char*, const char*> kConllMerges[] = {
    {"Contingency.Pragmatic cause", "Contingency.Cause.Reason"},
    {"Contingency.Pragmatic condition", "Contingency.Condition"},
    {"Contingency.Condition", "Contingency.Condition"},
    {"Comparison.Pragmatic contrast", "Comparison.Contrast"},
    {"Comparison.Contrast", "Comparison.Contrast"},
    {"Comparison.Pragmatic concession", "Comparison.Concession"},
    {"Comparison.Concession", "Comparison.Concession"},
    {"Expansion.Alternative.Conjunctive", "Expansion.Alternative"},
    {"Expansion.Alternative.Disjunctive", "Expansion.Alternative"},
    {"Expansion.List", "Expansion.Conjunction"},
    {"Expansion.Restatement", "Expansion.Restatement"},
};

bool matches_rule(std::string_view sense, std::string_view rule) {
  if (!starts_with(sense, rule)) return false;
  return sense.size() == rule.size() || sense[rule.size()] == '.';
}

std::string first_components(std::string_view sense, int n) {
  std::size_t pos = 0;
  for (int i = 0; i < n; ++i) {
    pos = sense.find('.', pos);
    if (pos == std::string_view::npos) return std::string(sense);
    if (i + 1 < n) ++pos;
  }
  return std::string(sense.substr(0, pos));
}

// Reads the stream line by line and hands each parsed JSON object to `fn`.
template <typename Fn>
std::vector<RelationInstance> parse_lines(std::istream& in, Fn fn) {
  std::vector<RelationInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    out.push_back(fn(obj, line_no));
  }
  return out;
}

const json& require(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) throw SchemaError(line, field, "missing required field");
  return *it;
}

std::string require_string(const json& obj, const char* field,
                           std::size_t line) {
  const json& v = require(obj, field, line);
  if (!v.is_string()) throw SchemaError(line, field, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> require_string_list(const json& obj,
                                             const char* field,
                                             std::size_t line) {
  const json& v = require(obj, field, line);
  if (!v.is_array()) throw SchemaError(line, field, "expected a list");
  std::vector<std::string> out;
  for (const json& s : v) {
    if (!s.is_string()) {
      throw SchemaError(line, field, "expected a list of strings");
    }
    std::string norm = normalize_whitespace(s.get<std::string>());
    if (norm.empty()) throw SchemaError(line, field, "empty sense string");
    out.push_back(std::move(norm));
  }
  return out;
}

// Invariants shared by both input formats.
void check_instance(RelationInstance& r, std::size_t line, const char* arg1,
                    const char* arg2, const char* senses,
                    const char* connective) {
  r.arg1 = normalize_whitespace(r.arg1);
  r.arg2 = normalize_whitespace(r.arg2);
  if (r.arg1.empty()) throw SchemaError(line, arg1, "empty argument text");
  if (r.arg2.empty()) throw SchemaError(line, arg2, "empty argument text");
  if (r.connective) {
    r.connective = normalize_whitespace(*r.connective);
    if (r.connective->empty()) r.connective.reset();
  }
  if (r.section < -1 || r.section > 24) {
    throw SchemaError(line, "section",
                      "section " + std::to_string(r.section) +
                          " outside -1..24");
  }
  bool needs_sense = r.rel_type == RelType::kImplicit ||
                     r.rel_type == RelType::kExplicit ||
                     r.rel_type == RelType::kEntRel;
  if (needs_sense && r.senses.empty()) {
    throw SchemaError(line, senses, "sense list is empty");
  }
  if (r.rel_type == RelType::kEntRel) {
    if (r.senses != std::vector<std::string>{"EntRel"}) {
      throw SchemaError(line, senses, "EntRel relations carry [\"EntRel\"]");
    }
    if (r.connective) {
      throw SchemaError(line, connective,
                        "EntRel relations carry no connective");
    }
  }
}

int section_from_doc_id(std::string_view doc_id) {
  // wsj_SSxx
  if (doc_id.size() != 8 || !starts_with(doc_id, "wsj_")) return -1;
  for (std::size_t i = 4; i < 8; ++i) {
    if (doc_id[i] < '0' || doc_id[i] > '9') return -1;
  }
  return (doc_id[4] - '0') * 10 + (doc_id[5] - '0');
}

std::string raw_text(const json& obj, const char* field, std::size_t line) {
  const json& v = require(obj, field, line);
  if (!v.is_object()) throw SchemaError(line, field, "expected an object");
  auto it = v.find("RawText");
  if (it == v.end()) {
    throw SchemaError(line, std::string(field) + ".RawText",
                      "missing required field");
  }
  if (!it->is_string()) {
    throw SchemaError(line, std::string(field) + ".RawText",
                      "expected a string");
  }
  return it->get<std::string>();
}

RelType conll_type(const std::string& type, std::size_t line) {
  if (type == "AltLexC") return RelType::kAltLex;
  try {
    return parse_rel_type(type);
  } catch (const ArgumentError&) {
    throw SchemaError(line, "Type", "unknown relation type '" + type + "'");
  }
}

}  // namespace

std::string rel_type_name(RelType type) {
  switch (type) {
    case RelType::kImplicit: return "Implicit";
    case RelType::kExplicit: return "Explicit";
    case RelType::kEntRel: return "EntRel";
    case RelType::kAltLex: return "AltLex";
    case RelType::kNoRel: return "NoRel";
  }
  return "?";
}

RelType parse_rel_type(std::string_view name) {
  for (RelType t : {RelType::kImplicit, RelType::kExplicit, RelType::kEntRel,
                    RelType::kAltLex, RelType::kNoRel}) {
    if (rel_type_name(t) == name) return t;
  }
  throw ArgumentError("unknown relation type '" + std::string(name) + "'");
}

std::string dataset_name(Dataset dataset) {
  return dataset == Dataset::kPdtb ? "PDTB" : "CoNLL16";
}

Dataset parse_dataset(std::string_view name) {
  std::string lower = to_lower(name);
  if (lower == "pdtb") return Dataset::kPdtb;
  if (lower == "conll16") return Dataset::kConll16;
  throw ArgumentError("unknown dataset '" + std::string(name) + "'");
}

std::string split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
    case Split::kBlind: return "blind";
    case Split::kUnassigned: return "unassigned";
  }
  return "?";
}

std::vector<RelationInstance> parse_conll16(std::istream& in) {
  return parse_lines(in, [](const json& obj, std::size_t line) {
    RelationInstance r;
    r.arg1 = raw_text(obj, "Arg1", line);
    r.arg2 = raw_text(obj, "Arg2", line);
    r.rel_type = conll_type(require_string(obj, "Type", line), line);
    r.senses = require_string_list(obj, "Sense", line);
    r.doc_id = require_string(obj, "DocID", line);
    r.section = section_from_doc_id(r.doc_id);
    auto conn = obj.find("Connective");
    if (conn != obj.end() && conn->is_object()) {
      auto raw = conn->find("RawText");
      if (raw != conn->end() && raw->is_string()) {
        r.connective = raw->get<std::string>();
      }
    }
    // The shared-task files leave an empty connective on EntRel rows.
    if (r.rel_type == RelType::kEntRel && r.connective &&
        normalize_whitespace(*r.connective).empty()) {
      r.connective.reset();
    }
    check_instance(r, line, "Arg1.RawText", "Arg2.RawText", "Sense",
                   "Connective.RawText");
    return r;
  });
}

std::vector<RelationInstance> parse_normalized(std::istream& in) {
  return parse_lines(in, [](const json& obj, std::size_t line) {
    RelationInstance r;
    r.doc_id = require_string(obj, "doc_id", line);
    const json& section = require(obj, "section", line);
    if (!section.is_number_integer()) {
      throw SchemaError(line, "section", "expected an integer");
    }
    long long s = section.get<long long>();
    if (s < -1 || s > 24) {
      throw SchemaError(line, "section",
                        "section " + std::to_string(s) + " outside -1..24");
    }
    r.section = static_cast<int>(s);
    std::string type = require_string(obj, "rel_type", line);
    try {
      r.rel_type = parse_rel_type(type);
    } catch (const ArgumentError&) {
      throw SchemaError(line, "rel_type",
                        "unknown relation type '" + type + "'");
    }
    r.arg1 = require_string(obj, "arg1", line);
    r.arg2 = require_string(obj, "arg2", line);
    auto conn = obj.find("connective");
    if (conn != obj.end() && !conn->is_null()) {
      if (!conn->is_string()) {
        throw SchemaError(line, "connective", "expected a string or null");
      }
      r.connective = conn->get<std::string>();
    }
    r.senses = require_string_list(obj, "senses", line);
    check_instance(r, line, "arg1", "arg2", "senses", "connective");
    return r;
  });
}

std::string serialize_normalized(const RelationInstance& r) {
  nlohmann::ordered_json obj;
  obj["doc_id"] = r.doc_id;
  obj["section"] = r.section;
  obj["rel_type"] = rel_type_name(r.rel_type);
  obj["arg1"] = r.arg1;
  obj["arg2"] = r.arg2;
  if (r.connective) obj["connective"] = *r.connective;
  obj["senses"] = r.senses;
  return obj.dump();
}

void write_normalized(std::ostream& out,
                      std::span<const RelationInstance> instances) {
  for (const auto& r : instances) out << serialize_normalized(r) << '\n';
}

Split assign_split(const RelationInstance& instance, Dataset dataset) {
  int s = instance.section;
  if (dataset == Dataset::kPdtb) {
    if (s < 0 || s > 24) {
      throw DomainError("PDTB section " + std::to_string(s) +
                        " outside 0..24 (doc '" + instance.doc_id + "')");
    }
    if (s <= 1) return Split::kDev;
    if (s <= 20) return Split::kTrain;
    if (s <= 22) return Split::kTest;
    return Split::kUnassigned;
  }
  if (s < -1 || s > 24) {
    throw DomainError("CoNLL16 section " + std::to_string(s) +
                      " outside -1..24 (doc '" + instance.doc_id + "')");
  }
  if (s == -1) return Split::kBlind;
  if (s >= 2 && s <= 21) return Split::kTrain;
  if (s == 22) return Split::kDev;
  if (s == 23) return Split::kTest;
  return Split::kUnassigned;
}

std::optional<std::size_t> resolve_gold_index(const RelationInstance& instance,
                                              SchemeId id) {
  if (instance.senses.empty()) return std::nullopt;
  const std::string& first = instance.senses.front();
  const SenseScheme& s = scheme(id);
  switch (id) {
    case SchemeId::kPdtbTop4:
    case SchemeId::kPdtbTopExplicit:
      return s.index_of(top_level_name(first));
    case SchemeId::kPdtbSecond11:
    case SchemeId::kPdtbSecondExplicit:
      return s.index_of(first_components(first, 2));
    case SchemeId::kConll15: {
      if (auto exact = s.index_of(first)) return exact;
      for (const auto& [from, to] : kConllMerges) {
        if (matches_rule(first, from)) return s.index_of(to);
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<SenseLabel> resolve_gold_sense(const RelationInstance& instance,
                                             SchemeId id) {
  auto idx = resolve_gold_index(instance, id);
  if (!idx) return std::nullopt;
  return scheme(id).label(*idx);
}

bool participates(RelType type, SchemeId id) {
  switch (id) {
    case SchemeId::kPdtbTop4:
    case SchemeId::kPdtbSecond11:
      return type == RelType::kImplicit;
    case SchemeId::kConll15:
      return type == RelType::kImplicit || type == RelType::kEntRel;
    case SchemeId::kPdtbTopExplicit:
    case SchemeId::kPdtbSecondExplicit:
      return type == RelType::kExplicit;
  }
  return false;
}

std::vector<RelationInstance> select_for_scheme(
    std::span<const RelationInstance> instances, SchemeId id) {
  std::vector<RelationInstance> out;
  for (const auto& r : instances) {
    if (participates(r.rel_type, id)) out.push_back(r);
  }
  return out;
}

CorpusStats corpus_stats(std::span<const RelationInstance> instances,
                         SchemeId id, Dataset dataset) {
  CorpusStats stats{id, dataset, {}, {}, 0};
  stats.counts.assign(scheme(id).size(), {});
  for (const auto& r : instances) {
    auto idx = resolve_gold_index(r, id);
    if (!idx) {
      ++stats.unresolved;
      continue;
    }
    auto split = static_cast<std::size_t>(assign_split(r, dataset));
    ++stats.counts[*idx][split];
    ++stats.totals[split];
  }
  return stats;
}

std::string stats_tsv(const CorpusStats& stats) {
  bool blind = stats.dataset == Dataset::kConll16;
  std::vector<Split> cols = {Split::kTrain, Split::kDev, Split::kTest};
  if (blind) cols.push_back(Split::kBlind);
  std::string out = "label";
  for (Split s : cols) out += "\t" + split_name(s);
  out += "\n";
  const SenseScheme& s = scheme(stats.scheme);
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += s.label(i).name;
    for (Split c : cols) out += "\t" + std::to_string(stats.count(i, c));
    out += "\n";
  }
  out += "Total";
  for (Split c : cols) out += "\t" + std::to_string(stats.total(c));
  out += "\n";
  return out;
}

}  // namespace pcp
