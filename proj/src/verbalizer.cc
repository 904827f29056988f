#include "pcp/verbalizer.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <set>
#include <sstream>

#include "pcp/error.h"
#include "pcp/text.h"

namespace pcp {
namespace {

Verbalizer make_pdtb_second() {
  return Verbalizer(
      SchemeId::kPdtbSecond11,
      {
          {"Comparison.Concession", {"although", "nevertheless"}},
          {"Comparison.Contrast", {"but", "however"}},
          {"Contingency.Cause",
           {"because", "as", "so", "consequently", "thus"}},
          {"Contingency.Pragmatic cause", {"since"}},
          {"Expansion.Alternative", {"instead", "rather", "or"}},
          {"Expansion.Conjunction", {"and", "also", "furthermore"}},
          // "for instance" / "for example", kept as printed single words.
          {"Expansion.Instantiation", {"instance", "example"}},
          {"Expansion.List", {"first"}},
          {"Expansion.Restatement", {"indeed", "specifically"}},
          {"Temporal.Asynchronous",
           {"then", "subsequently", "previously", "earlier", "after"}},
          {"Temporal.Synchrony", {"meanwhile"}},
      });
}

Verbalizer make_conll() {
  return Verbalizer(
      SchemeId::kConll15,
      {
          {"Comparison.Concession", {"although", "nevertheless"}},
          {"Comparison.Contrast", {"but", "however"}},
          {"Contingency.Cause.Reason", {"because", "as"}},
          {"Contingency.Cause.Result", {"so", "thus", "consequently"}},
          {"Contingency.Condition", {"if"}},
          {"Expansion.Alternative", {"unless", "or"}},
          {"Expansion.Alternative.Chosen alternative", {"instead"}},
          {"Expansion.Conjunction", {"and", "also", "furthermore"}},
          {"Expansion.Exception", {"rather"}},
          {"Expansion.Instantiation", {"instance", "example"}},
          {"Expansion.Restatement", {"specifically"}},
          {"Temporal.Asynchronous.Precedence", {"then", "subsequently"}},
          {"Temporal.Asynchronous.Succession",
           {"previously", "earlier", "after"}},
          {"Temporal.Synchrony", {"meanwhile"}},
          {"EntRel", {"none"}},
      });
}

Verbalizer make_pidrp_top() {
  return Verbalizer(SchemeId::kPdtbTop4,
                    {
                        {"Comparison", {"comparison"}},
                        {"Contingency", {"contingency"}},
                        {"Expansion", {"expansion"}},
                        {"Temporal", {"temporal"}},
                    },
                    AnswerKind::kRelationWord);
}

Verbalizer make_pedrr_second() {
  return Verbalizer(SchemeId::kPdtbSecondExplicit,
                    {
                        {"Comparison.Concession", {"concession"}},
                        {"Comparison.Contrast", {"contrast"}},
                        {"Contingency.Cause", {"cause"}},
                        {"Contingency.Pragmatic cause", {"justification"}},
                        {"Expansion.Alternative", {"alternative"}},
                        {"Expansion.Conjunction", {"conjunction"}},
                        {"Expansion.Instantiation", {"instance"}},
                        {"Expansion.List", {"list"}},
                        {"Expansion.Restatement", {"repetition"}},
                        {"Temporal.Asynchronous", {"asynchronous"}},
                        {"Temporal.Synchrony", {"simultaneous"}},
                    },
                    AnswerKind::kRelationWord);
}

std::string kind_name(AnswerKind kind) {
  return kind == AnswerKind::kConnective ? "connective" : "relation";
}

}  // namespace

Verbalizer::Verbalizer(SchemeId scheme_id, std::vector<AnswerSet> sets,
                       AnswerKind kind)
    : scheme_(scheme_id), kind_(kind) {
  const SenseScheme& s = scheme();
  std::vector<std::optional<AnswerSet>> ordered(s.size());
  for (auto& set : sets) {
    auto idx = s.index_of(set.label);
    if (!idx) {
      throw SchemeError("label '" + set.label + "' is not in scheme " +
                        scheme_name(scheme_id));
    }
    if (ordered[*idx]) {
      throw SchemeError("label '" + set.label + "' has two answer sets");
    }
    std::vector<std::string> words;
    for (const auto& w : set.answers) {
      std::string c = canonical_word(w);
      if (c.empty()) {
        throw ArgumentError("empty answer word for '" + set.label + "'");
      }
      if (std::find(words.begin(), words.end(), c) != words.end()) {
        throw ArgumentError("answer '" + c + "' repeated in the set of '" +
                            set.label + "'");
      }
      words.push_back(std::move(c));
    }
    ordered[*idx] = AnswerSet{set.label, std::move(words)};
  }
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (!ordered[i]) {
      throw SchemeError("label '" + s.label(i).name + "' has no answer set");
    }
    for (const auto& w : ordered[i]->answers) owners_[w].push_back(i);
    sets_.push_back(std::move(*ordered[i]));
  }
}

std::vector<std::string> Verbalizer::candidates() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& set : sets_) {
    for (const auto& w : set.answers) {
      if (seen.insert(w).second) out.push_back(w);
    }
  }
  return out;
}

std::size_t Verbalizer::label_index_of(std::string_view word) const {
  auto it = owners_.find(canonical_word(word));
  if (it == owners_.end()) throw UnmappedAnswerError(std::string(word));
  if (it->second.size() > 1) {
    throw ContractError("answer '" + std::string(word) +
                        "' belongs to several labels");
  }
  return it->second.front();
}

const SenseLabel& Verbalizer::label_of(std::string_view word) const {
  return scheme().label(label_index_of(word));
}

bool Verbalizer::contains(std::size_t label_index,
                          std::string_view word) const {
  const auto& answers = set(label_index).answers;
  return std::find(answers.begin(), answers.end(), canonical_word(word)) !=
         answers.end();
}

std::vector<std::string> builtin_verbalizer_ids() {
  return {"pdtb-second", "pdtb-top",  "conll",
          "pidrp-top",   "pedrr-second", "pedrr-top"};
}

const Verbalizer& builtin_verbalizer(std::string_view id) {
  static const Verbalizer pdtb_second = make_pdtb_second();
  static const Verbalizer pdtb_top = derive_top_level(pdtb_second);
  static const Verbalizer conll = make_conll();
  static const Verbalizer pidrp_top = make_pidrp_top();
  static const Verbalizer pedrr_second = make_pedrr_second();
  static const Verbalizer pedrr_top = derive_top_level(pedrr_second);
  if (id == "pdtb-second") return pdtb_second;
  if (id == "pdtb-top") return pdtb_top;
  if (id == "conll") return conll;
  if (id == "pidrp-top") return pidrp_top;
  if (id == "pedrr-second") return pedrr_second;
  if (id == "pedrr-top") return pedrr_top;
  throw ArgumentError("unknown verbalizer '" + std::string(id) + "'");
}

std::string gold_answer(const RelationInstance& instance,
                        const Verbalizer& verbalizer,
                        std::size_t gold_label_index) {
  const auto& answers = verbalizer.set(gold_label_index).answers;
  if (answers.empty()) {
    throw ContractError("label '" + verbalizer.set(gold_label_index).label +
                        "' has an empty answer set");
  }
  if (verbalizer.kind() == AnswerKind::kConnective && instance.connective &&
      verbalizer.contains(gold_label_index, *instance.connective)) {
    return canonical_word(*instance.connective);
  }
  return answers.front();
}

Verbalizer derive_top_level(const Verbalizer& second_level) {
  if (!is_second_level(second_level.scheme_id())) {
    throw SchemeError("derive_top_level needs a second-level verbalizer, got " +
                      scheme_name(second_level.scheme_id()));
  }
  const SchemeId top_id = top_level_scheme(second_level.scheme_id());
  const SenseScheme& top = scheme(top_id);
  std::vector<AnswerSet> sets;
  for (const auto& label : top.labels()) sets.push_back({label.name, {}});
  for (std::size_t i = 0; i < second_level.sets().size(); ++i) {
    const SenseLabel& child = second_level.scheme().label(i);
    if (!child.parent) {
      throw SchemeError("label '" + child.name + "' has no parent");
    }
    auto p = top.index_of(*child.parent);
    if (!p) throw SchemeError("unknown parent '" + *child.parent + "'");
    auto& answers = sets[*p].answers;
    for (const auto& w : second_level.set(i).answers) {
      if (std::find(answers.begin(), answers.end(), w) == answers.end()) {
        answers.push_back(w);
      }
    }
  }
  return Verbalizer(top_id, std::move(sets), second_level.kind());
}

std::string ValidationReport::to_text() const {
  if (ok()) return "ok\n";
  std::ostringstream out;
  for (const auto& v : overlaps) {
    out << "overlap\t" << v.word << "\t" << v.first_label << "\t"
        << v.second_label << "\n";
  }
  for (const auto& v : multi_token) {
    out << "multi-token\t" << v.label << "\t" << v.word << "\n";
  }
  for (const auto& l : empty_labels) out << "empty\t" << l << "\n";
  return out.str();
}

ValidationReport validate(const Verbalizer& verbalizer, const Scorer& scorer) {
  ValidationReport report;
  const auto& sets = verbalizer.sets();
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].answers.empty()) report.empty_labels.push_back(sets[i].label);
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      for (const auto& w : sets[i].answers) {
        if (verbalizer.contains(j, w)) {
          report.overlaps.push_back({w, sets[i].label, sets[j].label});
        }
      }
    }
  }
  std::vector<std::string> words;
  std::vector<std::string> owners;
  for (const auto& set : sets) {
    for (const auto& w : set.answers) {
      words.push_back(w);
      owners.push_back(set.label);
    }
  }
  if (!words.empty()) {
    auto single = scorer.single_token(words);
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!single[i]) report.multi_token.push_back({owners[i], words[i]});
    }
  }
  return report;
}

std::string InductionResult::frequency_tsv() const {
  std::ostringstream out;
  out << "connective\tmajority_label\tin_label\ttotal\tshare\tsingle_token\t"
         "status\n";
  for (const auto& f : frequencies) {
    char share[32];
    std::snprintf(share, sizeof(share), "%.4f", f.share);
    out << f.connective << "\t" << f.majority_label << "\t" << f.in_label
        << "\t" << f.total << "\t" << share << "\t"
        << (f.single_token ? "yes" : "no") << "\t" << f.status << "\n";
  }
  return out.str();
}

InductionResult induce_answer_sets(std::span<const RelationInstance> train,
                                   SchemeId scheme_id,
                                   const InductionParams& params,
                                   const Scorer& scorer) {
  if (params.max_per_label == 0) {
    throw ArgumentError("max_per_label must be positive");
  }
  const SenseScheme& s = scheme(scheme_id);
  // connective -> per-label counts
  std::map<std::string, std::vector<std::size_t>> counts;
  for (const auto& r : train) {
    if (!r.connective) continue;
    auto idx = resolve_gold_index(r, scheme_id);
    if (!idx) continue;
    auto& row = counts[canonical_word(*r.connective)];
    row.resize(s.size(), 0);
    ++row[*idx];
  }

  std::vector<std::string> words;
  for (const auto& [w, row] : counts) words.push_back(w);
  std::vector<bool> single;
  if (!words.empty()) single = scorer.single_token(words);

  std::vector<ConnectiveFrequency> freqs;
  std::vector<std::vector<std::size_t>> by_label(s.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& row = counts[words[i]];
    std::size_t best = 0, total = 0;
    for (std::size_t l = 0; l < row.size(); ++l) {
      total += row[l];
      if (row[l] > row[best]) best = l;
    }
    ConnectiveFrequency f;
    f.connective = words[i];
    f.majority_label = s.label(best).name;
    f.in_label = row[best];
    f.total = total;
    f.share = static_cast<double>(row[best]) / static_cast<double>(total);
    f.single_token = single[i];
    if (f.share < params.ambiguity_threshold) {
      f.status = "ambiguous";
    } else if (!f.single_token) {
      f.status = "multi-token";
    } else {
      f.status = "kept";
      by_label[best].push_back(freqs.size());
    }
    freqs.push_back(std::move(f));
  }

  std::vector<AnswerSet> sets;
  for (std::size_t l = 0; l < s.size(); ++l) {
    auto& idxs = by_label[l];
    std::stable_sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
      if (freqs[a].in_label != freqs[b].in_label) {
        return freqs[a].in_label > freqs[b].in_label;
      }
      return freqs[a].connective < freqs[b].connective;
    });
    AnswerSet set{s.label(l).name, {}};
    for (std::size_t k = 0; k < idxs.size(); ++k) {
      if (k < params.max_per_label) {
        set.answers.push_back(freqs[idxs[k]].connective);
      } else {
        freqs[idxs[k]].status = "truncated";
      }
    }
    if (set.answers.empty()) throw InductionError(set.label);
    sets.push_back(std::move(set));
  }
  std::stable_sort(freqs.begin(), freqs.end(),
                   [](const ConnectiveFrequency& a,
                      const ConnectiveFrequency& b) {
                     return a.total > b.total;
                   });
  return {Verbalizer(scheme_id, std::move(sets)), std::move(freqs)};
}

std::string format_verbalizer(const Verbalizer& verbalizer) {
  std::string out = "# scheme: " + scheme_name(verbalizer.scheme_id()) + "\n";
  out += "# kind: " + kind_name(verbalizer.kind()) + "\n";
  for (const auto& set : verbalizer.sets()) {
    out += set.label + "\t" + join(set.answers, ",") + "\n";
  }
  return out;
}

Verbalizer parse_verbalizer(std::istream& in, std::optional<SchemeId> hint) {
  std::optional<SchemeId> declared;
  AnswerKind kind = AnswerKind::kConnective;
  std::vector<AnswerSet> sets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = normalize_whitespace(line);
    if (trimmed.empty()) continue;
    if (trimmed[0] == '#') {
      std::string body = normalize_whitespace(trimmed.substr(1));
      try {
        if (starts_with(body, "scheme:")) {
          declared = parse_scheme(normalize_whitespace(body.substr(7)));
        } else if (starts_with(body, "kind:")) {
          std::string k = normalize_whitespace(body.substr(5));
          if (k == "connective") {
            kind = AnswerKind::kConnective;
          } else if (k == "relation") {
            kind = AnswerKind::kRelationWord;
          } else {
            throw ArgumentError("unknown verbalizer kind '" + k + "'");
          }
        }
      } catch (const ArgumentError& e) {
        throw ParseError(line_no, e.what());
      }
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(line_no, "expected 'label<TAB>word1,word2,...'");
    }
    AnswerSet set{normalize_whitespace(line.substr(0, tab)), {}};
    for (const auto& w : split(line.substr(tab + 1), ',')) {
      std::string c = canonical_word(w);
      if (!c.empty()) set.answers.push_back(std::move(c));
    }
    sets.push_back(std::move(set));
  }

  std::optional<SchemeId> id = declared ? declared : hint;
  if (!id) {
    std::set<std::string> labels;
    for (const auto& s : sets) labels.insert(s.label);
    for (SchemeId candidate : all_schemes()) {
      std::set<std::string> want;
      for (const auto& l : scheme(candidate).labels()) want.insert(l.name);
      if (want == labels) {
        id = candidate;
        break;
      }
    }
    if (!id) throw SchemeError("verbalizer labels match no known scheme");
  }
  return Verbalizer(*id, std::move(sets), kind);
}

}  // namespace pcp
