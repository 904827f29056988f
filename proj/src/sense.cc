#include "pcp/sense.h"

#include "pcp/error.h"

namespace pcp {
namespace {

const char* const kTopLabels[] = {"Comparison", "Contingency", "Expansion",
                                  "Temporal"};

const char* const kSecondLabels[] = {
    "Comparison.Concession",  "Comparison.Contrast",
    "Contingency.Cause",      "Contingency.Pragmatic cause",
    "Expansion.Alternative",  "Expansion.Conjunction",
    "Expansion.Instantiation", "Expansion.List",
    "Expansion.Restatement",  "Temporal.Asynchronous",
    "Temporal.Synchrony",
};

const char* const kConllLabels[] = {
    "Comparison.Concession",
    "Comparison.Contrast",
    "Contingency.Cause.Reason",
    "Contingency.Cause.Result",
    "Contingency.Condition",
    "Expansion.Alternative",
    "Expansion.Alternative.Chosen alternative",
    "Expansion.Conjunction",
    "Expansion.Exception",
    "Expansion.Instantiation",
    "Expansion.Restatement",
    "Temporal.Asynchronous.Precedence",
    "Temporal.Asynchronous.Succession",
    "Temporal.Synchrony",
    "EntRel",
};

SenseScheme make_top(SchemeId id) {
  std::vector<SenseLabel> labels;
  for (const char* name : kTopLabels) labels.push_back({id, name, std::nullopt});
  return SenseScheme(id, std::move(labels));
}

SenseScheme make_second(SchemeId id) {
  std::vector<SenseLabel> labels;
  for (const char* name : kSecondLabels) {
    labels.push_back({id, name, top_level_name(name)});
  }
  return SenseScheme(id, std::move(labels));
}

SenseScheme make_conll() {
  std::vector<SenseLabel> labels;
  for (const char* name : kConllLabels) {
    labels.push_back({SchemeId::kConll15, name, std::nullopt});
  }
  return SenseScheme(SchemeId::kConll15, std::move(labels));
}

}  // namespace

SenseScheme::SenseScheme(SchemeId id, std::vector<SenseLabel> labels)
    : id_(id), labels_(std::move(labels)) {}

std::optional<std::size_t> SenseScheme::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].name == name) return i;
  }
  return std::nullopt;
}

const SenseScheme& scheme(SchemeId id) {
  static const SenseScheme top = make_top(SchemeId::kPdtbTop4);
  static const SenseScheme second = make_second(SchemeId::kPdtbSecond11);
  static const SenseScheme conll = make_conll();
  static const SenseScheme top_explicit = make_top(SchemeId::kPdtbTopExplicit);
  static const SenseScheme second_explicit =
      make_second(SchemeId::kPdtbSecondExplicit);
  switch (id) {
    case SchemeId::kPdtbTop4: return top;
    case SchemeId::kPdtbSecond11: return second;
    case SchemeId::kConll15: return conll;
    case SchemeId::kPdtbTopExplicit: return top_explicit;
    case SchemeId::kPdtbSecondExplicit: return second_explicit;
  }
  throw SchemeError("unknown scheme id");
}

std::string scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::kPdtbTop4: return "PdtbTop4";
    case SchemeId::kPdtbSecond11: return "PdtbSecond11";
    case SchemeId::kConll15: return "Conll15";
    case SchemeId::kPdtbTopExplicit: return "PdtbTopExplicit";
    case SchemeId::kPdtbSecondExplicit: return "PdtbSecondExplicit";
  }
  return "?";
}

std::vector<SchemeId> all_schemes() {
  return {SchemeId::kPdtbTop4, SchemeId::kPdtbSecond11, SchemeId::kConll15,
          SchemeId::kPdtbTopExplicit, SchemeId::kPdtbSecondExplicit};
}

SchemeId parse_scheme(std::string_view name) {
  for (SchemeId id : all_schemes()) {
    if (scheme_name(id) == name) return id;
  }
  throw SchemeError("unknown sense scheme '" + std::string(name) + "'");
}

bool is_second_level(SchemeId id) {
  return id == SchemeId::kPdtbSecond11 || id == SchemeId::kPdtbSecondExplicit;
}

bool is_explicit_scheme(SchemeId id) {
  return id == SchemeId::kPdtbTopExplicit ||
         id == SchemeId::kPdtbSecondExplicit;
}

SchemeId top_level_scheme(SchemeId id) {
  switch (id) {
    case SchemeId::kPdtbSecond11: return SchemeId::kPdtbTop4;
    case SchemeId::kPdtbSecondExplicit: return SchemeId::kPdtbTopExplicit;
    default: return id;
  }
}

std::string top_level_name(std::string_view sense) {
  return std::string(sense.substr(0, sense.find('.')));
}

}  // namespace pcp
