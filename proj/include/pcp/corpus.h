#ifndef PCP_CORPUS_H_
#define PCP_CORPUS_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcp/sense.h"

namespace pcp {

enum class RelType { kImplicit, kExplicit, kEntRel, kAltLex, kNoRel };

std::string rel_type_name(RelType type);
RelType parse_rel_type(std::string_view name);

// One annotated argument pair. Text fields are whitespace-normalized by the
// parsers; the connective is absent for EntRel and for unannotated records.
struct RelationInstance {
  std::string doc_id;
  int section = -1;  // PDTB WSJ section 0-24, -1 when unknown
  RelType rel_type = RelType::kImplicit;
  std::string arg1;
  std::string arg2;
  std::optional<std::string> connective;
  std::vector<std::string> senses;

  bool operator==(const RelationInstance&) const = default;
};

enum class Dataset { kPdtb, kConll16 };
enum class Split { kTrain, kDev, kTest, kBlind, kUnassigned };
inline constexpr std::size_t kNumSplits = 5;

std::string dataset_name(Dataset dataset);
Dataset parse_dataset(std::string_view name);
std::string split_name(Split split);

// CoNLL 2016 shared-task relations, one JSON object per line. Reads
// Arg1.RawText, Arg2.RawText, Connective.RawText, Sense, Type and DocID; the
// section is recovered from "wsj_SSxx" document ids (-1 otherwise). Blank
// lines are skipped.
std::vector<RelationInstance> parse_conll16(std::istream& in);

// The toolkit's own record format: doc_id, section, rel_type, arg1, arg2,
// connective (optional), senses.
std::vector<RelationInstance> parse_normalized(std::istream& in);

// One normalized record as a single JSON line (no trailing newline).
std::string serialize_normalized(const RelationInstance& instance);
void write_normalized(std::ostream& out,
                      std::span<const RelationInstance> instances);

// PDTB: 2-20 train, 0-1 dev, 21-22 test, 23-24 unassigned.
// CoNLL16: 2-21 train, 22 dev, 23 test, -1 (Wikinews) blind, others
// unassigned. Sections outside the dataset's range throw DomainError.
Split assign_split(const RelationInstance& instance, Dataset dataset);

// Projects the first annotated sense onto `scheme`. Returns nullopt when the
// sense has no counterpart there (e.g. Contingency.Condition at the second
// level), which excludes the instance from that scheme.
std::optional<SenseLabel> resolve_gold_sense(const RelationInstance& instance,
                                             SchemeId scheme);
std::optional<std::size_t> resolve_gold_index(const RelationInstance& instance,
                                              SchemeId scheme);

// Relation types that participate in classification under `scheme`:
// Implicit for the PDTB implicit schemes, Implicit+EntRel for Conll15,
// Explicit for the explicit schemes.
bool participates(RelType type, SchemeId scheme);
std::vector<RelationInstance> select_for_scheme(
    std::span<const RelationInstance> instances, SchemeId scheme);

struct CorpusStats {
  SchemeId scheme;
  Dataset dataset;
  // counts[label][split], indexed by scheme label order and Split.
  std::vector<std::array<std::size_t, kNumSplits>> counts;
  std::array<std::size_t, kNumSplits> totals{};
  std::size_t unresolved = 0;

  std::size_t count(std::size_t label, Split split) const {
    return counts.at(label)[static_cast<std::size_t>(split)];
  }
  std::size_t total(Split split) const {
    return totals[static_cast<std::size_t>(split)];
  }
};

// Counts resolvable instances by label and split. Callers filter by relation
// type first (see select_for_scheme).
CorpusStats corpus_stats(std::span<const RelationInstance> instances,
                         SchemeId scheme, Dataset dataset);

// Header `label<TAB>train<TAB>dev<TAB>test`, plus a `blind` column for
// CoNLL16, one row per label and a final `Total` row.
std::string stats_tsv(const CorpusStats& stats);

}  // namespace pcp

#endif  // PCP_CORPUS_H_
