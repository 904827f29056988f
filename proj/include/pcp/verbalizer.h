#ifndef PCP_VERBALIZER_H_
#define PCP_VERBALIZER_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcp/corpus.h"
#include "pcp/scorer.h"
#include "pcp/sense.h"

namespace pcp {

// Connective verbalizers (PCP) predict a connective at the mask; relation
// word verbalizers (PIDRP, PEDRR) predict a word naming the relation, whose
// gold answer is always the first word of the set.
enum class AnswerKind { kConnective, kRelationWord };

struct AnswerSet {
  std::string label;
  std::vector<std::string> answers;  // first element is the fallback answer

  bool operator==(const AnswerSet&) const = default;
};

// Label -> answer words for one scheme. Words are stored lowercased and
// matched case-insensitively. Construction checks coverage and in-set
// duplicates; cross-set overlap and empty sets are reported by validate().
class Verbalizer {
 public:
  Verbalizer(SchemeId scheme, std::vector<AnswerSet> sets,
             AnswerKind kind = AnswerKind::kConnective);

  SchemeId scheme_id() const { return scheme_; }
  const SenseScheme& scheme() const { return pcp::scheme(scheme_); }
  AnswerKind kind() const { return kind_; }
  // In scheme label order.
  const std::vector<AnswerSet>& sets() const { return sets_; }
  const AnswerSet& set(std::size_t label_index) const {
    return sets_.at(label_index);
  }

  // Union of all answers, scheme label order then set order, no repeats.
  // This order is the prediction tie-break order.
  std::vector<std::string> candidates() const;

  // Throws UnmappedAnswerError for a word in no set and ContractError for a
  // word in several.
  std::size_t label_index_of(std::string_view word) const;
  const SenseLabel& label_of(std::string_view word) const;
  bool contains(std::size_t label_index, std::string_view word) const;

 private:
  SchemeId scheme_;
  AnswerKind kind_;
  std::vector<AnswerSet> sets_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> owners_;
};

// pdtb-second, pdtb-top, conll, pidrp-top, pedrr-second, pedrr-top.
std::vector<std::string> builtin_verbalizer_ids();
const Verbalizer& builtin_verbalizer(std::string_view id);

// The annotated connective when it belongs to the gold label's set, else the
// set's first answer. Relation-word verbalizers always use the first answer.
std::string gold_answer(const RelationInstance& instance,
                        const Verbalizer& verbalizer,
                        std::size_t gold_label_index);

// Top-level sets as the order-preserving union of their children's sets.
Verbalizer derive_top_level(const Verbalizer& second_level);

struct OverlapViolation {
  std::string word;
  std::string first_label;
  std::string second_label;
};

struct TokenViolation {
  std::string label;
  std::string word;
};

struct ValidationReport {
  std::vector<OverlapViolation> overlaps;
  std::vector<TokenViolation> multi_token;
  std::vector<std::string> empty_labels;

  bool ok() const {
    return overlaps.empty() && multi_token.empty() && empty_labels.empty();
  }
  std::string to_text() const;
};

ValidationReport validate(const Verbalizer& verbalizer, const Scorer& scorer);

struct InductionParams {
  std::size_t max_per_label = 5;
  // Minimum share of a connective's occurrences that fall in its majority
  // label.
  double ambiguity_threshold = 0.7;
};

struct ConnectiveFrequency {
  std::string connective;
  std::string majority_label;
  std::size_t in_label = 0;  // occurrences under the majority label
  std::size_t total = 0;     // occurrences under any label of the scheme
  double share = 0.0;
  bool single_token = false;
  std::string status;  // kept, ambiguous, multi-token or truncated
};

struct InductionResult {
  Verbalizer verbalizer;
  std::vector<ConnectiveFrequency> frequencies;

  std::string frequency_tsv() const;
};

// Frequency-based answer-set selection over annotated connectives. Each
// connective is considered only for its majority label; throws
// InductionError for a label left without candidates.
InductionResult induce_answer_sets(std::span<const RelationInstance> train,
                                   SchemeId scheme,
                                   const InductionParams& params,
                                   const Scorer& scorer);

// `label<TAB>word1,word2,...` per line, preceded by "# scheme: <id>" and
// "# kind: connective|relation" header comments.
std::string format_verbalizer(const Verbalizer& verbalizer);
// The scheme comes from the header when present, else from `scheme`, else
// it is inferred from the label set.
Verbalizer parse_verbalizer(std::istream& in,
                            std::optional<SchemeId> scheme = std::nullopt);

}  // namespace pcp

#endif  // PCP_VERBALIZER_H_
