#ifndef PCP_SENSE_H_
#define PCP_SENSE_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcp {

enum class SchemeId {
  kPdtbTop4,
  kPdtbSecond11,
  kConll15,
  kPdtbTopExplicit,
  kPdtbSecondExplicit,
};

struct SenseLabel {
  SchemeId scheme;
  std::string name;                   // e.g. "Comparison.Concession"
  std::optional<std::string> parent;  // top-level name, second-level only

  bool operator==(const SenseLabel&) const = default;
};

// A fixed, ordered label inventory. The order defines confusion-matrix axes
// and the tie-breaking order used at prediction time.
class SenseScheme {
 public:
  SenseScheme(SchemeId id, std::vector<SenseLabel> labels);

  SchemeId id() const { return id_; }
  const std::vector<SenseLabel>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  const SenseLabel& label(std::size_t i) const { return labels_.at(i); }
  std::optional<std::size_t> index_of(std::string_view name) const;

 private:
  SchemeId id_;
  std::vector<SenseLabel> labels_;
};

const SenseScheme& scheme(SchemeId id);

std::string scheme_name(SchemeId id);
// Accepts the enum spelling ("PdtbSecond11"); throws ArgumentError otherwise.
SchemeId parse_scheme(std::string_view name);
std::vector<SchemeId> all_schemes();

bool is_second_level(SchemeId id);
bool is_explicit_scheme(SchemeId id);
// kPdtbSecond11 -> kPdtbTop4, kPdtbSecondExplicit -> kPdtbTopExplicit,
// top-level and CoNLL schemes map to themselves.
SchemeId top_level_scheme(SchemeId id);

// "Contingency.Cause.Reason" -> "Contingency"; "EntRel" -> "EntRel".
std::string top_level_name(std::string_view sense);

}  // namespace pcp

#endif  // PCP_SENSE_H_
