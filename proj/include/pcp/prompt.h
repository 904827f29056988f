#ifndef PCP_PROMPT_H_
#define PCP_PROMPT_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcp {

// Backend-specific spellings of the abstract mask and segment markers. The
// defaults are the RoBERTa spellings, "</s></s>" being the pair RoBERTa puts
// between two segments.
struct Placeholders {
  std::string mask = "<mask>";
  std::string segment = "</s></s>";
};

enum class SlotKind { kLiteral, kArg1, kArg2, kConnective, kMask, kSegment };

struct Segment {
  SlotKind kind;
  std::string text;  // literal text; empty for slots

  bool operator==(const Segment&) const = default;
};

// Ordered segments with exactly one mask, one Arg1 and one Arg2 slot, and a
// connective slot iff the template requires a connective.
class Template {
 public:
  // Throws ArgumentError when the slot counts are wrong.
  Template(std::string id, std::vector<Segment> segments);

  // Pattern syntax: literal text with {arg1} {arg2} {conn} {mask} {sep}
  // placeholders; "{{" and "}}" escape braces. Throws ParseError.
  static Template from_pattern(std::string id, std::string_view pattern);

  const std::string& id() const { return id_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool requires_connective() const { return requires_connective_; }
  std::string pattern() const;

 private:
  std::string id_;
  std::vector<Segment> segments_;
  bool requires_connective_ = false;
};

struct RenderedPrompt {
  std::string text;
  std::string template_id;
  std::string mask_token;  // the placeholder spelling used in `text`
  std::string source;      // doc id of the source instance, if any
};

// T1..T6 (connective cloze templates), PIDRP and PEDRR, keyed by id.
const std::map<std::string, Template>& builtin_templates();
// Ids in presentation order: T1..T6, PIDRP, PEDRR.
std::vector<std::string> builtin_template_ids();
const Template& builtin_template(std::string_view id);

// Arguments and connective are whitespace-normalized and inserted verbatim.
// Throws ArgumentError on an empty argument, or when a connective is given
// to a template without a connective slot (or missing for one with it).
RenderedPrompt render(const Template& tmpl, std::string_view arg1,
                      std::string_view arg2,
                      std::optional<std::string_view> connective = std::nullopt,
                      const Placeholders& placeholders = {});

// Index of the unique mask token; ContractError if there are zero or several.
std::size_t mask_position(const RenderedPrompt& prompt,
                          std::span<const std::string> tokens);

// Template definition files: one `id<TAB>pattern` entry per line, '#'
// comments and blank lines ignored.
std::vector<Template> parse_template_file(std::istream& in);
std::string format_template_file(std::span<const Template> templates);

}  // namespace pcp

#endif  // PCP_PROMPT_H_
