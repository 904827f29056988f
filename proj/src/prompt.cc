#include "pcp/prompt.h"

#include <istream>

#include "pcp/error.h"
#include "pcp/text.h"

namespace pcp {
namespace {

struct PlaceholderName {
  const char* name;
  SlotKind kind;
};

constexpr PlaceholderName kPlaceholders[] = {
    {"arg1", SlotKind::kArg1},       {"arg2", SlotKind::kArg2},
    {"conn", SlotKind::kConnective}, {"mask", SlotKind::kMask},
    {"sep", SlotKind::kSegment},
};

const char* placeholder_name(SlotKind kind) {
  for (const auto& p : kPlaceholders) {
    if (p.kind == kind) return p.name;
  }
  return "";
}

constexpr const char* kPcpInstruction = "Arg1: {arg1}. Arg2: {arg2}.";

std::map<std::string, Template> make_builtins() {
  const std::string args = kPcpInstruction;
  const std::pair<const char*, std::string> patterns[] = {
      {"T1", "{arg1} {mask} {arg2}."},
      {"T2", "{arg1}. That's {mask} {arg2}."},
      {"T3", args + " The connective between Arg1 and Arg2 is {mask}."},
      {"T4", args + " The conjunction between Arg1 and Arg2 is {mask}."},
      {"T5", args + "{sep}The connective between Arg1 and Arg2 is {mask}."},
      {"T6", args + "{sep}The conjunction between Arg1 and Arg2 is {mask}."},
      {"PIDRP",
       args + " The discourse relation between Arg1 and Arg2 is {mask}."},
      {"PEDRR", args +
                    " The connective between Arg1 and Arg2 is {conn}. In "
                    "summary, the discourse relation between Arg1 and Arg2 "
                    "is {mask}."},
  };
  std::map<std::string, Template> out;
  for (const auto& [id, pattern] : patterns) {
    out.emplace(id, Template::from_pattern(id, pattern));
  }
  return out;
}

}  // namespace

Template::Template(std::string id, std::vector<Segment> segments)
    : id_(std::move(id)), segments_(std::move(segments)) {
  int arg1 = 0, arg2 = 0, conn = 0, mask = 0;
  for (const auto& s : segments_) {
    switch (s.kind) {
      case SlotKind::kArg1: ++arg1; break;
      case SlotKind::kArg2: ++arg2; break;
      case SlotKind::kConnective: ++conn; break;
      case SlotKind::kMask: ++mask; break;
      default: break;
    }
  }
  if (id_.empty()) throw ArgumentError("template id is empty");
  if (mask != 1 || arg1 != 1 || arg2 != 1 || conn > 1) {
    throw ArgumentError("template '" + id_ +
                        "' needs exactly one {mask}, {arg1} and {arg2} and at "
                        "most one {conn}");
  }
  requires_connective_ = conn == 1;
}

Template Template::from_pattern(std::string id, std::string_view pattern) {
  std::vector<Segment> segments;
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) segments.push_back({SlotKind::kLiteral, literal});
    literal.clear();
  };
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c == '{' && i + 1 < pattern.size() && pattern[i + 1] == '{') {
      literal.push_back('{');
      ++i;
      continue;
    }
    if (c == '}' && i + 1 < pattern.size() && pattern[i + 1] == '}') {
      literal.push_back('}');
      ++i;
      continue;
    }
    if (c == '}') {
      throw ParseError(0, "template '" + id + "': unmatched '}'");
    }
    if (c != '{') {
      literal.push_back(c);
      continue;
    }
    std::size_t close = pattern.find('}', i);
    if (close == std::string_view::npos) {
      throw ParseError(0, "template '" + id + "': unterminated placeholder");
    }
    std::string_view name = pattern.substr(i + 1, close - i - 1);
    bool known = false;
    for (const auto& p : kPlaceholders) {
      if (name == p.name) {
        flush();
        segments.push_back({p.kind, ""});
        known = true;
        break;
      }
    }
    if (!known) {
      throw ParseError(0, "template '" + id + "': unknown placeholder {" +
                              std::string(name) + "}");
    }
    i = close;
  }
  flush();
  try {
    return Template(std::move(id), std::move(segments));
  } catch (const ArgumentError& e) {
    throw ParseError(0, e.what());
  }
}

std::string Template::pattern() const {
  std::string out;
  for (const auto& s : segments_) {
    if (s.kind != SlotKind::kLiteral) {
      out += std::string("{") + placeholder_name(s.kind) + "}";
      continue;
    }
    for (char c : s.text) {
      out.push_back(c);
      if (c == '{' || c == '}') out.push_back(c);
    }
  }
  return out;
}

const std::map<std::string, Template>& builtin_templates() {
  static const std::map<std::string, Template> templates = make_builtins();
  return templates;
}

std::vector<std::string> builtin_template_ids() {
  return {"T1", "T2", "T3", "T4", "T5", "T6", "PIDRP", "PEDRR"};
}

const Template& builtin_template(std::string_view id) {
  const auto& all = builtin_templates();
  auto it = all.find(std::string(id));
  if (it == all.end()) {
    throw ArgumentError("unknown template '" + std::string(id) + "'");
  }
  return it->second;
}

RenderedPrompt render(const Template& tmpl, std::string_view arg1,
                      std::string_view arg2,
                      std::optional<std::string_view> connective,
                      const Placeholders& placeholders) {
  std::string a1 = normalize_whitespace(arg1);
  std::string a2 = normalize_whitespace(arg2);
  if (a1.empty() || a2.empty()) {
    throw ArgumentError("template '" + tmpl.id() + "': empty argument");
  }
  std::string conn;
  if (connective) conn = normalize_whitespace(*connective);
  if (tmpl.requires_connective() && conn.empty()) {
    throw ArgumentError("template '" + tmpl.id() + "' requires a connective");
  }
  if (!tmpl.requires_connective() && connective) {
    throw ArgumentError("template '" + tmpl.id() +
                        "' has no connective slot");
  }
  RenderedPrompt out;
  out.template_id = tmpl.id();
  out.mask_token = placeholders.mask;
  for (const auto& s : tmpl.segments()) {
    switch (s.kind) {
      case SlotKind::kLiteral: out.text += s.text; break;
      case SlotKind::kArg1: out.text += a1; break;
      case SlotKind::kArg2: out.text += a2; break;
      case SlotKind::kConnective: out.text += conn; break;
      case SlotKind::kMask: out.text += placeholders.mask; break;
      case SlotKind::kSegment: out.text += placeholders.segment; break;
    }
  }
  return out;
}

std::size_t mask_position(const RenderedPrompt& prompt,
                          std::span<const std::string> tokens) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != prompt.mask_token) continue;
    if (found) {
      throw ContractError("tokenization contains more than one mask token");
    }
    found = i;
  }
  if (!found) throw ContractError("tokenization contains no mask token");
  return *found;
}

std::vector<Template> parse_template_file(std::istream& in) {
  std::vector<Template> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = normalize_whitespace(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(line_no, "expected 'id<TAB>pattern'");
    }
    std::string id = normalize_whitespace(line.substr(0, tab));
    try {
      out.push_back(Template::from_pattern(id, line.substr(tab + 1)));
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::string format_template_file(std::span<const Template> templates) {
  std::string out;
  for (const auto& t : templates) out += t.id() + "\t" + t.pattern() + "\n";
  return out;
}

}  // namespace pcp
