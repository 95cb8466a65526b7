#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mst/syntax.hpp"

namespace mst {

struct SourceFile {
  std::string filename;
  std::string text;
};

// Parses and merges several files into one program; access points, channels
// and types share one namespace across the files.
Program parse_files(const std::vector<SourceFile>& files);
Program parse_program(const std::string& text, const std::string& filename = "<input>");

// Standalone parsers. Names (types, channels, Class.State) resolve against p when given.
Session parse_session_type(const std::string& text, const Program* p = nullptr);
ValueType parse_value_type(const std::string& text, const Program* p = nullptr);
FieldTyping parse_field_typing(const std::string& text, const Program* p = nullptr);
Channel parse_channel_type(const std::string& text, const Program* p = nullptr);
// Bare identifiers stay variables; no class context is applied.
ExprPtr parse_expr(const std::string& text);

// The surface convention: a method with an enumeration result whose continuation
// is a variant really returns linkthis.
Session desugar_linkthis(const Session& s);

}  // namespace mst
