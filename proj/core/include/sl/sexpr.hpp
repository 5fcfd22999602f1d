#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sl {

// Minimal s-expression reader shared by the source and tail formats.
// `;` starts a comment running to the end of the line.
struct SExpr {
  bool atom = true;
  std::string text;
  std::vector<SExpr> items;
  int line = 1;
  int col = 1;

  bool isList() const { return !atom; }
  bool isAtom(std::string_view s) const { return atom && text == s; }
  // Head keyword of a list, or empty.
  std::string_view head() const;
};

std::vector<SExpr> readSExprs(std::string_view text);

}  // namespace sl
