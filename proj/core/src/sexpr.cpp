#include "sl/sexpr.hpp"

#include "sl/errors.hpp"

namespace sl {

std::string_view SExpr::head() const {
  if (atom || items.empty() || !items.front().atom) return {};
  return items.front().text;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  std::vector<SExpr> all() {
    std::vector<SExpr> out;
    skip();
    while (pos_ < src_.size()) {
      out.push_back(one());
      skip();
    }
    return out;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr one() {
    SExpr e;
    e.line = line_;
    e.col = col_;
    char c = src_[pos_];
    if (c == ')') throw SyntaxError(line_, col_, "unexpected ')'");
    if (c == '(') {
      e.atom = false;
      advance();
      skip();
      while (true) {
        if (pos_ >= src_.size()) throw SyntaxError(e.line, e.col, "unbalanced '('");
        if (src_[pos_] == ')') {
          advance();
          break;
        }
        e.items.push_back(one());
        skip();
      }
      return e;
    }
    std::size_t start = pos_;
    while (pos_ < src_.size()) {
      char d = src_[pos_];
      if (d == '(' || d == ')' || d == ';' || d == ' ' || d == '\t' || d == '\n' || d == '\r') break;
      advance();
    }
    e.text = std::string(src_.substr(start, pos_ - start));
    return e;
  }
};

}  // namespace

std::vector<SExpr> readSExprs(std::string_view text) { return Reader(text).all(); }

}  // namespace sl
