// Text form of OperatorSum.
//
//   sum      := "0" | term (" + " term)*
//   term     := coeff " * " ("1" | factor (" " factor)*)
//   coeff    := real | "(" real "," real ")"
//   factor   := "a" mode ["†"] "(" time ["," ("+"|"-")] ["," "#" rank] ")"
//
// Reals are printed with up to 17 significant digits and read back exactly.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <string_view>

#include "twigner/operator_algebra.hpp"

namespace twigner {

namespace {

constexpr std::string_view kDagger = "\xE2\x80\xA0";  // U+2020

// Shortest of %.15g..%.17g that reads back exactly.
std::string fmt_real(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string fmt_coeff(cplx c) {
  if (c.imag() == 0.0) return fmt_real(c.real());
  return "(" + fmt_real(c.real()) + "," + fmt_real(c.imag()) + ")";
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  OperatorSum sum() {
    OperatorSum out;
    skip_ws();
    if (peek() == '0' && rest_is_blank(pos_ + 1)) return out;
    while (true) {
      term(out);
      skip_ws();
      if (pos_ == s_.size()) break;
      expect('+');
    }
    return out;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression text at offset " + std::to_string(pos_) + ": " + what);
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  bool rest_is_blank(std::size_t from) const {
    for (std::size_t i = from; i < s_.size(); ++i) {
      if (!std::isspace(static_cast<unsigned char>(s_[i]))) return false;
    }
    return true;
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  double real() {
    skip_ws();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }
  long integer() {
    skip_ws();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin) fail("expected an integer");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  void term(OperatorSum& out) {
    skip_ws();
    cplx c;
    if (peek() == '(') {
      ++pos_;
      const double re = real();
      expect(',');
      const double im = real();
      expect(')');
      c = {re, im};
    } else {
      c = real();
    }
    expect('*');
    skip_ws();
    FactorList f;
    if (peek() == '1') {
      ++pos_;
    } else {
      while (true) {
        skip_ws();
        if (peek() != 'a') break;
        f.push_back(factor());
      }
      if (f.empty()) fail("expected a factor or 1");
    }
    out.add(f, c);
  }

  LadderFactor factor() {
    expect('a');
    LadderFactor f;
    f.mode = static_cast<int>(integer());
    if (f.mode < 0) fail("negative mode");
    if (s_.compare(pos_, kDagger.size(), kDagger) == 0) {
      f.dagger = true;
      pos_ += kDagger.size();
    } else if (s_.compare(pos_, 2, "^+") == 0) {
      f.dagger = true;
      pos_ += 2;
    }
    expect('(');
    f.time = real();
    skip_ws();
    while (peek() == ',') {
      ++pos_;
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        f.branch = peek() == '+' ? Branch::Forward : Branch::Reverse;
        ++pos_;
      } else if (peek() == '#') {
        ++pos_;
        f.generic_order = integer();
      } else {
        fail("expected branch or rank");
      }
      skip_ws();
    }
    expect(')');
    return f;
  }
};

}  // namespace

std::string to_text(const LadderFactor& f) {
  std::string s = "a" + std::to_string(f.mode);
  if (f.dagger) s += kDagger;
  s += "(" + fmt_real(f.time);
  if (f.branch) s += *f.branch == Branch::Forward ? ",+" : ",-";
  if (f.generic_order) s += ",#" + std::to_string(*f.generic_order);
  return s + ")";
}

std::string to_text(const OperatorSum& expr) {
  if (expr.empty()) return "0";
  std::string out;
  for (const auto& [factors, c] : expr.terms()) {
    if (!out.empty()) out += " + ";
    out += fmt_coeff(c) + " *";
    if (factors.empty()) out += " 1";
    for (const auto& f : factors) out += " " + to_text(f);
  }
  return out;
}

OperatorSum parse_text(const std::string& text) { return Parser(text).sum(); }

}  // namespace twigner
