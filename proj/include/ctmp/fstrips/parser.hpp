#pragma once

#include "ctmp/fstrips/model.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctmp::fs {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }
    int line() const { return line_; }

private:
    int line_;
};

struct Sexp {
    bool is_list = false;
    std::string atom;
    std::vector<Sexp> items;
    int line = 0;

    bool is(std::string_view s) const { return !is_list && atom == s; }
};

/// Reads every top-level s-expression of the text. ';' starts a comment.
std::vector<Sexp> read_sexps(std::string_view text);

/// Parses a problem in the Lisp-like format documented in
/// docs/problem-format.md and finalizes it. "@" symbols are bound by name
/// from the registry.
std::shared_ptr<Problem> parse_problem(std::string_view text, std::shared_ptr<const ProcedureRegistry> procedures);

}  // namespace ctmp::fs
