#include "maskadv/csv.hpp"

#include <istream>
#include <ostream>

namespace maskadv::csv {

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

void trim(std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_blank(s[b])) ++b;
  while (e > b && is_blank(s[e - 1])) --e;
  s = s.substr(b, e - b);
}

}  // namespace

bool Reader::next(std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  int c = in_.peek();
  if (c == EOF) return false;
  line = line_;

  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  bool saw_any = false;

  auto finish_field = [&] {
    if (!quoted) trim(field);
    fields.push_back(std::move(field));
    field.clear();
    quoted = false;
  };

  while ((c = in_.get()) != EOF) {
    saw_any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in_.peek() == '"') {
          field.push_back('"');
          in_.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(static_cast<char>(c));
      }
    } else if (c == '"' && field.empty() && !quoted) {
      in_quotes = true;
      quoted = true;
    } else if (c == ',') {
      finish_field();
    } else if (c == '\n') {
      ++line_;
      break;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
  if (!saw_any) return false;
  finish_field();

  // A record of one empty field is a blank line; skip it and recurse so
  // trailing newlines do not produce phantom rows.
  if (fields.size() == 1 && fields[0].empty() && !quoted) {
    return next(fields, line);
  }
  return true;
}

std::string escape(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!field.empty() && (is_blank(field.front()) || is_blank(field.back())))
    needs_quotes = true;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(',');
    out << escape(fields[i]);
  }
  out.put('\n');
}

}  // namespace maskadv::csv
