#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maskadv::csv {

// RFC-4180-style reader: quoted fields may contain commas, escaped quotes
// ("") and newlines. Unquoted fields are trimmed of surrounding blanks.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Reads one record. Returns false on clean end of input. The line number
  // of the record's first character is stored in `line`.
  bool next(std::vector<std::string>& fields, std::size_t& line);

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::string escape(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace maskadv::csv
