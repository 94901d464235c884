#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace disparity {

/// Error with a 1-based line number from a text input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Splits one CSV record on commas. Quoted fields are not supported.
std::vector<std::string_view> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

/// Strict numeric parse of the whole field; "inf" and "-inf" are accepted.
bool parse_double(std::string_view field, double& out);

/// Shortest representation that reads back to the same double.
std::string format_double(double x);

/// Reads a whole file. Throws std::runtime_error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// `key = value` lines; '#' starts a comment; blank lines ignored.
/// Throws ParseError on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(std::string_view text, const std::string& source);

}  // namespace disparity
