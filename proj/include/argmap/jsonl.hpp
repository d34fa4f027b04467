#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <string>

#include <json.hpp>

namespace argmap::jsonl {

using Json = nlohmann::json;

// Calls fn(record, line_number) for every non-blank line of `in`. Lines whose
// first non-space character is '#' are comments. Every record must be a JSON
// object; anything else raises ParseError with the offending line number.
void for_each_record(std::istream& in,
                     const std::function<void(const Json&, std::size_t)>& fn);

// Typed field access; missing or mistyped fields raise ParseError.
std::string require_string(const Json& rec, const char* key, std::size_t line);
std::optional<std::string> optional_string(const Json& rec, const char* key,
                                           std::size_t line);
long long require_int(const Json& rec, const char* key, std::size_t line);
bool require_bool(const Json& rec, const char* key, std::size_t line);

}  // namespace argmap::jsonl
