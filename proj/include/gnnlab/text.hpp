#ifndef GNNLAB_TEXT_HPP
#define GNNLAB_TEXT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gnnlab {

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

std::optional<double> try_parse_double(std::string_view text);
std::optional<std::uint64_t> try_parse_u64(std::string_view text);
std::optional<long long> try_parse_i64(std::string_view text);

std::string_view trim(std::string_view text);
/// Splits on `sep`, trimming each piece; an empty input gives no pieces.
std::vector<std::string_view> split(std::string_view text, char sep);
/// Splits on runs of spaces and tabs.
std::vector<std::string_view> split_whitespace(std::string_view text);

} // namespace gnnlab

#endif // GNNLAB_TEXT_HPP
