#include "spinach/eval/cells.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <fmt/format.h>

#include "spinach/common/error.hpp"
#include "spinach/common/text.hpp"

namespace spinach::eval {

namespace {

std::string canonical_number(long double value)
{
    if (value == 0) {
        return "0";
    }
    if (!std::isfinite(static_cast<double>(value))) {
        return value > 0 ? "inf" : (value < 0 ? "-inf" : "nan");
    }
    // Ten significant digits in scientific form, then strip trailing zeros.
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9Le", value);
    std::string s(buf);
    auto e = s.find('e');
    std::string mantissa = s.substr(0, e);
    int exponent = std::stoi(s.substr(e + 1));
    if (mantissa.find('.') != std::string::npos) {
        while (mantissa.back() == '0') {
            mantissa.pop_back();
        }
        if (mantissa.back() == '.') {
            mantissa.pop_back();
        }
    }
    // Render plainly when the exponent is moderate so "1000" and "1e3" agree.
    bool negative = mantissa.front() == '-';
    std::string digits;
    for (char c : mantissa) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
        }
    }
    if (exponent < -6 || exponent > 20) {
        return fmt::format("{}e{}", mantissa, exponent);
    }
    std::string out;
    int point = exponent + 1; // digits before the decimal point
    if (point <= 0) {
        out = "0." + std::string(static_cast<std::size_t>(-point), '0') + digits;
    } else if (static_cast<std::size_t>(point) >= digits.size()) {
        out = digits + std::string(point - digits.size(), '0');
    } else {
        out = digits.substr(0, point) + "." + digits.substr(point);
    }
    return negative ? "-" + out : out;
}

} // namespace

ResultCell ResultCell::entity(std::string id)
{
    return ResultCell(Kind::entity, std::move(id));
}

ResultCell ResultCell::literal(std::string_view text, bool fold_case)
{
    auto collapsed = text::collapse_whitespace(text);
    return ResultCell(Kind::literal, fold_case ? text::to_lower(collapsed) : collapsed);
}

ResultCell ResultCell::number(long double value)
{
    return ResultCell(Kind::number, canonical_number(value));
}

ResultCell ResultCell::date(std::int64_t year, int month, int day, DatePrecision precision, int hour, int minute,
                            int second)
{
    std::string text = year < 0 ? fmt::format("-{:04d}", -year) : fmt::format("{:04d}", year);
    if (precision != DatePrecision::year) {
        text += fmt::format("-{:02d}", month);
    }
    if (precision == DatePrecision::day || precision == DatePrecision::second) {
        text += fmt::format("-{:02d}", day);
    }
    if (precision == DatePrecision::second) {
        text += fmt::format("T{:02d}:{:02d}:{:02d}", hour, minute, second);
    }
    return ResultCell(Kind::date, std::move(text), precision);
}

ResultCell ResultCell::boolean(bool value)
{
    return ResultCell(Kind::boolean, value ? "true" : "false");
}

ResultCell ResultCell::unbound()
{
    return ResultCell(Kind::unbound, "");
}

std::string ResultCell::key() const
{
    static constexpr char tags[] = {'E', 'L', 'N', 'D', 'B', 'U'};
    std::string k(1, tags[static_cast<int>(kind_)]);
    k.push_back(':');
    k += text_;
    return k;
}

ResultTable ResultTable::from_boolean(bool value)
{
    ResultTable t;
    t.boolean = value;
    return t;
}

ResultTable ResultTable::from_rows(std::vector<std::string> columns, std::vector<Row> rows)
{
    for (const auto& row : rows) {
        if (row.size() != columns.size()) {
            throw InvalidArgument("result table is not rectangular");
        }
    }
    ResultTable t;
    t.columns = std::move(columns);
    t.rows = std::move(rows);
    return t;
}

ResultTable deduplicate_rows(ResultTable table)
{
    std::unordered_set<std::string> seen;
    std::vector<Row> kept;
    kept.reserve(table.rows.size());
    for (auto& row : table.rows) {
        std::string key;
        for (const auto& cell : row) {
            key += cell.key();
            key.push_back('\x1f');
        }
        if (seen.insert(std::move(key)).second) {
            kept.push_back(std::move(row));
        }
    }
    table.rows = std::move(kept);
    return table;
}

} // namespace spinach::eval
