#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spinach::eval {

enum class DatePrecision { year, month, day, second };

/// One value of a result table. Cells compare by kind and canonical text, so
/// equality is structural and usable as a hash key.
class ResultCell {
public:
    enum class Kind { entity, literal, number, date, boolean, unbound };

    static ResultCell entity(std::string id);
    /// Collapses internal whitespace; `fold_case` lower-cases (label mode).
    static ResultCell literal(std::string_view text, bool fold_case = false);
    /// Numbers are canonicalized to 10 significant digits.
    static ResultCell number(long double value);
    static ResultCell date(std::int64_t year, int month, int day, DatePrecision precision, int hour = 0,
                           int minute = 0, int second = 0);
    static ResultCell boolean(bool value);
    static ResultCell unbound();

    Kind kind() const { return kind_; }
    const std::string& text() const { return text_; }
    std::optional<DatePrecision> precision() const { return precision_; }

    /// Kind-tagged canonical form, e.g. "E:Q5", "N:1.5", "D:2021-06-23".
    std::string key() const;

    bool operator==(const ResultCell& other) const { return kind_ == other.kind_ && text_ == other.text_; }
    bool operator<(const ResultCell& other) const
    {
        return kind_ != other.kind_ ? kind_ < other.kind_ : text_ < other.text_;
    }

private:
    ResultCell(Kind kind, std::string text, std::optional<DatePrecision> p = std::nullopt)
        : kind_(kind), text_(std::move(text)), precision_(p)
    {
    }

    Kind kind_;
    std::string text_;
    std::optional<DatePrecision> precision_;
};

using Row = std::vector<ResultCell>;

/// A SELECT result (rows × columns) or an ASK answer.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<Row> rows;
    std::optional<bool> boolean;

    static ResultTable from_boolean(bool value);
    static ResultTable from_rows(std::vector<std::string> columns, std::vector<Row> rows);

    bool is_boolean() const { return boolean.has_value(); }
    bool operator==(const ResultTable&) const = default;
};

/// Removes repeated rows, keeping first occurrences in order.
ResultTable deduplicate_rows(ResultTable table);

} // namespace spinach::eval
