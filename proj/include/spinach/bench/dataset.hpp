#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spinach/common/error.hpp"
#include "spinach/eval/cells.hpp"

namespace spinach::bench {

enum class DatasetSource { spinach_dev, spinach_test, qald, wwq, custom };

std::string_view to_string(DatasetSource source);
/// Accepts "spinach-dev", "spinach-test", "qald", "wwq", "custom". Throws InvalidArgument.
DatasetSource parse_source(std::string_view name);

struct DatasetExample {
    std::string id;
    std::string question;
    std::string gold_sparql;
    std::optional<eval::ResultTable> gold_results;
    DatasetSource source = DatasetSource::custom;
};

/// A record that does not fit the declared schema. `index` is the 0-based
/// position of the offending record in the file.
class SchemaError : public Error {
public:
    SchemaError(const std::string& what, std::size_t index)
        : Error("record " + std::to_string(index) + ": " + what), index_(index)
    {
    }
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

/// Reads a dataset file.
///
/// SPINACH-style files are a JSON array or JSON Lines of objects with `id`
/// (string or integer), `question` and `sparql`. QALD files (`{"questions":
/// [...]}` with multilingual question strings and `query.sparql`) are mapped
/// to the same shape using the English question; they are detected by shape
/// regardless of `source`. Ids must be unique. Throws SchemaError, or Error
/// when the file cannot be read or parsed at all.
std::vector<DatasetExample> load_dataset(const std::filesystem::path& path,
                                         DatasetSource source = DatasetSource::custom);

} // namespace spinach::bench
