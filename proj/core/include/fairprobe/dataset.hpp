#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairprobe/schema.hpp"

namespace fairprobe {

struct LabeledRow {
  FeatureVector features;
  std::size_t label = 0; ///< index into FeatureSchema::label_names()

  bool operator==(const LabeledRow&) const = default;
};

/// Immutable after construction; safe to share read-only between threads.
class StructuredDataset {
public:
  /// Throws DataError naming the offending row when a row violates the schema.
  StructuredDataset(FeatureSchema schema, std::vector<LabeledRow> rows);

  const FeatureSchema& schema() const noexcept { return schema_; }
  std::span<const LabeledRow> rows() const noexcept { return rows_; }
  const LabeledRow& row(std::size_t i) const { return rows_.at(i); }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  bool operator==(const StructuredDataset&) const = default;

private:
  FeatureSchema schema_;
  std::vector<LabeledRow> rows_;
};

/// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Parses a CSV document whose header names every schema feature plus the
/// label column, in any order. An `origin` column is accepted and ignored.
StructuredDataset parse_structured(std::istream& in, const FeatureSchema& schema);
StructuredDataset load_structured(const std::filesystem::path& path, const FeatureSchema& schema);

/// Writes the dataset in schema column order with the label column last.
/// When `original_rows` is set, an `origin` column is appended marking rows
/// before that index `original` and the rest `augmented`.
void write_structured(std::ostream& out, const StructuredDataset& data,
                      std::optional<std::size_t> original_rows = std::nullopt);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

} // namespace fairprobe
