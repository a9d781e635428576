#include "fairprobe/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "fairprobe/error.hpp"

namespace fairprobe {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') {
    ++begin;
  }
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || begin == end) {
    return std::nullopt;
  }
  return v;
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out += c;
    }
  }
  out += '"';
  return out;
}

} // namespace

StructuredDataset::StructuredDataset(FeatureSchema schema, std::vector<LabeledRow> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& row = rows_[r];
    if (row.features.size() != schema_.size()) {
      throw DataError("row " + std::to_string(r) + " has " + std::to_string(row.features.size()) +
                      " features, schema has " + std::to_string(schema_.size()));
    }
    for (std::size_t i = 0; i < row.features.size(); ++i) {
      if (!schema_.feature(i).admits(row.features[i])) {
        throw DataError("row " + std::to_string(r) + ": value " + format_number(row.features[i]) +
                        " outside the domain of '" + schema_.feature(i).name + "'");
      }
    }
    if (row.label >= schema_.label_names().size()) {
      throw DataError("row " + std::to_string(r) + ": label index out of range");
    }
  }
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(trim(current));
  return fields;
}

StructuredDataset parse_structured(std::istream& in, const FeatureSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw DataError("missing header row", 1);
  }
  ++line_no;
  const auto header = split_csv_line(line);

  // column position of each schema feature, the label and the optional origin
  std::vector<std::size_t> feature_column(schema.size(), header.size());
  std::size_t label_column = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (name == schema.label_column()) {
      label_column = c;
    } else if (auto idx = schema.index_of(name)) {
      if (feature_column[*idx] != header.size()) {
        throw DataError("duplicate column '" + name + "'", line_no);
      }
      feature_column[*idx] = c;
    } else if (name != "origin") {
      throw DataError("schema mismatch: unexpected column '" + name + "'", line_no);
    }
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (feature_column[i] == header.size()) {
      throw DataError("schema mismatch: missing column '" + schema.feature(i).name + "'", line_no);
    }
  }
  if (label_column == header.size()) {
    throw DataError("schema mismatch: missing label column '" + schema.label_column() + "'", line_no);
  }

  std::vector<LabeledRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " cells, found " +
                          std::to_string(cells.size()),
                      line_no);
    }
    LabeledRow row;
    row.features.resize(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& spec = schema.feature(i);
      const auto& cell = cells[feature_column[i]];
      if (spec.is_categorical()) {
        auto idx = spec.value_index(cell);
        if (!idx) {
          throw DataError("value '" + cell + "' is not in the domain of '" + spec.name + "'", line_no);
        }
        row.features[i] = static_cast<double>(*idx);
      } else {
        auto v = parse_double(cell);
        if (!v) {
          throw DataError("unparseable number '" + cell + "' in column '" + spec.name + "'", line_no);
        }
        if (!spec.admits(*v)) {
          const auto& c = spec.continuous();
          throw DataError("value " + cell + " of '" + spec.name + "' outside [" + format_number(c.min) + ", " +
                              format_number(c.max) + "]" + (c.integer ? " or not an integer" : ""),
                          line_no);
        }
        row.features[i] = *v;
      }
    }
    const auto& label_cell = cells[label_column];
    auto label = schema.label_index(label_cell);
    if (!label) {
      throw DataError("unknown label '" + label_cell + "'", line_no);
    }
    row.label = *label;
    rows.push_back(std::move(row));
  }
  return StructuredDataset(schema, std::move(rows));
}

StructuredDataset load_structured(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open data file " + path.string());
  }
  try {
    return parse_structured(in, schema);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_structured(std::ostream& out, const StructuredDataset& data, std::optional<std::size_t> original_rows) {
  const auto& schema = data.schema();
  for (const auto& f : schema.features()) {
    out << quote_if_needed(f.name) << ',';
  }
  out << quote_if_needed(schema.label_column());
  if (original_rows) {
    out << ",origin";
  }
  out << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto& row = data.row(r);
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& spec = schema.feature(i);
      if (spec.is_categorical()) {
        out << quote_if_needed(spec.categorical().values.at(static_cast<std::size_t>(row.features[i])));
      } else {
        out << format_number(row.features[i]);
      }
      out << ',';
    }
    out << quote_if_needed(schema.label_names().at(row.label));
    if (original_rows) {
      out << (r < *original_rows ? ",original" : ",augmented");
    }
    out << '\n';
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    return std::to_string(v);
  }
  return std::string(buf, ptr);
}

} // namespace fairprobe
