/*
 * Copyright 2026 The fairrecourse Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fairrecourse/io.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fairrecourse/text.hpp"
#include "json.hpp"

namespace fairrecourse {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read '" + path.string() + "'");
  return buf.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

// ---- JSON helpers with path-qualified errors -------------------------------

class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError(path_ + ": " + what);
  }

  const json& raw() const { return value_; }
  const std::string& path() const { return path_; }

  void expect_object(std::initializer_list<std::string_view> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    for (const auto& [key, _] : value_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        Node(value_, path_ + "." + key).fail("unknown key");
      }
    }
  }

  bool has(const std::string& key) const { return value_.contains(key) && !value_.at(key).is_null(); }
  Node at(const std::string& key) const {
    if (!has(key)) fail("missing key '" + key + "'");
    return Node(value_.at(key), path_ + "." + key);
  }
  Node at(std::size_t i) const { return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const { return value_.size(); }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }
  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }
  std::size_t count() const {
    if (!value_.is_number_integer() || value_.get<long long>() < 0) fail("expected a non-negative integer");
    return value_.get<std::size_t>();
  }
  void expect_array() const {
    if (!value_.is_array()) fail("expected an array");
  }

 private:
  const json& value_;
  std::string path_;
};

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw SchemaError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": malformed JSON");
  }
}

std::string scalar_text(const Node& node) {
  if (node.raw().is_string()) return node.string();
  return format_double(node.number());
}

std::vector<double> read_vector(const Node& node, const std::vector<AttributeSpec>& attributes,
                                bool missing_is_zero) {
  std::vector<double> out(attributes.size(), 0.0);
  if (node.raw().is_array()) {
    if (node.size() != attributes.size()) {
      node.fail("expected " + std::to_string(attributes.size()) + " values");
    }
    for (std::size_t k = 0; k < attributes.size(); ++k) out[k] = node.at(k).number();
    return out;
  }
  if (!node.raw().is_object()) node.fail("expected an array or an object keyed by attribute name");
  std::vector<bool> seen(attributes.size(), false);
  for (const auto& [key, value] : node.raw().items()) {
    auto it = std::find_if(attributes.begin(), attributes.end(),
                           [&](const AttributeSpec& a) { return a.name == key; });
    const Node child(value, node.path() + "." + key);
    if (it == attributes.end()) child.fail("unknown attribute");
    const auto k = static_cast<std::size_t>(it - attributes.begin());
    out[k] = child.number();
    seen[k] = true;
  }
  if (!missing_is_zero) {
    for (std::size_t k = 0; k < attributes.size(); ++k) {
      if (!seen[k]) node.fail("missing value for attribute '" + attributes[k].name + "'");
    }
  }
  return out;
}

AttributeSpec read_attribute(const Node& node) {
  node.expect_object({"name", "kind", "weight", "immutable", "step", "min", "max"});
  AttributeSpec a;
  a.name = node.at("name").string();
  if (node.has("kind")) {
    const std::string kind = node.at("kind").string();
    if (kind == "numeric") {
      a.kind = AttributeKind::kNumeric;
    } else if (kind == "binary") {
      a.kind = AttributeKind::kBinary;
    } else {
      node.at("kind").fail("unknown attribute kind '" + kind + "'");
    }
  }
  const bool binary = a.kind == AttributeKind::kBinary;
  bool immutable = node.has("immutable") && node.at("immutable").boolean();
  if (node.has("weight")) {
    const Node w = node.at("weight");
    if (w.raw().is_string()) {
      if (w.string() != "immutable") w.fail("expected a positive number or \"immutable\"");
      immutable = true;
    } else if (immutable) {
      w.fail("an immutable attribute takes no weight");
    } else {
      const double value = w.number();
      if (!(value > 0.0)) w.fail("weight must be positive");
      a.recourse_weight = value;
    }
  } else if (!immutable) {
    node.fail("missing key 'weight' (use \"immutable\" for attributes that cannot change)");
  }
  a.action_step = node.has("step") ? node.at("step").number() : 1.0;
  if (!(a.action_step > 0.0)) node.at("step").fail("step must be positive");
  if (binary) {
    a.min = node.has("min") ? node.at("min").number() : 0.0;
    a.max = node.has("max") ? node.at("max").number() : 1.0;
  } else {
    a.min = node.at("min").number();
    a.max = node.at("max").number();
  }
  if (a.min > a.max) node.fail("min exceeds max");
  return a;
}

CounterfactualTarget read_target(const Node& node, const std::vector<AttributeSpec>& attributes) {
  if (!node.raw().is_object()) node.fail("expected an object");
  const std::string type = node.at("type").string();
  if (type == "hyperplane") {
    node.expect_object({"type", "coefficients", "threshold", "accepted_side"});
    Hyperplane h;
    h.coefficients = read_vector(node.at("coefficients"), attributes, true);
    h.threshold = node.has("threshold") ? node.at("threshold").number() : 0.0;
    if (node.has("accepted_side")) {
      const double side = node.at("accepted_side").number();
      if (side != 1.0 && side != -1.0) node.at("accepted_side").fail("expected 1 or -1");
      h.accepted_side = static_cast<int>(side);
    }
    return h;
  }
  if (type == "candidates") {
    node.expect_object({"type", "points"});
    const Node points = node.at("points");
    points.expect_array();
    if (points.size() == 0) points.fail("candidate set is empty");
    CandidateSet set;
    for (std::size_t i = 0; i < points.size(); ++i) {
      set.points.push_back(read_vector(points.at(i), attributes, false));
    }
    return set;
  }
  if (type == "point") {
    node.expect_object({"type", "point"});
    return SinglePoint{read_vector(node.at("point"), attributes, false)};
  }
  node.at("type").fail("unknown target type '" + type + "'");
}

ProtectedSpec read_protected(const Node& node) {
  node.expect_object({"attribute", "value", "groups", "protected_groups"});
  ProtectedSpec p;
  p.attribute = node.at("attribute").string();
  if (node.has("value")) p.value = scalar_text(node.at("value"));
  if (node.has("groups")) {
    const Node groups = node.at("groups");
    groups.expect_array();
    for (std::size_t i = 0; i < groups.size(); ++i) p.groups.push_back(scalar_text(groups.at(i)));
  }
  if (node.has("protected_groups")) {
    const Node groups = node.at("protected_groups");
    groups.expect_array();
    for (std::size_t i = 0; i < groups.size(); ++i) {
      p.protected_groups.push_back(scalar_text(groups.at(i)));
    }
  }
  if (p.value && !p.groups.empty()) node.fail("give either 'value' or 'groups', not both");
  if (!p.value && p.groups.empty()) node.fail("missing key 'value' or 'groups'");
  return p;
}

}  // namespace

Schema parse_schema(std::string_view text, const std::string& source) {
  const json doc = parse_json(text, source);
  const Node root(doc, "$");
  root.expect_object({"id_column", "attributes", "protected", "target", "counterfactual"});

  const Node attrs = root.at("attributes");
  attrs.expect_array();
  if (attrs.size() == 0) attrs.fail("no attributes declared");
  std::vector<AttributeSpec> attributes;
  for (std::size_t i = 0; i < attrs.size(); ++i) attributes.push_back(read_attribute(attrs.at(i)));

  ProtectedSpec protected_spec = read_protected(root.at("protected"));
  CounterfactualTarget target = read_target(root.at("target"), attributes);

  CounterfactualOptions options;
  if (root.has("counterfactual")) {
    const Node cf = root.at("counterfactual");
    cf.expect_object({"discretize", "max_changed_attributes"});
    if (cf.has("discretize")) options.discretize = cf.at("discretize").boolean();
    if (cf.has("max_changed_attributes")) {
      options.max_changed_attributes = cf.at("max_changed_attributes").count();
    }
  }
  std::optional<std::string> id_column;
  if (root.has("id_column")) id_column = root.at("id_column").string();

  try {
    return Schema(std::move(attributes), std::move(protected_spec), std::move(target), options,
                  std::move(id_column))
        .normalized();
  } catch (const SchemaError& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

Schema load_schema(const std::filesystem::path& path) {
  return parse_schema(read_file(path), path.string());
}

std::string schema_to_json(const Schema& schema) {
  ordered_json root;
  if (schema.id_column()) root["id_column"] = *schema.id_column();
  ordered_json attrs = ordered_json::array();
  for (const AttributeSpec& a : schema.attributes()) {
    ordered_json node;
    node["name"] = a.name;
    node["kind"] = a.kind == AttributeKind::kBinary ? "binary" : "numeric";
    if (a.recourse_weight) {
      node["weight"] = *a.recourse_weight;
    } else {
      node["weight"] = "immutable";
    }
    node["step"] = a.action_step;
    node["min"] = a.min;
    node["max"] = a.max;
    attrs.push_back(std::move(node));
  }
  root["attributes"] = std::move(attrs);

  const ProtectedSpec& p = schema.protected_spec();
  ordered_json prot;
  prot["attribute"] = p.attribute;
  if (p.value) {
    prot["value"] = *p.value;
  } else {
    prot["groups"] = p.groups;
    if (!p.protected_groups.empty()) prot["protected_groups"] = p.protected_groups;
  }
  root["protected"] = std::move(prot);

  auto named = [&](const std::vector<double>& v) {
    ordered_json out;
    for (std::size_t k = 0; k < v.size(); ++k) out[schema.attribute(k).name] = v[k];
    return out;
  };
  ordered_json target;
  if (const auto* h = std::get_if<Hyperplane>(&schema.target())) {
    target["type"] = "hyperplane";
    target["coefficients"] = named(h->coefficients);
    target["threshold"] = h->threshold;
    target["accepted_side"] = h->accepted_side;
  } else if (const auto* c = std::get_if<CandidateSet>(&schema.target())) {
    target["type"] = "candidates";
    target["points"] = c->points;
  } else {
    target["type"] = "point";
    target["point"] = std::get<SinglePoint>(schema.target()).point;
  }
  root["target"] = std::move(target);

  ordered_json cf;
  cf["discretize"] = schema.options().discretize;
  if (schema.options().max_changed_attributes) {
    cf["max_changed_attributes"] = *schema.options().max_changed_attributes;
  }
  root["counterfactual"] = std::move(cf);
  return root.dump(2) + "\n";
}

void write_schema(const std::filesystem::path& path, const Schema& schema) {
  write_text(path, schema_to_json(schema));
}

// ---- CSV --------------------------------------------------------------

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw InputError("unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_field(std::string_view text) {
  const bool needs_quotes = text.find_first_of(",\"\n\r") != std::string_view::npos ||
                            (!text.empty() && (text.front() == ' ' || text.back() == ' '));
  if (!needs_quotes) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> parse_header(std::string_view line) {
  std::vector<std::string> header = split_csv_line(line);
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  std::unordered_set<std::string> seen;
  for (auto& name : header) {
    name = trim(name);
    if (name.empty()) throw InputError("header has an empty column name");
    if (!seen.insert(name).second) throw InputError("header repeats column '" + name + "'");
  }
  return header;
}

std::string line_prefix(std::size_t line_number) { return "line " + std::to_string(line_number) + ": "; }

}  // namespace

RecordParser::RecordParser(const std::vector<std::string>& header, const Schema& schema)
    : schema_(schema), columns_(header.size()) {
  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  for (const AttributeSpec& a : schema.attributes()) {
    const auto col = find(a.name);
    if (!col) throw InputError("missing column '" + a.name + "'");
    column_of_attribute_.push_back(*col);
  }
  if (schema.id_column()) {
    id_column_ = find(*schema.id_column());
    if (!id_column_) throw InputError("missing id column '" + *schema.id_column() + "'");
  }
  if (const auto k = schema.protected_attribute_index()) {
    protected_column_ = column_of_attribute_[*k];
  } else {
    protected_column_ = find(schema.protected_spec().attribute);
    if (!protected_column_) {
      throw SchemaError("missing protected attribute column '" + schema.protected_spec().attribute + "'");
    }
  }
}

Record RecordParser::parse(std::string_view line, std::size_t line_number) const {
  std::vector<std::string> fields;
  try {
    fields = split_csv_line(line);
  } catch (const InputError& e) {
    throw InputError(line_prefix(line_number) + e.what());
  }
  if (fields.size() != columns_) {
    throw InputError(line_prefix(line_number) + "expected " + std::to_string(columns_) + " fields, found " +
                     std::to_string(fields.size()));
  }
  Record r;
  r.values.resize(schema_.size());
  for (std::size_t k = 0; k < schema_.size(); ++k) {
    const std::string& cell = fields[column_of_attribute_[k]];
    const auto value = parse_double(cell);
    const AttributeSpec& a = schema_.attribute(k);
    if (!value || !std::isfinite(*value)) {
      throw InputError(line_prefix(line_number) + "attribute '" + a.name + "': '" + trim(cell) +
                       "' is not a number");
    }
    if (*value < a.min || *value > a.max) {
      throw InputError(line_prefix(line_number) + "attribute '" + a.name + "': " + format_double(*value) +
                       " outside [" + format_double(a.min) + ", " + format_double(a.max) + "]");
    }
    if (a.kind == AttributeKind::kBinary && *value != 0.0 && *value != 1.0) {
      throw InputError(line_prefix(line_number) + "attribute '" + a.name + "': binary value must be 0 or 1");
    }
    r.values[k] = *value;
  }
  r.id = id_column_ ? trim(fields[*id_column_]) : std::string();
  r.protected_value = trim(fields[*protected_column_]);
  if (r.protected_value.empty()) {
    throw InputError(line_prefix(line_number) + "no value for protected attribute '" +
                     schema_.protected_spec().attribute + "'");
  }
  try {
    (void)group_of(r, schema_);
  } catch (const SchemaError& e) {
    throw InputError(line_prefix(line_number) + e.what());
  }
  return r;
}

Dataset parse_dataset(std::string_view text, const Schema& schema, const LoadOptions& options,
                      LoadReport* report) {
  std::size_t pos = 0;
  std::size_t line_number = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_number;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  std::string_view line;
  if (!next_line(line)) throw InputError("dataset is empty (a header row is required)");
  const auto header = parse_header(line);
  const RecordParser parser(header, schema);

  Dataset out;
  std::size_t row = 0;
  while (next_line(line)) {
    ++row;
    try {
      Record r = parser.parse(line, line_number);
      if (r.id.empty()) r.id = std::to_string(row);
      out.records.push_back(std::move(r));
    } catch (const InputError& e) {
      if (!options.skip_bad_rows) throw;
      if (report) report->skipped.emplace_back(e.what());
    }
  }
  if (out.empty()) throw InputError("dataset has no records");
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema, const LoadOptions& options,
                     LoadReport* report) {
  const std::string text = read_file(path);
  try {
    return parse_dataset(text, schema, options, report);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset, const Schema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const bool own_protected_column = !schema.protected_attribute_index();
  const std::string id_name = schema.id_column().value_or("id");
  out << csv_field(id_name);
  for (const AttributeSpec& a : schema.attributes()) out << ',' << csv_field(a.name);
  if (own_protected_column) out << ',' << csv_field(schema.protected_spec().attribute);
  out << '\n';
  for (const Record& r : dataset.records) {
    out << csv_field(r.id);
    for (double v : r.values) out << ',' << format_double(v);
    if (own_protected_column) out << ',' << csv_field(r.protected_value);
    out << '\n';
  }
  out.close();
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

CsvFile::CsvFile(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  // The header is the first non-blank line.
  while (std::getline(in_, line)) {
    offset_ += line.size() + 1;
    ++line_number_;
    if (!trim(line).empty()) {
      header_ = parse_header(line);
      return;
    }
  }
  throw InputError(path.string() + ": dataset is empty (a header row is required)");
}

bool CsvFile::next(std::string& line, std::uint64_t& offset, std::size_t& line_number) {
  while (true) {
    offset = offset_;
    if (!std::getline(in_, line)) return false;
    offset_ += line.size() + 1;
    line_number = ++line_number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) return true;
  }
}

std::string CsvFile::read_at(std::uint64_t offset) {
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(offset));
  std::string line;
  if (!std::getline(in_, line)) throw IoError("cannot re-read '" + path_.string() + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// ---- Rankings ---------------------------------------------------------------

RankingWriter::RankingWriter(const std::filesystem::path& path, const Schema& schema)
    : path_(path), out_(path, std::ios::binary), attributes_(schema.size()) {
  if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  out_ << "new_rank,orig_rank,id,group,orig_cost,new_cost,modified,modified_attrs";
  for (const AttributeSpec& a : schema.attributes()) out_ << ',' << csv_field(a.name);
  out_ << '\n';
}

void RankingWriter::write(const RankingRow& row) {
  if (row.values.size() != attributes_) throw InvariantError("ranking row has the wrong number of values");
  std::string line;
  line.reserve(64 + 12 * attributes_);
  line += std::to_string(row.new_rank);
  line += ',';
  line += std::to_string(row.orig_rank);
  line += ',';
  line += csv_field(row.id);
  line += ',';
  line += csv_field(row.group);
  line += ',';
  line += format_double(row.orig_cost);
  line += ',';
  line += format_double(row.new_cost);
  line += row.modified ? ",1," : ",0,";
  std::string attrs;
  for (std::size_t i = 0; i < row.modified_attrs.size(); ++i) {
    if (i) attrs += ';';
    attrs += row.modified_attrs[i];
  }
  line += csv_field(attrs);
  for (double v : row.values) {
    line += ',';
    line += format_double(v);
  }
  line += '\n';
  out_ << line;
}

void RankingWriter::close() {
  if (!out_.is_open()) return;
  out_.close();
  if (!out_) throw IoError("cannot write '" + path_.string() + "'");
}

RankingTable read_ranking(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty ranking file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  static const char* const kFixed[] = {"new_rank", "orig_rank", "id",       "group",
                                       "orig_cost", "new_cost",  "modified", "modified_attrs"};
  if (header.size() < 8) throw InputError(path.string() + ": not a ranking file");
  for (std::size_t i = 0; i < 8; ++i) {
    if (header[i] != kFixed[i]) throw InputError(path.string() + ": unexpected column '" + header[i] + "'");
  }
  RankingTable table;
  table.attributes.assign(header.begin() + 8, header.end());

  std::size_t number = 1;
  auto need_number = [&](const std::string& cell) {
    const auto v = parse_double(cell);
    if (!v) throw InputError(path.string() + ":" + std::to_string(number) + ": '" + cell + "' is not a number");
    return *v;
  };
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw InputError(path.string() + ":" + std::to_string(number) + ": wrong number of fields");
    }
    RankingRow row;
    row.new_rank = static_cast<std::size_t>(need_number(f[0]));
    row.orig_rank = static_cast<std::size_t>(need_number(f[1]));
    row.id = f[2];
    row.group = f[3];
    row.orig_cost = need_number(f[4]);
    row.new_cost = need_number(f[5]);
    row.modified = f[6] == "1";
    if (!f[7].empty()) {
      std::string_view rest = f[7];
      while (true) {
        const auto cut = rest.find(';');
        row.modified_attrs.emplace_back(rest.substr(0, cut));
        if (cut == std::string_view::npos) break;
        rest.remove_prefix(cut + 1);
      }
    }
    for (std::size_t i = 8; i < f.size(); ++i) row.values.push_back(need_number(f[i]));
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---- Metrics --------------------------------------------------------------

BlockSummary summarize_blocks(std::span<const BlockReport> reports) {
  BlockSummary s;
  s.block_count = reports.size();
  for (const BlockReport& r : reports) {
    if (!r.before.representation_fair) ++s.unfair_before;
    if (!r.after.representation_fair) ++s.unfair_after;
    if (r.fixed()) ++s.blocks_fixed;
    if (r.skipped) ++s.skipped;
  }
  return s;
}

namespace {

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

ordered_json fairness_json(const FairnessReport& f) {
  ordered_json j;
  j["r"] = f.r;
  j["mean_costs"] = f.mean_costs;
  j["counts"] = f.counts;
  j["rkl"] = f.quality.rkl;
  j["rnd"] = f.quality.rnd;
  j["rrd"] = f.quality.rrd;
  j["first_representation_violation"] = optional_json(f.first_representation_violation);
  j["representation_violations"] = f.representation_violations;
  j["first_recourse_violation"] = optional_json(f.first_recourse_violation);
  j["recourse_violations"] = f.recourse_violations;
  return j;
}

FairnessReport fairness_from(const json& j) {
  FairnessReport f;
  f.r = j.at("r").get<double>();
  f.mean_costs = j.at("mean_costs").get<std::vector<double>>();
  f.counts = j.at("counts").get<std::vector<std::size_t>>();
  f.quality = {j.at("rkl").get<double>(), j.at("rnd").get<double>(), j.at("rrd").get<double>()};
  f.first_representation_violation = optional_from<std::size_t>(j.at("first_representation_violation"));
  f.representation_violations = j.at("representation_violations").get<std::size_t>();
  f.first_recourse_violation = optional_from<std::size_t>(j.at("first_recourse_violation"));
  f.recourse_violations = j.at("recourse_violations").get<std::size_t>();
  return f;
}

ordered_json stats_json(const BlockStats& s) {
  ordered_json j;
  j["size"] = s.size;
  j["counts"] = s.counts;
  j["mean_costs"] = s.mean_costs;
  j["protected_share"] = s.protected_share;
  j["r"] = s.r;
  j["representation_fair"] = s.representation_fair;
  j["recourse_fair"] = s.recourse_fair;
  return j;
}

BlockStats stats_from(const json& j) {
  BlockStats s;
  s.size = j.at("size").get<std::size_t>();
  s.counts = j.at("counts").get<std::vector<std::size_t>>();
  s.mean_costs = j.at("mean_costs").get<std::vector<double>>();
  s.protected_share = j.at("protected_share").get<double>();
  s.r = j.at("r").get<double>();
  s.representation_fair = j.at("representation_fair").get<bool>();
  s.recourse_fair = j.at("recourse_fair").get<bool>();
  return s;
}

}  // namespace

std::string metrics_to_json(const MetricsReport& m) {
  ordered_json j;
  j["command"] = m.command;
  j["records"] = m.records;
  j["excluded"] = m.excluded;
  j["tau"] = m.tau;
  j["phi"] = m.phi;
  j["cutoff_step"] = m.cutoff_step;
  j["groups"] = m.groups;
  j["before"] = fairness_json(m.before);
  j["after"] = m.after ? fairness_json(*m.after) : ordered_json(nullptr);
  j["interventions"] = m.interventions;
  j["recourse_unmet"] = m.recourse_unmet;
  j["exit_strategy_count"] = m.exit_strategy_count;
  j["exit_position"] = optional_json(m.exit_position);
  j["total_modification"] = m.total_modification;
  j["avg_modification"] = m.avg_modification;
  if (m.block_summary) {
    ordered_json s;
    s["block_count"] = m.block_summary->block_count;
    s["unfair_before"] = m.block_summary->unfair_before;
    s["unfair_after"] = m.block_summary->unfair_after;
    s["blocks_fixed"] = m.block_summary->blocks_fixed;
    s["skipped"] = m.block_summary->skipped;
    j["block_summary"] = std::move(s);
  } else {
    j["block_summary"] = nullptr;
  }
  ordered_json blocks = ordered_json::array();
  for (const BlockReport& b : m.blocks) {
    ordered_json row;
    row["index"] = b.index;
    row["before"] = stats_json(b.before);
    row["at_entry"] = stats_json(b.at_entry);
    row["after"] = stats_json(b.after);
    row["interventions"] = b.interventions;
    row["skipped"] = b.skipped;
    blocks.push_back(std::move(row));
  }
  j["blocks"] = std::move(blocks);
  return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(std::string_view text) {
  try {
    const json j = json::parse(text.begin(), text.end());
    MetricsReport m;
    m.command = j.at("command").get<std::string>();
    m.records = j.at("records").get<std::size_t>();
    m.excluded = j.at("excluded").get<std::vector<std::string>>();
    m.tau = j.at("tau").get<double>();
    m.phi = j.at("phi").get<double>();
    m.cutoff_step = j.at("cutoff_step").get<std::size_t>();
    m.groups = j.at("groups").get<std::vector<std::string>>();
    m.before = fairness_from(j.at("before"));
    if (!j.at("after").is_null()) m.after = fairness_from(j.at("after"));
    m.interventions = j.at("interventions").get<std::size_t>();
    m.recourse_unmet = j.at("recourse_unmet").get<std::size_t>();
    m.exit_strategy_count = j.at("exit_strategy_count").get<std::size_t>();
    m.exit_position = optional_from<std::size_t>(j.at("exit_position"));
    m.total_modification = j.at("total_modification").get<double>();
    m.avg_modification = j.at("avg_modification").get<double>();
    if (const json& s = j.at("block_summary"); !s.is_null()) {
      m.block_summary = BlockSummary{s.at("block_count").get<std::size_t>(),
                                     s.at("unfair_before").get<std::size_t>(),
                                     s.at("unfair_after").get<std::size_t>(),
                                     s.at("blocks_fixed").get<std::size_t>(),
                                     s.at("skipped").get<std::size_t>()};
    }
    for (const json& row : j.at("blocks")) {
      BlockReport b;
      b.index = row.at("index").get<std::size_t>();
      b.before = stats_from(row.at("before"));
      b.at_entry = stats_from(row.at("at_entry"));
      b.after = stats_from(row.at("after"));
      b.interventions = row.at("interventions").get<std::size_t>();
      b.skipped = row.at("skipped").get<bool>();
      m.blocks.push_back(std::move(b));
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed metrics file: ") + e.what());
  }
}

void write_metrics(const std::filesystem::path& path, const MetricsReport& report) {
  write_text(path, metrics_to_json(report));
}

MetricsReport read_metrics(const std::filesystem::path& path) {
  return metrics_from_json(read_file(path));
}

// ---- Synthetic data --------------------------------------------------------

void SyntheticSpec::validate() const {
  if (records < 2) throw InputError("synthetic data needs at least 2 records");
  if (attributes < 1 || attributes > 64) throw InputError("synthetic attribute count must lie in [1, 64]");
  if (!(protected_share > 0.0 && protected_share < 1.0)) {
    throw InputError("protected_share must lie strictly between 0 and 1");
  }
  if (!(shift >= 0.0 && shift <= 8.0)) throw InputError("shift must lie in [0, 8]");
  if (!(base >= 0.0 && spread > 0.0 && base + spread + shift * (1.0 + shift_jitter) <= 10.0)) {
    throw InputError("base and spread must be non-negative with base + spread + shift <= 10");
  }
  if (!(skew > 0.0 && skew <= 16.0)) throw InputError("skew must lie in (0, 16]");
  if (!(correlation >= 0.0 && correlation <= 1.0)) throw InputError("correlation must lie in [0, 1]");
  if (!(shift_jitter >= 0.0 && shift_jitter <= 1.0)) throw InputError("shift_jitter must lie in [0, 1]");
}

SyntheticSpec parse_synthetic_spec(std::string_view json_text) {
  const json doc = parse_json(json_text, "<synthetic spec>");
  const Node root(doc, "$");
  root.expect_object(
      {"records", "attributes", "protected_share", "shift", "shift_jitter", "base", "spread", "skew", "correlation",
       "seed"});
  SyntheticSpec spec;
  if (root.has("records")) spec.records = root.at("records").count();
  if (root.has("attributes")) spec.attributes = root.at("attributes").count();
  if (root.has("protected_share")) spec.protected_share = root.at("protected_share").number();
  if (root.has("shift")) spec.shift = root.at("shift").number();
  if (root.has("base")) spec.base = root.at("base").number();
  if (root.has("spread")) spec.spread = root.at("spread").number();
  if (root.has("skew")) spec.skew = root.at("skew").number();
  if (root.has("correlation")) spec.correlation = root.at("correlation").number();
  if (root.has("shift_jitter")) spec.shift_jitter = root.at("shift_jitter").number();
  if (root.has("seed")) spec.seed = root.at("seed").count();
  try {
    spec.validate();
  } catch (const InputError& e) {
    throw SchemaError(std::string("$: ") + e.what());
  }
  return spec;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits of one generator output.
double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double round_cents(double v) { return clean_decimal(std::round(v * 100.0) / 100.0); }

const char* const kSyntheticNames[] = {
    "duration",         "credit_amount",   "installment_rate", "residence_since",
    "existing_credits", "savings_balance", "checking_balance", "employment_years",
    "num_dependents",   "credit_history",  "other_debtors",    "property_value",
};

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 gen(spec.seed);
  const std::size_t m = spec.attributes;

  std::vector<AttributeSpec> attributes;
  std::vector<double> coefficients;
  double coefficient_sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double a = 0.5 + unit(gen);
    const double w = 0.25 + 0.75 * unit(gen);
    AttributeSpec spec_k;
    spec_k.name = k < std::size(kSyntheticNames) ? kSyntheticNames[k] : "attribute_" + std::to_string(k);
    spec_k.recourse_weight = w;
    spec_k.action_step = 0.01;
    spec_k.min = 0.0;
    spec_k.max = 20.0;
    attributes.push_back(std::move(spec_k));
    coefficients.push_back(a);
    coefficient_sum += a;
  }
  AttributeSpec married;
  married.name = "married";
  married.kind = AttributeKind::kBinary;
  married.action_step = 1.0;
  attributes.push_back(married);
  coefficients.push_back(0.0);

  Hyperplane h;
  h.coefficients = coefficients;
  h.threshold = 10.0 * coefficient_sum;
  h.accepted_side = 1;
  ProtectedSpec prot;
  prot.attribute = "married";
  prot.value = "1";
  Schema schema = Schema(std::move(attributes), prot, h, {}, std::string("id")).normalized();

  const std::size_t n = spec.records;
  const auto protected_count =
      static_cast<std::size_t>(std::llround(spec.protected_share * static_cast<double>(n)));
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = 0; i < protected_count; ++i) {
    const auto j = i + static_cast<std::size_t>(unit(gen) * static_cast<double>(n - i));
    std::swap(perm[i], perm[std::min(j, n - 1)]);
  }
  std::vector<bool> is_protected(n, false);
  for (std::size_t i = 0; i < protected_count; ++i) is_protected[perm[i]] = true;

  Dataset data;
  data.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Record& r = data.records[i];
    r.id = std::to_string(i + 1);
    r.values.resize(m + 1);
    double offset = is_protected[i] ? spec.shift : 0.0;
    if (is_protected[i] && spec.shift_jitter > 0.0) offset *= 1.0 - spec.shift_jitter + 2.0 * spec.shift_jitter * unit(gen);
    const double shared = spec.correlation > 0.0 ? unit(gen) : 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double u = spec.correlation * shared + (1.0 - spec.correlation) * unit(gen);
      r.values[k] = round_cents(10.0 - spec.base - spec.spread * std::pow(u, spec.skew) - offset);
    }
    r.values[m] = is_protected[i] ? 1.0 : 0.0;
    r.protected_value = is_protected[i] ? "1" : "0";
  }
  return {std::move(schema), std::move(data)};
}

}  // namespace fairrecourse
