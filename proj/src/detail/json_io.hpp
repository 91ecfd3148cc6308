#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aliased_ac/error.hpp"
#include "aliased_ac/types.hpp"

namespace aliased_ac::detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline int line_of_offset(std::string_view text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

/// Typed, shape-checked access to a parsed JSON document. Every failure is a
/// ParseError naming the field path.
class JsonReader {
 public:
  explicit JsonReader(std::string_view text) {
    try {
      root_ = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
      // byte is 1-based and points just past the offending character
      const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
      throw ParseError(e.what(), line_of_offset(text, offset), "");
    }
  }

  const nlohmann::json& root() const { return root_; }

  void require_object(const nlohmann::json& node, const std::string& field) const {
    if (!node.is_object()) throw ParseError("expected an object", 0, field);
  }

  const nlohmann::json& member(const nlohmann::json& obj, const std::string& key, const std::string& field) const {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError("missing required key", 0, field);
    return *it;
  }

  int positive_int(const nlohmann::json& obj, const std::string& key) const {
    const auto& node = member(obj, key, key);
    if (!node.is_number_integer() || node.get<long long>() <= 0) {
      throw ParseError("expected a positive integer", 0, key);
    }
    return node.get<int>();
  }

  double number(const nlohmann::json& obj, const std::string& key, const std::string& field) const {
    return as_number(member(obj, key, field), field);
  }

  double as_number(const nlohmann::json& node, const std::string& field) const {
    if (!node.is_number()) throw ParseError("expected a number", 0, field);
    return node.get<double>();
  }

  void fill_row(const nlohmann::json& node, const std::string& field, int n, double* out) const {
    if (!node.is_array()) throw ParseError("expected an array", 0, field);
    if (static_cast<int>(node.size()) != n) {
      throw ParseError("expected " + std::to_string(n) + " entries, got " + std::to_string(node.size()), 0, field);
    }
    for (int i = 0; i < n; ++i) out[i] = as_number(node[i], field + "[" + std::to_string(i) + "]");
  }

  const nlohmann::json& array_of(const nlohmann::json& node, const std::string& field, int n) const {
    if (!node.is_array()) throw ParseError("expected an array", 0, field);
    if (static_cast<int>(node.size()) != n) {
      throw ParseError("expected " + std::to_string(n) + " entries, got " + std::to_string(node.size()), 0, field);
    }
    return node;
  }

  Vector vector(const nlohmann::json& obj, const std::string& key, int n) const {
    Vector out(n);
    fill_row(member(obj, key, key), key, n, out.data());
    return out;
  }

  RowMatrix matrix_node(const nlohmann::json& node, const std::string& field, int rows, int cols) const {
    array_of(node, field, rows);
    RowMatrix out(rows, cols);
    for (int r = 0; r < rows; ++r) {
      fill_row(node[r], field + "[" + std::to_string(r) + "]", cols, out.data() + r * cols);
    }
    return out;
  }

  RowMatrix matrix(const nlohmann::json& obj, const std::string& key, int rows, int cols) const {
    return matrix_node(member(obj, key, key), key, rows, cols);
  }

  std::vector<RowMatrix> cube(const nlohmann::json& obj, const std::string& key, int blocks, int rows,
                              int cols) const {
    const auto& node = array_of(member(obj, key, key), key, blocks);
    std::vector<RowMatrix> out;
    out.reserve(blocks);
    for (int b = 0; b < blocks; ++b) {
      out.push_back(matrix_node(node[b], key + "[" + std::to_string(b) + "]", rows, cols));
    }
    return out;
  }

  std::vector<std::string> string_list(const nlohmann::json& obj, const std::string& key,
                                       const std::string& field) const {
    std::vector<std::string> out;
    const auto it = obj.find(key);
    if (it == obj.end()) return out;
    if (!it->is_array()) throw ParseError("expected an array of strings", 0, field);
    for (const auto& item : *it) {
      if (!item.is_string()) throw ParseError("expected a string", 0, field);
      out.push_back(item.get<std::string>());
    }
    return out;
  }

 private:
  nlohmann::json root_;
};

inline nlohmann::ordered_json to_json_array(const Vector& v) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline nlohmann::ordered_json to_json_array(const RowMatrix& m) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace aliased_ac::detail
