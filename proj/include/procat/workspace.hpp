#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "procat/shape.hpp"

namespace procat {

// Parse and validation failures carry the file position of the offending token.
class WorkspaceError : public Error {
 public:
  WorkspaceError(std::string kind, const std::string& file, int line, int column, const std::string& message);
  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string file_;
  int line_, column_;
  std::string detail_;
};

// Category description files: `objects A B`, `morphism u : A -> B`,
// `identity A = idA`, `compose g . f = h`, or the single line `backend cycgrp`.
// Composites with an identity factor are implied unless given.
struct CategoryFile {
  bool cycgrp = false;
  RawCategory raw;
};
CategoryFile parse_category_text(std::string_view text, const std::string& file = "<inline>", int first_line = 1);
Category load_category_file(const std::filesystem::path& path, const std::string& name = "");

struct Cone {
  std::string pair;
  Obj x = 0, y = 0;
  IndexPoset j;
  std::vector<JShapeMorphism> components;
};

class Workspace {
 public:
  static Workspace load(const std::filesystem::path& path);
  static Workspace parse(std::string_view text, const std::filesystem::path& base_dir = ".",
                         const std::string& file = "<string>");

  const Category& category(const std::string& name) const;
  const IndexPoset& poset(const std::string& name) const;
  const InverseSystem& system(const std::string& name) const;
  const JMorphism& jmorphism(const std::string& name) const;
  const IndexFunction& map(const std::string& name) const;
  const ProReflectivePair& pair(const std::string& name) const;
  const Cone& cone(const std::string& name) const;

  // Kind of a declared name ("category", "poset", ...), empty if unknown.
  std::string kind_of(const std::string& name) const;
  // (kind, name) in declaration order.
  const std::vector<std::pair<std::string, std::string>>& declarations() const { return order_; }
  // The only declared pair, else UnresolvedReference.
  const ProReflectivePair& sole_pair(std::string* name = nullptr) const;

 private:
  friend class WorkspaceParser;
  std::map<std::string, Category> cats_;
  std::map<std::string, IndexPoset> posets_;
  std::map<std::string, InverseSystem> systems_;
  std::map<std::string, JMorphism> jmors_;
  std::map<std::string, IndexFunction> maps_;
  std::map<std::string, ProReflectivePair> pairs_;
  std::map<std::string, Cone> cones_;
  std::vector<std::pair<std::string, std::string>> order_;
};

// Family expressions: const(m), step[(j,m),...], table[m,...], cycle[m,...],
// periodic[m,... | m,...], rule(poly: 3*j^2 + j + 1 mod 4).
MorphismFamily parse_family(std::string_view text, const Category& c, const IndexPoset& j, Obj src, Obj tgt);
// Affine maps on omega powers: "n+1", "2*n", "(n, n+1)", constants.
IndexFunction parse_affine(std::string_view text, const IndexPoset& dom, const IndexPoset& cod);

}  // namespace procat
