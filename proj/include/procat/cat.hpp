#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "procat/common.hpp"

namespace procat {

// Objects are integers: positions in the object list for finite categories,
// moduli for the cyclic-group category.
using Obj = std::int64_t;

// A morphism value.  For finite categories `value` is the morphism's position
// in the declaration; for the cyclic-group category it is the residue c of
// x -> c*x modulo the target modulus.
struct Morphism {
  Obj src = 0;
  Obj tgt = 0;
  std::int64_t value = 0;
  auto operator<=>(const Morphism&) const = default;
  bool operator==(const Morphism&) const = default;
};

struct RawCategory {
  struct Arrow {
    std::string name, src, tgt;
  };
  struct Entry {
    std::string g, f, h;  // g.f = h
  };
  std::vector<std::string> objects;
  std::vector<Arrow> morphisms;
  std::vector<std::pair<std::string, std::string>> identities;  // object, morphism
  std::vector<Entry> composites;
};

struct LawViolation {
  std::string law;  // MissingComposite, TypeMismatch, AssociativityViolation, IdentityViolation, Malformed
  std::string detail;
};

class CategoryError : public Error {
 public:
  explicit CategoryError(std::vector<LawViolation> v);
  const std::vector<LawViolation>& violations() const noexcept { return violations_; }

 private:
  std::vector<LawViolation> violations_;
};

class Category {
 public:
  enum class Backend { FinCat, CycGrp };

  Category();
  static Category cycgrp();

  Backend backend() const;
  bool is_finite() const { return backend() == Backend::FinCat; }
  const std::string& name() const;
  Category renamed(std::string name) const;

  // FinCat only.
  std::size_t object_count() const;
  std::size_t morphism_count() const;
  std::vector<Obj> objects() const;
  Morphism morphism_at(std::size_t index) const;

  bool is_object(Obj a) const;
  bool is_morphism(const Morphism& m) const;
  // hom(a, b) in a fixed order: declaration order (FinCat), ascending residue (CycGrp).
  const std::vector<Morphism>& hom(Obj a, Obj b) const;
  Morphism identity(Obj a) const;
  // g . f; throws NonComposable unless f.tgt == g.src.
  Morphism compose(const Morphism& g, const Morphism& f) const;
  bool is_identity(const Morphism& m) const { return m == identity(m.src); }

  std::string object_name(Obj a) const;
  std::string morphism_name(const Morphism& m) const;
  Obj parse_object(std::string_view text) const;
  // Resolves a morphism name; for CycGrp the name is a residue and the source
  // and target are taken from the arguments.
  Morphism parse_morphism(std::string_view text, std::optional<Obj> src = std::nullopt,
                          std::optional<Obj> tgt = std::nullopt) const;

  bool same_as(const Category& other) const;

  // Size of hom(a, b) without enumerating it.
  std::int64_t hom_size(Obj a, Obj b) const;

  // A constraint post . h . pre = rhs on an unknown h: a -> b.  A missing
  // post/pre stands for the identity.
  struct Constraint {
    std::optional<Morphism> post;
    std::optional<Morphism> pre;
    Morphism rhs;
  };
  // The first h in hom(a, b) (hom order) satisfying every constraint.
  std::optional<Morphism> first_solution(Obj a, Obj b, const std::vector<Constraint>& cs) const;

  friend Category validate_category(const RawCategory& raw, std::string name);

 private:
  struct Impl;
  explicit Category(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

// Returns the category iff every law holds; otherwise throws CategoryError
// listing every violated law instance.
Category validate_category(const RawCategory& raw, std::string name = "");

// Independent listing of law violations (used by validate_category).
std::vector<LawViolation> category_violations(const RawCategory& raw);

Morphism compose_morphisms(const Category& c, const Morphism& g, const Morphism& f);
std::optional<Morphism> find_inverse(const Category& c, const Morphism& f);

// Largest modulus the cyclic-group backend accepts.
inline constexpr std::int64_t kMaxModulus = std::int64_t{1} << 62;

}  // namespace procat
