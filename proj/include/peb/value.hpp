// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace peb {

/// Interned identifier. Two symbols with the same spelling share storage, so
/// equality is a pointer test; ordering is byte-lexicographic on the spelling.
class Symbol {
 public:
  Symbol();
  explicit Symbol(std::string_view name);

  const std::string& name() const { return *name_; }

  friend bool operator==(Symbol a, Symbol b) { return a.name_ == b.name_; }
  friend std::strong_ordering operator<=>(Symbol a, Symbol b) {
    if (a.name_ == b.name_) return std::strong_ordering::equal;
    const std::string& x = *a.name_;
    const std::string& y = *b.name_;
    if (!x.empty() && !y.empty() && x[0] != y[0]) {
      return static_cast<unsigned char>(x[0]) <=> static_cast<unsigned char>(y[0]);
    }
    return x.compare(y) < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }

 private:
  const std::string* name_;
};

/// Scalar component of a pair. Alternative order is the cross-kind rank.
using Scalar = std::variant<Symbol, bool, std::int64_t>;

struct Pair {
  Scalar first;
  Scalar second;
};

enum class ValueKind : std::uint8_t { Sym, Bool, Int, Pair, Set };

const char* to_string(ValueKind kind);

/// Thrown when an operation receives values of the wrong kind, e.g. a set
/// literal mixing scalars and pairs.
class KindMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical runtime value. Sets are immutable, sorted and duplicate-free, and
/// share their element storage on copy.
class Value {
 public:
  Value() : data_(std::int64_t{0}) {}

  static Value integer(std::int64_t v) { return Value(Data(v)); }
  static Value boolean(bool v) { return Value(Data(v)); }
  static Value symbol(Symbol s) { return Value(Data(s)); }
  static Value symbol(std::string_view s) { return Value(Data(Symbol(s))); }
  static Value from_scalar(const Scalar& s);
  /// Throws KindMismatch unless both components are scalars.
  static Value pair(const Value& first, const Value& second);
  /// Sorts and deduplicates; throws KindMismatch on mixed scalar/pair input
  /// or nested sets.
  static Value set(std::vector<Value> elems);
  /// Caller guarantees `elems` is already strictly increasing and homogeneous.
  static Value set_from_sorted(std::vector<Value> elems);
  static Value empty_set() { return set_from_sorted({}); }

  ValueKind kind() const { return static_cast<ValueKind>(data_.index()); }
  bool is_int() const { return kind() == ValueKind::Int; }
  bool is_bool() const { return kind() == ValueKind::Bool; }
  bool is_sym() const { return kind() == ValueKind::Sym; }
  bool is_pair() const { return kind() == ValueKind::Pair; }
  bool is_set() const { return kind() == ValueKind::Set; }
  bool is_scalar() const { return data_.index() <= 2; }

  std::int64_t as_int() const {
    if (!is_int()) kind_error("integer");
    return *std::get_if<std::int64_t>(&data_);
  }
  bool as_bool() const {
    if (!is_bool()) kind_error("boolean");
    return *std::get_if<bool>(&data_);
  }
  Symbol as_sym() const {
    if (!is_sym()) kind_error("symbol");
    return *std::get_if<Symbol>(&data_);
  }
  const Pair& as_pair() const {
    if (!is_pair()) kind_error("pair");
    return *std::get_if<Pair>(&data_);
  }
  Scalar as_scalar() const;
  std::int64_t int_unchecked() const { return *std::get_if<std::int64_t>(&data_); }
  Value first() const { return from_scalar(as_pair().first); }
  Value second() const { return from_scalar(as_pair().second); }

  /// Elements of a set in canonical order.
  std::span<const Value> elements() const {
    if (!is_set()) kind_error("set");
    const auto& ref = *std::get_if<SetRef>(&data_);
    if (!ref) return {};
    return {ref->data(), ref->size()};
  }
  std::size_t size() const { return elements().size(); }
  bool contains(const Value& v) const;
  bool contains_scalar(const Scalar& x) const;
  /// True for sets whose elements are pairs (the empty set counts).
  bool is_relation() const;

  std::size_t hash() const;

  friend bool operator==(const Value& a, const Value& b);
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

 private:
  using SetRef = std::shared_ptr<const std::vector<Value>>;
  using Data = std::variant<Symbol, bool, std::int64_t, Pair, SetRef>;

  explicit Value(Data d) : data_(std::move(d)) {}
  [[noreturn, gnu::cold]] void kind_error(const char* expected) const;

  Data data_;
};

std::strong_ordering compare_scalars(const Scalar& a, const Scalar& b);
/// Orders a scalar against a value without materialising it.
std::strong_ordering compare_scalar_value(const Scalar& a, const Value& b);

/// The strict total order on values: Sym < Bool < Int < Pair < Set across
/// kinds; within a kind, natural order (sets lexicographically).
std::strong_ordering compare_values(const Value& a, const Value& b);

/// Sorted, duplicate-free set of the given elements.
Value canonical_set(std::vector<Value> elems);

/// Model-syntax rendering, e.g. `{0 |-> emp, 1 |-> ok}`.
std::string to_string(const Value& v);
std::ostream& operator<<(std::ostream& os, const Value& v);

struct ValueHash {
  std::size_t operator()(const Value& v) const { return v.hash(); }
};

}  // namespace peb
