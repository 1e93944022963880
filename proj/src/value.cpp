// SPDX-License-Identifier: Apache-2.0

#include "peb/value.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <sstream>
#include <unordered_set>

namespace peb {

namespace {

const std::string* intern(std::string_view name) {
  // Node-based set: element addresses are stable for the program lifetime.
  static std::mutex mutex;
  static auto* pool = new std::unordered_set<std::string>();
  std::lock_guard lock(mutex);
  return &*pool->emplace(name).first;
}

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_scalar(const Scalar& s) {
  return std::visit(
      [&](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Symbol>) {
          return mix(s.index(), std::hash<const void*>{}(&x.name()));
        } else {
          return mix(s.index(), std::hash<T>{}(x));
        }
      },
      s);
}

void print_scalar(std::ostream& os, const Scalar& s) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Symbol>) {
          os << x.name();
        } else if constexpr (std::is_same_v<T, bool>) {
          os << (x ? "TRUE" : "FALSE");
        } else {
          os << x;
        }
      },
      s);
}

}  // namespace

Symbol::Symbol() {
  static const std::string* const empty = intern("");
  name_ = empty;
}
Symbol::Symbol(std::string_view name) : name_(intern(name)) {}

const char* to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Sym: return "symbol";
    case ValueKind::Bool: return "boolean";
    case ValueKind::Int: return "integer";
    case ValueKind::Pair: return "pair";
    case ValueKind::Set: return "set";
  }
  return "?";
}

Value Value::from_scalar(const Scalar& s) {
  return std::visit([](const auto& x) { return Value(Data(x)); }, s);
}

Value Value::pair(const Value& first, const Value& second) {
  if (!first.is_scalar() || !second.is_scalar()) {
    throw KindMismatch("pair components must be scalars, got " +
                       std::string(to_string(first.kind())) + " and " +
                       to_string(second.kind()));
  }
  return Value(Data(Pair{first.as_scalar(), second.as_scalar()}));
}

Value Value::set(std::vector<Value> elems) {
  bool has_scalar = false;
  bool has_pair = false;
  for (const auto& e : elems) {
    if (e.is_set()) throw KindMismatch("sets of sets are not supported");
    (e.is_pair() ? has_pair : has_scalar) = true;
  }
  if (has_scalar && has_pair) {
    throw KindMismatch("set mixes scalar and pair elements");
  }
  std::sort(elems.begin(), elems.end(),
            [](const Value& a, const Value& b) { return compare_values(a, b) < 0; });
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  return set_from_sorted(std::move(elems));
}

Value Value::set_from_sorted(std::vector<Value> elems) {
  if (elems.empty()) return Value(Data(SetRef()));
  return Value(Data(std::make_shared<const std::vector<Value>>(std::move(elems))));
}

Scalar Value::as_scalar() const {
  switch (kind()) {
    case ValueKind::Sym: return std::get<Symbol>(data_);
    case ValueKind::Bool: return std::get<bool>(data_);
    case ValueKind::Int: return std::get<std::int64_t>(data_);
    default:
      throw KindMismatch(std::string("expected scalar, got ") + to_string(kind()));
  }
}

bool Value::contains(const Value& v) const {
  auto elems = elements();
  auto it = std::lower_bound(elems.begin(), elems.end(), v,
                             [](const Value& a, const Value& b) { return compare_values(a, b) < 0; });
  return it != elems.end() && compare_values(*it, v) == 0;
}

bool Value::contains_scalar(const Scalar& x) const {
  auto elems = elements();
  auto it = std::partition_point(elems.begin(), elems.end(),
                                 [&](const Value& e) { return compare_scalar_value(x, e) > 0; });
  return it != elems.end() && compare_scalar_value(x, *it) == 0;
}

void Value::kind_error(const char* expected) const {
  throw KindMismatch(std::string("expected ") + expected + ", got " + to_string(kind()));
}

bool Value::is_relation() const {
  if (!is_set()) return false;
  auto elems = elements();
  return elems.empty() || elems.front().is_pair();
}

std::size_t Value::hash() const {
  switch (kind()) {
    case ValueKind::Pair: {
      const auto& p = std::get<Pair>(data_);
      return mix(mix(3, hash_scalar(p.first)), hash_scalar(p.second));
    }
    case ValueKind::Set: {
      std::size_t h = 4;
      for (const auto& e : elements()) h = mix(h, e.hash());
      return h;
    }
    default:
      return hash_scalar(as_scalar());
  }
}

bool operator==(const Value& a, const Value& b) { return compare_values(a, b) == 0; }

std::strong_ordering operator<=>(const Value& a, const Value& b) { return compare_values(a, b); }

namespace {

template <class T>
std::strong_ordering compare_same(const T& x, const T& y) {
  if constexpr (std::is_same_v<T, Symbol>) {
    if (x == y) return std::strong_ordering::equal;
  }
  return x <=> y;
}

}  // namespace

std::strong_ordering compare_scalars(const Scalar& a, const Scalar& b) {
  if (a.index() != b.index()) return a.index() <=> b.index();
  switch (a.index()) {
    case 0: return compare_same(*std::get_if<0>(&a), *std::get_if<0>(&b));
    case 1: return compare_same(*std::get_if<1>(&a), *std::get_if<1>(&b));
    default: return compare_same(*std::get_if<2>(&a), *std::get_if<2>(&b));
  }
}

std::strong_ordering compare_scalar_value(const Scalar& a, const Value& b) {
  auto ka = static_cast<ValueKind>(a.index());
  if (ka != b.kind()) return ka <=> b.kind();
  switch (ka) {
    case ValueKind::Sym: return compare_same(*std::get_if<Symbol>(&a), b.as_sym());
    case ValueKind::Bool: return compare_same(*std::get_if<bool>(&a), b.as_bool());
    default: return compare_same(*std::get_if<std::int64_t>(&a), b.int_unchecked());
  }
}

std::strong_ordering compare_values(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return a.kind() <=> b.kind();
  switch (a.kind()) {
    case ValueKind::Int: return compare_same(a.int_unchecked(), b.int_unchecked());
    case ValueKind::Sym: return compare_same(a.as_sym(), b.as_sym());
    case ValueKind::Bool: return compare_same(a.as_bool(), b.as_bool());
    case ValueKind::Pair: {
      const auto& pa = a.as_pair();
      const auto& pb = b.as_pair();
      if (auto c = compare_scalars(pa.first, pb.first); c != 0) return c;
      return compare_scalars(pa.second, pb.second);
    }
    case ValueKind::Set: {
      auto ea = a.elements();
      auto eb = b.elements();
      if (ea.data() == eb.data() && ea.size() == eb.size()) return std::strong_ordering::equal;
      std::size_t n = std::min(ea.size(), eb.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (auto c = compare_values(ea[i], eb[i]); c != 0) return c;
      }
      return ea.size() <=> eb.size();
    }
  }
  return std::strong_ordering::equal;
}

Value canonical_set(std::vector<Value> elems) { return Value::set(std::move(elems)); }

std::ostream& operator<<(std::ostream& os, const Value& v) {
  switch (v.kind()) {
    case ValueKind::Pair:
      print_scalar(os, v.as_pair().first);
      os << " |-> ";
      print_scalar(os, v.as_pair().second);
      break;
    case ValueKind::Set: {
      os << '{';
      bool first = true;
      for (const auto& e : v.elements()) {
        if (!first) os << ", ";
        first = false;
        os << e;
      }
      os << '}';
      break;
    }
    default:
      print_scalar(os, v.as_scalar());
  }
  return os;
}

std::string to_string(const Value& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace peb
