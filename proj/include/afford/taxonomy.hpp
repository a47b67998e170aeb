#pragma once

// Closed vocabularies: the four visual-semantic attributes, their entities,
// and the seven grasp-action affordance classes.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace afford {

/// Attribute families in knowledge-base layer order.
enum class AttributeKind : std::size_t { Shape = 0, Texture = 1, Categorical = 2, Environment = 3 };

inline constexpr std::size_t kAttributeCount = 4;

inline constexpr std::array<AttributeKind, kAttributeCount> kAllAttributes = {
    AttributeKind::Shape, AttributeKind::Texture, AttributeKind::Categorical,
    AttributeKind::Environment};

inline constexpr std::array<AttributeKind, 3> kObjectAttributes = {
    AttributeKind::Shape, AttributeKind::Texture, AttributeKind::Categorical};

enum class AffordanceClass : std::size_t {
  ToEat = 0,
  ToContain = 1,
  ToHandOver = 2,
  ToBrush = 3,
  ToSqueeze = 4,
  ToClean = 5,
  ToWear = 6,
};

inline constexpr std::size_t kAffordanceCount = 7;

inline constexpr std::array<AffordanceClass, kAffordanceCount> kAllAffordances = {
    AffordanceClass::ToEat,    AffordanceClass::ToContain, AffordanceClass::ToHandOver,
    AffordanceClass::ToBrush,  AffordanceClass::ToSqueeze, AffordanceClass::ToClean,
    AffordanceClass::ToWear};

inline constexpr std::size_t index_of(AttributeKind kind) { return static_cast<std::size_t>(kind); }
inline constexpr std::size_t index_of(AffordanceClass cls) { return static_cast<std::size_t>(cls); }

std::string_view to_string(AttributeKind kind);
std::string_view to_string(AffordanceClass cls);

/// Throws UnknownEntityName on an unrecognised name.
AttributeKind parse_attribute(std::string_view name);
AffordanceClass parse_affordance(std::string_view name);
std::optional<AttributeKind> try_parse_attribute(std::string_view name);
std::optional<AffordanceClass> try_parse_affordance(std::string_view name);

AffordanceClass affordance_at(std::size_t index);

/// Entities of a kind, sorted lexicographically. Index order doubles as the
/// tie-break order everywhere.
std::span<const std::string_view> entities_of(AttributeKind kind);

std::optional<std::size_t> entity_index(AttributeKind kind, std::string_view name);

struct EntityId {
  AttributeKind kind = AttributeKind::Shape;
  std::string name;

  friend bool operator==(const EntityId&, const EntityId&) = default;
};

/// Validates `name` against the vocabulary of `kind`; throws UnknownEntityName.
EntityId make_entity(AttributeKind kind, std::string_view name);

std::vector<std::string> affordance_names();

}  // namespace afford
