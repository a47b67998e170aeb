#include "afford/taxonomy.hpp"

#include <algorithm>

#include "afford/error.hpp"

namespace afford {

namespace {

constexpr std::array<std::string_view, 5> kShapes = {"box", "cylinder", "irregular", "long",
                                                     "round"};
constexpr std::array<std::string_view, 8> kTextures = {"aluminium", "cardboard", "coarse",
                                                       "fabric",    "glass",     "plastic",
                                                       "rubber",    "smooth"};
constexpr std::array<std::string_view, 5> kCategoricals = {"container", "food", "miscellaneous",
                                                           "personal", "utensils"};
constexpr std::array<std::string_view, 7> kEnvironments = {
    "bathroom", "bedroom", "closet", "kitchen", "living room", "office", "play-room"};

constexpr std::array<std::string_view, kAttributeCount> kAttributeNames = {
    "shape", "texture", "categorical", "environment"};

constexpr std::array<std::string_view, kAffordanceCount> kAffordanceNames = {
    "to_eat", "to_contain", "to_hand_over", "to_brush", "to_squeeze", "to_clean", "to_wear"};

}  // namespace

std::string_view to_string(AttributeKind kind) { return kAttributeNames.at(index_of(kind)); }

std::string_view to_string(AffordanceClass cls) { return kAffordanceNames.at(index_of(cls)); }

std::optional<AttributeKind> try_parse_attribute(std::string_view name) {
  for (std::size_t i = 0; i < kAttributeNames.size(); ++i)
    if (kAttributeNames[i] == name) return static_cast<AttributeKind>(i);
  return std::nullopt;
}

std::optional<AffordanceClass> try_parse_affordance(std::string_view name) {
  for (std::size_t i = 0; i < kAffordanceNames.size(); ++i)
    if (kAffordanceNames[i] == name) return static_cast<AffordanceClass>(i);
  return std::nullopt;
}

AttributeKind parse_attribute(std::string_view name) {
  if (auto kind = try_parse_attribute(name)) return *kind;
  fail(ErrorCode::UnknownEntityName, "unknown attribute '" + std::string(name) + "'");
}

AffordanceClass parse_affordance(std::string_view name) {
  if (auto cls = try_parse_affordance(name)) return *cls;
  fail(ErrorCode::UnknownEntityName, "unknown affordance '" + std::string(name) + "'");
}

AffordanceClass affordance_at(std::size_t index) {
  if (index >= kAffordanceCount)
    fail(ErrorCode::InvalidArgument, "affordance index out of range");
  return static_cast<AffordanceClass>(index);
}

std::span<const std::string_view> entities_of(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::Shape: return kShapes;
    case AttributeKind::Texture: return kTextures;
    case AttributeKind::Categorical: return kCategoricals;
    case AttributeKind::Environment: return kEnvironments;
  }
  return {};
}

std::optional<std::size_t> entity_index(AttributeKind kind, std::string_view name) {
  auto names = entities_of(kind);
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

EntityId make_entity(AttributeKind kind, std::string_view name) {
  if (!entity_index(kind, name))
    fail(ErrorCode::UnknownEntityName, "'" + std::string(name) + "' is not a " +
                                           std::string(to_string(kind)) + " entity");
  return EntityId{kind, std::string(name)};
}

std::vector<std::string> affordance_names() {
  return {kAffordanceNames.begin(), kAffordanceNames.end()};
}

}  // namespace afford
