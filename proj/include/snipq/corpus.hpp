#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace snipq {

enum class PriceRange { kCheap, kModerate, kExpensive };
enum class Area { kEast, kWest, kCentre, kSouth };
enum class Meal { kBreakfast, kLunch, kDinner };

/// Where a snippet's text came from. The enumerator order is the emission order
/// used by extract_snippets: structured fields first, reviews last.
enum class SnippetSource { kCuisines, kMeals, kSpecialDiets, kPriceRange, kLocation, kDescription, kReview };

enum class QueryCategory { kMenuItem, kObjective, kSubjective, kSchema, kUncategorized };

std::string_view to_string(PriceRange v);
std::string_view to_string(Area v);
std::string_view to_string(Meal v);
std::string_view to_string(SnippetSource v);
std::string_view to_string(QueryCategory v);

std::optional<PriceRange> parse_price_range(std::string_view s);
std::optional<Area> parse_area(std::string_view s);
std::optional<Meal> parse_meal(std::string_view s);
std::optional<QueryCategory> parse_query_category(std::string_view s);

struct Review {
  std::string text;
  int rating = 0;

  bool operator==(const Review&) const = default;
};

struct EntityRecord {
  std::string id;
  std::string name;
  std::vector<std::string> cuisines;
  std::optional<PriceRange> price_range;
  std::optional<Area> location;
  std::vector<Meal> meals;
  std::vector<std::string> special_diets;
  std::string description;
  std::vector<Review> reviews;

  bool operator==(const EntityRecord&) const = default;
};

struct Snippet {
  std::string id;
  std::string entity_id;
  SnippetSource source = SnippetSource::kReview;
  std::string text;

  bool operator==(const Snippet&) const = default;
};

/// Slot name (area, cuisine, price_range) to requested value.
using SlotConstraints = std::map<std::string, std::string>;

bool is_known_slot(std::string_view key);

struct Query {
  std::string id;
  std::string text;
  QueryCategory category = QueryCategory::kUncategorized;
  std::optional<SlotConstraints> slot_constraints;

  bool operator==(const Query&) const = default;
};

inline constexpr int kDefaultMinRating = 4;

/// Snippet ids are "<entity_id>#<source>#<ordinal>". The ordinal is 0 for structured
/// fields and the review's position in the entity's review list for reviews, so ids do
/// not shift when the rating filter changes.
std::vector<Snippet> extract_snippets(const EntityRecord& entity, int min_rating = kDefaultMinRating);

/// Validated entity collection with its snippets. Immutable once built; snippets are
/// stored contiguously per entity in entity order.
class EntityDatabase {
 public:
  EntityDatabase() = default;

  /// Validates every record and extracts snippets. Throws DataError on invalid fields
  /// or duplicate ids.
  static EntityDatabase build(std::vector<EntityRecord> entities, int min_rating = kDefaultMinRating);

  std::span<const EntityRecord> entities() const noexcept { return entities_; }
  std::span<const Snippet> snippets() const noexcept { return snippets_; }
  std::span<const Snippet> snippets_of(std::size_t entity_index) const;

  const EntityRecord* find_entity(std::string_view id) const;
  const Snippet* find_snippet(std::string_view id) const;
  std::optional<std::size_t> entity_index(std::string_view id) const;

  std::size_t size() const noexcept { return entities_.size(); }
  bool empty() const noexcept { return entities_.empty(); }
  int min_rating() const noexcept { return min_rating_; }

  bool operator==(const EntityDatabase& other) const {
    return entities_ == other.entities_ && snippets_ == other.snippets_;
  }

 private:
  std::vector<EntityRecord> entities_;
  std::vector<Snippet> snippets_;
  std::vector<std::size_t> offsets_;  // size() + 1 entries into snippets_
  std::unordered_map<std::string, std::size_t> entity_by_id_;
  std::unordered_map<std::string, std::size_t> snippet_by_id_;
  int min_rating_ = kDefaultMinRating;
};

/// Validation of a single record; throws DataError naming the entity id and field.
void validate_entity(const EntityRecord& entity);

/// JSON-Lines entity file, one EntityRecord object per line.
EntityDatabase load_corpus(const std::filesystem::path& path, int min_rating = kDefaultMinRating);
EntityDatabase parse_corpus(std::istream& in, const std::string& source,
                            int min_rating = kDefaultMinRating);
void write_corpus(std::ostream& out, std::span<const EntityRecord> entities);

std::vector<Query> load_queries(const std::filesystem::path& path);
std::vector<Query> parse_queries(std::istream& in, const std::string& source);
void write_queries(std::ostream& out, std::span<const Query> queries);

/// One row of the crowd label file `pair_id,query_id,snippet_id,annotator_id,label`.
struct LabelRecord {
  std::string pair_id;
  std::string query_id;
  std::string snippet_id;
  std::string annotator_id;
  int label = 0;

  bool operator==(const LabelRecord&) const = default;
};

std::vector<LabelRecord> load_labels(const std::filesystem::path& path);
std::vector<LabelRecord> parse_labels(std::istream& in, const std::string& source);
void write_labels(std::ostream& out, std::span<const LabelRecord> labels);

/// Opens `path` for reading or throws IoError naming it.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace snipq
