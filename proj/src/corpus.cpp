#include "snipq/corpus.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include <json.hpp>

#include "snipq/csv.hpp"
#include "snipq/error.hpp"

namespace snipq {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 3> kPriceNames{"cheap", "moderate", "expensive"};
constexpr std::array<std::string_view, 4> kAreaNames{"east", "west", "centre", "south"};
constexpr std::array<std::string_view, 3> kMealNames{"breakfast", "lunch", "dinner"};
constexpr std::array<std::string_view, 7> kSourceNames{
    "cuisines", "meals", "special_diets", "price_range", "location", "description", "review"};
constexpr std::array<std::string_view, 5> kCategoryNames{"menu_item", "objective", "subjective",
                                                         "schema", "uncategorized"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// JSON field accessors that raise DataError naming the field. The caller adds the
// line number.
const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string string_field(const json& obj, const char* key, bool required) {
  const json* v = optional_field(obj, key);
  if (!v) {
    if (required) throw DataError(std::string("missing field '") + key + "'");
    return {};
  }
  if (!v->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return v->get<std::string>();
}

std::vector<std::string> string_list_field(const json& obj, const char* key) {
  const json* v = optional_field(obj, key);
  if (!v) return {};
  if (!v->is_array()) throw DataError(std::string("field '") + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : *v) {
    if (!item.is_string()) throw DataError(std::string("field '") + key + "' must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string entity_context(const std::string& id) {
  return id.empty() ? std::string("entity") : "entity '" + id + "'";
}

EntityRecord entity_from_json(const json& obj) {
  if (!obj.is_object()) throw DataError("expected a JSON object");
  EntityRecord e;
  e.id = string_field(obj, "id", true);
  const auto ctx = entity_context(e.id);
  try {
    e.name = string_field(obj, "name", false);
    e.cuisines = string_list_field(obj, "cuisines");
    e.special_diets = string_list_field(obj, "special_diets");
    e.description = string_field(obj, "description", false);
    if (optional_field(obj, "price_range")) {
      const auto s = string_field(obj, "price_range", true);
      e.price_range = parse_price_range(s);
      if (!e.price_range) throw DataError("field 'price_range' has invalid value '" + s + "'");
    }
    if (optional_field(obj, "location")) {
      const auto s = string_field(obj, "location", true);
      e.location = parse_area(s);
      if (!e.location) throw DataError("field 'location' has invalid value '" + s + "'");
    }
    for (const auto& s : string_list_field(obj, "meals")) {
      auto m = parse_meal(s);
      if (!m) throw DataError("field 'meals' has invalid value '" + s + "'");
      e.meals.push_back(*m);
    }
    if (const json* reviews = optional_field(obj, "reviews")) {
      if (!reviews->is_array()) throw DataError("field 'reviews' must be an array");
      for (const auto& r : *reviews) {
        if (!r.is_object()) throw DataError("field 'reviews' entries must be objects");
        Review review;
        review.text = string_field(r, "text", true);
        const json* rating = optional_field(r, "rating");
        if (!rating) throw DataError("field 'reviews.rating' is required");
        if (!rating->is_number_integer()) throw DataError("field 'reviews.rating' must be an integer");
        review.rating = rating->get<int>();
        e.reviews.push_back(std::move(review));
      }
    }
  } catch (const DataError& err) {
    throw DataError(ctx + ": " + err.what());
  }
  return e;
}

json entity_to_json(const EntityRecord& e) {
  json obj = json::object();
  obj["id"] = e.id;
  obj["name"] = e.name;
  obj["cuisines"] = e.cuisines;
  if (e.price_range) obj["price_range"] = std::string(to_string(*e.price_range));
  if (e.location) obj["location"] = std::string(to_string(*e.location));
  json meals = json::array();
  for (auto m : e.meals) meals.push_back(std::string(to_string(m)));
  obj["meals"] = std::move(meals);
  obj["special_diets"] = e.special_diets;
  obj["description"] = e.description;
  json reviews = json::array();
  for (const auto& r : e.reviews) reviews.push_back({{"text", r.text}, {"rating", r.rating}});
  obj["reviews"] = std::move(reviews);
  return obj;
}

Query query_from_json(const json& obj) {
  if (!obj.is_object()) throw DataError("expected a JSON object");
  Query q;
  q.id = string_field(obj, "id", true);
  if (q.id.empty()) throw DataError("field 'id' must be nonempty");
  q.text = string_field(obj, "text", true);
  if (is_blank(q.text)) throw DataError("query '" + q.id + "': field 'text' must be nonempty");
  const auto cat = string_field(obj, "category", true);
  auto parsed = parse_query_category(cat);
  if (!parsed) throw DataError("query '" + q.id + "': field 'category' has invalid value '" + cat + "'");
  q.category = *parsed;
  if (const json* slots = optional_field(obj, "slot_constraints")) {
    if (!slots->is_object()) throw DataError("query '" + q.id + "': field 'slot_constraints' must be an object");
    SlotConstraints c;
    for (const auto& [k, v] : slots->items()) {
      if (!is_known_slot(k)) throw DataError("query '" + q.id + "': unknown slot '" + k + "'");
      if (!v.is_string()) throw DataError("query '" + q.id + "': slot '" + k + "' must be a string");
      c[k] = v.get<std::string>();
    }
    q.slot_constraints = std::move(c);
  }
  return q;
}

// Iterates nonblank lines, parsing each as JSON and wrapping errors with the line number.
template <typename F>
void for_each_json_line(std::istream& in, const std::string& source, F&& fn) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (is_blank(raw)) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw LineError(source, line, std::string("JSON parse error: ") + e.what());
    }
    try {
      fn(obj, line);
    } catch (const LineError&) {
      throw;
    } catch (const DataError& e) {
      throw LineError(source, line, e.what());
    }
  }
}

}  // namespace

std::string_view to_string(PriceRange v) { return kPriceNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Area v) { return kAreaNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Meal v) { return kMealNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(SnippetSource v) { return kSourceNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(QueryCategory v) { return kCategoryNames[static_cast<std::size_t>(v)]; }

std::optional<PriceRange> parse_price_range(std::string_view s) { return lookup<PriceRange>(kPriceNames, s); }
std::optional<Area> parse_area(std::string_view s) { return lookup<Area>(kAreaNames, s); }
std::optional<Meal> parse_meal(std::string_view s) { return lookup<Meal>(kMealNames, s); }
std::optional<QueryCategory> parse_query_category(std::string_view s) {
  return lookup<QueryCategory>(kCategoryNames, s);
}

bool is_known_slot(std::string_view key) {
  return key == "area" || key == "cuisine" || key == "price_range";
}

std::vector<Snippet> extract_snippets(const EntityRecord& entity, int min_rating) {
  std::vector<Snippet> out;
  auto emit = [&](SnippetSource source, std::size_t ordinal, std::string text) {
    if (is_blank(text)) return;
    Snippet s;
    s.id = entity.id + "#" + std::string(to_string(source)) + "#" + std::to_string(ordinal);
    s.entity_id = entity.id;
    s.source = source;
    s.text = std::move(text);
    out.push_back(std::move(s));
  };

  emit(SnippetSource::kCuisines, 0, join(entity.cuisines, ", "));
  std::vector<std::string> meals;
  for (auto m : entity.meals) meals.emplace_back(to_string(m));
  emit(SnippetSource::kMeals, 0, join(meals, ", "));
  emit(SnippetSource::kSpecialDiets, 0, join(entity.special_diets, ", "));
  if (entity.price_range) emit(SnippetSource::kPriceRange, 0, std::string(to_string(*entity.price_range)));
  if (entity.location) emit(SnippetSource::kLocation, 0, std::string(to_string(*entity.location)));
  emit(SnippetSource::kDescription, 0, entity.description);
  for (std::size_t i = 0; i < entity.reviews.size(); ++i) {
    if (entity.reviews[i].rating >= min_rating) emit(SnippetSource::kReview, i, entity.reviews[i].text);
  }
  return out;
}

void validate_entity(const EntityRecord& e) {
  if (e.id.empty()) throw DataError("entity: field 'id' must be nonempty");
  const auto ctx = entity_context(e.id);
  for (const auto& c : e.cuisines) {
    if (is_blank(c)) throw DataError(ctx + ": field 'cuisines' contains an empty value");
    if (std::any_of(c.begin(), c.end(), [](unsigned char ch) { return ch >= 'A' && ch <= 'Z'; })) {
      throw DataError(ctx + ": field 'cuisines' value '" + c + "' must be lowercase");
    }
  }
  for (const auto& d : e.special_diets) {
    if (is_blank(d)) throw DataError(ctx + ": field 'special_diets' contains an empty value");
  }
  for (std::size_t i = 0; i < e.reviews.size(); ++i) {
    const auto& r = e.reviews[i];
    if (r.rating < 1 || r.rating > 5) {
      throw DataError(ctx + ": field 'reviews[" + std::to_string(i) + "].rating' must be in 1..5, got " +
                      std::to_string(r.rating));
    }
    if (is_blank(r.text)) {
      throw DataError(ctx + ": field 'reviews[" + std::to_string(i) + "].text' must be nonempty");
    }
  }
}

EntityDatabase EntityDatabase::build(std::vector<EntityRecord> entities, int min_rating) {
  if (min_rating < 1 || min_rating > 5) throw DataError("min_rating must be in 1..5");
  EntityDatabase db;
  db.min_rating_ = min_rating;
  db.offsets_.push_back(0);
  for (std::size_t i = 0; i < entities.size(); ++i) {
    validate_entity(entities[i]);
    if (!db.entity_by_id_.emplace(entities[i].id, i).second) {
      throw DataError("duplicate entity id '" + entities[i].id + "'");
    }
    for (auto& s : extract_snippets(entities[i], min_rating)) {
      db.snippet_by_id_.emplace(s.id, db.snippets_.size());
      db.snippets_.push_back(std::move(s));
    }
    db.offsets_.push_back(db.snippets_.size());
  }
  db.entities_ = std::move(entities);
  return db;
}

std::span<const Snippet> EntityDatabase::snippets_of(std::size_t entity_index) const {
  const auto begin = offsets_.at(entity_index);
  const auto end = offsets_.at(entity_index + 1);
  return std::span<const Snippet>(snippets_).subspan(begin, end - begin);
}

const EntityRecord* EntityDatabase::find_entity(std::string_view id) const {
  auto idx = entity_index(id);
  return idx ? &entities_[*idx] : nullptr;
}

const Snippet* EntityDatabase::find_snippet(std::string_view id) const {
  auto it = snippet_by_id_.find(std::string(id));
  return it == snippet_by_id_.end() ? nullptr : &snippets_[it->second];
}

std::optional<std::size_t> EntityDatabase::entity_index(std::string_view id) const {
  auto it = entity_by_id_.find(std::string(id));
  if (it == entity_by_id_.end()) return std::nullopt;
  return it->second;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

EntityDatabase parse_corpus(std::istream& in, const std::string& source, int min_rating) {
  std::vector<EntityRecord> entities;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_json_line(in, source, [&](const json& obj, std::size_t line) {
    auto e = entity_from_json(obj);
    validate_entity(e);
    if (auto [it, fresh] = seen.emplace(e.id, line); !fresh) {
      throw DataError("duplicate entity id '" + e.id + "' (first seen on line " +
                      std::to_string(it->second) + ")");
    }
    entities.push_back(std::move(e));
  });
  return EntityDatabase::build(std::move(entities), min_rating);
}

EntityDatabase load_corpus(const std::filesystem::path& path, int min_rating) {
  auto in = open_input(path);
  return parse_corpus(in, path.string(), min_rating);
}

void write_corpus(std::ostream& out, std::span<const EntityRecord> entities) {
  for (const auto& e : entities) out << entity_to_json(e).dump() << '\n';
}

std::vector<Query> parse_queries(std::istream& in, const std::string& source) {
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  for_each_json_line(in, source, [&](const json& obj, std::size_t) {
    auto q = query_from_json(obj);
    if (!seen.insert(q.id).second) throw DataError("duplicate query id '" + q.id + "'");
    queries.push_back(std::move(q));
  });
  return queries;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_queries(in, path.string());
}

void write_queries(std::ostream& out, std::span<const Query> queries) {
  for (const auto& q : queries) {
    json obj = {{"id", q.id}, {"text", q.text}, {"category", std::string(to_string(q.category))}};
    if (q.slot_constraints) obj["slot_constraints"] = *q.slot_constraints;
    out << obj.dump() << '\n';
  }
}

std::vector<LabelRecord> parse_labels(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source, {"pair_id", "query_id", "snippet_id", "annotator_id", "label"});
  std::vector<LabelRecord> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (f[i].empty()) throw LineError(source, reader.line(), "empty field in label row");
    }
    if (f[4] != "0" && f[4] != "1") {
      throw LineError(source, reader.line(), "label must be 0 or 1, got '" + f[4] + "'");
    }
    out.push_back({f[0], f[1], f[2], f[3], f[4] == "1" ? 1 : 0});
  }
  return out;
}

std::vector<LabelRecord> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_labels(in, path.string());
}

void write_labels(std::ostream& out, std::span<const LabelRecord> labels) {
  csv::write_row(out, {"pair_id", "query_id", "snippet_id", "annotator_id", "label"});
  for (const auto& l : labels) {
    csv::write_row(out, {l.pair_id, l.query_id, l.snippet_id, l.annotator_id, std::to_string(l.label)});
  }
}

}  // namespace snipq
