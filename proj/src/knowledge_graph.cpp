#include "cohort/knowledge_graph.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cohort/errors.hpp"
#include "cohort/jsonl.hpp"

namespace cohort {

namespace {

// True if `text` mentions the integer `index` bounded by non-digits, so 1
// does not match inside 19.
bool mentions_index(const std::string& text, int index) {
  const std::string needle = std::to_string(index);
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    const bool left_ok =
        pos == 0 || !std::isdigit(static_cast<unsigned char>(text[pos - 1]));
    const std::size_t end = pos + needle.size();
    const bool right_ok =
        end >= text.size() ||
        !std::isdigit(static_cast<unsigned char>(text[end]));
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

std::string generated_rule(const KgCluster& cluster) {
  std::ostringstream out;
  const std::size_t n = cluster.children.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out << (i + 1 == n ? ", and " : ", ");
    out << cluster.children[i].name << " (" << cluster.children[i].index
        << ")";
  }
  if (n == 1) {
    out << " is related to the " << cluster.parent << " disease.";
  } else if (n == 2) {
    out << " are both related to the " << cluster.parent << " disease.";
  } else {
    out << " are all related to the " << cluster.parent << " disease.";
  }
  return out.str();
}

bool all_children_exclusive(const KgCluster& cluster,
                            const std::vector<int>& exclusive) {
  return !cluster.children.empty() &&
         std::all_of(cluster.children.begin(), cluster.children.end(),
                     [&](const KgChild& child) {
                       return std::binary_search(exclusive.begin(),
                                                 exclusive.end(),
                                                 child.index);
                     });
}

}  // namespace

KgStrategy kg_strategy_from_string(const std::string& name) {
  if (name == "none") return KgStrategy::kNone;
  if (name == "tree") return KgStrategy::kTree;
  if (name == "relation") return KgStrategy::kRelation;
  if (name == "rule") return KgStrategy::kRule;
  throw ValidationError("unknown kg_strategy '" + name +
                        "' (expected none|tree|relation|rule)");
}

std::string to_string(KgStrategy strategy) {
  switch (strategy) {
    case KgStrategy::kNone: return "none";
    case KgStrategy::kTree: return "tree";
    case KgStrategy::kRelation: return "relation";
    case KgStrategy::kRule: return "rule";
  }
  throw ValidationError("invalid kg strategy value");
}

void validate_kg(const KnowledgeGraph& kg, const LabelSchema& schema) {
  std::map<int, std::string> owner;  // index -> parent
  for (const auto& cluster : kg.clusters) {
    if (cluster.parent.empty()) {
      throw ValidationError("knowledge graph cluster with empty parent name");
    }
    if (cluster.children.empty()) {
      throw ValidationError("knowledge graph cluster '" + cluster.parent +
                            "' has no children");
    }
    for (const auto& child : cluster.children) {
      if (!schema.valid_index(child.index)) {
        throw ValidationError("knowledge graph cluster '" + cluster.parent +
                              "' uses label index " +
                              std::to_string(child.index) +
                              " outside the schema range 1.." +
                              std::to_string(schema.count()));
      }
      if (child.name.empty()) {
        throw ValidationError("knowledge graph cluster '" + cluster.parent +
                              "' has a child with an empty name");
      }
      auto [it, inserted] = owner.emplace(child.index, cluster.parent);
      if (!inserted) {
        throw ValidationError("label index " + std::to_string(child.index) +
                              " appears in clusters '" + it->second +
                              "' and '" + cluster.parent + "'");
      }
    }
  }
  for (int index = 1; index <= schema.count(); ++index) {
    if (owner.contains(index)) continue;
    const bool in_global =
        std::any_of(kg.global_rules.begin(), kg.global_rules.end(),
                    [&](const std::string& rule) {
                      return mentions_index(rule, index);
                    });
    if (!in_global) {
      throw ValidationError("label index " + std::to_string(index) + " ('" +
                            schema.name(index) +
                            "') is covered by no cluster or global rule");
    }
  }
}

KnowledgeGraph kg_from_json(const nlohmann::json& doc,
                            const LabelSchema& schema) {
  if (!doc.is_object() || !doc.contains("clusters") ||
      !doc["clusters"].is_array()) {
    throw ValidationError("knowledge graph must be {\"clusters\": [...], "
                          "\"global_rules\": [...]}");
  }
  KnowledgeGraph kg;
  for (const auto& entry : doc["clusters"]) {
    KgCluster cluster;
    if (!entry.contains("parent") || !entry.contains("children")) {
      throw ValidationError(
          "each cluster needs a \"parent\" and a \"children\" array");
    }
    cluster.parent = entry["parent"].get<std::string>();
    for (const auto& child : entry["children"]) {
      if (!child.contains("index") || !child.contains("name")) {
        throw ValidationError("cluster '" + cluster.parent +
                              "': each child needs \"index\" and \"name\"");
      }
      cluster.children.push_back(
          {child["index"].get<int>(), child["name"].get<std::string>()});
    }
    if (entry.contains("rule") && !entry["rule"].is_null()) {
      cluster.rule = entry["rule"].get<std::string>();
    }
    kg.clusters.push_back(std::move(cluster));
  }
  if (doc.contains("global_rules")) {
    kg.global_rules = doc["global_rules"].get<std::vector<std::string>>();
  }
  kg.exclusive_indices = schema.exclusive_indices();
  validate_kg(kg, schema);
  return kg;
}

KnowledgeGraph load_kg(const std::filesystem::path& path,
                       const LabelSchema& schema) {
  return kg_from_json(read_json_file(path), schema);
}

std::string serialize_tree(const KnowledgeGraph& kg) {
  std::ostringstream out;
  for (const auto& cluster : kg.clusters) {
    out << "# " << cluster.parent << "\n";
    for (const auto& child : cluster.children) {
      out << "## " << child.name << " (" << child.index << ")\n";
    }
  }
  out << "The disease labels in the same level cannot be simultaneously "
         "chosen.\n";
  return out.str();
}

std::string serialize_relations(const KnowledgeGraph& kg) {
  std::ostringstream out;
  bool first = true;
  for (const auto& cluster : kg.clusters) {
    for (const auto& child : cluster.children) {
      if (!first) out << "; ";
      first = false;
      out << "[" << cluster.parent << "] [contains] [" << child.name << " ("
          << child.index << ")]";
    }
  }
  out << "\n";
  return out.str();
}

std::string serialize_rules(const KnowledgeGraph& kg) {
  std::ostringstream out;
  int number = 0;
  for (const auto& rule : kg.global_rules) {
    out << ++number << ". " << rule << "\n";
  }
  for (const auto& cluster : kg.clusters) {
    if (all_children_exclusive(cluster, kg.exclusive_indices)) continue;
    out << ++number << ". "
        << (cluster.rule ? *cluster.rule : generated_rule(cluster)) << "\n";
  }
  return out.str();
}

std::string serialize_kg(const KnowledgeGraph& kg, KgStrategy strategy) {
  switch (strategy) {
    case KgStrategy::kNone: return "";
    case KgStrategy::kTree: return serialize_tree(kg);
    case KgStrategy::kRelation: return serialize_relations(kg);
    case KgStrategy::kRule: return serialize_rules(kg);
  }
  throw ValidationError("invalid kg strategy value");
}

}  // namespace cohort
