#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cohort/schema.hpp"

namespace cohort {

struct KgChild {
  int index = 0;
  std::string name;
};

// One parent disease system and the label indices grouped under it. `rule`
// optionally stores a hand-written constraint sentence emitted verbatim by
// the rule serializer; clusters without one get a generated sentence.
struct KgCluster {
  std::string parent;
  std::vector<KgChild> children;
  std::optional<std::string> rule;
};

struct KnowledgeGraph {
  std::vector<KgCluster> clusters;
  // Constraint sentences that concern the whole label space rather than one
  // cluster (mutual-exclusivity statements). Stored unnumbered.
  std::vector<std::string> global_rules;
  // Copied from the schema at load time so serializers can recognize
  // exclusive singleton clusters without carrying the schema around.
  std::vector<int> exclusive_indices;
};

// How (and whether) the graph is rendered into the prompt.
enum class KgStrategy { kNone, kTree, kRelation, kRule };

KgStrategy kg_strategy_from_string(const std::string& name);
std::string to_string(KgStrategy strategy);

// Structural checks: non-empty parents, valid child indices, no index in two
// clusters, and every schema index reachable through a cluster or mentioned
// by a global rule. Throws ValidationError.
void validate_kg(const KnowledgeGraph& kg, const LabelSchema& schema);

KnowledgeGraph kg_from_json(const nlohmann::json& doc,
                            const LabelSchema& schema);
KnowledgeGraph load_kg(const std::filesystem::path& path,
                       const LabelSchema& schema);

// Markdown-ish two-level outline. Every label index appears exactly once as
// "## <name> (<index>)" under its "# <parent>" heading; a closing sentence
// states that sibling leaves are not mutually exclusive diagnoses to pick
// from but a grouping.
std::string serialize_tree(const KnowledgeGraph& kg);

// Subject-predicate-object triples, one per parent-child edge:
// "[<parent>] [contains] [<name> (<index>)]", joined by "; ".
std::string serialize_relations(const KnowledgeGraph& kg);

// Numbered natural-language rules: global rules first, then one sentence per
// cluster (stored text verbatim when present, generated otherwise). Clusters
// whose children are all exclusive labels are skipped — the global rules
// already state their constraint.
std::string serialize_rules(const KnowledgeGraph& kg);

// Dispatch on strategy; kNone yields an empty string.
std::string serialize_kg(const KnowledgeGraph& kg, KgStrategy strategy);

}  // namespace cohort
