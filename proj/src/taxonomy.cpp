#include "semlabels/taxonomy.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "semlabels/error.hpp"

namespace semlabels {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

struct RawGraph {
  std::vector<std::string> names;           // node id -> name
  std::vector<int> parent;                  // node id -> parent id or -1
  std::vector<std::vector<int>> children;   // node id -> children in order
};

RawGraph ReadEdges(std::string_view text) {
  RawGraph g;
  std::unordered_map<std::string, int> ids;
  auto intern = [&](std::string_view name) {
    auto [it, inserted] = ids.try_emplace(std::string(name), static_cast<int>(g.names.size()));
    if (inserted) {
      g.names.emplace_back(name);
      g.parent.push_back(-1);
      g.children.emplace_back();
    }
    return it->second;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = (end == std::string_view::npos) ? text.size() + 1 : end + 1;
    ++line_no;

    const std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_no) + " is not `child<TAB>parent`");
    }
    const std::string_view child_name = Trim(line.substr(0, tab));
    const std::string_view parent_name = Trim(line.substr(tab + 1));
    if (child_name.empty() || parent_name.empty()) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_no) + " has an empty node name");
    }
    if (child_name == parent_name) {
      throw Error(ErrorCode::kCycleDetected, "self loop at node '" + std::string(child_name) + "'");
    }
    const int child = intern(child_name);
    const int parent = intern(parent_name);
    if (g.parent[child] == parent) {
      throw Error(ErrorCode::kDuplicateEdge, "edge '" + std::string(child_name) + "' -> '" +
                                                 std::string(parent_name) + "' repeated on line " +
                                                 std::to_string(line_no));
    }
    if (g.parent[child] != -1) {
      throw Error(ErrorCode::kMultipleParents,
                  "node '" + std::string(child_name) + "' has parents '" +
                      g.names[g.parent[child]] + "' and '" + std::string(parent_name) + "'");
    }
    g.parent[child] = parent;
    g.children[parent].push_back(child);
  }
  if (g.names.empty()) throw Error(ErrorCode::kEmptyTaxonomy, "no edges");
  return g;
}

void CheckAcyclic(const RawGraph& g) {
  // 0 = unvisited, 1 = on current walk, 2 = known to reach a root.
  std::vector<int> state(g.names.size(), 0);
  for (std::size_t start = 0; start < g.names.size(); ++start) {
    std::vector<int> walk;
    int node = static_cast<int>(start);
    while (node != -1 && state[node] == 0) {
      state[node] = 1;
      walk.push_back(node);
      node = g.parent[node];
    }
    if (node != -1 && state[node] == 1) {
      std::string cycle;
      bool in_cycle = false;
      for (int w : walk) {
        if (w == node) in_cycle = true;
        if (in_cycle) cycle += "'" + g.names[w] + "' -> ";
      }
      throw Error(ErrorCode::kCycleDetected, cycle + "'" + g.names[node] + "'");
    }
    for (int w : walk) state[w] = 2;
  }
}

}  // namespace

Taxonomy Taxonomy::Parse(std::string_view edge_text) {
  const RawGraph g = ReadEdges(edge_text);
  CheckAcyclic(g);

  std::vector<int> roots;
  for (std::size_t i = 0; i < g.names.size(); ++i) {
    if (g.parent[i] == -1) roots.push_back(static_cast<int>(i));
  }
  if (roots.size() > 1) {
    std::string list;
    for (int r : roots) list += (list.empty() ? "'" : ", '") + g.names[r] + "'";
    throw Error(ErrorCode::kMultipleRoots, list);
  }

  // Depth of every node from the root.
  const auto depth_of = [&](int node) {
    int d = 0;
    for (int p = g.parent[node]; p != -1; p = g.parent[p]) ++d;
    return d;
  };
  int leaf_depth = -1;
  int first_leaf = -1;
  for (std::size_t i = 0; i < g.names.size(); ++i) {
    if (!g.children[i].empty()) continue;
    const int d = depth_of(static_cast<int>(i));
    if (leaf_depth == -1) {
      leaf_depth = d;
      first_leaf = static_cast<int>(i);
    } else if (d != leaf_depth) {
      throw Error(ErrorCode::kNonUniformLeafDepth,
                  "leaf '" + g.names[i] + "' at depth " + std::to_string(d) + " but leaf '" +
                      g.names[first_leaf] + "' at depth " + std::to_string(leaf_depth));
    }
  }

  Taxonomy tax;
  const int num_levels = leaf_depth + 1;
  tax.names_.resize(num_levels);
  tax.parents_.resize(num_levels - 1);
  std::vector<int> index_in_level(g.names.size(), -1);
  std::vector<int> level_of(g.names.size(), -1);
  // File order is node-id order, so a single pass assigns per-level indices
  // by first appearance.
  for (std::size_t i = 0; i < g.names.size(); ++i) {
    const int level = leaf_depth - depth_of(static_cast<int>(i));
    level_of[i] = level;
    index_in_level[i] = static_cast<int>(tax.names_[level].size());
    tax.names_[level].push_back(g.names[i]);
  }
  for (std::size_t i = 0; i < g.names.size(); ++i) {
    const int level = level_of[i];
    if (level == num_levels - 1) continue;
    auto& parents = tax.parents_[level];
    if (parents.size() <= static_cast<std::size_t>(index_in_level[i])) {
      parents.resize(tax.names_[level].size(), -1);
    }
    parents[index_in_level[i]] = index_in_level[g.parent[i]];
  }

  const int num_classes = static_cast<int>(tax.names_.front().size());
  tax.ancestors_.assign(num_classes, std::vector<int>(num_levels));
  for (int c = 0; c < num_classes; ++c) {
    int idx = c;
    for (int level = 0; level < num_levels; ++level) {
      tax.ancestors_[c][level] = idx;
      if (level + 1 < num_levels) idx = tax.parents_[level][idx];
    }
  }
  return tax;
}

Taxonomy Taxonomy::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open taxonomy file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

int Taxonomy::level_size(int level) const {
  CheckLevel(level);
  return static_cast<int>(names_[level].size());
}

const std::string& Taxonomy::node_name(int level, int index) const {
  CheckLevel(level);
  if (index < 0 || index >= level_size(level)) {
    throw Error(ErrorCode::kClassOutOfRange, "node index " + std::to_string(index) +
                                                 " at level " + std::to_string(level));
  }
  return names_[level][index];
}

int Taxonomy::parent(int level, int index) const {
  if (level < 0 || level >= num_levels() - 1) {
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(level) + " has no parent level");
  }
  if (index < 0 || index >= level_size(level)) {
    throw Error(ErrorCode::kClassOutOfRange, "node index " + std::to_string(index));
  }
  return parents_[level][index];
}

int Taxonomy::ancestor_at_level(int cls, int level) const {
  CheckClass(cls);
  CheckLevel(level);
  return ancestors_[cls][level];
}

int Taxonomy::lca_height(int class_i, int class_j) const {
  CheckClass(class_i);
  CheckClass(class_j);
  const auto& a = ancestors_[class_i];
  const auto& b = ancestors_[class_j];
  int level = 0;
  while (a[level] != b[level]) ++level;
  return level;
}

std::string Taxonomy::ToEdgeText() const {
  // Top-down, so every node first appears as a child in its own level's
  // index order and re-parsing reproduces the same indices.
  std::string out;
  for (int level = num_levels() - 2; level >= 0; --level) {
    for (std::size_t i = 0; i < names_[level].size(); ++i) {
      out += names_[level][i] + '\t' + names_[level + 1][parents_[level][i]] + '\n';
    }
  }
  return out;
}

void Taxonomy::CheckClass(int cls) const {
  if (cls < 0 || cls >= num_classes()) {
    throw Error(ErrorCode::kClassOutOfRange,
                "class " + std::to_string(cls) + " not in [0, " + std::to_string(num_classes()) +
                    ")");
  }
}

void Taxonomy::CheckLevel(int level) const {
  if (level < 0 || level >= num_levels()) {
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(level) + " not in [0, " + std::to_string(num_levels()) +
                    ")");
  }
}

}  // namespace semlabels
