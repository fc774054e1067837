#include "hazsim/grid.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "hazsim/errors.hpp"
#include "hazsim/json_util.hpp"

namespace hazsim {

namespace {

void fail_if(bool cond, const std::string& msg) {
  if (cond) throw ValidationError(msg);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ", ";
    out += p;
  }
  return out;
}

}  // namespace

void PowerNetwork::finalize() {
  idx = NetworkIndex{};
  std::vector<std::string> errors;

  // --- transmission buses ---
  auto add_bus = [&](const std::string& id, double cap, int sub_ordinal) {
    if (!idx.bus_of.emplace(id, static_cast<int>(idx.bus_id.size())).second)
      errors.push_back("duplicate bus id " + id);
    idx.bus_id.push_back(id);
    idx.bus_capacity_mw.push_back(cap);
    idx.bus_substation.push_back(sub_ordinal);
  };
  for (const auto& p : plants) {
    if (p.capacity_mw < 0) errors.push_back("plant " + p.id + ": negative capacity");
    add_bus(p.id, p.capacity_mw, -1);
  }
  for (std::size_t i = 0; i < substations.size(); ++i)
    add_bus(substations[i].id, 0.0, static_cast<int>(i));

  bool any_tie = false;
  for (const auto& l : lines)
    if (l.from == kExternalBusId || l.to == kExternalBusId) any_tie = true;
  if (any_tie) {
    idx.external_bus = static_cast<int>(idx.bus_id.size());
    add_bus(kExternalBusId, 0.0, -1);
  }

  std::set<std::string> line_ids;
  for (const auto& l : lines) {
    if (!line_ids.insert(l.id).second)
      errors.push_back("duplicate transmission line id " + l.id);
    if (l.reactance <= 0)
      errors.push_back("transmission line " + l.id + ": nonpositive reactance");
    if (l.limit_mw <= 0)
      errors.push_back("transmission line " + l.id + ": nonpositive flow limit");
    if (l.length_km <= 0)
      errors.push_back("transmission line " + l.id + ": nonpositive length");
    auto a = idx.bus_of.find(l.from);
    auto b = idx.bus_of.find(l.to);
    if (a == idx.bus_of.end())
      errors.push_back("transmission line " + l.id + ": dangling endpoint " + l.from);
    if (b == idx.bus_of.end())
      errors.push_back("transmission line " + l.id + ": dangling endpoint " + l.to);
    idx.line_bus.push_back({a == idx.bus_of.end() ? -1 : a->second,
                            b == idx.bus_of.end() ? -1 : b->second});
  }

  // --- distribution trees ---
  idx.substation_customers.assign(idx.bus_id.size(), 0);
  idx.tree_node_offset.push_back(0);
  idx.tree_branch_offset.push_back(0);
  std::unordered_map<std::string, int> node_of;  // global ids
  std::set<std::string> branch_ids;
  std::set<std::string> tract_set;

  for (std::size_t t = 0; t < trees.size(); ++t) {
    const auto& tree = trees[t];
    if (!idx.bus_of.count(tree.substation) ||
        idx.bus_substation[idx.bus_of.at(tree.substation)] < 0)
      errors.push_back("distribution tree rooted at unknown substation " + tree.substation);
    for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
      const auto& nd = tree.nodes[n];
      if (nd.customers < 0)
        errors.push_back("distribution node " + nd.id + ": negative customer count");
      const int g = static_cast<int>(idx.tree_of_node.size());
      if (!node_of.emplace(nd.id, g).second)
        errors.push_back("duplicate distribution node id " + nd.id);
      idx.tree_of_node.push_back(static_cast<int>(t));
      idx.local_of_node.push_back(static_cast<int>(n));
      tract_set.insert(nd.tract);
    }
    idx.tree_node_offset.push_back(static_cast<int>(idx.tree_of_node.size()));
    idx.tree_branch_offset.push_back(idx.tree_branch_offset.back() +
                                     static_cast<int>(tree.branches.size()));
  }
  idx.n_nodes = static_cast<int>(idx.tree_of_node.size());
  idx.n_branches = idx.tree_branch_offset.back();
  if (!errors.empty())
    throw ValidationError("network validation failed: " + join(errors));

  idx.node_parent.assign(idx.n_nodes, -1);
  idx.node_parent_branch.assign(idx.n_nodes, -1);
  idx.branch_child.assign(idx.n_branches, -1);
  idx.node_children.assign(idx.n_nodes, {});
  idx.node_bus.assign(idx.n_nodes, -1);

  for (std::size_t t = 0; t < trees.size(); ++t) {
    const auto& tree = trees[t];
    const int root_bus = idx.bus_of.at(tree.substation);
    const int node_base = idx.tree_node_offset[t];
    const int branch_base = idx.tree_branch_offset[t];

    for (std::size_t b = 0; b < tree.branches.size(); ++b) {
      const auto& br = tree.branches[b];
      const int gb = branch_base + static_cast<int>(b);
      if (!branch_ids.insert(br.id).second)
        errors.push_back("duplicate distribution branch id " + br.id);
      if (br.length_km <= 0)
        errors.push_back("distribution branch " + br.id + ": nonpositive length");
      auto child_it = node_of.find(br.to);
      if (child_it == node_of.end() || idx.tree_of_node[child_it->second] != static_cast<int>(t)) {
        errors.push_back("distribution branch " + br.id + ": child " + br.to +
                         " not a node of tree " + tree.substation);
        continue;
      }
      const int child = child_it->second;
      if (idx.node_parent_branch[child] != -1) {
        errors.push_back("distribution node " + br.to + ": multiple feeding branches");
        continue;
      }
      idx.branch_child[gb] = child;
      idx.node_parent_branch[child] = gb;
      if (br.from == tree.substation) {
        idx.node_parent[child] = -1;
      } else {
        auto parent_it = node_of.find(br.from);
        if (parent_it == node_of.end() ||
            idx.tree_of_node[parent_it->second] != static_cast<int>(t)) {
          errors.push_back("distribution branch " + br.id + ": parent " + br.from +
                           " not the root substation or a node of tree " + tree.substation);
          continue;
        }
        idx.node_parent[child] = parent_it->second;
        idx.node_children[parent_it->second].push_back(child);
      }
    }

    for (int n = node_base; n < idx.tree_node_offset[t + 1]; ++n) {
      idx.node_bus[n] = root_bus;
      if (idx.node_parent_branch[n] == -1)
        errors.push_back("orphan distribution node " +
                         tree.nodes[static_cast<std::size_t>(idx.local_of_node[n])].id +
                         " (no feeding branch)");
    }
  }
  if (!errors.empty())
    throw ValidationError("network validation failed: " + join(errors));

  // reachability from each root; unreachable nodes with parents imply a cycle
  std::vector<char> reached(idx.n_nodes, 0);
  for (std::size_t t = 0; t < trees.size(); ++t) {
    std::deque<int> queue;
    for (int n = idx.tree_node_offset[t]; n < idx.tree_node_offset[t + 1]; ++n)
      if (idx.node_parent[n] == -1) {
        queue.push_back(n);
        reached[n] = 1;
      }
    while (!queue.empty()) {
      const int n = queue.front();
      queue.pop_front();
      idx.topo_order.push_back(n);
      for (int c : idx.node_children[n]) {
        reached[c] = 1;
        queue.push_back(c);
      }
    }
  }
  {
    std::vector<std::string> cycle_edges;
    for (int n = 0; n < idx.n_nodes; ++n)
      if (!reached[n]) cycle_edges.push_back(branch(idx.node_parent_branch[n]).id);
    fail_if(!cycle_edges.empty(),
            "distribution cycle detected; offending branches: " + join(cycle_edges));
  }

  // subtree aggregates in reverse topological order
  idx.subtree_customers.assign(idx.n_nodes, 0);
  idx.subtree_critical.assign(idx.n_nodes, 0);
  for (auto it = idx.topo_order.rbegin(); it != idx.topo_order.rend(); ++it) {
    const int n = *it;
    const auto& nd = node(n);
    idx.subtree_customers[n] += nd.customers;
    idx.subtree_critical[n] |= nd.critical ? 1 : 0;
    if (idx.node_parent[n] >= 0) {
      idx.subtree_customers[idx.node_parent[n]] += idx.subtree_customers[n];
      idx.subtree_critical[idx.node_parent[n]] |= idx.subtree_critical[n];
    } else {
      idx.substation_customers[idx.node_bus[n]] += idx.subtree_customers[n];
    }
    idx.total_customers += nd.customers;
  }

  idx.tracts.assign(tract_set.begin(), tract_set.end());
  idx.node_tract.assign(idx.n_nodes, -1);
  for (int n = 0; n < idx.n_nodes; ++n) {
    const auto it = std::lower_bound(idx.tracts.begin(), idx.tracts.end(), node(n).tract);
    idx.node_tract[n] = static_cast<int>(it - idx.tracts.begin());
  }

  // undamaged transmission graph must be connected
  if (!idx.bus_id.empty()) {
    std::vector<char> seen(idx.bus_id.size(), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!queue.empty()) {
      const int b = queue.front();
      queue.pop_front();
      for (std::size_t l = 0; l < lines.size(); ++l) {
        for (int side = 0; side < 2; ++side) {
          if (idx.line_bus[l][side] != b) continue;
          const int other = idx.line_bus[l][1 - side];
          if (!seen[other]) {
            seen[other] = 1;
            ++count;
            queue.push_back(other);
          }
        }
      }
    }
    if (count != idx.bus_id.size()) {
      std::vector<std::string> stranded;
      for (std::size_t b = 0; b < idx.bus_id.size(); ++b)
        if (!seen[b]) stranded.push_back(idx.bus_id[b]);
      throw ValidationError("transmission graph disconnected; unreachable buses: " +
                            join(stranded));
    }
  }
}

const DistributionNode& PowerNetwork::node(int g) const {
  return trees[static_cast<std::size_t>(idx.tree_of_node[g])]
      .nodes[static_cast<std::size_t>(idx.local_of_node[g])];
}

DistributionNode& PowerNetwork::node_mutable(int g) {
  return trees[static_cast<std::size_t>(idx.tree_of_node[g])]
      .nodes[static_cast<std::size_t>(idx.local_of_node[g])];
}

const DistributionBranch& PowerNetwork::branch(int g) const {
  auto t = static_cast<std::size_t>(
      std::upper_bound(idx.tree_branch_offset.begin(), idx.tree_branch_offset.end(), g) -
      idx.tree_branch_offset.begin() - 1);
  return trees[t].branches[static_cast<std::size_t>(g - idx.tree_branch_offset[t])];
}

DistributionBranch& PowerNetwork::branch_mutable(int g) {
  auto t = static_cast<std::size_t>(
      std::upper_bound(idx.tree_branch_offset.begin(), idx.tree_branch_offset.end(), g) -
      idx.tree_branch_offset.begin() - 1);
  return trees[t].branches[static_cast<std::size_t>(g - idx.tree_branch_offset[t])];
}

std::vector<double> PowerNetwork::bus_demand_mw(double mw_per_customer) const {
  std::vector<double> demand(idx.bus_id.size(), 0.0);
  for (std::size_t b = 0; b < idx.bus_id.size(); ++b)
    demand[b] = mw_per_customer * static_cast<double>(idx.substation_customers[b]);
  return demand;
}

namespace {

json latlon_json(LatLon p) { return json{p.lat, p.lon}; }

LatLon latlon_from(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2) throw ParseError(ctx + ": location must be [lat, lon]");
  return LatLon{j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

PowerNetwork load_network(const std::string& path) {
  const json j = load_json_file(path);
  require_keys(j, {"manifest", "plants", "substations", "transmission_lines", "distribution_trees"},
               path);
  PowerNetwork net;
  for (const auto& p : j.at("plants")) {
    require_keys(p, {"id", "loc", "capacity_mw"}, path + " plant");
    net.plants.push_back(Plant{get_required<std::string>(p, "id", path),
                               latlon_from(p.at("loc"), path),
                               get_required<double>(p, "capacity_mw", path)});
  }
  for (const auto& s : j.at("substations")) {
    require_keys(s, {"id", "loc"}, path + " substation");
    net.substations.push_back(Substation{get_required<std::string>(s, "id", path),
                                         latlon_from(s.at("loc"), path)});
  }
  for (const auto& l : j.at("transmission_lines")) {
    require_keys(l, {"id", "from", "to", "reactance", "limit_mw", "length_km", "underground"},
                 path + " transmission line");
    TransmissionLine line;
    line.id = get_required<std::string>(l, "id", path);
    line.from = get_required<std::string>(l, "from", path);
    line.to = get_required<std::string>(l, "to", path);
    line.reactance = get_required<double>(l, "reactance", path);
    line.limit_mw = get_required<double>(l, "limit_mw", path);
    line.length_km = get_required<double>(l, "length_km", path);
    line.underground = get_or<bool>(l, "underground", false, path);
    net.lines.push_back(std::move(line));
  }
  for (const auto& t : j.at("distribution_trees")) {
    require_keys(t, {"substation", "nodes", "branches"}, path + " distribution tree");
    DistributionTree tree;
    tree.substation = get_required<std::string>(t, "substation", path);
    for (const auto& n : t.at("nodes")) {
      require_keys(n, {"id", "loc", "customers", "tract", "critical"}, path + " node");
      DistributionNode nd;
      nd.id = get_required<std::string>(n, "id", path);
      nd.loc = latlon_from(n.at("loc"), path);
      nd.customers = get_required<long>(n, "customers", path);
      nd.tract = get_required<std::string>(n, "tract", path);
      nd.critical = get_or<bool>(n, "critical", false, path);
      tree.nodes.push_back(std::move(nd));
    }
    for (const auto& b : t.at("branches")) {
      require_keys(b, {"id", "from", "to", "length_km", "underground"}, path + " branch");
      DistributionBranch br;
      br.id = get_required<std::string>(b, "id", path);
      br.from = get_required<std::string>(b, "from", path);
      br.to = get_required<std::string>(b, "to", path);
      br.length_km = get_required<double>(b, "length_km", path);
      br.underground = get_or<bool>(b, "underground", false, path);
      tree.branches.push_back(std::move(br));
    }
    net.trees.push_back(std::move(tree));
  }
  net.finalize();

  if (j.contains("manifest")) {
    const auto& m = j.at("manifest");
    require_keys(m,
                 {"plants", "substations", "transmission_lines", "distribution_nodes",
                  "distribution_branches", "customers"},
                 path + " manifest");
    auto check = [&](const char* key, long actual) {
      const long expect = get_required<long>(m, key, path + " manifest");
      if (expect != actual)
        throw ValidationError(path + ": manifest mismatch for " + key + ": file says " +
                              std::to_string(expect) + ", contents have " +
                              std::to_string(actual));
    };
    check("plants", static_cast<long>(net.plants.size()));
    check("substations", static_cast<long>(net.substations.size()));
    check("transmission_lines", static_cast<long>(net.lines.size()));
    check("distribution_nodes", net.idx.n_nodes);
    check("distribution_branches", net.idx.n_branches);
    check("customers", net.total_customers());
  }
  return net;
}

void save_network(const PowerNetwork& net, const std::string& path) {
  json j;
  j["manifest"] = {{"plants", net.plants.size()},
                   {"substations", net.substations.size()},
                   {"transmission_lines", net.lines.size()},
                   {"distribution_nodes", net.idx.n_nodes},
                   {"distribution_branches", net.idx.n_branches},
                   {"customers", net.total_customers()}};
  j["plants"] = json::array();
  for (const auto& p : net.plants)
    j["plants"].push_back(
        {{"id", p.id}, {"loc", latlon_json(p.loc)}, {"capacity_mw", p.capacity_mw}});
  j["substations"] = json::array();
  for (const auto& s : net.substations)
    j["substations"].push_back({{"id", s.id}, {"loc", latlon_json(s.loc)}});
  j["transmission_lines"] = json::array();
  for (const auto& l : net.lines)
    j["transmission_lines"].push_back({{"id", l.id},
                                       {"from", l.from},
                                       {"to", l.to},
                                       {"reactance", l.reactance},
                                       {"limit_mw", l.limit_mw},
                                       {"length_km", l.length_km},
                                       {"underground", l.underground}});
  j["distribution_trees"] = json::array();
  for (const auto& t : net.trees) {
    json tj;
    tj["substation"] = t.substation;
    tj["nodes"] = json::array();
    for (const auto& n : t.nodes)
      tj["nodes"].push_back({{"id", n.id},
                             {"loc", latlon_json(n.loc)},
                             {"customers", n.customers},
                             {"tract", n.tract},
                             {"critical", n.critical}});
    tj["branches"] = json::array();
    for (const auto& b : t.branches)
      tj["branches"].push_back({{"id", b.id},
                                {"from", b.from},
                                {"to", b.to},
                                {"length_km", b.length_km},
                                {"underground", b.underground}});
    j["distribution_trees"].push_back(std::move(tj));
  }
  save_json_file(j, path);
}

std::vector<Sector> sector_decomposition(const PowerNetwork& net) {
  const auto& idx = net.idx;
  std::vector<Sector> sectors;
  auto is_boundary_node = [&](int n) { return idx.node_children[n].size() != 1; };

  for (int n = 0; n < idx.n_nodes; ++n) {
    const int parent = idx.node_parent[n];
    const bool start_here = parent == -1 || is_boundary_node(parent);
    if (!start_here) continue;
    Sector sec;
    sec.tree = idx.tree_of_node[n];
    int cur = n;
    while (true) {
      const int b = idx.node_parent_branch[cur];
      sec.branches.push_back(b);
      sec.length_km += net.branch(b).length_km;
      if (is_boundary_node(cur)) break;
      cur = idx.node_children[cur][0];
    }
    sec.top_branch = sec.branches.front();
    sectors.push_back(std::move(sec));
  }
  return sectors;
}

SectorLengthSummary harmonic_mean_sector_length(const PowerNetwork& net,
                                                const std::string& tract) {
  if (std::find(net.idx.tracts.begin(), net.idx.tracts.end(), tract) ==
      net.idx.tracts.end())
    throw ValidationError("unknown tract " + tract);

  SectorLengthSummary out;
  out.tract = tract;
  double inv_sum = 0;
  for (const auto& sec : sector_decomposition(net)) {
    bool touches = false;
    for (int b : sec.branches) {
      const int child = net.idx.branch_child[b];
      if (net.node(child).tract == tract) {
        touches = true;
        break;
      }
      const int parent = net.idx.node_parent[child];
      if (parent >= 0 && net.node(parent).tract == tract) {
        touches = true;
        break;
      }
    }
    if (!touches) continue;
    ++out.sector_count;
    inv_sum += 1.0 / sec.length_km;
  }
  if (out.sector_count > 0) out.harmonic_mean_km = out.sector_count / inv_sum;
  return out;
}

long customers_downstream(const PowerNetwork& net, int global_branch) {
  if (global_branch < 0 || global_branch >= net.idx.n_branches)
    throw ValidationError("customers_downstream: branch index out of range");
  return net.idx.subtree_customers[net.idx.branch_child[global_branch]];
}

long customers_downstream(const PowerNetwork& net, const std::string& branch_id) {
  for (int b = 0; b < net.idx.n_branches; ++b)
    if (net.branch(b).id == branch_id) return customers_downstream(net, b);
  throw ValidationError("customers_downstream: no distribution branch named " + branch_id);
}

StudyGrid load_grid(const std::string& path) {
  const json j = load_json_file(path);
  require_keys(j, {"locations"}, path);
  StudyGrid grid;
  for (const auto& row : j.at("locations")) {
    require_keys(row, {"id", "loc"}, path + " grid point");
    grid.ids.push_back(get_required<std::string>(row, "id", path));
    grid.locations.push_back(latlon_from(row.at("loc"), path));
  }
  if (grid.locations.empty()) throw ParseError(path + ": empty study grid");
  return grid;
}

void save_grid(const StudyGrid& grid, const std::string& path) {
  json j;
  j["locations"] = json::array();
  for (std::size_t i = 0; i < grid.ids.size(); ++i)
    j["locations"].push_back(
        {{"id", grid.ids[i]}, {"loc", latlon_json(grid.locations[i])}});
  save_json_file(j, path);
}

}  // namespace hazsim
