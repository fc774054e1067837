#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "hazsim/geo.hpp"

namespace hazsim {

inline constexpr const char* kExternalBusId = "EXT";

struct Plant {
  std::string id;
  LatLon loc;
  double capacity_mw = 0;
};

struct Substation {
  std::string id;
  LatLon loc;
};

struct TransmissionLine {
  std::string id;
  std::string from, to;  // plant/substation ids, or EXT for a boundary tie
  double reactance = 0.01;  // p.u.
  double limit_mw = 0;
  double length_km = 0;
  bool underground = false;
};

struct DistributionNode {
  std::string id;
  LatLon loc;
  long customers = 0;
  std::string tract;
  bool critical = false;  // facility vital to public safety/health/welfare
};

struct DistributionBranch {
  std::string id;
  std::string from, to;  // parent (substation or node) -> child node
  double length_km = 0;
  bool underground = false;
};

struct DistributionTree {
  std::string substation;
  std::vector<DistributionNode> nodes;
  std::vector<DistributionBranch> branches;
};

// Flat integer-indexed view of the network, built once on finalize(). All
// simulation code works on these indices; the string ids are kept for
// diagnostics, attribution and file round-trips.
struct NetworkIndex {
  // transmission buses: plants first, then substations, then EXT (if any tie)
  std::vector<std::string> bus_id;
  std::vector<double> bus_capacity_mw;
  std::vector<int> bus_substation;  // ordinal into substations, or -1
  int external_bus = -1;
  std::unordered_map<std::string, int> bus_of;
  std::vector<std::array<int, 2>> line_bus;

  // distribution, flattened tree-major
  int n_nodes = 0, n_branches = 0;
  std::vector<int> tree_of_node, local_of_node;
  std::vector<int> tree_node_offset;    // trees.size() + 1
  std::vector<int> tree_branch_offset;  // trees.size() + 1
  std::vector<int> node_parent;         // global node -> global node, -1 = substation root
  std::vector<int> node_parent_branch;  // global node -> global branch feeding it
  std::vector<int> branch_child;        // global branch -> global child node
  std::vector<std::vector<int>> node_children;
  std::vector<int> topo_order;          // parents before children
  std::vector<int> node_bus;            // global node -> substation bus index
  std::vector<long> subtree_customers;  // customers at and below node
  std::vector<char> subtree_critical;
  std::vector<long> substation_customers;  // per bus index (0 for non-substations)
  long total_customers = 0;

  std::vector<std::string> tracts;  // distinct, sorted
  std::vector<int> node_tract;
};

struct PowerNetwork {
  std::vector<Plant> plants;
  std::vector<Substation> substations;
  std::vector<TransmissionLine> lines;
  std::vector<DistributionTree> trees;

  NetworkIndex idx;

  // Build the index and verify every structural invariant; throws
  // ValidationError listing each offending element.
  void finalize();

  const DistributionNode& node(int g) const;
  DistributionNode& node_mutable(int g);
  const DistributionBranch& branch(int g) const;
  DistributionBranch& branch_mutable(int g);
  long total_customers() const { return idx.total_customers; }

  // Per-bus transmission-level demand: customers aggregated per substation.
  std::vector<double> bus_demand_mw(double mw_per_customer) const;
};

PowerNetwork load_network(const std::string& path);
void save_network(const PowerNetwork& net, const std::string& path);

// Maximal unbranched chains of distribution branches. Chain boundaries are
// the substation root, leaves, and any vertex with more than one child.
struct Sector {
  int tree = -1;
  std::vector<int> branches;  // global indices, root side first
  double length_km = 0;
  int top_branch = -1;  // root-side branch
};
std::vector<Sector> sector_decomposition(const PowerNetwork& net);

struct SectorLengthSummary {
  std::string tract;
  double harmonic_mean_km = 0;
  int sector_count = 0;
};
SectorLengthSummary harmonic_mean_sector_length(const PowerNetwork& net,
                                                const std::string& tract);

long customers_downstream(const PowerNetwork& net, int global_branch);
long customers_downstream(const PowerNetwork& net, const std::string& branch_id);

// Study grid (wind sample points).
struct StudyGrid {
  std::vector<std::string> ids;
  std::vector<LatLon> locations;
};
StudyGrid load_grid(const std::string& path);
void save_grid(const StudyGrid& grid, const std::string& path);

}  // namespace hazsim
