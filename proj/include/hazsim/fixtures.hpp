#pragma once

#include <cstdint>
#include <string>

#include "hazsim/catalog.hpp"
#include "hazsim/grid.hpp"
#include "hazsim/heat.hpp"

namespace hazsim {

// Deterministic synthetic inputs at roughly 1/50 of a metropolitan system:
// clustered substations, random spanning-tree feeders, a meshed transmission
// ring with external ties, storm catalogs for a reference climate and two
// model projections, and matching daily climatologies.
struct FixtureSet {
  PowerNetwork network;
  StudyGrid grid;
  StormCatalog catalog_historical;      // reference climate
  StormCatalog catalog_future_blended;  // bias-corrected, blended projection
  StormCatalog catalog_ike;             // strong close-pass calibration event
  StormCatalog catalog_harvey;          // weak distant-pass calibration event
  HeatClimatology climatology_historical;
  HeatClimatology climatology_future;
};

FixtureSet generate_fixtures(std::uint64_t seed, double scale);

// Generates the full set, writes every file plus fragility/resources/targets
// defaults, a ready-to-run config and a manifest into out_dir.
void write_fixture_files(std::uint64_t seed, double scale, const std::string& out_dir);

PowerNetwork generate_network(std::uint64_t seed, double scale);
StudyGrid generate_grid(double spacing_km = 2.0);

}  // namespace hazsim
