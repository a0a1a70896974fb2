#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lcdc/metrics.hpp"
#include "lcdc/scenario.hpp"

namespace lcdc {

// JSON summary (schema "lcdc-summary/1") for one or two runs, with the
// savings block when both a gated run and its baseline are present.
std::string summary_json(const ScenarioConfig& config, const RunMetrics* gated,
                         const RunMetrics* baseline, const std::optional<SavingsReport>& savings);

// link_id,begin_us,end_us,state
std::string timeline_csv(const ActivationTimeline& timeline);
// bucket_low,bucket_high,time_fraction
std::string histogram_csv(const ActivationTimeline& timeline);
// link_id,node_id,headline,energy_j
std::string ledger_csv(const std::vector<LedgerEntry>& ledger);

// Writes summary.json, effective.cfg and per-mode CSVs into `dir`.
// Returns the paths written.
std::vector<std::filesystem::path> write_reports(const std::filesystem::path& dir,
                                                 const ScenarioConfig& config,
                                                 const RunMetrics* gated, const RunMetrics* baseline,
                                                 const std::optional<SavingsReport>& savings);

std::string hex64(std::uint64_t v);

}  // namespace lcdc
