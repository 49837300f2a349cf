#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "funcdist/csv.hpp"
#include "funcdist/distance.hpp"
#include "funcdist/frame.hpp"

namespace funcdist::econ {

// One estimation job: which frame it runs on, an optional row filter, and the
// specification itself.
struct PipelineItem {
    std::string frame;  // "counts" or "deals"
    std::optional<std::pair<std::string, double>> subset;  // where column == value
    RegressionSpec spec;
};

struct ReportEntry {
    PipelineItem item;
    bool ok = false;
    std::string error;        // failure reason when !ok
    RegressionResult result;  // valid when ok
};

struct Report {
    std::vector<ReportEntry> entries;
};

// Pair-year count frame derived from a distance panel: year, industry ids,
// distance levels and logs, plus log(1 + deal count) when a counts source is
// merged later. Used by `report` when only distances are available.
DataFrame counts_frame(const std::vector<distance::DistanceMatrix>& distances);

// Adds the transfer-channel columns to a counts frame in place:
//   tf_resid     — log d_TF orthogonalized on log d_U plus year and both
//                  industry fixed effects
//   du_x_tfresid — log d_U x tf_resid
void augment_transfer_columns(DataFrame& counts);

// Named specification batteries. "auto" expands to every battery whose
// required columns are present (deal batteries are still listed when the
// deals frame is missing entirely, so their failure is reported rather than
// silently dropped).
//   counts_by_year   one cross-section per year: log(1+deals) on log d_U
//   counts_pooled    pooled tiers (none / year / year+industry FE,
//                    year-clustered) for each distance measure
//   transfer_channel pooled spec adding tf_resid and its interaction
//   completion       probit of deal completion on distance + deal controls
//   announcement     OLS of announcement returns on distance + deal controls
//   survival         probits of post-merger survival on the completed subset
std::vector<std::string> known_batteries();
std::vector<PipelineItem> build_table_pipeline(const DataFrame* counts,
                                               const DataFrame* deals,
                                               const std::vector<std::string>& batteries);

// Runs every item; per-item failures are captured in the entry, never thrown.
Report run_pipeline(const DataFrame* counts, const DataFrame* deals,
                    const std::vector<PipelineItem>& items, int workers = 1);

// Serializations: long-form coefficient table, full JSON, aligned text.
CsvTable report_to_csv(const Report& report);
nlohmann::json report_to_json(const Report& report);
std::string report_to_text(const Report& report);

}  // namespace funcdist::econ
