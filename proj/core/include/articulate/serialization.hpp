#pragma once

#include <string>
#include <vector>

#include "articulate/evaluate.hpp"
#include "articulate/kinematics.hpp"

namespace articulate {

// Shared by every file format this library writes. Readers reject other
// versions with SchemaVersionMismatch.
inline constexpr int kSchemaVersion = 1;

// Model JSON (single object). load_model validates the result.
void save_model(const KinematicModel& model, const std::string& path);
KinematicModel load_model(const std::string& path);

// One line of an estimates file. Scenes that failed to fit keep ok=false
// and the error text instead of an estimate.
struct EstimateRecord {
  SceneEstimate estimate;
  bool ok = true;
  std::string error;
};

struct EstimateFile {
  Method method = Method::ancsh;
  std::vector<EstimateRecord> records;
};

// Estimates JSONL: header line with schema version and method, then one
// record per scene.
void write_estimates(const EstimateFile& file, const std::string& path);
EstimateFile read_estimates(const std::string& path);

struct FailureNote {
  std::uint64_t scene_id = 0;
  std::string message;
};

// Optional report sections; empty vectors and strings are omitted (the
// failures list is always written, so an empty one is visible). config_json
// is embedded verbatim and must be valid JSON when nonempty.
struct ReportExtras {
  std::vector<OcclusionBin> occlusion_bins;
  std::vector<JointVotingRow> joint_voting;
  std::vector<FailureNote> failures;
  std::string config_json;
};

void write_report_json(const ComparisonReport& report,
                       const ReportExtras& extras, const std::string& path);
// One row per (method, part) and per (method, joint); metrics that do not
// apply stay empty.
void write_report_csv(const ComparisonReport& report, const std::string& path);

}  // namespace articulate
