#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "gridseg/estimator.hpp"
#include "gridseg/inference.hpp"
#include "gridseg/segtree.hpp"
#include "gridseg/sim.hpp"

namespace gridseg::io {

inline constexpr const char* kSchema = "gridseg/v1";

// Support sets and change points are written 1-based.

nlohmann::ordered_json trace_json(const EstimationTrace& trace, GridDims dims, const std::string& algorithm);
nlohmann::ordered_json inference_json(const InferenceReport& report, GridDims dims);
nlohmann::ordered_json tree_json(const SegTree& tree);
nlohmann::ordered_json replication_json(const ReplicationRecord& record, const SimDesign& design);

/// Header plus one row: design parameters, then bias, rmse, coverage and average margin per regime and axis.
void write_metrics_csv(std::ostream& out, const SimDesign& design, const ReplicationMetrics& metrics);

}  // namespace gridseg::io
