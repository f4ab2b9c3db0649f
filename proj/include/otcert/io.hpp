#pragma once

#include <filesystem>
#include <string>

#include "otcert/measures.hpp"

namespace otcert {

/// Measure CSV: header "x1,...,xn,weight", one point per row.
DiscreteMeasure read_measure_csv(const std::filesystem::path& path);
void write_measure_csv(const std::filesystem::path& path,
                       const DiscreteMeasure& m);

/// Pair CSV: header "x1,...,xn,y1,...,yn[,mass]".
SupportSample read_pairs_csv(const std::filesystem::path& path);
void write_pairs_csv(const std::filesystem::path& path,
                     const SupportSample& sample);

/// Plan JSON: {"source_file": ..., "target_file": ..., "entries": [[i,j,mass],...]}
/// with 0-based indices. Relative measure paths resolve against the JSON
/// file's directory.
TransportPlan read_plan_json(const std::filesystem::path& path);
void write_plan_json(const std::filesystem::path& path,
                     const TransportPlan& plan,
                     const std::string& source_file,
                     const std::string& target_file);

}  // namespace otcert
