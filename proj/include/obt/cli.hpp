#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "obt/metrics.hpp"
#include "obt/synth.hpp"
#include "obt/trackers.hpp"

namespace obt {

// Flat `key = value` config files with `#` comments. Unknown keys are
// rejected with a diagnostic naming the key.
ScenarioConfig parse_scenario_config(std::istream& in);
PerturbConfig parse_perturb_config(std::istream& in);
TrackerConfig parse_tracker_config(std::istream& in);

// Metrics CSV: class,HOTA,MOTA,IDF1,DetA,AssA,FP,FN,IDSW — one row per
// class (by name) plus class_averaged and detection_averaged rows.
void write_metrics_csv(const MetricsReport& report, std::ostream& out);
void write_metrics_text(const MetricsReport& report, std::ostream& out);

// Command-line surface. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 validation found ERROR-level findings.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace obt
