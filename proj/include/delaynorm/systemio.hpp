#pragma once

#include <iosfwd>
#include <string>

#include "delaynorm/model.hpp"
#include "delaynorm/strongnorm.hpp"

namespace delaynorm {

/// Settings echoed into every result document.
struct RunConfig {
    int N = 20;
    double axis_tol = 1e-6;
    double corrector_tol = 1e-10;
    int grid_density = 0;  // 0 = per-dimension default
    double rank_tol = 1e-10;
    int max_iter = 50;
};

/// Loads a system description file. Top-level "type" selects between a
/// plain "ddae" document, an "lft" document (converted through the state
/// augmentation) and an "interconnection" document (named subsystems, inline
/// or by relative path, combined by series/parallel/feedback steps).
/// Throws ParseError for anything malformed.
DdaeSystem load_system(const std::string& path);

/// Parses a system document from text; base_dir resolves subsystem paths.
DdaeSystem parse_system(const std::string& text, const std::string& base_dir);

/// Canonical "ddae" document for the system: fixed key order, every float
/// printed with 17 significant digits so output round-trips losslessly and
/// repeated conversion is byte identical.
void emit_ddae_json(const DdaeSystem& sys, std::ostream& out);

/// Result document of a norm run.
void write_norm_result(const StrongNormResult& result, const RunConfig& config,
                       std::ostream& out);

/// Result document carrying only the extremum list.
void write_extrema_result(const std::vector<ExtremumPoint>& points, const RunConfig& config,
                          std::ostream& out);

/// One double with 17 significant digits (shared by all writers).
std::string format_double(double value);

}  // namespace delaynorm
