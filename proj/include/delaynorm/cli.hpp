#pragma once

#include <iosfwd>
#include <string>

#include "delaynorm/systemio.hpp"

namespace delaynorm {

/// Process exit codes shared by all subcommands.
enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_causality = 2,
    exit_stability = 3,
    exit_parse = 4,
};

struct BodeOptions {
    double wmin = 0.0;
    double wmax = 10.0;
    int points = 200;
    bool log_spacing = false;
};

/// Strong H-infinity norm of the system in `path`; result document on `out`,
/// warnings on `err`. Returns an ExitCode.
int cmd_norm(const std::string& path, const RunConfig& config, std::ostream& out,
             std::ostream& err);

/// Extremum points only. include_unconverged keeps candidates whose
/// correction failed.
int cmd_extrema(const std::string& path, const RunConfig& config, bool include_unconverged,
                std::ostream& out, std::ostream& err);

/// CSV frequency response "omega,magnitude"; rows too close to a pole are
/// emitted as "omega,nan".
int cmd_bode(const std::string& path, const BodeOptions& options, std::ostream& out,
             std::ostream& err);

/// Rewrites any supported document as a canonical "ddae" document.
int cmd_convert(const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace delaynorm
