#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "delaynorm/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Extremum points and strong H-infinity norms of SISO time-delay systems"};
    app.require_subcommand(1);

    delaynorm::RunConfig config;
    std::string file;
    bool include_unconverged = false;
    delaynorm::BodeOptions bode;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("file", file, "system description file")->required();
        cmd->add_option("--N", config.N, "discretization points (default 20)");
        cmd->add_option("--axis-tol", config.axis_tol,
                        "imaginary-axis acceptance tolerance for predicted eigenvalues");
        cmd->add_option("--corrector-tol", config.corrector_tol,
                        "Gauss-Newton residual tolerance scale");
        cmd->add_option("--grid-density", config.grid_density,
                        "points per delay-angle dimension (0 = automatic)");
        cmd->add_option("--rank-tol", config.rank_tol, "relative rank tolerance for E");
        cmd->add_option("--max-iter", config.max_iter, "Gauss-Newton iteration cap");
    };

    CLI::App* norm = app.add_subcommand("norm", "strong H-infinity norm");
    add_common(norm);

    CLI::App* extrema = app.add_subcommand("extrema", "extremum points of the magnitude response");
    add_common(extrema);
    extrema->add_flag("--include-unconverged", include_unconverged,
                      "keep candidates whose correction failed");

    CLI::App* bode_cmd = app.add_subcommand("bode", "magnitude response samples as CSV");
    bode_cmd->add_option("file", file, "system description file")->required();
    bode_cmd->add_option("--wmin", bode.wmin, "lowest frequency (rad/s)");
    bode_cmd->add_option("--wmax", bode.wmax, "highest frequency (rad/s)");
    bode_cmd->add_option("--points", bode.points, "number of samples");
    bode_cmd->add_flag("--log", bode.log_spacing, "logarithmic frequency spacing");

    CLI::App* convert = app.add_subcommand("convert", "rewrite as a canonical ddae document");
    convert->add_option("file", file, "system description file")->required();

    CLI11_PARSE(app, argc, argv);

    if (norm->parsed()) return delaynorm::cmd_norm(file, config, std::cout, std::cerr);
    if (extrema->parsed()) {
        return delaynorm::cmd_extrema(file, config, include_unconverged, std::cout, std::cerr);
    }
    if (bode_cmd->parsed()) return delaynorm::cmd_bode(file, bode, std::cout, std::cerr);
    if (convert->parsed()) return delaynorm::cmd_convert(file, std::cout, std::cerr);
    return delaynorm::exit_failure;
}
