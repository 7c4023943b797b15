#include <CLI11.hpp>

#include "isothermic/jobs.hpp"

using namespace isothermic;

namespace {

// exit codes: 0 all checks pass, 1 check failure, 2 spec or runtime error
int run_like(const std::string& spec_path, const std::string& outdir, bool verbose,
             bool write_artifacts) {
    JobSpec spec = JobSpec::load(spec_path);
    if (!write_artifacts) spec.raw.erase("outputs");
    JobReport rep = run_job(spec, outdir, verbose);
    std::printf("%s\n", rep.report.dump(2).c_str());
    std::filesystem::create_directories(outdir);
    std::ofstream rf(std::filesystem::path(outdir) / "report.json");
    rf << rep.report.dump(2) << "\n";
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"isothermic surface toolkit"};
    app.require_subcommand(1);

    std::string spec_path, outdir = "out", grid_path, format = "obj", out_path;
    bool verbose = false;
    std::vector<int> axes{0, 1, 2};

    auto* run = app.add_subcommand("run", "execute a job spec and write artifacts");
    run->add_option("spec", spec_path, "job spec JSON")->required();
    run->add_option("--out", outdir, "output directory");
    run->add_flag("--verbose", verbose, "progress to stderr");

    auto* verify = app.add_subcommand("verify", "execute the checks of a job spec");
    verify->add_option("spec", spec_path, "job spec JSON")->required();
    verify->add_option("--out", outdir, "report directory");
    verify->add_flag("--verbose", verbose, "progress to stderr");

    auto* exp = app.add_subcommand("export", "convert a stored grid to a mesh");
    exp->add_option("grid", grid_path, "grid JSON")->required();
    exp->add_option("--format", format, "obj or ply");
    exp->add_option("--axes", axes, "three coordinate indices")->expected(3);
    exp->add_option("--out", out_path, "output mesh path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_like(spec_path, outdir, verbose, true);
        if (verify->parsed()) return run_like(spec_path, outdir, verbose, false);
        if (exp->parsed()) {
            SurfaceGrid g = load_grid(grid_path);
            if (out_path.empty()) {
                std::filesystem::path p = grid_path;
                p.replace_extension("." + format);
                out_path = p.string();
            }
            export_mesh(g, out_path, format, {axes[0], axes[1], axes[2]});
            std::printf("wrote %s\n", out_path.c_str());
            return 0;
        }
    } catch (const error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
