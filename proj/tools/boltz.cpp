#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "boltz/errors.hpp"
#include "boltz/harness.hpp"

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw boltz::InvalidInput("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int do_run(const std::string& path, const std::string& outdir)
{
    std::string text = read_file(path);
    if (text.rfind("# boltz manifest", 0) == 0) text = boltz::config_from_manifest(text);
    auto parsed = boltz::parse_config(text);
    if (!parsed.config) {
        for (const auto& e : parsed.errors) std::cerr << path << ": " << e << '\n';
        return 2;
    }
    if (!outdir.empty()) parsed.config->directory = outdir;
    const auto manifest = boltz::run_experiment(*parsed.config);
    int failed = 0;
    for (const auto& c : manifest.chains)
        if (!c.ok) {
            ++failed;
            std::cerr << "grid " << c.run.grid_index << " chain " << c.run.chain << ": " << c.error << '\n';
        }
    std::cout << manifest.chains.size() << " chains, " << failed << " failed; output in "
              << parsed.config->directory.string() << '\n';
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Boltzmann sampling toolkit"};
    app.require_subcommand(1);

    std::string config, outdir;
    auto* run = app.add_subcommand("run", "run every chain of an experiment configuration or manifest");
    run->add_option("config", config, "INI configuration or manifest.txt")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", outdir, "override output.directory");

    std::string dir, observable;
    auto* an = app.add_subcommand("analyze", "estimate an observable per grid point from a run directory");
    an->add_option("dir", dir, "run output directory")->required()->check(CLI::ExistingDirectory);
    an->add_option("--observable", observable, "energy, abs_m, specific_heat, iat_abs_m or pressure")->required();

    std::string curve, grid;
    int n = 64;
    double J = 1, h = 0;
    auto* ref = app.add_subcommand("reference", "print an exact reference curve");
    ref->add_option("--curve", curve, "onsager_c, m0 or ising1d_f")
        ->required()
        ->check(CLI::IsMember({"onsager_c", "m0", "ising1d_f"}));
    ref->add_option("--grid", grid, "start:stop:count or comma list (beta_c/beta, or beta for ising1d_f)")->required();
    ref->add_option("--n", n, "chain length for ising1d_f");
    ref->add_option("-J,--coupling", J, "coupling for ising1d_f");
    ref->add_option("--field", h, "field for ising1d_f");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return do_run(config, outdir);
        if (*an) std::cout << boltz::analyze(dir, observable);
        if (*ref) std::cout << boltz::reference_curve(curve, boltz::parse_grid(grid), n, J, h);
    } catch (const boltz::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
