#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rwpm/runner.hpp"

namespace
{
nlohmann::json load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return nlohmann::json::parse(ss.str());
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"random walk pinning experiments"};
    app.require_subcommand(1);

    std::string config;
    int workers = 0;
    std::string out;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
    run->add_option("config", config, "config file")->required();
    run->add_option("--workers", workers, "worker threads (default: config, RWPM_WORKERS, cores)")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out, "output directory (default: config \"output\" or results)");
    run->add_flag("--quiet", quiet, "no progress lines");

    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", config, "config file")->required();

    auto* version = app.add_subcommand("version", "print the version");

    CLI11_PARSE(app, argc, argv);

    if (version->parsed())
    {
        std::cout << "rwpm " << rwpm::kVersion << "\n";
        return 0;
    }

    nlohmann::json cfg;
    try
    {
        cfg = load(config);
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (validate->parsed())
    {
        auto diags = rwpm::validate_config(cfg);
        for (const auto& d : diags)
            std::cout << d.str() << "\n";
        if (rwpm::has_errors(diags))
            return 2;
        std::cout << "ok\n";
        return 0;
    }

    rwpm::RunOptions opts;
    opts.workers = workers;
    opts.out_dir = out;
    opts.quiet = quiet;
    auto res = rwpm::run_experiment(cfg, opts);
    for (const auto& d : res.diagnostics)
        std::cerr << d.str() << "\n";
    if (!res.error.empty())
        std::cerr << "error: " << res.error << "\n";
    for (const auto& f : res.files)
        std::cout << "wrote " << f << "\n";
    return res.exit_code;
}
