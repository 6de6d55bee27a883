#include "gridsim/synth.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv)
{
    gridsim::SynthConfig cfg;
    std::string out = "data";
    CLI::App app{"Writes a synthetic nine-site fixture", "gridsim-synth"};
    app.add_option("--out", out, "output directory")->capture_default_str();
    app.add_option("--seed", cfg.seed)->capture_default_str();
    app.add_option("--jobs", cfg.jobs)->capture_default_str();
    app.add_option("--files", cfg.files)->capture_default_str();
    app.add_option("--cores", cfg.total_cores)->capture_default_str();
    app.add_option("--file-median", cfg.file_median_bytes, "bytes")->capture_default_str();
    app.add_option("--cpu-median", cfg.cpu_median_s, "seconds")->capture_default_str();
    app.add_option("--max-read-rate", cfg.max_read_rate, "bytes per cpu second")->capture_default_str();
    app.add_option("--file-sigma", cfg.file_sigma)->capture_default_str();
    app.add_option("--popularity", cfg.popularity, "Zipf exponent")->capture_default_str();
    app.add_option("--extra-input", cfg.extra_input_p)->capture_default_str();
    app.add_option("--t2-quality", cfg.t2_link_quality)->capture_default_str();
    app.add_option("--tier1-quality", cfg.tier1_link_quality)->capture_default_str();
    std::vector<std::string> shares;
    app.add_option("--share", shares, "SITE=fraction of trace jobs, replaces the default split");
    CLI11_PARSE(app, argc, argv);

    if (!shares.empty()) {
        cfg.job_share.clear();
        for (const auto& s : shares) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --share expects SITE=fraction\n";
                return 2;
            }
            cfg.job_share[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
        }
    }

    try {
        gridsim::write_fixture(gridsim::make_synthetic(cfg), out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
