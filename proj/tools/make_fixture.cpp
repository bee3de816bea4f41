// Generates the deterministic demo datasets used by the configs under
// configs/ and by the acceptance tests: a turbofan-style run-to-failure set
// and a drive-stats daily-snapshot set.

#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "fixture_gen.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate demo datasets"};
    std::string out = "data";
    std::string which = "all";
    std::uint64_t seed = 0;
    app.add_option("--out", out, "output root (default: data)");
    app.add_option("--which", which, "cmapss | backblaze | all")
        ->check(CLI::IsMember({"cmapss", "backblaze", "all"}));
    app.add_option("--seed", seed, "override the built-in seeds");
    CLI11_PARSE(app, argc, argv);

    try {
        if (which == "cmapss" || which == "all") {
            prog::fixture::CmapssFixtureConfig cfg;
            if (seed != 0) {
                cfg.seed = seed;
            }
            prog::fixture::write_cmapss_fixture(out + "/fd001", cfg);
            std::printf("wrote %s/fd001 (train_FD001.txt, test_FD001.txt, RUL_FD001.txt)\n",
                        out.c_str());
        }
        if (which == "backblaze" || which == "all") {
            prog::fixture::BackblazeFixtureConfig cfg;
            if (seed != 0) {
                cfg.seed = seed;
            }
            prog::fixture::write_backblaze_fixture(out + "/backblaze", cfg);
            std::printf("wrote %s/backblaze (daily CSV snapshots)\n", out.c_str());
        }
    } catch (const std::exception& err) {
        std::fprintf(stderr, "make_fixture: %s\n", err.what());
        return 1;
    }
    return 0;
}
