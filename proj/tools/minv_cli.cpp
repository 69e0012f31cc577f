// minv command line: drives the shared library through its C API only.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "minv/minv.h"

namespace {

int exit_code_for(int status) {
    switch (status) {
        case MINV_OK:
            return 0;
        case MINV_EINVAL:
        case MINV_ESHAPE:
        case MINV_ECONFIG:
            return 2;
        case MINV_EIO:
        case MINV_EFORMAT:
        case MINV_EVERSION:
        case MINV_ECHECKSUM:
        case MINV_ETRUNCATED:
            return 3;
        case MINV_ENUMERIC:
            return 4;
        default:
            return 4;
    }
}

struct ConfigHandle {
    minv_config* cfg = minv_config_new();
    ~ConfigHandle() { minv_config_free(cfg); }
};

int fail(int status) {
    std::fprintf(stderr, "minv: error: %s\n", minv_last_error());
    return exit_code_for(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"minv — GAN-latent-space model inversion toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::string config_path;
    std::string outdir = "out";
    std::string seed;
    std::vector<std::string> sets;
    std::string experiment;

    std::string parallel;
    auto add_common = [&](CLI::App* cmd, bool with_out = true) {
        cmd->add_option("-c,--config", config_path, "configuration file (key = value sections)");
        if (with_out) cmd->add_option("-o,--out", outdir, "output directory")->capture_default_str();
        cmd->add_option("--seed", seed, "override run.seed");
        cmd->add_option("--parallel", parallel, "concurrent restarts / sweep cells");
        cmd->add_option("-s,--set", sets, "override any key, e.g. --set attack.lambda=0.1")
            ->expected(-1);
    };

    auto* train_target = app.add_subcommand("train-target", "train the target classifier");
    add_common(train_target);
    auto* train_gan = app.add_subcommand("train-gan", "train the GAN on the superset corpus");
    add_common(train_gan);
    auto* invert = app.add_subcommand("invert", "recover a class representative");
    add_common(invert);
    std::string mode;
    int class_index = -1;
    invert->add_option("--mode", mode, "latent | direct");
    invert->add_option("--class", class_index, "target class index");
    auto* sweep = app.add_subcommand("sweep-p", "attack once per regularizer order p");
    add_common(sweep);
    auto* analyze = app.add_subcommand("analyze-manifold",
                                       "Lipschitz bound, manifold gap and latent gap bound");
    add_common(analyze);
    auto* interp = app.add_subcommand("interpolate", "latent tunnel between two class inversions");
    add_common(interp);
    auto* render = app.add_subcommand("render", "write a sample grid as PGM");
    add_common(render);
    auto* repro =
        app.add_subcommand("reproduce", "full pipeline: subset, train, invert, analyze");
    add_common(repro);
    repro->add_option("experiment", experiment, "synthetic | mnist-6of10 | fashion-5of10")
        ->required();
    auto* print_cfg = app.add_subcommand("print-config", "print all defaults and exit");
    add_common(print_cfg, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // usage problems exit 2
    }

    if (print_cfg->parsed() && config_path.empty() && sets.empty() && seed.empty()) {
        char* text = minv_config_defaults();
        std::fputs(text, stdout);
        minv_text_free(text);
        return 0;
    }

    ConfigHandle handle;
    if (!handle.cfg) {
        std::fprintf(stderr, "minv: error: out of memory\n");
        return 4;
    }
    int rc = MINV_OK;
    if (!config_path.empty()) {
        rc = minv_config_load_file(handle.cfg, config_path.c_str());
        if (rc != MINV_OK) return fail(rc);
    }
    for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "minv: error: --set expects key=value, got '%s'\n", kv.c_str());
            return 2;
        }
        rc = minv_config_set(handle.cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        if (rc != MINV_OK) return fail(rc);
    }
    if (!seed.empty()) {
        rc = minv_config_set(handle.cfg, "run.seed", seed.c_str());
        if (rc != MINV_OK) return fail(rc);
    }
    if (!parallel.empty()) {
        rc = minv_config_set(handle.cfg, "run.parallel", parallel.c_str());
        if (rc != MINV_OK) return fail(rc);
    }
    if (invert->parsed()) {
        if (!mode.empty()) {
            rc = minv_config_set(handle.cfg, "attack.mode", mode.c_str());
            if (rc != MINV_OK) return fail(rc);
        }
        if (class_index >= 0) {
            rc = minv_config_set(handle.cfg, "attack.class",
                                 std::to_string(class_index).c_str());
            if (rc != MINV_OK) return fail(rc);
        }
    }

    if (print_cfg->parsed()) {
        char* text = minv_config_echo(handle.cfg);
        std::fputs(text, stdout);
        minv_text_free(text);
        return 0;
    }
    if (train_target->parsed()) rc = minv_run_train_target(handle.cfg, outdir.c_str());
    else if (train_gan->parsed()) rc = minv_run_train_gan(handle.cfg, outdir.c_str());
    else if (invert->parsed()) rc = minv_run_invert(handle.cfg, outdir.c_str());
    else if (sweep->parsed()) rc = minv_run_sweep_p(handle.cfg, outdir.c_str());
    else if (analyze->parsed()) rc = minv_run_analyze_manifold(handle.cfg, outdir.c_str());
    else if (interp->parsed()) rc = minv_run_interpolate(handle.cfg, outdir.c_str());
    else if (render->parsed()) rc = minv_run_render(handle.cfg, outdir.c_str());
    else if (repro->parsed())
        rc = minv_run_reproduce(handle.cfg, experiment.c_str(), outdir.c_str());

    if (rc != MINV_OK) return fail(rc);
    return 0;
}
