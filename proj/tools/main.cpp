#include <cstdint>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "log.hpp"
#include "slideflow/errors.hpp"

namespace cli = slideflow::cli;

namespace {

// Flag values plus the CLI11 options that know whether each was given;
// overrides apply on top of the config file only when actually passed.
struct CommonFlags {
    std::string config, out, prior;
    std::uint64_t seed = 0;
    std::size_t threads = 1, steps = 5;
    bool force = false;
    CLI::Option *config_opt = nullptr, *seed_opt = nullptr, *threads_opt = nullptr,
                *prior_opt = nullptr, *steps_opt = nullptr, *out_opt = nullptr;

    void attach(CLI::App* cmd) {
        config_opt = cmd->add_option("--config", config, "key=value configuration file");
        seed_opt = cmd->add_option("--seed", seed, "global RNG seed");
        threads_opt = cmd->add_option("--threads", threads, "worker threads (default 1)");
        prior_opt = cmd->add_option("--prior", prior, "prior kind: zinb|gaussian|zero");
        steps_opt = cmd->add_option("--steps", steps, "refinement steps S");
        out_opt = cmd->add_option("--out", out, "output directory");
        cmd->add_flag("--force", force, "allow writing into a non-empty output directory");
    }

    cli::RunConfig resolve() const {
        cli::RunConfig rc;
        if (config_opt->count()) rc = cli::load_config_file(config, rc);
        if (seed_opt->count()) rc.seed = seed;
        if (threads_opt->count()) rc.threads = threads;
        if (prior_opt->count()) rc.flow.prior.kind = slideflow::prior_kind_from_string(prior);
        if (steps_opt->count()) rc.flow.steps = steps;
        if (out_opt->count()) rc.out = out;
        rc.force = force;
        return rc;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slideflow: generative engine for whole-slide spatial gene expression"};
    app.require_subcommand(1);

    struct Entry {
        CLI::App* cmd;
        CommonFlags flags;
        void (*run)(cli::RunConfig);
    };
    Entry entries[] = {
        {app.add_subcommand("synth", "generate synthetic slides with planted spatial coupling"),
         {}, cli::cmd_synth},
        {app.add_subcommand("train", "fit the denoiser on a directory of slides"), {},
         cli::cmd_train},
        {app.add_subcommand("predict", "sample expression for a slide from a checkpoint"), {},
         cli::cmd_predict},
        {app.add_subcommand("eval", "score predictions against ground truth"), {}, cli::cmd_eval},
        {app.add_subcommand("ablate", "sweep refinement steps and priors on a fixed checkpoint"),
         {}, cli::cmd_ablate},
        {app.add_subcommand("bench", "runtime and memory scaling benchmark"), {}, cli::cmd_bench},
    };
    for (Entry& e : entries) e.flags.attach(e.cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // help text, exit 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return 1;     // usage error, normalized
    }

    for (Entry& e : entries) {
        if (!e.cmd->parsed()) continue;
        try {
            e.run(e.flags.resolve());
            return 0;
        } catch (const slideflow::UsageError& ex) {
            cli::log_error(ex.what());
            return 1;
        } catch (const slideflow::NumericError& ex) {
            cli::log_error(ex.what());
            return 3;
        } catch (const slideflow::DataError& ex) {  // includes shape/contract breaches
            cli::log_error(ex.what());
            return 2;
        } catch (const std::exception& ex) {
            cli::log_error(ex.what());
            return 2;
        }
    }
    return 1;  // unreachable: require_subcommand(1)
}
