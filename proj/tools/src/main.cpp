#include <cstdio>
#include <exception>

#include "adtg/error.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Adaptive diffusion terrain generation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", adtg::kArtifactVersion);

  adtg::cli::register_schedule(app);
  adtg::cli::register_gen_proc(app);
  adtg::cli::register_sample_prior(app);
  adtg::cli::register_diffuse(app);
  adtg::cli::register_synthesize(app);
  adtg::cli::register_variability(app);
  adtg::cli::register_train(app);
  adtg::cli::register_eval(app);
  adtg::cli::register_consistency(app);
  adtg::cli::register_train_predictor(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const adtg::Error& e) {
    std::fprintf(stderr, "adtg: error [%s]: %s\n", adtg::to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "adtg: internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
