#include "svilab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv) {
  CLI::App app{"svilab: stochastic variational inequality laboratory"};
  app.require_subcommand(1);

  svilab::RunConfig config;
  std::string config_path;
  std::string out_dir = ".";
  const std::map<std::string, svilab::OutputFormat> formats = {
      {"json", svilab::OutputFormat::json},
      {"csv", svilab::OutputFormat::csv},
      {"both", svilab::OutputFormat::both}};

  for (const std::string& name : svilab::cli_commands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", config.seed, "64-bit base seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", config.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", config.format, "report format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->callback([&config, name] { config.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : svilab::kExitInput;
  }
  config.config = config_path;
  config.out = out_dir;
  return svilab::run(config, std::cout);
}
