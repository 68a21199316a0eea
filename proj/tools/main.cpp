#include <iostream>

#include <CLI11.hpp>

#include "cmaxent/cli.hpp"

int main(int argc, char** argv) {
  using cmaxent::cli::RunConfig;
  RunConfig config;
  std::string in;
  std::string out;
  std::string direction;
  std::string strategy;

  CLI::App app{"Causal maximum-entropy predictors from moment constraints"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--in", in, "input file (stdin if omitted)");
    sub->add_option("--out", out, "output file (stdout if omitted)");
    sub->add_option("--missing", config.missing, "unknown moment")
        ->check(CLI::IsMember({"none", "phi2", "s12"}));
    sub->add_option("--strategy", strategy, "phi2 imputation with --missing phi2")
        ->check(CLI::IsMember({"paper", "entropy"}));
  };

  auto* moments = app.add_subcommand("moments", "estimate a moment spec from a CSV sample");
  moments->add_option("--in", in, "CSV sample (stdin if omitted)");
  moments->add_option("--out", out, "output file (stdout if omitted)");

  auto* fit = app.add_subcommand("fit", "fit a model from a moment spec");
  add_common(fit);
  fit->add_option("--direction", direction, "causal | anticausal | combined")
      ->check(CLI::IsMember({"causal", "anticausal", "combined"}));

  auto* compare = app.add_subcommand("compare", "compare causal and anticausal decision boundaries");
  add_common(compare);

  auto* plot = app.add_subcommand("plot-data", "posterior surfaces and boundary segments");
  add_common(plot);
  plot->add_option("--grid", config.grid, "points per axis")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "check closed forms against grid maximum entropy");
  add_common(oracle);
  oracle->add_option("--direction", direction, "causal | anticausal | both")
      ->check(CLI::IsMember({"causal", "anticausal", "both"}));
  oracle->add_option("--grid", config.grid, "cells per axis")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen", "sample a CSV from a fitted model");
  gen->add_option("--in", in, "model JSON (stdin if omitted)");
  gen->add_option("--out", out, "output file (stdout if omitted)");
  gen->add_option("--n", config.n, "number of rows")->check(CLI::PositiveNumber);
  gen->add_option("--seed", config.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cmaxent::cli::kExitUsage;
  }

  config.subcommand = app.get_subcommands().front()->get_name();
  if (!in.empty()) config.in = in;
  if (!out.empty()) config.out = out;
  if (!direction.empty()) config.direction = direction;
  if (!strategy.empty()) config.strategy = strategy;
  return cmaxent::cli::run(config, std::cin, std::cout, std::cerr);
}
