#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qga/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum vs classical genetic optimization of binary portfolios"};
  app.require_subcommand(1);

  qga::bench::PrepareOptions prepare;
  CLI::App* prep_cmd =
      app.add_subcommand("prepare", "Sample problem instances from a price CSV");
  prep_cmd->add_option("--prices", prepare.prices_csv, "price CSV file")->required();
  prep_cmd->add_option("--k", prepare.k, "assets per instance")->required();
  prep_cmd->add_option("--gamma", prepare.gamma, "risk aversion coefficient")
      ->required();
  prep_cmd
      ->add_option("--subset-seeds", prepare.subset_seeds,
                   "one instance is drawn per seed")
      ->required()
      ->delimiter(',');
  prep_cmd->add_option("--out", prepare.out_dir, "output directory")->required();

  qga::bench::BruteOptions brute;
  CLI::App* brute_cmd =
      app.add_subcommand("brute", "Exhaustively solve every instance in a directory");
  brute_cmd->add_option("--instances", brute.instances_dir, "instance directory")
      ->required();
  brute_cmd->add_option("--out", brute.out_csv, "output CSV path")->required();

  qga::bench::RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "Execute an experiment grid");
  run_cmd->add_option("--config", run.config_path, "experiment config JSON")
      ->required();
  run_cmd->add_option("--out", run.out_dir, "output directory")->required();
  run_cmd->add_option("--threads", run.threads, "worker threads (0 = all cores)");

  qga::bench::ReportOptions report;
  CLI::App* report_cmd =
      app.add_subcommand("report", "Aggregate run outputs into summary tables");
  report_cmd->add_option("--runs", report.runs_dir, "directory of run CSVs")
      ->required();
  report_cmd->add_option("--brute", report.brute_csv, "brute-force table CSV")
      ->required();
  report_cmd->add_option("--out", report.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (prep_cmd->parsed()) {
      const qga::bench::PrepareResult result = qga::bench::run_prepare(prepare);
      std::cout << "dropped " << result.dropped_rows
                << " incomplete price rows; wrote " << result.instance_paths.size()
                << " instance files to " << prepare.out_dir << "\n";
    } else if (brute_cmd->parsed()) {
      qga::bench::run_brute(brute);
      std::cout << "wrote " << brute.out_csv << "\n";
    } else if (run_cmd->parsed()) {
      qga::bench::run_experiments(run);
      std::cout << "wrote run files to " << run.out_dir << "\n";
    } else if (report_cmd->parsed()) {
      qga::bench::run_report(report);
      std::cout << "wrote report tables to " << report.out_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
