// qform_lab: command-line driver for the tensor-norm experiments.
//
// Exit status: 0 all in-run contracts held, 1 contract violation,
// 2 usage error, 3 I/O error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "qform/lab.hpp"
#include "qform/lps_su2.hpp"

namespace {

namespace lab = qform::lab;

constexpr int kUsage = 2;
constexpr int kIo = 3;

struct CliState {
  lab::ExperimentConfig config;
  std::string output;
  std::string export_tower;
};

void add_common(CLI::App* sub, CliState& s) {
  static const std::map<std::string, lab::OutputFormat> formats{{"json", lab::OutputFormat::json},
                                                                {"csv", lab::OutputFormat::csv}};
  sub->add_option("--seed", s.config.seed, "Base seed (64-bit)");
  sub->add_option("--format", s.config.format, "Output format: json or csv")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  sub->add_option("--output,-o", s.output,
                  "Report path (default: stdout, or $QFORM_LAB_OUTPUT_DIR/<subcommand>.<format>)");
  sub->add_option("--jobs", s.config.jobs, "Worker threads");
  sub->add_flag("--timing", s.config.timing, "Record wall time per record (breaks byte-stability)");
}

void add_solver(CLI::App* sub, CliState& s) {
  sub->add_option("--tol", s.config.tol, "Power-iteration tolerance on squared estimates");
  sub->add_option("--max-iter", s.config.max_iter, "Power-iteration cap per start");
  sub->add_option("--restarts", s.config.restarts, "Random starts besides the identity");
}

void add_family(CLI::App* sub, CliState& s) {
  sub->add_option("--n", s.config.n, "Number of unitaries");
  sub->add_option("--dim", s.config.dim, "Matrix dimension");
  sub->add_option("--trials", s.config.trials, "Number of seeded trials");
}

std::filesystem::path default_path(const lab::ExperimentConfig& c) {
  const char* dir = std::getenv("QFORM_LAB_OUTPUT_DIR");
  if (dir == nullptr || *dir == '\0') return {};
  return std::filesystem::path(dir) / (std::string(lab::to_string(c.subcommand)) + "." + lab::to_string(c.format));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal tensor norms of quadratic forms in unitaries"};
  app.require_subcommand(1);
  CliState state;

  auto* norm = app.add_subcommand("norm", "‖Σ uᵢ⊗ūᵢ‖ for Haar-random families");
  add_family(norm, state);
  add_solver(norm, state);
  add_common(norm, state);

  auto* randcheck = app.add_subcommand("randcheck", "2√(n−1) gap and Haagerup slack on random trials");
  add_family(randcheck, state);
  add_solver(randcheck, state);
  add_common(randcheck, state);

  auto* szarek = app.add_subcommand("szarek", "⟨(T*T)^m t, t⟩ against identity-pattern counts");
  add_family(szarek, state);
  szarek->add_option("--m", state.config.m_max, "Largest moment order");
  add_common(szarek, state);

  auto* walks = app.add_subcommand("walks", "Exact identity-pattern / tree return counts");
  walks->add_option("--gens,--n", state.config.n, "Number of free generators");
  walks->add_option("--steps", state.config.m_max, "Largest half-length m");
  walks->add_option("--degree", state.config.degree, "Count closed walks on the degree-regular tree instead");
  add_common(walks, state);

  auto* absorb = app.add_subcommand("absorb", "Absorption check at the trace-moment level");
  add_family(absorb, state);
  absorb->add_option("--m", state.config.m_max, "Largest moment order");
  add_common(absorb, state);

  auto* lps = app.add_subcommand("lps", "Block norms Σ π_m(ωᵢ) for LPS generators");
  lps->add_option("--prime", state.config.prime, "Prime p ≡ 1 (mod 4)");
  lps->add_option("--cutoff", state.config.cutoff, "Largest degree m (default 40)");
  lps->add_option("--export-tower", state.export_tower, "Also write the representation tower as JSON");
  add_common(lps, state);

  auto* cn = app.add_subcommand("cn", "Cross norms ‖Σ π_m(ωᵢ)⊗conj(π_m'(ωᵢ))‖ for LPS generators");
  cn->add_option("--prime", state.config.prime, "Prime p ≡ 1 (mod 4)");
  cn->add_option("--cutoff", state.config.cutoff, "Largest degree (default 8)");
  add_solver(cn, state);
  add_common(cn, state);

  const std::map<CLI::App*, lab::Subcommand> kinds{
      {norm, lab::Subcommand::norm},     {randcheck, lab::Subcommand::randcheck},
      {szarek, lab::Subcommand::szarek}, {walks, lab::Subcommand::walks},
      {absorb, lab::Subcommand::absorb}, {lps, lab::Subcommand::lps},
      {cn, lab::Subcommand::cn}};

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  for (const auto& [sub, kind] : kinds)
    if (sub->parsed()) state.config.subcommand = kind;

  lab::ExperimentReport report;
  try {
    report = lab::run(state.config);
  } catch (const lab::usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  const std::string bytes = lab::emit(report, state.config.format);
  std::filesystem::path path = state.output.empty() ? default_path(state.config) : std::filesystem::path(state.output);
  try {
    if (path.empty()) {
      std::cout << bytes;
      std::cout.flush();
      if (!std::cout) throw lab::io_error("cannot write to stdout");
    } else {
      lab::write_atomic(path, bytes);
    }
    if (!state.export_tower.empty())
      lab::write_atomic(state.export_tower,
                        qform::tower_to_json(qform::lps_tower(state.config.prime,
                                                              lab::effective_cutoff(state.config))));
  } catch (const lab::io_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  }

  for (const auto& [idx, msg] : report.summary.violations)
    std::cerr << "contract violation in record " << idx << " (trial " << report.records[idx].trial
              << ", seed_index " << report.records[idx].seed_index << "): " << msg << "\n";
  return lab::exit_status(report);
}
