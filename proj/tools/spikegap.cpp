// spikegap: gap sweeps, bounds, instanton/WKB exponents and crossings from the command line.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "spikegap/cli.hpp"

namespace cli = spikegap::cli;

namespace {

struct Raw {
  std::string n, alpha, beta, s, format, output;
  bool width_one = false;
  int precision = spikegap::kDoubleBits;
  unsigned threads = 0;
  double s_fixed = -1.0;
  int t_max = 5;
  bool all_nodes = false;
  bool no_verify = false;
  bool no_align = false;
  double refine_tol = 1e-7;
};

cli::RunConfig build(const std::string& sub, const Raw& raw) {
  cli::RunConfig c;
  c.subcommand = sub;
  if (!raw.n.empty()) c.n = cli::parse_n_range(raw.n);
  if (!raw.alpha.empty()) c.alpha = cli::parse_range(raw.alpha);
  if (!raw.beta.empty()) {
    if (raw.width_one) throw spikegap::ConfigError("--beta and --width-one are mutually exclusive");
    c.beta = cli::parse_range(raw.beta);
  }
  if (!raw.s.empty()) c.s = cli::parse_range(raw.s);
  c.precision_bits = raw.precision;
  if (raw.format == "csv") c.format = cli::Format::csv;
  if (raw.format == "json") c.format = cli::Format::json;
  c.output = raw.output;
  if (raw.threads > 0) c.threads = raw.threads;
  if (raw.s_fixed >= 0.0) c.s_fixed = raw.s_fixed;
  c.t_max = raw.t_max;
  c.all_nodes = raw.all_nodes;
  c.verify = !raw.no_verify;
  c.align_lattice = !raw.no_align;
  c.refine_tol = raw.refine_tol;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral gap of bit-symmetric spike Hamiltonians"};
  app.require_subcommand(1);
  Raw raw;

  const std::vector<std::pair<std::string, std::string>> subs{
      {"gap-curve", "exact gap over an s grid"},
      {"min-gap", "minimum of the exact gap over s"},
      {"slope-vs-alpha", "exact gap at s* for each alpha and n (width one)"},
      {"bounds", "variational lower and stoquastic upper bounds at s*"},
      {"instanton", "instanton action S_I over n"},
      {"wkb", "discrete WKB gap exponent over n"},
      {"crossings", "avoided crossings predicted from spikeless nodes"},
      {"classify", "power law vs superpolynomial verdict on exact gaps"},
  };
  for (const auto& [name, help] : subs) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--n", raw.n, "sizes: x, a,b, start:stop:step or start:stop:geometric:count")->required();
    sc->add_option("--alpha", raw.alpha, "spike height exponent (range syntax)");
    sc->add_option("--beta", raw.beta, "spike width exponent (range syntax)");
    sc->add_flag("--width-one", raw.width_one, "width-one spike (the default when --beta is absent)");
    sc->add_option("--s", raw.s, "s grid (range syntax)");
    sc->add_option("--precision", raw.precision, "mantissa bits (53, 113 or 237 backends)");
    sc->add_option("--format", raw.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sc->add_option("-o,--output", raw.output, "output file (default stdout)");
    sc->add_option("--threads", raw.threads, "worker threads (default SPIKEGAP_THREADS or all cores)");
    if (name == "instanton") sc->add_option("--s-fixed", raw.s_fixed, "evaluate at this s instead of the degeneracy point");
    if (name == "crossings") {
      sc->add_option("--t-max", raw.t_max, "highest level t");
      sc->add_flag("--all-nodes", raw.all_nodes, "every node i = 1..t-1 rather than the first");
      sc->add_flag("--no-verify", raw.no_verify, "skip the gap_t dip search");
    }
    if (name == "classify") sc->add_flag("--no-align", raw.no_align, "use the n grid as given (no half-integer width alignment)");
    if (name == "min-gap") sc->add_option("--refine-tol", raw.refine_tol, "width of the refined bracket in s");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  std::string sub;
  for (auto* sc : app.get_subcommands()) sub = sc->get_name();

  cli::RunConfig config;
  cli::Report report;
  try {
    config = build(sub, raw);
    report = cli::execute(config);
  } catch (const spikegap::ConfigError& e) {
    std::cerr << "spikegap: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const spikegap::DomainError& e) {
    std::cerr << "spikegap: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "spikegap: " << e.what() << "\n";
    return cli::kExitRuntime;
  }

  if (config.output.empty()) {
    cli::write(config, report, std::cout);
  } else {
    std::ofstream out(config.output, std::ios::binary);
    if (!out) {
      std::cerr << "spikegap: cannot open " << config.output << "\n";
      return cli::kExitRuntime;
    }
    cli::write(config, report, out);
  }
  return cli::exit_status(report);
}
