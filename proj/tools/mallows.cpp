// mallows: batch front end for stable sampling, 1-D transport distances,
// Lindeberg reports and convergence experiments.
//
// Exit codes: 0 success, 2 usage or domain error, 3 runtime numeric error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mallows/config.hpp"
#include "mallows/harness.hpp"
#include "mallows/io.hpp"
#include "mallows/lindeberg.hpp"
#include "mallows/stable_law.hpp"
#include "mallows/transport.hpp"

namespace {

using nlohmann::json;
using namespace mallows;

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Writes `bytes` to --out (plus a manifest sidecar) or to stdout.
void emit(const Globals& g, const std::string& command, const json& resolved, std::uint64_t seed,
          const std::string& bytes) {
  if (g.out.empty()) {
    std::cout << bytes;
    return;
  }
  io::write_file(g.out, bytes);
  json manifest = {
      {"tool_version", io::kToolVersion},
      {"command", command},
      {"config", resolved},
      {"seed", seed},
      {"format", g.format},
      {"outputs", {{g.out, io::fnv1a64(bytes)}}},
  };
  io::write_file(g.out + ".manifest.json", dump(manifest));
}

DiscreteLaw parse_inline_law(const std::string& text) {
  // "x1:p1,x2:p2,..." or "x1,x2,..." for equal weights
  std::vector<Atom> atoms;
  std::vector<double> bare;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        bare.push_back(std::stod(item));
      } else {
        atoms.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
      }
    } catch (const std::exception&) {
      fail(Errc::config, "cannot parse law entry \"" + item + "\"");
    }
  }
  require(atoms.empty() || bare.empty(), Errc::config, "mix of weighted and unweighted atoms in \"" + text + "\"");
  return atoms.empty() ? DiscreteLaw::uniform(bare) : DiscreteLaw(atoms);
}

json estimate_json(const DistanceEstimate& d, const std::string& method) {
  return {{"alpha", d.alpha}, {"cost", d.cost}, {"root", d.root}, {"method", method}};
}

ExperimentConfig load_config(const std::string& path, const Globals& g) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    fail(Errc::config, path + ": " + e.what());
  }
  auto c = config::parse_experiment(j);
  if (g.seed) c.seed = *g.seed;
  return c;
}

void require_format(const Globals& g) {
  require(g.format == "csv" || g.format == "json", Errc::config, "--format must be csv or json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mallows-distance convergence toolkit for alpha-stable limits"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed (overrides any config seed)");
  app.add_option("--out", g.out, "Output file; a <out>.manifest.json sidecar is written next to it");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  StableParams params;
  std::size_t count = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Draw i.i.d. stable variates");
  sample_cmd->add_option("--alpha", params.alpha, "Stability index in (0,2)")->required();
  sample_cmd->add_option("--sigma", params.sigma, "Scale >= 0");
  sample_cmd->add_option("--beta", params.beta, "Skewness in [-1,1]");
  sample_cmd->add_option("--mu", params.mu, "Shift");
  sample_cmd->add_option("--count", count, "Number of draws")->required();

  std::string x_file, y_file, p_law, q_law;
  double distance_alpha = 1.0;
  bool use_oracle = false;
  auto* distance_cmd = app.add_subcommand("distance", "Mallows distance between two samples or two discrete laws");
  distance_cmd->add_option("--x", x_file, "File with one sample value per line");
  distance_cmd->add_option("--y", y_file, "File with one sample value per line");
  distance_cmd->add_option("--p", p_law, "Inline law \"x:p,...\" (or \"x,...\" for equal weights)");
  distance_cmd->add_option("--q", q_law, "Inline law \"x:p,...\" (or \"x,...\" for equal weights)");
  distance_cmd->add_option("--alpha", distance_alpha, "Index in (0,2)")->required();
  distance_cmd->add_flag("--oracle", use_oracle, "Solve the transport LP instead of the quantile coupling");

  std::string config_path;
  auto* lindeberg_cmd = app.add_subcommand("lindeberg", "Lindeberg sums over the n-ladder and b-grid");
  lindeberg_cmd->add_option("--config", config_path, "Experiment config (JSON) or run manifest")->required();
  auto* converge_cmd = app.add_subcommand("converge", "Convergence experiment over the n-ladder");
  converge_cmd->add_option("--config", config_path, "Experiment config (JSON) or run manifest")->required();

  std::size_t instances = 200;
  std::size_t max_atoms = 6;
  std::vector<double> alphas{1.0, 1.2, 1.5, 1.9};
  double tolerance = 1e-9;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare the quantile coupling against the transport LP");
  oracle_cmd->add_option("--instances", instances, "Random law pairs");
  oracle_cmd->add_option("--max-atoms", max_atoms, "Atoms per law (at most 8)");
  oracle_cmd->add_option("--alphas", alphas, "Indices to test")->delimiter(',');
  oracle_cmd->add_option("--tolerance", tolerance, "Allowed absolute difference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    require_format(g);
    if (*sample_cmd) {
      const std::uint64_t seed = g.seed.value_or(0);
      const auto draws = sample(params, count, seed);
      std::string bytes;
      if (g.format == "json") {
        bytes = json(draws).dump() + "\n";
      } else {
        std::ostringstream out;
        out << "y\n";
        for (double v : draws) out << io::format_double(v) << '\n';
        bytes = out.str();
      }
      const json resolved = {{"alpha", params.alpha}, {"sigma", params.sigma}, {"beta", params.beta},
                             {"mu", params.mu}, {"count", count}};
      emit(g, "sample", resolved, seed, bytes);
    } else if (*distance_cmd) {
      const bool files = !x_file.empty() || !y_file.empty();
      const bool laws = !p_law.empty() || !q_law.empty();
      require(files != laws, Errc::config, "give either --x/--y files or --p/--q laws");
      DistanceEstimate d;
      std::string method;
      json resolved = {{"alpha", distance_alpha}, {"oracle", use_oracle}};
      if (files) {
        require(!x_file.empty() && !y_file.empty(), Errc::config, "both --x and --y are required");
        const EmpiricalDistribution xs(io::parse_column(io::read_file(x_file), x_file));
        const EmpiricalDistribution ys(io::parse_column(io::read_file(y_file), y_file));
        resolved["x"] = x_file;
        resolved["y"] = y_file;
        if (use_oracle) {
          d = transport_oracle(DiscreteLaw::from(xs), DiscreteLaw::from(ys), distance_alpha);
          method = "oracle";
        } else {
          d = mallows_empirical(xs, ys, distance_alpha);
          method = "empirical";
        }
      } else {
        require(!p_law.empty() && !q_law.empty(), Errc::config, "both --p and --q are required");
        const auto p = parse_inline_law(p_law);
        const auto q = parse_inline_law(q_law);
        resolved["p"] = p_law;
        resolved["q"] = q_law;
        d = use_oracle ? transport_oracle(p, q, distance_alpha) : mallows_discrete(p, q, distance_alpha);
        method = use_oracle ? "oracle" : "discrete";
      }
      emit(g, "distance", resolved, g.seed.value_or(0), dump(estimate_json(d, method)));
    } else if (*lindeberg_cmd) {
      const auto c = load_config(config_path, g);
      std::vector<LindebergReport> reports;
      for (std::size_t n : c.n_ladder) {
        const auto stats = gap_statistics(c, n);
        LindebergReport r{n, c.alpha(), {}};
        for (double b : c.b_grid) {
          r.rows.push_back({b, stats.tail_mean(corrected_threshold(c.alpha(), n, b)), stats.tail_mean(b)});
        }
        reports.push_back(std::move(r));
      }
      std::string bytes;
      if (g.format == "json") {
        json rows = json::array();
        for (const auto& r : reports) {
          for (const auto& row : r.rows) rows.push_back({{"n", r.n}, {"b", row.b}, {"L2", row.corrected}, {"L1", row.original}});
        }
        json sup = json::array();
        for (const auto& row : sup_over_ladder(reports)) {
          sup.push_back({{"b", row.b}, {"L2", row.corrected}, {"L1", row.original}});
        }
        bytes = dump({{"alpha", c.alpha()}, {"rows", rows}, {"sup_over_ladder", sup}});
      } else {
        std::ostringstream out;
        out << "n,b,L2,L1\n";
        for (const auto& r : reports) {
          for (const auto& row : r.rows) {
            out << r.n << ',' << io::format_double(row.b) << ',' << io::format_double(row.corrected) << ','
                << io::format_double(row.original) << '\n';
          }
        }
        bytes = out.str();
      }
      emit(g, "lindeberg", config::to_json(c), c.seed, bytes);
    } else if (*converge_cmd) {
      const auto c = load_config(config_path, g);
      const auto rows = run_experiment(c);
      std::string bytes;
      if (g.format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
          arr.push_back({{"n", r.n}, {"b_used", r.b_used}, {"c_n", r.c_n}, {"d_cost_hat", r.d_cost_hat},
                         {"lindeberg", r.lindeberg}, {"bound_rhs", r.bound_rhs}, {"replicates", r.replicates},
                         {"se", r.se}});
        }
        bytes = dump(arr);
      } else {
        bytes = io::convergence_csv(rows);
      }
      emit(g, "converge", config::to_json(c), c.seed, bytes);
    } else if (*oracle_cmd) {
      require(max_atoms >= 1 && max_atoms <= kOracleMaxAtoms, Errc::config, "--max-atoms must lie in [1, 8]");
      for (double a : alphas) validate_alpha(a);
      const std::uint64_t seed = g.seed.value_or(0);
      Rng rng(seed);
      double worst = 0.0;
      for (std::size_t k = 0; k < instances; ++k) {
        const auto p = random_discrete_law(rng, max_atoms);
        const auto q = random_discrete_law(rng, max_atoms);
        const double a = alphas[k % alphas.size()];
        worst = std::max(worst, std::abs(mallows_discrete(p, q, a).cost - transport_oracle(p, q, a).cost));
      }
      const bool passed = worst <= tolerance;
      const json resolved = {{"instances", instances}, {"max_atoms", max_atoms}, {"alphas", alphas},
                             {"tolerance", tolerance}};
      emit(g, "oracle-check", resolved, seed,
           dump({{"instances", instances}, {"max_abs_diff", worst}, {"tolerance", tolerance}, {"passed", passed}}));
      if (!passed) {
        std::cerr << "oracle disagreement " << worst << " exceeds " << tolerance << "\n";
        return kExitNumeric;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_numeric() ? kExitNumeric : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
