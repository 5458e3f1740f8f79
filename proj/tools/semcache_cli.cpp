#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "semcache/bench.hpp"
#include "semcache/errors.hpp"
#include "semcache/mcp_reduction.hpp"
#include "semcache/trace_io.hpp"
#include "semcache/workload.hpp"

namespace {

using namespace semcache;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct RunArgs {
  std::string trace;
  std::vector<std::string> policies;
  std::vector<std::size_t> sizes;
  std::vector<double> thresholds{0.9};
  std::uint64_t seed = 0;
  std::optional<std::size_t> limit;
  std::vector<std::string> params;
  std::string out;
  std::size_t jobs = 1;
  std::string log_sizes;
};

ParamMap parse_params(const std::vector<std::string>& raw) {
  ParamMap params;
  for (const auto& kv : raw) parse_param(kv, params);
  return params;
}

void emit_csv(const std::vector<RunReport>& reports, const std::string& out) {
  if (out.empty()) {
    write_csv(std::cout, reports);
    return;
  }
  std::ofstream file(out, std::ios::trunc);
  if (!file) throw ConfigError("cannot write " + out);
  write_csv(file, reports);
}

std::vector<std::size_t> parse_log_sizes(const std::string& spec) {
  std::size_t lo = 0, hi = 0, n = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw ConfigError("--log-sizes expects lo:hi:count");
  }
  return log_spaced_sizes(lo, hi, n);
}

void add_common(CLI::App* cmd, RunArgs& a, bool many) {
  cmd->add_option("--trace", a.trace, "Trace file")->required();
  if (many) {
    cmd->add_option("--policy", a.policies, "Policy or oracle names")->required()->delimiter(',');
    cmd->add_option("--cache-size", a.sizes, "Cache sizes")->delimiter(',');
    cmd->add_option("--log-sizes", a.log_sizes, "Log-spaced sizes as lo:hi:count");
    cmd->add_option("--threshold", a.thresholds, "L2 thresholds")->delimiter(',');
    cmd->add_option("--jobs", a.jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);
  } else {
    cmd->add_option("--policy", a.policies, "Policy or oracle name")->required()->expected(1);
    cmd->add_option("--cache-size", a.sizes, "Cache size")->required()->expected(1);
    cmd->add_option("--threshold", a.thresholds, "L2 threshold")->expected(1);
  }
  cmd->add_option("--seed", a.seed, "Seed for randomized policies");
  cmd->add_option("--limit", a.limit, "Replay only the first N requests");
  cmd->add_option("--param", a.params, "Policy parameter key=value (repeatable)");
  cmd->add_option("--out", a.out, "Output CSV (stdout when omitted)");
}

std::vector<RunConfig> build_grid(const RunArgs& a) {
  auto sizes = a.sizes;
  if (!a.log_sizes.empty()) {
    const auto extra = parse_log_sizes(a.log_sizes);
    sizes.insert(sizes.end(), extra.begin(), extra.end());
  }
  if (sizes.empty()) throw ConfigError("give --cache-size or --log-sizes");
  const ParamMap params = parse_params(a.params);
  std::vector<RunConfig> grid;
  for (const auto& p : a.policies) {
    for (double t : a.thresholds) {
      for (std::size_t n : sizes) {
        grid.push_back(RunConfig{a.trace, p, n, t, a.seed, a.limit, params});
      }
    }
  }
  return grid;
}

nlohmann::json stats_json(const DatasetStats& s) {
  return {
      {"n", s.n},
      {"dim", s.dim},
      {"threshold", s.threshold},
      {"cos_sim_avg", s.cos_sim_avg},
      {"cos_sim_std", s.cos_sim_std},
      {"l2_mean", s.l2_mean},
      {"l2_std", s.l2_std},
      {"pairs_used", s.pairs_used},
      {"exact_pairs", s.exact_pairs},
      {"pca_entropy_bits", s.pca_entropy},
      {"num_clusters", s.num_clusters},
      {"cluster_avg", s.cluster_avg},
      {"cluster_std", s.cluster_std},
      {"hopkins", s.hopkins},
      {"hopkins_sample", s.hopkins_sample},
      {"hopkins_reference", std::string(to_string(s.hopkins_reference))},
  };
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Semantic cache simulator and benchmark driver"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Replay one policy over a trace");
  add_common(run, run_args, false);

  RunArgs matrix_args;
  auto* matrix = app.add_subcommand("matrix", "Replay a policy x size x threshold grid");
  add_common(matrix, matrix_args, true);

  std::string stats_trace, stats_out, hopkins_ref = "normalized";
  double stats_t = 1.0;
  std::uint64_t stats_seed = 0;
  std::size_t sample_pairs = StatsOptions{}.sample_pairs;
  std::vector<double> density;
  auto* stats = app.add_subcommand("stats", "Dataset characterization metrics as JSON");
  stats->add_option("--trace", stats_trace, "Trace file")->required();
  stats->add_option("--threshold", stats_t, "Clustering threshold");
  stats->add_option("--seed", stats_seed, "Sampling seed");
  stats->add_option("--sample-pairs", sample_pairs, "Sampled pairs above the exact cutoff");
  stats->add_option("--hopkins-reference", hopkins_ref, "normalized or box")
      ->check(CLI::IsMember({"normalized", "box"}));
  stats->add_option("--density", density, "Point-density thresholds")->delimiter(',');
  stats->add_option("--out", stats_out, "Output JSON (stdout when omitted)");

  ZipfParams zipf;
  std::string zipf_out;
  auto* gen_zipf = app.add_subcommand("gen-zipf", "Write a synthetic Zipf-clustered trace");
  gen_zipf->add_option("--out", zipf_out, "Trace path")->required();
  gen_zipf->add_option("--clusters", zipf.num_clusters, "Number of clusters");
  gen_zipf->add_option("--requests", zipf.requests, "Number of requests");
  gen_zipf->add_option("--zipf-s", zipf.zipf_s, "Zipf exponent");
  gen_zipf->add_option("--radius", zipf.intra_radius, "Intra-cluster perturbation radius");
  gen_zipf->add_option("--dim", zipf.dim, "Vector dimension");
  gen_zipf->add_option("--seed", zipf.seed, "Generator seed");

  std::size_t mcp_n = 6, mcp_m = 5, mcp_k = 2;
  std::uint64_t mcp_seed = 0;
  double mcp_t = 0.9;
  std::string mcp_out;
  auto* gen_mcp = app.add_subcommand("gen-mcp", "Write the trace of a random coverage reduction");
  gen_mcp->add_option("--out", mcp_out, "Trace path")->required();
  gen_mcp->add_option("--elements", mcp_n, "Number of elements");
  gen_mcp->add_option("--sets", mcp_m, "Number of sets");
  gen_mcp->add_option("--k", mcp_k, "Sets to choose (cache size)");
  gen_mcp->add_option("--threshold", mcp_t, "L2 threshold");
  gen_mcp->add_option("--seed", mcp_seed, "Instance seed");

  std::string plot_csv, plot_out;
  auto* plot = app.add_subcommand("plotdata", "Split a results CSV into per-metric files");
  plot->add_option("--csv", plot_csv, "Results CSV")->required();
  plot->add_option("--out", plot_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*run) {
    const auto grid = build_grid(run_args);
    emit_csv({run_single(grid.front())}, run_args.out);
  } else if (*matrix) {
    emit_csv(run_matrix(build_grid(matrix_args), matrix_args.jobs), matrix_args.out);
  } else if (*stats) {
    const Trace trace = read_trace(stats_trace);
    StatsOptions opts;
    opts.seed = stats_seed;
    opts.sample_pairs = sample_pairs;
    opts.hopkins_reference =
        hopkins_ref == "box" ? HopkinsReference::BoundingBox : HopkinsReference::SphereProjected;
    Threshold t = [&] {
      try {
        return Threshold(stats_t);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }();
    nlohmann::json doc = stats_json(compute_stats(trace, t, opts));
    if (!density.empty()) {
      nlohmann::json curves = nlohmann::json::array();
      for (const auto& c : point_density_curve(trace, density)) {
        nlohmann::json hist = nlohmann::json::object();
        for (const auto& [count, freq] : c.histogram) hist[std::to_string(count)] = freq;
        curves.push_back({{"threshold", c.threshold}, {"histogram", hist}, {"rank_curve", c.rank_curve}});
      }
      doc["point_density"] = curves;
    }
    if (stats_out.empty()) {
      std::cout << doc.dump(2) << '\n';
    } else {
      std::ofstream out(stats_out, std::ios::trunc);
      if (!out) throw ConfigError("cannot write " + stats_out);
      out << doc.dump(2) << '\n';
    }
  } else if (*gen_zipf) {
    const Trace trace = generate_zipf_workload(zipf);
    write_trace(zipf_out, trace);
    write_meta(zipf_out, TraceMeta{"synthetic-zipf", "none",
                                   {{"num_clusters", zipf.num_clusters},
                                    {"requests", zipf.requests},
                                    {"zipf_s", zipf.zipf_s},
                                    {"intra_radius", zipf.intra_radius},
                                    {"dim", zipf.dim},
                                    {"seed", zipf.seed}}});
  } else if (*gen_mcp) {
    const MCPInstance inst = random_mcp_instance(mcp_n, mcp_m, mcp_k, mcp_seed);
    Threshold t = [&] {
      try {
        return Threshold(mcp_t);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }();
    ReductionParams params;
    try {
      params = choose_params(inst, t);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const auto vectors = build_vectors(inst, params);
    write_trace(mcp_out, build_trace(inst, vectors));
    write_meta(mcp_out, TraceMeta{"mcp-reduction", "none",
                                  {{"n_elements", inst.n_elements},
                                   {"sets", inst.sets},
                                   {"k", inst.k},
                                   {"threshold", mcp_t},
                                   {"alpha", params.alpha},
                                   {"beta", params.beta},
                                   {"gamma", params.gamma},
                                   {"seed", mcp_seed}}});
  } else if (*plot) {
    std::ifstream in(plot_csv);
    if (!in) throw ConfigError("cannot open " + plot_csv);
    for (const auto& p : emit_plotdata(read_csv(in), plot_out)) std::cout << p.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
