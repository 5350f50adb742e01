#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "pbcising/error.hpp"
#include "pbcising/exact_enum.hpp"
#include "pbcising/lattice.hpp"
#include "pbcising/monte_carlo.hpp"
#include "pbcising/onsager.hpp"
#include "pbcising/parallel.hpp"
#include "pbcising/renorm.hpp"
#include "pbcising/topology.hpp"
#include "pbcising/transfer_matrix.hpp"

#ifndef PBCISING_VERSION
#define PBCISING_VERSION "dev"
#endif

namespace pbcising::cli {

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::UsageError, "cannot open config file '" + path + "'");
  std::map<std::string, std::string> entries;
  std::string line;
  int number = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::ParseError, path + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(ErrorKind::ParseError, path + ":" + std::to_string(number) + ": empty key");
    if (!entries.emplace(key, value).second) {
      fail(ErrorKind::ParseError, path + ":" + std::to_string(number) + ": repeated key '" + key + "'");
    }
  }
  return entries;
}

namespace {

const std::vector<std::string> kCommands = {"exact", "transfer", "onsager", "mc",
                                            "mc-scan", "topo", "rg", "deltaf-scan"};
const std::set<std::string> kGlobalKeys = {"output", "threads"};

std::string module_of(const std::string& command) {
  if (command == "exact") return "exact-enum";
  if (command == "transfer" || command == "deltaf-scan") return "transfer-matrix";
  if (command == "onsager") return "reference-onsager";
  if (command == "mc" || command == "mc-scan") return "monte-carlo";
  if (command == "topo") return "topology";
  if (command == "rg") return "renorm";
  return "cli-harness";
}

void error_line(std::ostream& err, ErrorKind kind, const std::string& module,
                const std::string& message) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped.push_back('\\');
    escaped.push_back(c == '\n' ? ' ' : c);
  }
  err << "error kind=" << to_string(kind) << " module=" << module << " exit=" << exit_code(kind)
      << " message=\"" << escaped << "\"\n";
}

std::vector<double> couplings(const std::vector<double>& K, const std::vector<double>& T) {
  if (!K.empty() && !T.empty()) fail(ErrorKind::UsageError, "give either --K or --T, not both");
  if (K.empty() && T.empty()) fail(ErrorKind::UsageError, "the coupling must be explicit: pass --K or --T");
  if (!K.empty()) return K;
  std::vector<double> out;
  for (double t : T) out.push_back(CouplingParams::reduced(t).K());
  return out;
}

std::filesystem::path cache_dir_from(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kCacheDirEnv); env && *env) return env;
  return {};
}

struct Header {
  std::vector<std::pair<std::string, std::string>> lines;
  void add(std::string key, std::string value) { lines.emplace_back(std::move(key), std::move(value)); }
};

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

void echo_options(Header& header, const CLI::App& app) {
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value = opt->count() > 0 ? join(opt->results()) : opt->get_default_str();
    if (value.empty() || value == "[]" || value == "{}") continue;
    header.add(name, value);
  }
}

void write_header(std::ostream& os, const Header& header) {
  os << "# pbcising " << PBCISING_VERSION << '\n';
  for (const auto& [k, v] : header.lines) os << "# " << k << " = " << v << '\n';
}

// ---- subcommand state -----------------------------------------------------

struct ExactArgs {
  int L = 0;
  std::vector<double> K, T;
  double J = 1.0, kB = 1.0;
  std::string mode = "open";
  int max_bits = EnumerationOptions::kDefaultMaxBits;
  std::string cache_dir;
};

struct TransferArgs {
  std::vector<int> L;
  std::string bc = "torus";
  std::vector<double> K, T;
  int max_width = TransferOptions::kDefaultMaxWidth;
};

struct OnsagerArgs {
  std::vector<double> K;
  double tolerance = 0.0;
};

struct McArgs {
  std::vector<int> L;
  std::string bc = "torus";
  std::vector<double> K, T;
  std::string algo = "wolff";
  long sweeps = 10000;
  long burn_in = -1;
  long thin = 1;
  std::uint64_t seed = 1;
  int chains = 1;
  std::string series;
};

struct TopoArgs {
  std::string loop;
  int L = 0;
  int x0 = 0, y0 = 0;
  std::string spins;
  std::vector<std::string> orientation;
  double threshold = topology::kDefaultDirectionThreshold;
  double R = 2.0, r = 1.0;
};

struct RgArgs {
  std::string spins;
  int L = 27;
  std::string bc = "torus";
  std::vector<double> K, T;
  std::string algo = "metropolis";
  int snapshots = 100;
  long sweeps_between = 20;
  long burn_in = 200;
  std::uint64_t seed = 1;
  int b = 3;
  std::string tie = "none";
  std::uint64_t tie_seed = 0;
};

struct DeltaFArgs {
  std::vector<int> L;
  double K = 0.0;
  int fit_min_L = 0;
  int max_width = TransferOptions::kDefaultMaxWidth;
};

// ---- runners --------------------------------------------------------------

void run_exact(const ExactArgs& a, Header& header, std::ostream& os, unsigned threads) {
  EnumerationOptions opts;
  opts.max_bits = a.max_bits;
  opts.threads = threads;
  const bool from_temperature = !a.T.empty();
  if (from_temperature && !a.K.empty()) fail(ErrorKind::UsageError, "give either --K or --T, not both");
  std::vector<double> ks;
  if (from_temperature) {
    for (double t : a.T) ks.push_back(CouplingParams(a.J, t, a.kB).K());
  } else {
    ks = couplings(a.K, a.T);
  }
  header.add("free_energy_units", from_temperature ? "energy" : "k_B*T");

  std::vector<HamiltonianMode> modes;
  if (a.mode == "both") {
    modes = {HamiltonianMode::OpenH, HamiltonianMode::TorusH};
  } else {
    modes = {parse_hamiltonian_mode(a.mode)};
  }
  const auto cache = cache_dir_from(a.cache_dir);
  if (!cache.empty()) header.add("cache_dir", cache.string());
  write_header(os, header);
  os << "L,K,mode,logQ,logQ1,logQ2,F,F1,deltaF\n";
  for (auto mode : modes) {
    const Boundary bc = bond_set(mode);
    const auto density = [&](bool restricted) {
      return cache.empty() ? density_of_states(a.L, bc, restricted, opts)
                           : cached_density_of_states(a.L, bc, restricted, cache, opts);
    };
    const auto full = density(false);
    const auto restricted = density(true);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto split = partition_split(full, restricted, ks[i]);
      const auto fe = from_temperature ? free_energies(split, a.T[i], a.kB) : free_energies(split, 1.0, 1.0);
      os << a.L << ',' << ks[i] << ',' << to_string(mode) << ',' << split.logQ << ',' << split.logQ1
         << ',' << split.logQ2 << ',' << fe.F << ',' << fe.F1 << ',' << fe.deltaF << '\n';
    }
  }
}

void run_transfer(const TransferArgs& a, Header& header, std::ostream& os, unsigned threads) {
  TransferOptions opts;
  opts.max_width = a.max_width;
  opts.threads = threads;
  const Boundary bc = parse_boundary(a.bc);
  const auto ks = couplings(a.K, a.T);
  const auto mode = bc == Boundary::Open ? HamiltonianMode::OpenH : HamiltonianMode::TorusH;
  if (a.L.empty()) fail(ErrorKind::UsageError, "transfer needs --L");
  write_header(os, header);
  os << "L,bc,K,logZ,logQ1,deltaF_total,deltaF_per_site,f_per_site\n";
  for (int L : a.L) {
    for (double K : ks) {
      const double logZ = log_Z(L, bc, K, opts);
      const double logQ1 = log_Q1(L, K, mode, opts);
      const double n = static_cast<double>(L) * L;
      os << L << ',' << to_string(bc) << ',' << K << ',' << logZ << ',' << logQ1 << ','
         << logZ - logQ1 << ',' << (logZ - logQ1) / n << ',' << -logZ / n << '\n';
    }
  }
}

void run_onsager(const OnsagerArgs& a, Header& header, std::ostream& os) {
  const auto cp = onsager::critical_coupling();
  std::ostringstream kc, tc;
  kc.precision(17);
  tc.precision(17);
  kc << cp.Kc;
  tc << cp.Tc_over_J;
  header.add("Kc", kc.str());
  header.add("Tc_over_J", tc.str());
  std::vector<double> ks = a.K;
  if (ks.empty()) {
    for (int i = 1; i <= 20; ++i) ks.push_back(0.05 * i);
  }
  onsager::QuadratureSpec spec;
  spec.tolerance = a.tolerance;
  write_header(os, header);
  os << "K,f,f_error,m,u\n";
  for (double K : ks) {
    const auto q = onsager::free_energy_quadrature(K, spec);
    os << K << ',' << q.value << ',' << q.error_estimate << ','
       << onsager::spontaneous_magnetization(K) << ',';
    if (K > 0.0) {
      try {
        os << onsager::internal_energy_density(K);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::TooCloseToSingularity) throw;
        os << "nan";
      }
    } else {
      os << 0.0;
    }
    os << '\n';
  }
}

ChainParams chain_params(const McArgs& a, int L, double K) {
  ChainParams p;
  p.side = L;
  p.bc = parse_boundary(a.bc);
  p.K = K;
  p.algorithm = parse_algorithm(a.algo);
  p.sweeps = a.sweeps;
  p.burn_in = a.burn_in >= 0 ? a.burn_in : default_burn_in(a.sweeps);
  p.thin = a.thin;
  p.seed = a.seed;
  p.validate();
  return p;
}

void write_estimate(std::ostream& os, const EstimateReport& r) {
  os << r.samples << ',' << r.energy_per_site.value << ',' << r.energy_per_site.error << ','
     << r.specific_heat.value << ',' << r.specific_heat.error << ',' << r.abs_magnetization.value << ','
     << r.abs_magnetization.error << ',' << r.susceptibility.value << ',' << r.susceptibility.error
     << ',' << r.binder.value << ',' << r.binder.error << ',' << r.tau_energy << ','
     << r.tau_abs_magnetization;
}

constexpr const char* kEstimateColumns =
    "samples,e,e_err,cv,cv_err,abs_m,abs_m_err,chi,chi_err,U4,U4_err,tau_e,tau_abs_m";

void run_mc(const McArgs& a, Header& header, std::ostream& os, unsigned threads) {
  const auto ks = couplings(a.K, a.T);
  if (a.L.size() != 1 || ks.size() != 1) {
    fail(ErrorKind::UsageError, "mc takes a single --L and a single --K/--T (see mc-scan)");
  }
  const ChainParams p = chain_params(a, a.L.front(), ks.front());
  header.add("rng", std::string(SplitMix64::kName));
  header.add("resolved_burn_in", std::to_string(p.burn_in));
  const auto series = run_chains(p, a.chains, threads);

  if (!a.series.empty()) {
    std::ofstream s(a.series);
    if (!s) fail(ErrorKind::UsageError, "cannot write series file '" + a.series + "'");
    s.precision(17);
    write_header(s, header);
    s << "chain,seed,index,E,M\n";
    for (std::size_t c = 0; c < series.size(); ++c) {
      for (std::size_t i = 0; i < series[c].samples.size(); ++i) {
        s << c << ',' << series[c].params.seed << ',' << i << ',' << series[c].samples[i].energy << ','
          << series[c].samples[i].magnetization << '\n';
      }
    }
  }

  write_header(os, header);
  os << "chain,seed,L,bc,K,algo," << kEstimateColumns << ",mean_cluster\n";
  for (std::size_t c = 0; c < series.size(); ++c) {
    const auto& sp = series[c].params;
    os << c << ',' << sp.seed << ',' << sp.side << ',' << to_string(sp.bc) << ',' << sp.K << ','
       << to_string(sp.algorithm) << ',';
    write_estimate(os, estimate(series[c]));
    os << ',' << series[c].mean_cluster_size << '\n';
  }
}

void run_mc_scan(const McArgs& a, Header& header, std::ostream& os, unsigned threads) {
  const auto ks = couplings(a.K, a.T);
  if (a.L.empty()) fail(ErrorKind::UsageError, "mc-scan needs --L");
  std::vector<ChainParams> points;
  for (int L : a.L) {
    for (double K : ks) {
      ChainParams p = chain_params(a, L, K);
      p.seed = SplitMix64::derive_seed(a.seed, points.size());
      points.push_back(p);
    }
  }
  std::vector<EstimateReport> reports(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) { reports[i] = estimate(run_chain(points[i])); });

  header.add("rng", std::string(SplitMix64::kName));
  write_header(os, header);
  os << "L,bc,K,seed," << kEstimateColumns << '\n';
  std::vector<BinderCurve> curves;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    os << p.side << ',' << to_string(p.bc) << ',' << p.K << ',' << p.seed << ',';
    write_estimate(os, reports[i]);
    os << '\n';
    if (curves.empty() || curves.back().side != p.side) curves.push_back({p.side, {}, {}});
    curves.back().K.push_back(p.K);
    curves.back().U4.push_back(reports[i].binder.value);
  }
  if (curves.size() >= 2) {
    for (auto& c : curves) {
      std::vector<std::size_t> order(c.K.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto x, auto y) { return c.K[x] < c.K[y]; });
      BinderCurve sorted{c.side, {}, {}};
      for (auto i : order) {
        sorted.K.push_back(c.K[i]);
        sorted.U4.push_back(c.U4[i]);
      }
      c = std::move(sorted);
    }
    const auto crossing = binder_tc_estimate(curves);
    os << "# Kc_hat = " << crossing.Kc_hat << '\n';
    os << "# uncertainty = " << crossing.uncertainty << '\n';
  }
}

void run_topo(const TopoArgs& a, Header& header, std::ostream& os) {
  if (a.loop.empty() && a.spins.empty()) {
    fail(ErrorKind::UsageError, "topo needs --loop and/or --spins");
  }
  write_header(os, header);
  if (!a.loop.empty()) {
    if (a.L < 1) fail(ErrorKind::UsageError, "--loop needs --L");
    const topology::LatticeLoop loop{a.x0, a.y0, topology::parse_steps(a.loop)};
    const auto w = topology::loop_class(loop, a.L);
    os << "loop,L,m,n,contractible\n";
    os << a.loop << ',' << a.L << ',' << w.m << ',' << w.n << ','
       << (topology::contractible(w) ? "true" : "false") << '\n';
  }
  if (!a.spins.empty()) {
    std::ifstream in(a.spins);
    if (!in) fail(ErrorKind::UsageError, "cannot open spin file '" + a.spins + "'");
    const auto labeled = read_spin_config(in);
    const topology::TorusEmbedding embedding(labeled.config.side(), a.R, a.r);
    std::vector<Orientation> orientations;
    if (a.orientation.empty()) {
      orientations = {Orientation::NormalToPlane, Orientation::XParallel, Orientation::YParallel};
    } else {
      for (const auto& o : a.orientation) orientations.push_back(parse_orientation(o));
    }
    os << "orientation,ratio,direction,winding_x,winding_y\n";
    for (auto o : orientations) {
      const auto field = topology::build_spin_field(labeled.config, o, embedding);
      const auto dir = topology::total_spin_direction(field, a.threshold);
      os << to_string(o) << ',' << dir.ratio << ',';
      if (dir.direction) {
        const auto& d = *dir.direction;
        os << '"' << d[0] << ' ' << d[1] << ' ' << d[2] << '"';
      } else {
        os << "undefined";
      }
      for (auto kind : {topology::CycleKind::XCycle, topology::CycleKind::YCycle}) {
        os << ',';
        try {
          os << topology::field_winding(field, {kind, 0});
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::ZeroVectorOnCycle) throw;
          os << "undefined";
        }
      }
      os << '\n';
    }
  }
}

void run_rg(const RgArgs& a, Header& header, std::ostream& os, unsigned threads) {
  renorm::BlockRule rule;
  rule.b = a.b;
  rule.tie_seed = a.tie_seed;
  if (a.tie == "plus") rule.tie = renorm::TieRule::PlusWins;
  else if (a.tie == "minus") rule.tie = renorm::TieRule::MinusWins;
  else if (a.tie == "random") rule.tie = renorm::TieRule::Random;
  else if (a.tie != "none") fail(ErrorKind::UsageError, "--tie must be none, plus, minus or random");

  std::vector<SpinConfig> configs;
  if (!a.spins.empty()) {
    std::ifstream in(a.spins);
    if (!in) fail(ErrorKind::UsageError, "cannot open spin file '" + a.spins + "'");
    configs.push_back(read_spin_config(in).config);
  } else {
    const auto ks = couplings(a.K, a.T);
    if (ks.size() != 1) fail(ErrorKind::UsageError, "rg sampling takes a single --K/--T");
    if (a.snapshots < 1) fail(ErrorKind::UsageError, "--snapshots must be positive");
    ChainParams p;
    p.side = a.L;
    p.bc = parse_boundary(a.bc);
    p.K = ks.front();
    p.algorithm = parse_algorithm(a.algo);
    p.sweeps = a.sweeps_between * a.snapshots;
    p.thin = a.sweeps_between;
    p.burn_in = a.burn_in;
    p.seed = a.seed;
    header.add("rng", std::string(SplitMix64::kName));
    (void)threads;
    configs = run_chain_snapshots(p);
  }
  const auto stats = renorm::order_amplification_report(configs, rule);
  header.add("configurations", std::to_string(configs.size()));
  write_header(os, header);
  os << "level,side,mean_abs_s,abs_mean_s\n";
  for (const auto& s : stats) {
    os << s.level << ',' << s.side << ',' << s.mean_abs_s << ',' << s.abs_mean_s << '\n';
  }
}

void run_deltaf(const DeltaFArgs& a, Header& header, std::ostream& os, unsigned threads) {
  if (a.L.empty()) fail(ErrorKind::UsageError, "deltaf-scan needs --L");
  TransferOptions opts;
  opts.max_width = a.max_width;
  opts.threads = threads;
  const auto rows = deltaF_scan(a.L, a.K, opts);
  std::optional<PowerLawFit> fit;
  if (rows.size() >= 2) fit = fit_decay_exponent(rows, a.fit_min_L);
  write_header(os, header);
  os << "L,K,logQ,logQ1,deltaF_total,deltaF_per_site\n";
  for (const auto& r : rows) {
    os << r.side << ',' << r.K << ',' << r.logQ << ',' << r.logQ1 << ',' << r.deltaF_total << ','
       << r.deltaF_per_site << '\n';
  }
  if (fit) {
    os << "# fit_exponent = " << fit->exponent << '\n';
    os << "# fit_residual = " << fit->residual << '\n';
    os << "# fit_points = " << fit->points << '\n';
  }
}

// Splices config-file entries into the argument list unless the same flag
// was given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  auto entries = read_config_file(config_path);

  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  auto command_it = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end();
  });
  if (auto c = entries.find("command"); c != entries.end()) {
    if (command_it == args.end()) {
      args.push_back(c->second);
      command_it = args.end() - 1;
    }
    entries.erase(c);
  }
  std::vector<std::string> globals;
  std::vector<std::string> locals;
  for (const auto& [key, value] : entries) {
    if (given.count(key)) continue;
    auto& target = kGlobalKeys.count(key) ? globals : locals;
    target.push_back("--" + key);
    target.push_back(value);
  }
  const auto pos = command_it - args.begin();
  std::vector<std::string> merged(args.begin(), args.begin() + pos);
  merged.insert(merged.end(), globals.begin(), globals.end());
  merged.insert(merged.end(), args.begin() + pos, args.end());
  merged.insert(merged.end(), locals.begin(), locals.end());
  return merged;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boundary-matching split, transfer matrices and Monte Carlo for the 2D Ising model",
               "pbcising"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", PBCISING_VERSION);

  std::string output;
  std::string config;
  unsigned threads = 0;
  bool self_test = false;
  app.add_option("--config", config, "Flat key = value experiment file; flags override it");
  app.add_option("--output,-o", output, "Write CSV here instead of stdout");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_flag("--selftest", self_test, "Run the small-size oracle suite and exit");

  ExactArgs ea;
  auto* exact = app.add_subcommand("exact", "Exhaustive enumeration of the Q = Q1 + Q2 split");
  exact->add_option("--L", ea.L, "Side length")->required();
  exact->add_option("--K", ea.K, "Dimensionless couplings J/(k_B T)")->delimiter(',');
  exact->add_option("--T", ea.T, "Temperatures (energy units of J/k_B)")->delimiter(',');
  exact->add_option("--J", ea.J, "Coupling constant");
  exact->add_option("--kB", ea.kB, "Boltzmann constant");
  exact->add_option("--mode", ea.mode, "Bond set for the weights: open, torus or both");
  exact->add_option("--max-bits", ea.max_bits, "Enumeration guard (log2 of states)");
  exact->add_option("--cache-dir", ea.cache_dir, std::string("Density-of-states cache (default $") + kCacheDirEnv + ")");

  TransferArgs ta;
  auto* transfer = app.add_subcommand("transfer", "Column transfer-matrix partition functions");
  transfer->add_option("--L", ta.L, "Side lengths")->delimiter(',')->required();
  transfer->add_option("--bc", ta.bc, "open or torus");
  transfer->add_option("--K", ta.K, "Couplings")->delimiter(',');
  transfer->add_option("--T", ta.T, "Reduced temperatures")->delimiter(',');
  transfer->add_option("--max-width", ta.max_width, "Width guard");

  OnsagerArgs oa;
  auto* ons = app.add_subcommand("onsager", "Exact infinite-lattice reference values");
  ons->add_option("--K", oa.K, "Couplings for the f, m, u table")->delimiter(',');
  ons->add_option("--tol", oa.tolerance, "Quadrature tolerance (0 = default)");

  McArgs ma;
  const auto add_mc_options = [](CLI::App* sub, McArgs& m) {
    sub->add_option("--L", m.L, "Side length(s)")->delimiter(',')->required();
    sub->add_option("--bc", m.bc, "open or torus");
    sub->add_option("--K", m.K, "Coupling(s)")->delimiter(',');
    sub->add_option("--T", m.T, "Reduced temperature(s)")->delimiter(',');
    sub->add_option("--algo", m.algo, "metropolis or wolff");
    sub->add_option("--sweeps", m.sweeps, "Measurement sweeps");
    sub->add_option("--burn-in", m.burn_in, "Discarded sweeps (default 10% of sweeps)");
    sub->add_option("--thin", m.thin, "Sweeps between samples");
    sub->add_option("--seed", m.seed, "64-bit RNG seed");
  };
  auto* mc = app.add_subcommand("mc", "Single-point Monte Carlo estimates");
  add_mc_options(mc, ma);
  mc->add_option("--chains", ma.chains, "Independent chains");
  mc->add_option("--series", ma.series, "Also write the per-sample series to this CSV");
  McArgs sa;
  auto* scan = app.add_subcommand("mc-scan", "Binder-cumulant tables over L and K grids");
  add_mc_options(scan, sa);

  TopoArgs to;
  auto* topo = app.add_subcommand("topo", "Loop classes and spin-field reports on the torus");
  topo->add_option("--loop", to.loop, "Step string over R/L/U/D");
  topo->add_option("--L", to.L, "Torus side for --loop");
  topo->add_option("--x0", to.x0, "Loop base point x");
  topo->add_option("--y0", to.y0, "Loop base point y");
  topo->add_option("--spins", to.spins, "Spin configuration file");
  topo->add_option("--orientation", to.orientation, "normal, x, y (default all)")->delimiter(',');
  topo->add_option("--threshold", to.threshold, "Ordered-direction threshold on |sum|/N");
  topo->add_option("--R", to.R, "Torus major radius");
  topo->add_option("--r", to.r, "Torus minor radius");

  RgArgs ra;
  auto* rg = app.add_subcommand("rg", "Majority-rule block-spin flow");
  rg->add_option("--spins", ra.spins, "Spin configuration file (instead of sampling)");
  rg->add_option("--L", ra.L, "Side length when sampling");
  rg->add_option("--bc", ra.bc, "open or torus");
  rg->add_option("--K", ra.K, "Coupling when sampling")->delimiter(',');
  rg->add_option("--T", ra.T, "Reduced temperature when sampling")->delimiter(',');
  rg->add_option("--algo", ra.algo, "metropolis or wolff");
  rg->add_option("--snapshots", ra.snapshots, "Configurations to sample");
  rg->add_option("--sweeps-between", ra.sweeps_between, "Sweeps between snapshots");
  rg->add_option("--burn-in", ra.burn_in, "Discarded sweeps");
  rg->add_option("--seed", ra.seed, "64-bit RNG seed");
  rg->add_option("--b", ra.b, "Block side");
  rg->add_option("--tie", ra.tie, "Tie rule for even b: none, plus, minus, random");
  rg->add_option("--tie-seed", ra.tie_seed, "Seed for random ties");

  DeltaFArgs da;
  auto* dscan = app.add_subcommand("deltaf-scan", "Per-site free-energy gap versus L with a power-law fit");
  dscan->add_option("--L", da.L, "Side lengths")->delimiter(',')->required();
  dscan->add_option("--K", da.K, "Coupling")->required();
  dscan->add_option("--fit-min-L", da.fit_min_L, "Smallest L used in the fit");
  dscan->add_option("--max-width", da.max_width, "Width guard");

  std::string command = "cli-harness";
  try {
    auto args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (self_test) return selftest(out, threads);

    CLI::App* active = nullptr;
    for (auto* sub : app.get_subcommands()) active = sub;
    if (active == nullptr) {
      out << app.help();
      return exit_code(ErrorKind::UsageError);
    }
    command = active->get_name();

    std::ofstream file;
    std::ostream* os = &out;
    if (!output.empty()) {
      file.open(output);
      if (!file) fail(ErrorKind::UsageError, "cannot write '" + output + "'");
      os = &file;
    }
    os->precision(17);

    Header header;
    header.add("command", command);
    echo_options(header, *active);
    if (command == "exact") run_exact(ea, header, *os, threads);
    else if (command == "transfer") run_transfer(ta, header, *os, threads);
    else if (command == "onsager") run_onsager(oa, header, *os);
    else if (command == "mc") run_mc(ma, header, *os, threads);
    else if (command == "mc-scan") run_mc_scan(sa, header, *os, threads);
    else if (command == "topo") run_topo(to, header, *os);
    else if (command == "rg") run_rg(ra, header, *os, threads);
    else if (command == "deltaf-scan") run_deltaf(da, header, *os, threads);
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << PBCISING_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    error_line(err, ErrorKind::UsageError, "cli-harness", e.what());
    return exit_code(ErrorKind::UsageError);
  } catch (const Error& e) {
    const std::string module = e.kind() == ErrorKind::UsageError ? "cli-harness" : module_of(command);
    error_line(err, e.kind(), module, e.what());
    return exit_code(e.kind());
  }
}

int selftest(std::ostream& out, unsigned threads) {
  int failures = 0;
  const auto check = [&](const std::string& name, bool ok) {
    out << (ok ? "PASS " : "FAIL ") << name << '\n';
    if (!ok) ++failures;
  };
  const auto close = [](double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(1.0, std::abs(b));
  };
  EnumerationOptions eopts;
  eopts.threads = threads;
  TransferOptions topts;
  topts.threads = threads;

  try {
    const auto s0 = partition_split(2, 0.0, HamiltonianMode::OpenH, eopts);
    check("L=2 K=0 split: Q = 16, Q1 = 2",
          close(s0.logQ, std::log(16.0), 1e-14) && close(s0.logQ1, std::log(2.0), 1e-14));

    const double k = 0.37;
    const auto s1 = partition_split(2, k, HamiltonianMode::OpenH, eopts);
    check("L=2 closed form Q = 2e^{4K} + 12 + 2e^{-4K}, Q1 = 2e^{4K}",
          close(s1.logQ, std::log(2 * std::exp(4 * k) + 12 + 2 * std::exp(-4 * k)), 1e-13) &&
              close(s1.logQ1, std::log(2 * std::exp(4 * k)), 1e-13));

    bool inequalities = true;
    for (int L = 2; L <= 4; ++L) {
      const auto full = density_of_states(L, Boundary::Open, false, eopts);
      const auto restricted = density_of_states(L, Boundary::Open, true, eopts);
      for (int i = 0; i <= 10; ++i) {
        const auto s = partition_split(full, restricted, 0.1 * i);
        inequalities = inequalities && s.logQ - s.logQ1 > 1e-12;
      }
    }
    check("Q > Q1 > 0 for L = 2..4, K = 0..1", inequalities);

    bool agree = true;
    for (int L = 2; L <= 4; ++L) {
      for (double K : {0.0, 0.2, 0.44, 0.8}) {
        const auto open = partition_split(L, K, HamiltonianMode::OpenH, eopts);
        agree = agree && close(log_Z(L, Boundary::Open, K, topts), open.logQ, 1e-10) &&
                close(log_Q1(L, K, HamiltonianMode::OpenH, topts), open.logQ1, 1e-10);
        if (L >= 3) {
          const auto torus = partition_split(L, K, HamiltonianMode::TorusH, eopts);
          agree = agree && close(log_Z(L, Boundary::Torus, K, topts), torus.logQ, 1e-10) &&
                  close(log_Q1(L, K, HamiltonianMode::TorusH, topts), torus.logQ1, 1e-10);
        }
      }
    }
    check("transfer matrix matches enumeration for L <= 4", agree);

    const std::vector<int> sizes{4, 5, 6, 7, 8};
    bool closed = true;
    for (const auto& r : deltaF_scan(sizes, 0.0, topts)) {
      closed = closed && close(r.deltaF_per_site, (2.0 * r.side - 1.0) * M_LN2 / (r.side * r.side), 1e-12);
    }
    check("K = 0 gap per site equals (2L-1) ln2 / L^2", closed);

    const auto cp = onsager::critical_coupling();
    check("Kc = 0.4406868, Tc/J = 2.2691853",
          std::abs(cp.Kc - 0.4406868) < 5e-8 && std::abs(cp.Tc_over_J - 2.2691853) < 5e-8);
    check("free energy density at K = 0 is -ln 2",
          close(onsager::free_energy_density(0.0), -M_LN2, 1e-14));

    const topology::LatticeLoop square{0, 0, topology::parse_steps("RULD")};
    const topology::LatticeLoop around{0, 0, topology::parse_steps("RRRRUUUU")};
    check("loop classes (0,0) and (1,1)",
          topology::loop_class(square, 4) == topology::WindingPair{0, 0} &&
              topology::loop_class(around, 4) == topology::WindingPair{1, 1});

    const auto flow = renorm::rg_flow(SpinConfig::all_up(27), renorm::BlockRule{});
    check("all-up 27x27 contracts to one up site in 3 steps",
          flow.steps() == 3 && flow.levels.back()[0] == 1);
  } catch (const Error& e) {
    out << "FAIL unexpected error: " << e.what() << '\n';
    ++failures;
  }
  out << (failures == 0 ? "selftest: all checks passed" : "selftest: FAILED") << '\n';
  return failures == 0 ? 0 : exit_code(ErrorKind::InvariantViolation);
}

}  // namespace pbcising::cli
