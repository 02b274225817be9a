// loqc: experiment runner for the linear-optical C-sign gate simulations.
//
//   loqc sweep      --gate G --axis detector|source|joint --from A --to B --step S
//   loqc landscape  --eta-src X --eta-det Y
//   loqc optimize   --mode eta2|joint|crossover|success
//   loqc gate-info  G
//   loqc verify
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <mutex>

#include "loqc/acceptance.hpp"
#include "loqc/csv.hpp"
#include "loqc/tuner.hpp"

namespace {

using namespace loqc;

constexpr int kUsage = 2;
constexpr int kNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PointFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string gate = "klm";
  double eta_src = 1.0;
  double eta_det = 1.0;
  std::string axis = "detector";
  std::optional<double> from, to, step;
  std::string out;
  unsigned jobs = 1;
  int grid_density = 17;
  bool complex_phases = false;
  bool emit_plot_script = false;
  std::string mode = "eta2";
  int points = 21;
  bool mutate_sign = false;
};

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--gate", c.gate, "Gate: klm, knill, pjf or ns")->check(CLI::IsMember({"klm", "knill", "pjf", "ns"}));
  sub->add_option("--eta-src", c.eta_src, "Ancilla source efficiency")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--eta-det", c.eta_det, "Detector efficiency")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--out", c.out, "Output CSV path (stdout if omitted)");
  sub->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::Range(1u, 256u));
  sub->add_option("--grid-density", c.grid_density, "Grid points per input angle")->check(CLI::Range(2, 201));
  sub->add_flag("--complex-phases", c.complex_phases, "Also search two input phase angles");
  sub->add_flag("--emit-plot-script", c.emit_plot_script, "Write a matplotlib script next to the CSV");
  sub->add_option("--config", "key=value file; command-line flags take precedence");
}

void add_grid(CLI::App* sub, RunConfig& c) {
  sub->add_option("--from", c.from, "First grid value");
  sub->add_option("--to", c.to, "Last grid value");
  sub->add_option("--step", c.step, "Grid step")->check(CLI::PositiveNumber);
}

MinFidelityOptions min_options(const RunConfig& c) {
  MinFidelityOptions o;
  o.grid_points = c.grid_density;
  o.complex_phases = c.complex_phases;
  return o;
}

std::vector<double> grid_of(const RunConfig& c, double from, double to, double step) {
  const double a = c.from.value_or(from), b = c.to.value_or(to), s = c.step.value_or(step);
  if (!(a >= 0.0 && b <= 1.0 && a <= b)) throw UsageError("grid must satisfy 0 <= from <= to <= 1");
  return linear_grid(a, b, s);
}

GateSpec gate_of(const RunConfig& c) {
  auto g = gate_by_name(c.gate);
  if (!g) throw UsageError("unknown gate '" + c.gate + "'");
  return *g;
}

void emit(const RunConfig& c, const std::string& content, const std::string& x_column, const std::string& y_column) {
  if (c.out.empty()) {
    std::cout << content;
    return;
  }
  csv::write_atomic(c.out, content);
  if (c.emit_plot_script) {
    std::ostringstream py;
    py << "import csv\nimport matplotlib.pyplot as plt\n\n"
       << "rows = list(csv.DictReader(open(" << std::quoted(c.out) << ")))\n"
       << "x = [float(r[" << std::quoted(x_column) << "]) for r in rows if r[" << std::quoted(y_column) << "]]\n"
       << "y = [float(r[" << std::quoted(y_column) << "]) for r in rows if r[" << std::quoted(y_column) << "]]\n"
       << "plt.plot(x, y, 'o-')\nplt.xlabel(" << std::quoted(x_column) << ")\nplt.ylabel(" << std::quoted(y_column)
       << ")\nplt.savefig(" << std::quoted(c.out + ".png") << ")\n";
    csv::write_atomic(c.out + ".plot.py", py.str());
  }
}

int cmd_sweep(const RunConfig& c) {
  const auto gate = gate_of(c);
  if (gate.action != IdealAction::ControlledSign) throw UsageError("sweep needs a C-sign gate (klm, knill or pjf)");
  const SweepAxis axis = c.axis == "detector" ? SweepAxis::Detector
                         : c.axis == "source" ? SweepAxis::Source
                                              : SweepAxis::JointEqual;
  const auto grid = grid_of(c, 0.8, 1.0, 0.01);
  const auto opt = min_options(c);
  std::vector<SweepRow> rows(grid.size());
  try {
    parallel_for(grid.size(), c.jobs, [&](std::size_t i) {
      const auto eff = sweep_point(axis, grid[i]);
      try {
        rows[i] = min_fidelity(gate, eff, opt);
      } catch (const NearZeroTraceError& e) {
        throw PointFailure("eta_src=" + csv::num(eff.eta_src) + " eta_det=" + csv::num(eff.eta_det) + ": " + e.what());
      }
    });
  } catch (const PointFailure& e) {
    std::cerr << "numerical failure at grid point " << e.what() << '\n';
    return kNumerical;
  }
  emit(c, csv::sweep(rows), axis == SweepAxis::Source ? "eta_src" : "eta_det", "min_fidelity");
  return 0;
}

int cmd_landscape(const RunConfig& c, std::optional<double> d1_from, std::optional<double> d1_to,
                  std::optional<double> d2_from, std::optional<double> d2_to) {
  if (c.points < 2) throw UsageError("--points must be >= 2");
  auto axis = [&](double nominal, std::optional<double> lo, std::optional<double> hi) {
    const double a = lo.value_or(-nominal), b = hi.value_or(1.0 - nominal);
    if (a > b) throw UsageError("landscape axis must satisfy from <= to");
    std::vector<double> v;
    for (int i = 0; i < c.points; ++i) v.push_back(a + (b - a) * i / (c.points - 1));
    return v;
  };
  const auto d1 = axis(kNsEta1, d1_from, d1_to);
  const auto d2 = axis(kNsEta2, d2_from, d2_to);
  const auto values = landscape({c.eta_src, c.eta_det}, d1, d2, min_options(c), c.jobs);
  emit(c, csv::landscape(d1, d2, values), "d_eta1", "min_fidelity");
  return 0;
}

int cmd_optimize(const RunConfig& c) {
  if (c.gate != "klm") throw UsageError("optimize supports only the klm gate");
  TuneOptions opt;
  opt.verify.grid_points = c.grid_density;
  opt.verify.complex_phases = c.complex_phases;
  const EfficiencyConfig eff{c.eta_src, c.eta_det};
  std::vector<csv::OptimizeRow> rows;
  std::ostringstream summary;
  summary.setf(std::ios::fixed);
  summary.precision(6);

  if (c.mode == "eta2" || c.mode == "joint") {
    const auto r = c.mode == "eta2" ? optimize_eta2(eff, opt) : optimize_joint(eff, opt);
    rows.push_back(csv::optimize_row(r, c.mode));
    summary << "mode " << c.mode << " at eta_src=" << eff.eta_src << " eta_det=" << eff.eta_det << ": eta1=" << r.eta1
            << " eta2=" << r.eta2 << " min_fidelity=" << r.min_fidelity << " baseline=" << r.baseline_min_fidelity
            << " improvement=" << r.min_fidelity - r.baseline_min_fidelity << '\n';
  } else if (c.mode == "crossover") {
    const auto grid = grid_of(c, 0.99, 1.0, 0.001);
    std::vector<csv::OptimizeRow> line(grid.size()), joint(grid.size());
    parallel_for(grid.size(), c.jobs, [&](std::size_t i) {
      line[i] = csv::optimize_row(optimize_eta2({grid[i], grid[i]}, opt), "eta2");
      joint[i] = csv::optimize_row(optimize_joint({grid[i], grid[i]}, opt), "joint");
    });
    std::vector<CrossoverRow> cross;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      rows.push_back(line[i]);
      rows.push_back(joint[i]);
      cross.push_back({grid[i], line[i].baseline, line[i].min_fidelity, joint[i].min_fidelity});
    }
    const auto point = crossover_point(cross);
    summary << "eta1=1 improvement crossover: " << (point ? csv::num(*point) : std::string("none in grid")) << '\n';
  } else if (c.mode == "success") {
    const auto grid = grid_of(c, 0.8, 1.0, 0.02);
    rows.resize(grid.size());
    parallel_for(grid.size(), c.jobs,
                 [&](std::size_t i) { rows[i] = csv::optimize_row(optimize_eta2({grid[i], grid[i]}, opt), "eta2"); });
    double lowest = 1e9;
    for (const auto& r : rows) lowest = std::min(lowest, r.success_ratio);
    summary << "lowest success ratio to nominal lossless: " << lowest << '\n';
  } else {
    throw UsageError("--mode must be eta2, joint, crossover or success");
  }
  emit(c, csv::optimize(rows), c.mode == "crossover" || c.mode == "success" ? "eta_src" : "eta2", "min_fidelity");
  (c.out.empty() ? std::cerr : std::cout) << summary.str();
  return 0;
}

std::string closed_form(double v) {
  struct Known {
    double value;
    const char* text;
  };
  static const Known known[] = {{kNsEta1, "5-3*sqrt(2)"},
                                {kNsEta2, "(3-sqrt(2))/7"},
                                {kKnillEta1, "1/3"},
                                {kKnillEta2, "(3+sqrt(6))/6"},
                                {0.5, "1/2"}};
  for (const auto& k : known)
    if (std::abs(k.value - v) < 1e-15) return std::string(k.text) + " = " + csv::num(v);
  return csv::num(v);
}

std::string ket(const Occupation& occ) {
  std::string s = "|";
  for (int n : occ) s += std::to_string(n);
  return s + ">";
}

int cmd_gate_info(const RunConfig& c) {
  const auto g = gate_of(c);
  std::ostringstream os;
  os << "gate " << g.name << '\n' << "modes " << g.mode_count << '\n';
  auto list = [&](const char* label, const std::vector<std::size_t>& v) {
    os << label;
    for (auto m : v) os << ' ' << m;
    os << '\n';
  };
  list("input modes", g.input_modes);
  list("ancilla modes", g.ancilla_modes);
  list("output modes", g.output_modes);
  list("detected modes", g.detected_modes);
  os << "ancilla preparation";
  bool first = true;
  for (std::size_t i = 0; i < g.ancilla_prep.basis->dimension(); ++i) {
    const cplx a = g.ancilla_prep.amplitudes[static_cast<Eigen::Index>(i)];
    if (std::abs(a) == 0.0) continue;
    os << (first ? " " : " + ") << "(" << csv::num(a.real()) << ")" << ket(g.ancilla_prep.basis->occupation(i));
    first = false;
  }
  os << '\n';
  for (const auto& [name, value] : g.parameters) os << name << " = " << closed_form(value) << '\n';
  os << "elements:\n";
  for (const auto& e : g.elements) {
    if (const auto* b = std::get_if<BeamsplitterSpec>(&e))
      os << "  beamsplitter modes (" << b->first << ", " << b->second << ") eta=" << closed_form(b->eta) << ' '
         << describe(b->convention) << ' ' << describe(b->orientation) << '\n';
    else if (const auto* l = std::get_if<LossChannel>(&e))
      os << "  loss mode " << l->mode << " efficiency=" << csv::num(l->efficiency) << '\n';
    else
      os << "  mode permutation\n";
  }
  os << "accepted patterns:\n";
  for (const auto& p : g.patterns) {
    os << "  counts";
    for (int n : p.counts) os << ' ' << n;
    os << "  phase flips on outputs";
    if (p.phase_flips.empty()) os << " none";
    for (auto f : p.phase_flips) os << ' ' << f;
    os << '\n';
  }
  os << "nominal success probability " << csv::num(g.nominal_success) << '\n';
  const auto rep = ideal_truth_check(g);
  os << "ideal truth check " << (rep.passed ? "PASS" : "FAIL") << '\n';
  for (const auto& cs : rep.cases)
    os << "  " << cs.label << " fidelity " << csv::num(cs.fidelity) << " success " << csv::num(cs.success) << '\n';
  for (const auto& f : rep.failures) os << "  failure: " << f << '\n';
  std::cout << os.str();
  return 0;
}

int cmd_verify(const RunConfig& c) {
  acceptance::Options opt;
  opt.flip_klm_sign = c.mutate_sign;
  const auto rep = acceptance::run_all(opt);
  const auto text = rep.render();
  if (c.out.empty())
    std::cout << text;
  else
    csv::write_atomic(c.out, text);
  return rep.passed() ? 0 : 1;
}

// Reads `key=value` lines (blank lines and '#' comments ignored) into
// `--key value` arguments.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::string> args;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (value == "true" || value == "false") {
      if (value == "true") args.push_back("--" + key);
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

// Config values are inserted right after the subcommand so that explicit
// flags, which come later, win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::optional<std::string> path;
    std::size_t span = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      span = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      span = 1;
    }
    if (!path) continue;
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + span));
    const auto extra = config_arguments(*path);
    const std::size_t at = args.empty() ? 0 : 1;
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
    break;
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Linear-optical C-sign gate simulations under ancilla inefficiency"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* sweep = app.add_subcommand("sweep", "Minimum fidelity along an efficiency axis");
  add_common(sweep, c);
  add_grid(sweep, c);
  sweep->add_option("--axis", c.axis, "detector, source or joint")->check(CLI::IsMember({"detector", "source", "joint"}));

  std::optional<double> d1_from, d1_to, d2_from, d2_to;
  auto* land = app.add_subcommand("landscape", "KLM minimum fidelity over reflectivity offsets");
  add_common(land, c);
  land->add_option("--points", c.points, "Points per offset axis");
  land->add_option("--d-eta1-from", d1_from);
  land->add_option("--d-eta1-to", d1_to);
  land->add_option("--d-eta2-from", d2_from);
  land->add_option("--d-eta2-to", d2_to);

  auto* optimize = app.add_subcommand("optimize", "Tune the KLM reflectivities");
  add_common(optimize, c);
  add_grid(optimize, c);
  optimize->add_option("--mode", c.mode, "eta2, joint, crossover or success")
      ->check(CLI::IsMember({"eta2", "joint", "crossover", "success"}));

  auto* info = app.add_subcommand("gate-info", "Describe a gate and run its ideal truth check");
  add_common(info, c);
  info->add_option("name", c.gate, "Gate name")->check(CLI::IsMember({"klm", "knill", "pjf", "ns"}));

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--out", c.out, "Write the report here instead of stdout");
  verify->add_option("--config", "key=value file");
  verify->add_flag("--mutate-sign", c.mutate_sign)->group("");

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*sweep) return cmd_sweep(c);
    if (*land) return cmd_landscape(c, d1_from, d1_to, d2_from, d2_to);
    if (*optimize) return cmd_optimize(c);
    if (*info) return cmd_gate_info(c);
    if (*verify) return cmd_verify(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
