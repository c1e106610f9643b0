#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oconnell/densities.hpp"
#include "oconnell/errors.hpp"
#include "oconnell/pathsim.hpp"
#include "oconnell/specfun.hpp"
#include "oconnell/stats.hpp"
#include "oconnell/verify.hpp"
#include "oconnell/whittaker.hpp"

namespace oconnell::cli {

namespace {

using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  if (s.empty()) return v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      double d = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      v.push_back(d);
    } catch (const std::exception&) {
      throw UsageError(std::string("--") + what + ": cannot parse '" + item + "' as a number");
    }
  }
  return v;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::string csv_cell(const json& c) {
  if (c.is_null()) return "";
  if (c.is_number_integer()) return std::to_string(c.get<long long>());
  if (c.is_number()) return number(c.get<double>());
  if (c.is_boolean()) return c.get<bool>() ? "1" : "0";
  std::string s = c.get<std::string>();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

void write_table(const Table& t, const json& meta, const std::string& format, std::ostream& os) {
  if (format == "json") {
    json j = meta;
    j["columns"] = t.columns;
    json rows = json::array();
    for (const auto& r : t.rows) {
      json row = json::array();
      for (const auto& c : r) row.push_back(c.is_number_float() && !std::isfinite(c.get<double>()) ? json() : c);
      rows.push_back(row);
    }
    j["rows"] = rows;
    os << j.dump(2) << "\n";
    return;
  }
  os << "# format_version: " << meta["format_version"].get<int>() << "\n";
  os << "# command: " << meta["command"].get<std::string>() << "\n";
  os << "# config: " << meta["config"].dump() << "\n";
  if (meta.contains("info"))
    for (auto it = meta["info"].begin(); it != meta["info"].end(); ++it)
      os << "# " << it.key() << ": " << (it->is_string() ? it->get<std::string>() : it->dump()) << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
    os << "\n";
  }
}

// Options shared by every subcommand.
struct Common {
  std::string format = "csv";
  std::string out;
  std::string config;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out, "output file (default: standard output)");
  sub->add_option("--config", c.config, "JSON file with keys named after the long flags");
  sub->add_option("--seed", c.seed, "random seed");
}

// Resolved values of all options of a subcommand, flags > config > defaults.
json resolved_config(const CLI::App* sub) {
  json j = json::object();
  for (const CLI::Option* o : sub->get_options()) {
    std::string name = o->get_single_name();
    if (name == "help" || name == "out" || name == "config") continue;
    if (o->get_expected_min() == 0) {
      j[name] = o->count() > 0;
      continue;
    }
    std::string v = o->count() > 0 ? o->results().back() : o->get_default_str();
    if (v.empty()) continue;
    char* end = nullptr;
    if (v.find_first_not_of("0123456789") == std::string::npos) {
      j[name] = std::strtoull(v.c_str(), &end, 10);
      continue;
    }
    double d = std::strtod(v.c_str(), &end);
    if (end && *end == '\0')
      j[name] = d;
    else
      j[name] = v;
  }
  return j;
}

json meta_for(const std::string& command, const CLI::App* sub) {
  return json{{"format_version", kFormatVersion}, {"command", command}, {"config", resolved_config(sub)},
              {"info", json::object()}};
}

// Flags from a JSON config, placed before the user's flags so that the
// latter win under take-last.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  std::vector<std::string> tokens;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string flag = "--" + it.key();
    const json& v = *it;
    if (v.is_boolean()) {
      if (v.get<bool>()) tokens.push_back(flag);
    } else if (v.is_array()) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += v[i].is_string() ? v[i].get<std::string>() : (v[i].is_number_integer() ? v[i].dump() : number(v[i].get<double>()));
      }
      tokens.push_back(flag);
      tokens.push_back(s);
    } else if (v.is_string()) {
      tokens.push_back(flag);
      tokens.push_back(v.get<std::string>());
    } else if (v.is_number_integer()) {
      tokens.push_back(flag);
      tokens.push_back(v.dump());
    } else if (v.is_number()) {
      tokens.push_back(flag);
      tokens.push_back(number(v.get<double>()));
    } else {
      throw UsageError("config key '" + it.key() + "' has an unsupported value");
    }
  }
  return tokens;
}

std::string find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return "";
}

std::vector<double> grid(double from, double to, int steps) {
  if (steps < 1) throw UsageError("--steps must be at least 1");
  if (!std::isfinite(from) || !std::isfinite(to)) throw UsageError("--from and --to must be finite");
  std::vector<double> g(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) g[static_cast<std::size_t>(i)] = steps == 1 ? from : from + (to - from) * i / (steps - 1);
  return g;
}

// ---- fn ------------------------------------------------------------------

struct FnArgs {
  std::string name;
  std::string x;
  double from = 0, to = 0;
  int steps = 0;
  double order = 0;
  bool imaginary = false;
  int n = 2;
  double t = 1;
  std::string nu;
};

Table cmd_fn(const FnArgs& a, const CLI::App* sub) {
  Table tab;
  const bool has_grid = sub->get_option("--steps")->count() > 0;
  const bool scalar = a.name != "psi" && a.name != "psi0" && a.name != "drift";
  std::vector<double> xs;
  if (has_grid) {
    if (!scalar) throw UsageError("fn " + a.name + ": a grid needs a scalar argument");
    if (!a.x.empty()) throw UsageError("give either --x or --from/--to/--steps");
    if (sub->get_option("--from")->count() == 0 || sub->get_option("--to")->count() == 0)
      throw UsageError("a grid needs --from, --to and --steps");
    xs = grid(a.from, a.to, a.steps);
  } else {
    xs = parse_list(a.x, "x");
    if (xs.empty()) throw UsageError("fn " + a.name + ": --x is required");
  }
  const Order order = a.imaginary ? Order::imaginary(a.order) : Order::real(a.order);

  if (scalar) {
    if (a.name == "theta")
      tab.columns = {"r", "t", "value", "error_bound"};
    else if (a.name == "besseli" || a.name == "besselk" || a.name == "besselk_deriv")
      tab.columns = {"order", "x", "value", "error_bound"};
    else
      tab.columns = {"x", "value", "error_bound"};
    for (double x : xs) {
      ErrorBounded v;
      if (a.name == "gamma")
        v = {gamma(x), 0.0};
      else if (a.name == "j0")
        v = bessel_j0(x);
      else if (a.name == "besseli")
        v = bessel_i(a.order, x);
      else if (a.name == "besselk")
        v = bessel_k(order, x);
      else if (a.name == "besselk_deriv")
        v = bessel_k_deriv(order, x);
      else
        v = theta(x, a.t);
      std::vector<json> row;
      if (a.name == "theta") row = {x, a.t};
      else if (tab.columns.size() == 4) row = {a.order, x};
      else row = {x};
      row.push_back(v.value);
      row.push_back(v.error_bound);
      tab.rows.push_back(row);
    }
    return tab;
  }

  if (static_cast<int>(xs.size()) != a.n) throw UsageError("--x must have --n entries");
  Eigen::VectorXd x = to_vec(xs);
  for (int j = 1; j <= a.n; ++j) tab.columns.push_back("x_" + std::to_string(j));
  std::vector<json> head(xs.begin(), xs.end());
  if (a.name == "psi") {
    auto nu = parse_list(a.nu, "nu");
    if (nu.empty()) nu.assign(static_cast<std::size_t>(a.n), 0.0);
    if (static_cast<int>(nu.size()) != a.n) throw UsageError("--nu must have --n entries");
    auto v = psi(a.n, SpectralParameter{to_vec(nu)}, x);
    tab.columns.insert(tab.columns.end(), {"value", "value_imag", "error_bound"});
    head.insert(head.end(), {v.value.real(), v.value.imag(), v.error_bound});
    tab.rows.push_back(head);
  } else if (a.name == "psi0") {
    auto v = psi0(a.n, x);
    tab.columns.insert(tab.columns.end(), {"value", "error_bound"});
    head.insert(head.end(), {v.value, v.error_bound});
    tab.rows.push_back(head);
  } else {
    auto f = drift_field(a.n, x);
    tab.columns.insert(tab.columns.end(), {"component", "value", "error_bound"});
    for (int j = 0; j < a.n; ++j) {
      auto row = head;
      row.insert(row.end(), {j + 1, f(j), 0.0});
      tab.rows.push_back(row);
    }
  }
  return tab;
}

// ---- density -------------------------------------------------------------

struct DensityArgs {
  std::string name;
  int n = 1;
  double t = 1, s = 0, T = 0;
  std::string x, y, mu;
  std::string route = "auto";
  long samples = 0;
  double from = 0, to = 0;
  int steps = 0;
};

Table cmd_density(const DensityArgs& a, const CLI::App* sub, std::uint64_t seed) {
  const std::string& nm = a.name;
  const bool uses_x = nm != "theta_n" && nm != "from_minus_inf";
  const bool uses_y = nm != "survival";
  const int n = nm == "from_minus_inf" || nm == "myq" || nm == "heat" ? 1 : a.n;
  if (nm == "heat" || nm == "myq" || nm == "from_minus_inf")
    if (sub->get_option("--n")->count() > 0 && a.n != 1) throw UsageError(nm + " is one-dimensional");

  auto x = parse_list(a.x, "x");
  if (uses_x && static_cast<int>(x.size()) != n) throw UsageError("--x must have " + std::to_string(n) + " entries");
  auto mu = parse_list(a.mu, "mu");
  if (mu.empty()) mu.assign(static_cast<std::size_t>(n), 0.0);
  if (static_cast<int>(mu.size()) != n) throw UsageError("--mu must have " + std::to_string(n) + " entries");

  std::vector<std::vector<double>> ys;
  if (sub->get_option("--steps")->count() > 0) {
    if (!uses_y || n != 1) throw UsageError("a grid over y needs a one-dimensional y");
    if (!a.y.empty()) throw UsageError("give either --y or --from/--to/--steps");
    for (double v : grid(a.from, a.to, a.steps)) ys.push_back({v});
  } else if (uses_y) {
    auto y = parse_list(a.y, "y");
    if (static_cast<int>(y.size()) != n) throw UsageError("--y must have " + std::to_string(n) + " entries");
    ys.push_back(y);
  } else {
    ys.push_back({});
  }

  if (a.route != "auto" && a.route != "factorized" && a.route != "spectral" && a.route != "u_integral" &&
      a.route != "reduced" && a.route != "nu_quadrature")
    throw UsageError("unknown --route '" + a.route + "'");
  const Q2Route q2 = a.route == "spectral" ? Q2Route::spectral : Q2Route::factorized;
  auto q_base = [&](double t, const Eigen::VectorXd& yy, const Eigen::VectorXd& xx) {
    if (n == 3 && a.samples > 0) return q_spectral_mc(3, t, yy, xx, a.samples, seed);
    return q_spectral(n, t, yy, xx, q2);
  };

  Table tab;
  tab.columns = {"t"};
  if (uses_x)
    for (int j = 1; j <= n; ++j) tab.columns.push_back("x_" + std::to_string(j));
  if (uses_y)
    for (int j = 1; j <= n; ++j) tab.columns.push_back("y_" + std::to_string(j));
  tab.columns.insert(tab.columns.end(), {"value", "error_bound", "method"});

  const Eigen::VectorXd xv = to_vec(x), muv = to_vec(mu);
  for (const auto& yraw : ys) {
    const Eigen::VectorXd yv = to_vec(yraw);
    DensityEstimate d;
    if (nm == "heat") {
      d = {heat_kernel(a.t, yv(0), xv(0)), 0.0, DensityMethod::closed_form};
    } else if (nm == "km") {
      d = {km_density(a.t, yv, xv), 0.0, DensityMethod::closed_form};
    } else if (nm == "noncolliding") {
      d = {noncolliding_density(a.t, yv, xv), 0.0, DensityMethod::closed_form};
    } else if (nm == "q") {
      d = q_base(a.t, yv, xv);
    } else if (nm == "qmu") {
      d = drift_density(a.t, yv, xv, muv, q_base);
    } else if (nm == "myq") {
      MyRoute r = a.route == "spectral" ? MyRoute::spectral
                  : a.route == "u_integral" ? MyRoute::u_integral
                                            : MyRoute::automatic;
      d = my_q(a.t, yv(0), xv(0), muv(0), r);
    } else if (nm == "survival") {
      d = {survival_n(n, a.t, xv, muv), 0.0, DensityMethod::quadrature};
    } else if (nm == "conditioned") {
      if (sub->get_option("--T")->count() == 0) throw UsageError("conditioned: --T is required");
      d = conditioned_density_T(n, a.s, a.t, a.T, yv, xv, muv);
    } else if (nm == "oconnell") {
      d = oconnell_density(n, a.t, yv, xv);
    } else if (nm == "theta_n") {
      d = theta_n(n, a.t, yv, a.route == "nu_quadrature" ? ThetaRoute::nu_quadrature : ThetaRoute::reduced);
    } else {
      const bool finite = sub->get_option("--T")->count() > 0;
      d = {from_minus_infinity(finite ? FromMinusInf::finite_T : FromMinusInf::infinite_T, a.t, yv(0), muv(0), a.T),
           0.0, DensityMethod::quadrature};
    }
    std::vector<json> row{a.t};
    if (uses_x) row.insert(row.end(), x.begin(), x.end());
    if (uses_y) row.insert(row.end(), yraw.begin(), yraw.end());
    row.insert(row.end(), {d.value, d.error_bound, to_string(d.method)});
    tab.rows.push_back(row);
  }
  return tab;
}

// ---- simulate ------------------------------------------------------------

struct SimArgs {
  std::string model;
  int n = 1;
  double t = 1, dt = 1e-3;
  long paths = 10000;
  std::string x, y, mu;
  std::string eps;
  std::string scheme = "euler";
  std::string kill = "weighted";
  std::string potential = "auto";
  double bandwidth = 0;
  std::string samples_out, plot_out;
  int bins = 50;
};

// Weighted location statistics of one column; weights are survival weights.
void summarize_column(Table& tab, const std::string& label, int index, const std::vector<double>& v,
                      const Eigen::VectorXd& w) {
  const long n = static_cast<long>(v.size());
  Eigen::VectorXd wv(n), w2v(n), ww(n);
  for (long i = 0; i < n; ++i) {
    wv(i) = w(i) * v[static_cast<std::size_t>(i)];
    ww(i) = w(i) * w(i);
  }
  const double sw = compensated_sum(w);
  if (!(sw > 0)) {
    tab.rows.push_back({label + "_mean", index, json(), json()});
    return;
  }
  const double mean = compensated_sum(wv) / sw;
  for (long i = 0; i < n; ++i) {
    double d = v[static_cast<std::size_t>(i)] - mean;
    w2v(i) = w(i) * d * d;
  }
  const double var = compensated_sum(w2v) / sw;
  const double ess = sw * sw / compensated_sum(ww);
  tab.rows.push_back({label + "_mean", index, mean, std::sqrt(var / ess)});
  tab.rows.push_back({label + "_variance", index, var, json()});
  // quantiles over surviving paths
  std::vector<double> alive;
  for (long i = 0; i < n; ++i)
    if (w(i) > 0) alive.push_back(v[static_cast<std::size_t>(i)]);
  for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    char q[8];
    std::snprintf(q, sizeof q, "q%02d", static_cast<int>(std::lround(p * 100)));
    tab.rows.push_back({label + "_" + q, index, quantile(alive, p), json()});
  }
}

Table summarize(const PathEnsemble& e, bool weighted) {
  Table tab;
  tab.columns = {"statistic", "index", "value", "std_error"};
  const int n = static_cast<int>(e.terminal.cols());
  tab.rows.push_back({"paths", 0, e.size(), json()});
  if (weighted) {
    auto s = e.survival();
    tab.rows.push_back({"survival", 0, s.mean, s.std_error});
  }
  for (int j = 0; j < n; ++j) summarize_column(tab, "x", j + 1, e.coordinate(j), e.weight);
  for (int j = 0; j + 1 < n; ++j) {
    auto g = e.gap(j);
    summarize_column(tab, "gap", j + 1, g, e.weight);
    std::vector<double> g2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) g2[i] = g[i] * g[i];
    Eigen::VectorXd w = e.weight;
    const double sw = compensated_sum(w);
    Eigen::VectorXd a(e.size()), d(e.size());
    for (long i = 0; i < e.size(); ++i) a(i) = w(i) * g2[static_cast<std::size_t>(i)];
    const double m = compensated_sum(a) / sw;
    for (long i = 0; i < e.size(); ++i) d(i) = w(i) * std::pow(g2[static_cast<std::size_t>(i)] - m, 2);
    Eigen::VectorXd ww = w.array().square();
    double se = std::sqrt(compensated_sum(d) / sw / (sw * sw / compensated_sum(ww)));
    tab.rows.push_back({"gap_sq_mean", j + 1, m, se});
  }
  return tab;
}

void write_samples(const PathEnsemble& e, const json& meta, const std::string& format, const std::string& path) {
  Table tab;
  tab.columns = {"path_id"};
  const int n = static_cast<int>(e.terminal.cols());
  for (int j = 1; j <= n; ++j) tab.columns.push_back("x_" + std::to_string(j));
  tab.columns.push_back("weight");
  for (long i = 0; i < e.size(); ++i) {
    std::vector<json> row{i};
    for (int j = 0; j < n; ++j) row.push_back(e.terminal(i, j));
    row.push_back(e.weight(i));
    tab.rows.push_back(row);
  }
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write '" + path + "'");
  write_table(tab, meta, format, os);
}

void write_plot_data(const PathEnsemble& e, const json& meta, const std::string& format, const std::string& path,
                     int bins) {
  if (bins < 1) throw UsageError("--bins must be positive");
  Table tab;
  tab.columns = {"coordinate", "x", "y"};
  std::vector<double> w(e.weight.data(), e.weight.data() + e.size());
  for (int j = 0; j < static_cast<int>(e.terminal.cols()); ++j) {
    auto v = e.coordinate(j);
    double lo = quantile(v, 0.001), hi = quantile(v, 0.999);
    if (!(hi > lo)) hi = lo + 1;
    auto h = Histogram::build(v, w, lo, hi, bins);
    for (int b = 0; b < bins; ++b)
      tab.rows.push_back({j + 1, 0.5 * (h.edges[b] + h.edges[b + 1]), h.density[static_cast<std::size_t>(b)]});
  }
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write '" + path + "'");
  write_table(tab, meta, format, os);
}

Table cmd_simulate(const SimArgs& a, const CLI::App* sub, const Common& c, json& meta) {
  SimConfig cfg;
  cfg.n_particles = a.n;
  cfg.t_final = a.t;
  cfg.dt = a.dt;
  cfg.paths = a.paths;
  cfg.seed = c.seed;
  cfg.scheme = a.scheme == "tamed" ? Scheme::tamed_euler : Scheme::euler;
  cfg.kill_mode = a.kill == "bernoulli" ? KillMode::bernoulli : KillMode::weighted;
  const bool one_d = a.model == "my_explicit" || a.model == "sde_my";
  if (one_d) {
    if (sub->get_option("--n")->count() > 0 && a.n != 1) throw UsageError(a.model + " is one-dimensional");
    cfg.n_particles = 1;
  }
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  meta["info"]["steps"] = cfg.steps();
  meta["info"]["step"] = number(cfg.step());

  const int n = cfg.n_particles;
  auto x = parse_list(a.x, "x");
  auto mu = parse_list(a.mu, "mu");
  auto eps_list = parse_list(a.eps, "eps");
  const bool eps_given = !eps_list.empty();

  PathEnsemble e;
  bool weighted = false;
  Table extra;
  if (a.model == "fk") {
    if (static_cast<int>(x.size()) != n) throw UsageError("--x must have --n entries");
    if (mu.empty()) mu.assign(static_cast<std::size_t>(n), 0.0);
    if (static_cast<int>(mu.size()) != n) throw UsageError("--mu must have --n entries");
    if (eps_list.size() > 1) throw UsageError("fk takes a single --eps");
    const double eps = eps_given ? eps_list[0] : 1.0;
    Potential p = a.potential == "toda"                          ? Potential::toda
                  : a.potential == "matsumoto_yor"               ? Potential::matsumoto_yor
                  : n == 1                                       ? Potential::matsumoto_yor
                                                                 : Potential::toda;
    meta["info"]["potential"] = p == Potential::toda ? "toda" : "matsumoto_yor";
    e = fk_ensemble(cfg, to_vec(x), to_vec(mu), eps, p);
    weighted = true;
    if (!a.y.empty()) {
      auto y = parse_list(a.y, "y");
      if (static_cast<int>(y.size()) != n) throw UsageError("--y must have --n entries");
      auto d = fk_density(cfg, to_vec(x), to_vec(y), a.bandwidth, eps, p);
      extra.rows.push_back({"density", 0, d.value, d.std_error});
      extra.rows.push_back({"density_dt_bias", 0, d.dt_bias, json()});
      extra.rows.push_back({"density_smoothing_bias", 0, d.smoothing_bias, json()});
      extra.rows.push_back({"density_bandwidth", 0, d.bandwidth, json()});
    }
  } else if (a.model == "my_explicit") {
    if (mu.size() > 1) throw UsageError("my_explicit takes a scalar --mu");
    if (eps_list.size() > 1) throw UsageError("my_explicit takes a single --eps");
    if (eps_given) {
      if (!mu.empty() && mu[0] != 0) throw UsageError("the scaled construction is defined for mu = 0");
      e = my_explicit_scaled(cfg, eps_list[0]);
    } else {
      e = my_explicit(cfg, mu.empty() ? 0.0 : mu[0]);
    }
  } else if (a.model == "sde_my") {
    if (mu.size() > 1) throw UsageError("sde_my takes a scalar --mu");
    if (x.size() != 1) throw UsageError("sde_my takes a scalar --x");
    e = sde_my(cfg, x[0], mu.empty() ? 0.0 : mu[0]);
  } else if (a.model == "sde_oconnell" || a.model == "sde_dyson") {
    if (static_cast<int>(x.size()) != n) throw UsageError("--x must have --n entries");
    if (a.model == "sde_dyson") {
      e = sde_dyson(cfg, to_vec(x));
    } else {
      if (eps_list.size() > 1) throw UsageError("sde_oconnell takes a single --eps");
      e = sde_oconnell(cfg, to_vec(x), eps_given ? eps_list[0] : 1.0);
    }
  } else {
    if (static_cast<int>(x.size()) != n) throw UsageError("--x must have --n entries");
    if (!eps_given) eps_list = {0.2, 0.1, 0.05};
    auto rep = scaling_limit_check(eps_list, cfg, to_vec(x));
    Table tab;
    tab.columns = {"statistic", "index", "value", "std_error"};
    for (std::size_t i = 0; i < rep.eps.size(); ++i) tab.rows.push_back({"gap_ks", rep.eps[i], rep.ks[i], json()});
    tab.rows.push_back({"monotone", 0, rep.monotone ? 1 : 0, json()});
    return tab;
  }

  if (!a.samples_out.empty()) write_samples(e, meta, c.format, a.samples_out);
  if (!a.plot_out.empty()) write_plot_data(e, meta, c.format, a.plot_out, a.bins);
  Table tab = summarize(e, weighted);
  tab.rows.insert(tab.rows.end(), extra.rows.begin(), extra.rows.end());
  return tab;
}

// ---- verify --------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  bool fast = false;
  std::string report;
  std::string criteria;
};

int cmd_verify(const VerifyArgs& a, const Common& c, bool seed_given, std::ostream& out) {
  std::vector<int> ids;
  if (!a.criteria.empty()) {
    for (double v : parse_list(a.criteria, "criterion")) {
      if (v != std::floor(v) || v < 1 || v > static_cast<double>(criteria().size()))
        throw UsageError("--criterion must list ids between 1 and " + std::to_string(criteria().size()));
      ids.push_back(static_cast<int>(v));
    }
  } else {
    try {
      ids = suite_criteria(a.suite, a.fast);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  VerifyOptions opt;
  opt.fast = a.fast;
  if (seed_given) opt.seed = c.seed;
  opt.simulate = in_process_runner();
  const bool text = c.format == "csv";
  auto rep = run_criteria(ids, opt, [&](const CriterionResult& r) {
    if (text) out << to_text(r) << std::flush;
  });
  const std::string js = to_json(rep);
  if (!text) out << js << "\n";
  if (!a.report.empty()) {
    std::ofstream os(a.report);
    if (!os) throw UsageError("cannot write '" + a.report + "'");
    os << js << "\n";
  }
  if (text) out << (rep.pass() ? "all checks passed\n" : "some checks failed\n");
  return rep.pass() ? Exit::ok : Exit::verification_failed;
}

void print_error(std::ostream& out, std::ostream& err, const std::string& format, const std::string& type,
                 const std::string& message) {
  err << "error (" << type << "): " << message << "\n";
  if (format == "json")
    out << json{{"format_version", kFormatVersion}, {"error", {{"type", type}, {"message", message}}}}.dump(2) << "\n";
}

}  // namespace

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  CLI::App app{"Killing Brownian particles, Whittaker functions and the O'Connell process"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  Common common;
  FnArgs fa;
  DensityArgs da;
  SimArgs sa;
  VerifyArgs va;

  auto* fn = app.add_subcommand("fn", "evaluate special functions");
  fn->add_option("name", fa.name, "function")
      ->required()
      ->check(CLI::IsMember({"gamma", "j0", "besseli", "besselk", "besselk_deriv", "theta", "psi", "psi0", "drift"}));
  fn->add_option("--x", fa.x, "argument, or comma-separated configuration");
  fn->add_option("--from", fa.from, "grid start");
  fn->add_option("--to", fa.to, "grid end");
  fn->add_option("--steps", fa.steps, "grid points");
  fn->add_option("--order", fa.order, "Bessel order");
  fn->add_flag("--imaginary", fa.imaginary, "order is i times --order");
  fn->add_option("--n", fa.n, "number of particles");
  fn->add_option("--t", fa.t, "time argument of theta");
  fn->add_option("--nu", fa.nu, "spectral parameter lambda = i nu, comma-separated");
  add_common(fn, common);

  auto* den = app.add_subcommand("density", "evaluate transition densities");
  den->add_option("name", da.name, "density")
      ->required()
      ->check(CLI::IsMember({"heat", "km", "noncolliding", "q", "qmu", "myq", "survival", "conditioned", "oconnell",
                             "theta_n", "from_minus_inf"}));
  den->add_option("--n", da.n, "number of particles");
  den->add_option("--t", da.t, "time");
  den->add_option("--s", da.s, "start time (conditioned)");
  den->add_option("--T", da.T, "horizon (conditioned, from_minus_inf)");
  den->add_option("--x", da.x, "start configuration");
  den->add_option("--y", da.y, "end configuration");
  den->add_option("--mu", da.mu, "drift vector");
  den->add_option("--route", da.route, "auto, factorized, spectral, u_integral, reduced or nu_quadrature");
  den->add_option("--samples", da.samples, "Monte Carlo samples for N = 3");
  den->add_option("--from", da.from, "grid start over y");
  den->add_option("--to", da.to, "grid end over y");
  den->add_option("--steps", da.steps, "grid points over y");
  add_common(den, common);

  auto* simc = app.add_subcommand("simulate", "run path ensembles");
  simc->add_option("model", sa.model, "model")
      ->required()
      ->check(CLI::IsMember({"fk", "my_explicit", "sde_oconnell", "sde_dyson", "sde_my", "scaling_limit"}));
  simc->add_option("--n", sa.n, "number of particles");
  simc->add_option("--t", sa.t, "final time");
  simc->add_option("--dt", sa.dt, "time step");
  simc->add_option("--paths", sa.paths, "number of paths");
  simc->add_option("--x", sa.x, "start configuration");
  simc->add_option("--y", sa.y, "fk: also estimate the density at y");
  simc->add_option("--mu", sa.mu, "drift");
  simc->add_option("--eps", sa.eps, "interaction scale (list for scaling_limit)");
  simc->add_option("--scheme", sa.scheme, "time stepping")->check(CLI::IsMember({"euler", "tamed"}));
  simc->add_option("--kill-mode", sa.kill, "fk killing")->check(CLI::IsMember({"weighted", "bernoulli"}));
  simc->add_option("--potential", sa.potential, "fk potential")
      ->check(CLI::IsMember({"auto", "toda", "matsumoto_yor"}));
  simc->add_option("--bandwidth", sa.bandwidth, "fk density bandwidth (0: Silverman)");
  simc->add_option("--samples-out", sa.samples_out, "write terminal samples to this file");
  simc->add_option("--emit-plot-data", sa.plot_out, "write histogram series to this file");
  simc->add_option("--bins", sa.bins, "histogram bins");
  add_common(simc, common);

  auto* ver = app.add_subcommand("verify", "run the acceptance checks");
  ver->add_option("--suite", va.suite, "specfun, whittaker, densities, pathsim or all");
  ver->add_flag("--fast", va.fast, "quadrature-only subset");
  ver->add_option("--report", va.report, "write the JSON report here");
  ver->add_option("--criterion", va.criteria, "comma-separated criterion ids");
  add_common(ver, common);

  std::vector<std::string> args = raw;
  try {
    std::string cfg = find_config(args);
    if (!cfg.empty() && !args.empty()) {
      auto tokens = config_tokens(cfg);
      args.insert(args.begin() + 1, tokens.begin(), tokens.end());
    }
  } catch (const UsageError& e) {
    err << "error (usage): " << e.what() << "\n";
    return Exit::usage;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Exit::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return Exit::ok;
  } catch (const CLI::ParseError& e) {
    err << "error (usage): " << e.what() << "\n";
    if (!app.get_subcommands().empty()) err << app.get_subcommands().front()->help();
    return Exit::usage;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::ofstream file;
  std::ostream* os = &out;
  if (!common.out.empty()) {
    file.open(common.out);
    if (!file) {
      err << "error (usage): cannot write '" << common.out << "'\n";
      return Exit::usage;
    }
    os = &file;
  }

  try {
    if (sub == ver) return cmd_verify(va, common, ver->get_option("--seed")->count() > 0, *os);
    json meta;
    Table tab;
    if (sub == fn) {
      meta = meta_for("fn " + fa.name, sub);
      tab = cmd_fn(fa, sub);
    } else if (sub == den) {
      meta = meta_for("density " + da.name, sub);
      tab = cmd_density(da, sub, common.seed);
    } else {
      meta = meta_for("simulate " + sa.model, sub);
      tab = cmd_simulate(sa, sub, common, meta);
    }
    write_table(tab, meta, common.format, *os);
    return Exit::ok;
  } catch (const UsageError& e) {
    print_error(*os, err, common.format, "usage", e.what());
    return Exit::usage;
  } catch (const DomainError& e) {
    print_error(*os, err, common.format, "domain", e.what());
    return Exit::usage;
  } catch (const CapabilityError& e) {
    print_error(*os, err, common.format, "capability", e.what());
    return Exit::usage;
  } catch (const ConvergenceError& e) {
    print_error(*os, err, common.format, "convergence", e.what());
    return Exit::numerical;
  } catch (const Error& e) {
    print_error(*os, err, common.format, "numerical", e.what());
    return Exit::numerical;
  }
}

SimulateRunner in_process_runner() {
  return [](const std::vector<std::string>& args, unsigned threads) {
    const char* prev = std::getenv("OCONNELL_THREADS");
    const std::string saved = prev ? prev : "";
    ::setenv("OCONNELL_THREADS", std::to_string(threads).c_str(), 1);
    std::vector<std::string> full{"simulate"};
    full.insert(full.end(), args.begin(), args.end());
    std::ostringstream o, e;
    int code = run(full, o, e);
    if (prev)
      ::setenv("OCONNELL_THREADS", saved.c_str(), 1);
    else
      ::unsetenv("OCONNELL_THREADS");
    return code == Exit::ok ? o.str() : std::string();
  };
}

SimulateRunner subprocess_runner(const std::string& executable) {
  return [executable](const std::vector<std::string>& args, unsigned threads) {
    std::string cmd = "OCONNELL_THREADS=" + std::to_string(threads) + " '" + executable + "' simulate";
    for (const auto& a : args) cmd += " '" + a + "'";
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return std::string();
    std::string s;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) s.append(buf, got);
    int status = ::pclose(p);
    return status == 0 ? s : std::string();
  };
}

}  // namespace oconnell::cli
