#include "fgneg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "fgneg/errors.hpp"
#include "fgneg/exact.hpp"
#include "fgneg/models.hpp"
#include "fgneg/product_bound.hpp"
#include "fgneg/sdp_bound.hpp"

namespace fgneg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

nlohmann::json beta_json(double b) {
  if (std::isinf(b)) return "inf";
  return b;
}

double beta_from(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw ConfigError("beta must be a number or \"inf\"");
  }
  if (!j.is_number()) throw ConfigError("beta must be a number or \"inf\"");
  return j.get<double>();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double log_from_negativity(double n) { return std::log(2.0 * n + 1.0); }

}  // namespace

RunConfig::RunConfig() {
  for (int k = 0; k <= 40; ++k) deltas.push_back(-1.0 + 0.05 * k);
  betas = {1.0, 2.0, 5.0, 10.0, 100.0, kInf};
  spectra_betas = {kInf, 100.0, 10.0, 5.0};
}

void RunConfig::validate() const {
  if (model != "ssh" && model != "infinite") {
    throw ConfigError("model must be \"ssh\" or \"infinite\"");
  }
  if (sites <= 0 || sites % 2 != 0) throw ConfigError("sites must be positive and even");
  if (ell <= 0) throw ConfigError("ell must be positive");
  if (model == "ssh" && 2 * ell > sites) throw ConfigError("segments exceed the chain");
  if (!(std::abs(delta) <= 1.0)) throw ConfigError("delta must lie in [-1, 1]");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (deltas.empty() || betas.empty() || lengths.empty() || thermal_lengths.empty() ||
      thermal_betas.empty() || spectra_betas.empty() || unequal_first.empty()) {
    throw ConfigError("grids must be nonempty");
  }
  for (double d : deltas)
    if (!(std::abs(d) <= 1.0)) throw ConfigError("deltas must lie in [-1, 1]");
  for (const auto* g : {&betas, &thermal_betas, &spectra_betas})
    for (double b : *g)
      if (!(b > 0.0)) throw ConfigError("betas must be positive");
  for (const auto* g : {&lengths, &thermal_lengths})
    for (int l : *g)
      if (l <= 0 || l > 512) throw ConfigError("lengths must lie in [1, 512]");
  for (int l1 : unequal_first)
    if (l1 <= 0 || l1 >= unequal_total) throw ConfigError("unequal_first must lie in (0, unequal_total)");
  if (unequal_total > 1024) throw ConfigError("unequal_total must be at most 1024");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(sdp_tol > 0.0 && sdp_tol < 1e-2)) throw ConfigError("sdp_tol must lie in (0, 1e-2)");
  if (out.empty()) throw ConfigError("output directory must be set");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["model"] = model;
  j["sites"] = sites;
  j["ell"] = ell;
  j["delta"] = delta;
  j["beta"] = beta_json(beta);
  j["deltas"] = deltas;
  auto betas_json = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double b : v) a.push_back(beta_json(b));
    return a;
  };
  j["betas"] = betas_json(betas);
  j["lengths"] = lengths;
  j["thermal_lengths"] = thermal_lengths;
  j["thermal_betas"] = betas_json(thermal_betas);
  j["spectra_betas"] = betas_json(spectra_betas);
  j["unequal_total"] = unequal_total;
  j["unequal_first"] = unequal_first;
  j["bounds"] = {{"exact", bounds.exact},
                 {"lower", bounds.lower},
                 {"product", bounds.product},
                 {"sdp", bounds.sdp}};
  j["lower_strategy"] = to_string(lower_strategy);
  j["sdp_tol"] = sdp_tol;
  j["workers"] = workers;
  j["out"] = out;
  j["seed"] = seed;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  auto beta_list = [](const nlohmann::json& v) {
    if (!v.is_array()) throw ConfigError("beta grid must be an array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(beta_from(e));
    return out;
  };
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "model") c.model = v.get<std::string>();
      else if (k == "sites") c.sites = v.get<int>();
      else if (k == "ell") c.ell = v.get<int>();
      else if (k == "delta") c.delta = v.get<double>();
      else if (k == "beta") c.beta = beta_from(v);
      else if (k == "deltas") c.deltas = v.get<std::vector<double>>();
      else if (k == "betas") c.betas = beta_list(v);
      else if (k == "lengths") c.lengths = v.get<std::vector<int>>();
      else if (k == "thermal_lengths") c.thermal_lengths = v.get<std::vector<int>>();
      else if (k == "thermal_betas") c.thermal_betas = beta_list(v);
      else if (k == "spectra_betas") c.spectra_betas = beta_list(v);
      else if (k == "unequal_total") c.unequal_total = v.get<int>();
      else if (k == "unequal_first") c.unequal_first = v.get<std::vector<int>>();
      else if (k == "bounds") {
        for (auto b = v.begin(); b != v.end(); ++b) {
          if (b.key() == "exact") c.bounds.exact = b.value().get<bool>();
          else if (b.key() == "lower") c.bounds.lower = b.value().get<bool>();
          else if (b.key() == "product") c.bounds.product = b.value().get<bool>();
          else if (b.key() == "sdp") c.bounds.sdp = b.value().get<bool>();
          else throw ConfigError("unknown bound \"" + b.key() + "\"");
        }
      } else if (k == "lower_strategy") {
        auto s = parse_lower_strategy(v.get<std::string>());
        if (!s) throw ConfigError("unknown lower_strategy");
        c.lower_strategy = *s;
      } else if (k == "sdp_tol") c.sdp_tol = v.get<double>();
      else if (k == "workers") c.workers = v.get<int>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else throw ConfigError("unknown config key \"" + k + "\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return from_json(j);
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json().dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int Table::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw StructuralError("no column " + name);
  return static_cast<int>(it - columns.begin());
}

std::vector<double> Table::values(const std::string& name) const {
  const int c = column(name);
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r[c]);
  return v;
}

std::string Table::to_csv(std::uint64_t config_hash) const {
  std::ostringstream os;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash));
  os << "# config-hash: " << buf << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << fmt(r[c]);
    os << "\n";
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out) throw ConfigError("write failed for " + path);
}

double FitResult::param(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw StructuralError("no fit parameter " + name);
  return params[it - names.begin()];
}

nlohmann::json FitResult::to_json() const {
  nlohmann::json j;
  j["model"] = model;
  for (std::size_t i = 0; i < names.size(); ++i) {
    j["params"][names[i]] = params[i];
    j["stderr"][names[i]] = std::sqrt(std::max(0.0, covariance[i][i]));
  }
  j["covariance"] = covariance;
  j["residual_norm"] = residual_norm;
  j["grid"] = grid;
  return j;
}

namespace {

std::vector<std::vector<double>> to_nested(const Mat& m) {
  std::vector<std::vector<double>> v(m.rows(), std::vector<double>(m.cols()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) v[r][c] = m(r, c);
  return v;
}

// sigma^2 (J^T J)^{-1} with sigma^2 = RSS / (m - p); zero when m <= p.
Mat parameter_covariance(const Mat& jac, double rss) {
  const int m = static_cast<int>(jac.rows()), p = static_cast<int>(jac.cols());
  if (m <= p) return Mat::Zero(p, p);
  Mat jtj = jac.transpose() * jac;
  return rss / (m - p) * jtj.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace

FitResult linear_fit(const std::string& model, const std::vector<double>& x,
                     const std::vector<double>& y,
                     const std::vector<std::string>& names,
                     const std::vector<std::function<double(double)>>& basis) {
  const int m = static_cast<int>(x.size()), p = static_cast<int>(basis.size());
  if (m != static_cast<int>(y.size()) || names.size() != basis.size()) {
    throw StructuralError("fit input sizes differ");
  }
  if (m < p) throw NumericalError("fit needs at least as many points as parameters");
  Mat a(m, p);
  Vec b(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < p; ++j) a(i, j) = basis[j](x[i]);
    b(i) = y[i];
  }
  Eigen::ColPivHouseholderQR<Mat> qr(a);
  if (qr.rank() < p) throw NumericalError("degenerate fit grid for " + model);
  Vec sol = qr.solve(b);
  const double rss = (a * sol - b).squaredNorm();
  FitResult f;
  f.model = model;
  f.names = names;
  f.params.assign(sol.data(), sol.data() + p);
  f.covariance = to_nested(parameter_covariance(a, rss));
  f.residual_norm = std::sqrt(rss);
  f.grid = x;
  if (!std::isfinite(f.residual_norm)) throw NumericalError("fit residual is not finite");
  return f;
}

FitResult fit_lowest_level(const std::vector<double>& ell,
                           const std::vector<double>& eps) {
  const int m = static_cast<int>(ell.size());
  if (m < 3 || static_cast<int>(eps.size()) != m) {
    throw NumericalError("level fit needs at least three lengths");
  }
  const double k2 = 0.5 * kPi * kPi;
  auto model = [&](const Eigen::Vector3d& p, int i) {
    return p(0) * k2 / (std::log(2.0 * ell[i]) + p(1)) + p(2) / ell[i];
  };
  auto rss_of = [&](const Eigen::Vector3d& p) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double den = std::log(2.0 * ell[i]) + p(1);
      if (!(den > 0.0)) return kInf;
      const double r = model(p, i) - eps[i];
      s += r * r;
    }
    return s;
  };
  // Seed grid; c is solved exactly for each (a, b).
  Eigen::Vector3d best(1.0, 0.0, 0.0);
  double best_rss = kInf;
  double sum_w2 = 0.0;
  for (int i = 0; i < m; ++i) sum_w2 += 1.0 / (ell[i] * ell[i]);
  for (int ia = 0; ia <= 20; ++ia) {
    for (int ib = 0; ib <= 60; ++ib) {
      Eigen::Vector3d p(1.0 + 0.05 * ia, 0.05 * ib, 0.0);
      double num = 0.0;
      for (int i = 0; i < m; ++i) {
        num += (eps[i] - p(0) * k2 / (std::log(2.0 * ell[i]) + p(1))) / ell[i];
      }
      p(2) = num / sum_w2;
      const double r = rss_of(p);
      if (r < best_rss) {
        best_rss = r;
        best = p;
      }
    }
  }
  Mat jac(m, 3);
  auto fill_jacobian = [&](const Eigen::Vector3d& p) {
    for (int i = 0; i < m; ++i) {
      const double den = std::log(2.0 * ell[i]) + p(1);
      jac(i, 0) = k2 / den;
      jac(i, 1) = -p(0) * k2 / (den * den);
      jac(i, 2) = 1.0 / ell[i];
    }
  };
  for (int it = 0; it < 200; ++it) {
    fill_jacobian(best);
    Vec r(m);
    for (int i = 0; i < m; ++i) r(i) = eps[i] - model(best, i);
    Eigen::Vector3d step = jac.colPivHouseholderQr().solve(r);
    double lambda = 1.0;
    bool improved = false;
    while (lambda > 1e-10) {
      Eigen::Vector3d trial = best + lambda * step;
      const double t = rss_of(trial);
      if (t < best_rss) {
        best = trial;
        best_rss = t;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved || (lambda * step).norm() < 1e-13 * (1.0 + best.norm())) break;
  }
  fill_jacobian(best);
  FitResult f;
  f.model = "a pi^2 / (2 (ln 2l + b)) + c / l";
  f.names = {"a", "b", "c"};
  f.params = {best(0), best(1), best(2)};
  f.covariance = to_nested(parameter_covariance(jac, best_rss));
  f.residual_norm = std::sqrt(best_rss);
  f.grid = ell;
  if (!std::isfinite(f.residual_norm)) throw NumericalError("level fit diverged");
  return f;
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  const int threads = std::max(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(n);
  if (threads == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int i; (i = next.fetch_add(1)) < n;) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Bipartition central_segments(int sites, int ell) {
  if (ell <= 0 || 2 * ell > sites) throw ConfigError("segments do not fit the chain");
  Bipartition p;
  const int c = sites / 2;
  for (int j = c - ell; j < c; ++j) p.a.push_back(j);
  for (int j = c; j < c + ell; ++j) p.b.push_back(j);
  return p;
}

namespace {

struct PointValues {
  double e_exact = std::nan("");
  double e_lower = std::nan("");
  double e_hat = std::nan("");
  double e_sdp = std::nan("");
};

SdpOptions sdp_options(const RunConfig& cfg) {
  SdpOptions o;
  o.solver.tol = cfg.sdp_tol;
  return o;
}

PointValues evaluate_ssh(const RunConfig& cfg, double delta, double beta) {
  auto c = thermal_correlation({cfg.sites, delta}, ThermalSpec{beta});
  auto gamma = correlation_to_covariance(c);
  auto part = central_segments(cfg.sites, cfg.ell);
  PointValues v;
  if (cfg.bounds.exact) v.e_exact = negativity_exact(gamma, part).log_negativity;
  if (cfg.bounds.lower) {
    SearchBudget budget;
    budget.seed = cfg.seed;
    v.e_lower = log_from_negativity(
        optimize_rotation(gamma, part, cfg.lower_strategy, budget).bound.value);
  }
  if (cfg.bounds.product) v.e_hat = real_variant(c, part).e_hat;
  if (cfg.bounds.sdp) {
    v.e_sdp = log_from_negativity(sdp_upper_bound(gamma, part, sdp_options(cfg)).bound_n);
  }
  return v;
}

void check_row(const PointValues& v, double delta, double beta) {
  const double tol = 1e-8;
  auto fail = [&](const char* what) {
    std::ostringstream os;
    os << what << " violated at delta=" << delta << " beta=" << beta;
    throw NumericalError(os.str());
  };
  const double slack = 0.5 * std::log(2.0);
  if (!std::isnan(v.e_lower) && !std::isnan(v.e_hat) && v.e_lower > v.e_hat + slack + tol)
    fail("E_lower <= E_hat + ln sqrt 2");
  if (!std::isnan(v.e_exact)) {
    if (!std::isnan(v.e_lower) && v.e_lower > v.e_exact + tol) fail("E_lower <= E");
    if (!std::isnan(v.e_hat) && v.e_exact > v.e_hat + slack + tol) fail("E <= E_hat + ln sqrt 2");
    if (!std::isnan(v.e_sdp) && v.e_exact > v.e_sdp + 1e-6) fail("E <= E_sdp");
  }
}

void require_oracle(const RunConfig& cfg) {
  if (cfg.bounds.exact && 2 * cfg.ell > kDefaultMaxDenseModes) {
    throw ConfigError("exact oracle is limited to 2 ell <= " +
                      std::to_string(kDefaultMaxDenseModes) + " modes");
  }
  if (2 * cfg.ell > cfg.sites) throw ConfigError("segments exceed the chain");
}

Table point_table(std::vector<std::string> lead, bool sdp) {
  Table t;
  t.columns = std::move(lead);
  for (const char* c : {"E_exact", "E_lower", "E_hat"}) t.columns.push_back(c);
  if (sdp) t.columns.push_back("E_sdp");
  return t;
}

void append(std::vector<double>& row, const PointValues& v, bool sdp) {
  row.push_back(v.e_exact);
  row.push_back(v.e_lower);
  row.push_back(v.e_hat);
  if (sdp) row.push_back(v.e_sdp);
}

std::vector<int> iota_sites(int n) {
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

ProductBound chain_bound(int l1, int l2, double beta) {
  auto sites = iota_sites(l1 + l2);
  auto c = infinite_chain_correlation(sites, beta);
  return real_variant(c, Bipartition::contiguous(l1, l2));
}

}  // namespace

Table run_fig_groundstate(const RunConfig& cfg) {
  cfg.validate();
  require_oracle(cfg);
  const int n = static_cast<int>(cfg.deltas.size());
  std::vector<PointValues> vals(n);
  parallel_for(n, cfg.workers, [&](int i) {
    vals[i] = evaluate_ssh(cfg, cfg.deltas[i], kInf);
  });
  Table t = point_table({"delta"}, cfg.bounds.sdp);
  for (int i = 0; i < n; ++i) {
    check_row(vals[i], cfg.deltas[i], kInf);
    std::vector<double> row{cfg.deltas[i]};
    append(row, vals[i], cfg.bounds.sdp);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table run_fig_thermal(const RunConfig& base) {
  base.validate();
  // The thermal figure cuts the chain into halves.
  RunConfig cfg = base;
  cfg.ell = cfg.sites / 2;
  require_oracle(cfg);
  const int nd = static_cast<int>(cfg.deltas.size());
  const int nb = static_cast<int>(cfg.betas.size());
  std::vector<PointValues> vals(nd * nb);
  parallel_for(nd * nb, cfg.workers, [&](int i) {
    vals[i] = evaluate_ssh(cfg, cfg.deltas[i % nd], cfg.betas[i / nd]);
  });
  Table t = point_table({"delta", "beta"}, cfg.bounds.sdp);
  for (int i = 0; i < nd * nb; ++i) {
    const double d = cfg.deltas[i % nd], b = cfg.betas[i / nd];
    check_row(vals[i], d, b);
    std::vector<double> row{d, b};
    append(row, vals[i], cfg.bounds.sdp);
    t.rows.push_back(std::move(row));
  }
  return t;
}

ScalingResult run_scaling(const RunConfig& cfg) {
  cfg.validate();
  ScalingResult r;
  const int ne = static_cast<int>(cfg.lengths.size());
  std::vector<ProductBound> eq(ne);
  parallel_for(ne, cfg.workers, [&](int i) {
    eq[i] = chain_bound(cfg.lengths[i], cfg.lengths[i], kInf);
  });
  r.equal.columns = {"ell", "E_hat", "S_half_cross", "S_two_cross", "S_half", "S_two"};
  std::vector<double> ls, lx, e, sc_half, sc_two, ss_half, ss_two;
  for (int i = 0; i < ne; ++i) {
    const double l = cfg.lengths[i];
    const auto& pb = eq[i];
    const double s1 = renyi_entropy(pb.zeta_cross, 0.5), s2 = renyi_entropy(pb.zeta_cross, 2.0);
    const double t1 = renyi_entropy(pb.zeta_state, 0.5), t2 = renyi_entropy(pb.zeta_state, 2.0);
    r.equal.rows.push_back({l, pb.e_hat, s1, s2, t1, t2});
    // Fits use only l >= 16.
    if (cfg.lengths[i] < 16) continue;
    ls.push_back(l);
    lx.push_back(std::log(l / 2.0));
    e.push_back(pb.e_hat);
    sc_half.push_back(s1);
    sc_two.push_back(s2);
    ss_half.push_back(t1);
    ss_two.push_back(t2);
  }
  auto ln = [](double x) { return std::log(x); };
  auto one = [](double) { return 1.0; };
  auto inv = [](double x) { return 1.0 / x; };
  auto id = [](double x) { return x; };
  r.slope = linear_fit("E_hat = s ln l + c0", ls, e, {"s", "c0"}, {ln, one});
  r.equal_vs_x = linear_fit("E_hat = s x + c0, x = ln(l/2)", lx, e, {"s", "c0"}, {id, one});

  const std::vector<std::pair<std::string, const std::vector<double>*>> series{
      {"S_half_cross", &sc_half}, {"S_half", &ss_half},
      {"S_two_cross", &sc_two}, {"S_two", &ss_two}};
  std::vector<double> plain;
  for (const auto& [name, ys] : series) {
    r.entropy_fits.push_back(linear_fit(name + " = s ln l + c0 + d / l", ls, *ys,
                                        {"s", "c0", "d"}, {ln, one, inv}));
    plain.push_back(linear_fit(name + " = s ln l + c0", ls, *ys, {"s", "c0"}, {ln, one})
                        .param("s"));
  }
  r.ratio_half = r.entropy_fits[0].param("s") / r.entropy_fits[1].param("s");
  r.ratio_two = r.entropy_fits[2].param("s") / r.entropy_fits[3].param("s");
  r.ratio_half_plain = plain[0] / plain[1];
  r.ratio_two_plain = plain[2] / plain[3];

  const int nu = static_cast<int>(cfg.unequal_first.size());
  std::vector<double> ue(nu);
  parallel_for(nu, cfg.workers, [&](int i) {
    const int l1 = cfg.unequal_first[i];
    ue[i] = chain_bound(l1, cfg.unequal_total - l1, kInf).e_hat;
  });
  r.unequal.columns = {"ell1", "ell2", "x", "E_hat", "deviation"};
  const double s = r.equal_vs_x.param("s"), c0 = r.equal_vs_x.param("c0");
  for (int i = 0; i < nu; ++i) {
    const double l1 = cfg.unequal_first[i], l2 = cfg.unequal_total - l1;
    const double x = std::log(l1 * l2 / (l1 + l2));
    const double dev = ue[i] - (s * x + c0);
    r.collapse_residual = std::max(r.collapse_residual, std::abs(dev));
    r.unequal.rows.push_back({l1, l2, x, ue[i], dev});
  }
  return r;
}

nlohmann::json ScalingResult::summary() const {
  nlohmann::json j;
  j["slope"] = slope.to_json();
  j["equal_vs_x"] = equal_vs_x.to_json();
  j["collapse_residual"] = collapse_residual;
  for (const auto& f : entropy_fits) j["entropy_fits"].push_back(f.to_json());
  j["ratio_half"] = ratio_half;
  j["ratio_two"] = ratio_two;
  j["ratio_half_plain"] = ratio_half_plain;
  j["ratio_two_plain"] = ratio_two_plain;
  return j;
}

namespace {

// Lowest positive finite level and whether its partner is degenerate with it.
std::pair<double, bool> lowest_pair(const std::vector<double>& eps) {
  std::vector<double> pos;
  for (double e : eps)
    if (std::isfinite(e) && e > 0.0) pos.push_back(e);
  std::sort(pos.begin(), pos.end());
  if (pos.empty()) return {std::nan(""), false};
  if (pos.size() < 2) return {pos[0], false};
  return {pos[0], std::abs(pos[1] - pos[0]) <= 1e-6 * std::max(1.0, pos[0])};
}

double lowest_positive(const std::vector<double>& eps) {
  double m = kInf;
  for (double e : eps)
    if (std::isfinite(e) && e > 0.0) m = std::min(m, e);
  return std::isinf(m) ? std::nan("") : m;
}

}  // namespace

SpectraResult run_spectra(const RunConfig& cfg) {
  cfg.validate();
  SpectraResult r;
  const int nl = static_cast<int>(cfg.lengths.size());
  const int nb = static_cast<int>(cfg.spectra_betas.size());
  std::vector<EntanglementSpectrum> cross(nl * nb), state(nl * nb);
  parallel_for(nl * nb, cfg.workers, [&](int i) {
    auto pb = chain_bound(cfg.lengths[i % nl], cfg.lengths[i % nl], cfg.spectra_betas[i / nl]);
    cross[i] = entanglement_spectrum(pb.zeta_cross);
    state[i] = entanglement_spectrum(pb.zeta_state);
  });
  r.spectra.columns = {"ell", "beta", "k", "eps_cross", "eps_state"};
  r.lowest.columns = {"ell", "beta", "eps_min_cross", "eps_min_state"};
  // The ansatz is fitted at the largest beta of the grid (ground state if present).
  const double fit_beta = *std::max_element(cfg.spectra_betas.begin(), cfg.spectra_betas.end());
  std::vector<double> fit_l, fit_e;
  for (int i = 0; i < nl * nb; ++i) {
    const double l = cfg.lengths[i % nl], b = cfg.spectra_betas[i / nl];
    const auto& ec = cross[i].eps;
    const auto& es = state[i].eps;
    for (std::size_t k = 0; k < ec.size(); ++k) {
      r.spectra.rows.push_back({l, b, static_cast<double>(k + 1), ec[k],
                                k < es.size() ? es[k] : std::nan("")});
    }
    auto [lo, paired] = lowest_pair(ec);
    r.lowest.rows.push_back({l, b, lo, lowest_positive(es)});
    if (b == fit_beta && cfg.lengths[i % nl] >= 16) {
      if (paired) {
        fit_l.push_back(l);
        fit_e.push_back(lo);
      } else {
        ++r.excluded;
      }
    }
  }
  r.ansatz = fit_lowest_level(fit_l, fit_e);

  // Flattening at the largest length, ordered by decreasing beta.
  const int big = static_cast<int>(std::max_element(cfg.lengths.begin(), cfg.lengths.end()) -
                                   cfg.lengths.begin());
  std::vector<int> order(nb);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return cfg.spectra_betas[a] > cfg.spectra_betas[b];
  });
  for (int j : order) {
    r.flatten_beta.push_back(cfg.spectra_betas[j]);
    r.flatten_level.push_back(lowest_positive(cross[j * nl + big].eps));
  }
  for (std::size_t j = 1; j < r.flatten_level.size(); ++j) {
    if (!(r.flatten_level[j] <= r.flatten_level[j - 1])) r.flatten_monotone = false;
  }
  return r;
}

nlohmann::json SpectraResult::summary() const {
  nlohmann::json j;
  j["ansatz"] = ansatz.to_json();
  j["excluded"] = excluded;
  nlohmann::json fb = nlohmann::json::array();
  for (double b : flatten_beta) fb.push_back(beta_json(b));
  j["flatten_beta"] = fb;
  j["flatten_level"] = flatten_level;
  j["flatten_monotone"] = flatten_monotone;
  return j;
}

ThermalScalingResult run_thermal_scaling(const RunConfig& cfg) {
  cfg.validate();
  ThermalScalingResult r;
  std::vector<double> betas = cfg.thermal_betas;
  if (std::none_of(betas.begin(), betas.end(), [](double b) { return std::isinf(b); })) {
    betas.push_back(kInf);
  }
  const int nl = static_cast<int>(cfg.thermal_lengths.size());
  const int nb = static_cast<int>(betas.size());
  std::vector<double> e(nl * nb);
  parallel_for(nl * nb, cfg.workers, [&](int i) {
    const int l = cfg.thermal_lengths[i % nl];
    e[i] = chain_bound(l, l, betas[i / nl]).e_hat;
  });
  auto scaling_x = [](double l, double b) {
    return std::isinf(b) ? std::log(l) : std::log(b / kPi * std::tanh(l * kPi / b));
  };
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < nl * nb; ++i) {
    const double b = betas[i / nl];
    if (std::isinf(b)) continue;
    sum += e[i] - 0.25 * scaling_x(cfg.thermal_lengths[i % nl], b);
    ++count;
  }
  r.offset = count ? sum / count : 0.0;
  r.table.columns = {"beta", "ell", "E_hat", "x", "offset", "E_hat_per_ell"};
  for (int i = 0; i < nl * nb; ++i) {
    const double b = betas[i / nl], l = cfg.thermal_lengths[i % nl];
    const double x = scaling_x(l, b);
    const double off = e[i] - 0.25 * x;
    if (std::isfinite(b)) r.collapse_residual = std::max(r.collapse_residual, std::abs(off - r.offset));
    r.table.rows.push_back({b, l, e[i], x, off, e[i] / l});
  }
  // Saturation: compare the largest length with the largest one at most half of it.
  const int imax = static_cast<int>(
      std::max_element(cfg.thermal_lengths.begin(), cfg.thermal_lengths.end()) -
      cfg.thermal_lengths.begin());
  int ihalf = -1;
  for (int i = 0; i < nl; ++i) {
    if (2 * cfg.thermal_lengths[i] <= cfg.thermal_lengths[imax] &&
        (ihalf < 0 || cfg.thermal_lengths[i] > cfg.thermal_lengths[ihalf])) {
      ihalf = i;
    }
  }
  for (int j = 0; j < nb; ++j) {
    r.betas.push_back(betas[j]);
    r.saturation.push_back(ihalf < 0 ? std::nan("") : e[j * nl + imax] - e[j * nl + ihalf]);
  }
  return r;
}

nlohmann::json ThermalScalingResult::summary() const {
  nlohmann::json j;
  nlohmann::json b = nlohmann::json::array();
  for (double x : betas) b.push_back(beta_json(x));
  j["betas"] = b;
  j["saturation"] = saturation;
  j["offset"] = offset;
  j["collapse_residual"] = collapse_residual;
  return j;
}

nlohmann::json run_report(const RunConfig& cfg) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  nlohmann::json j;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash()));
  j["config_hash"] = hash;
  j["instance"] = {{"model", cfg.model}, {"ell", cfg.ell}, {"beta", beta_json(cfg.beta)}};

  CorrelationMatrix c;
  Bipartition part;
  if (cfg.model == "ssh") {
    j["instance"]["sites"] = cfg.sites;
    j["instance"]["delta"] = cfg.delta;
    c = thermal_correlation({cfg.sites, cfg.delta}, ThermalSpec{cfg.beta});
    part = central_segments(cfg.sites, cfg.ell);
  } else {
    c = infinite_chain_correlation(iota_sites(2 * cfg.ell), cfg.beta);
    part = Bipartition::contiguous(cfg.ell, cfg.ell);
  }
  const auto gamma = correlation_to_covariance(c);

  auto timed = [&](const char* name, bool selected, const std::function<void(nlohmann::json&)>& fn) {
    nlohmann::json b;
    if (!selected) {
      b["status"] = "skipped";
    } else {
      const auto t0 = clock::now();
      try {
        fn(b);
        if (!b.contains("status")) b["status"] = "ok";
      } catch (const ResourceError& e) {
        b["status"] = "unavailable";
        b["reason"] = e.what();
      } catch (const std::exception& e) {
        b["status"] = "failed";
        b["reason"] = e.what();
      }
      b["seconds"] = std::chrono::duration<double>(clock::now() - t0).count();
    }
    j["bounds"][name] = b;
  };

  timed("exact", cfg.bounds.exact, [&](nlohmann::json& b) {
    auto r = negativity_exact(gamma, part);
    b["N"] = r.negativity;
    b["E"] = r.log_negativity;
  });
  timed("lower", cfg.bounds.lower, [&](nlohmann::json& b) {
    SearchBudget budget;
    budget.seed = cfg.seed;
    auto r = optimize_rotation(gamma, part, cfg.lower_strategy, budget);
    b["N"] = r.bound.value;
    b["E"] = log_from_negativity(r.bound.value);
    b["vacuous"] = r.bound.vacuous;
    b["strategy"] = to_string(cfg.lower_strategy);
  });
  timed("product", cfg.bounds.product, [&](nlohmann::json& b) {
    auto r = real_variant(c, part);
    b["E_hat"] = r.e_hat;
    b["E_upper"] = r.e_upper;
    b["N"] = r.n_upper;
    b["E"] = r.e_upper;
  });
  timed("sdp", cfg.bounds.sdp, [&](nlohmann::json& b) {
    auto r = sdp_upper_bound(gamma, part, sdp_options(cfg));
    b["N"] = r.bound_n;
    b["E"] = log_from_negativity(r.bound_n);
    b["N_unconditional"] = r.bound_n_unconditional;
    b["solver_status"] = conic::to_string(r.status);
    b["min_eig"] = r.min_eig;
    b["primal_residual"] = r.primal_residual;
    b["dual_residual"] = r.dual_residual;
    b["gap"] = r.gap;
    b["solves"] = r.solves;
    b["fallback"] = r.fallback;
    b["literal_status"] = conic::to_string(r.literal.status);
    b["literal_phase1"] = r.literal.phase1;
    if (r.fallback) b["status"] = "fallback";
  });

  // Sandwich over whatever is present.
  auto value = [&](const char* name, const char* key) -> std::optional<double> {
    const auto& b = j["bounds"][name];
    if (b.contains(key)) return b[key].get<double>();
    return std::nullopt;
  };
  nlohmann::json sw;
  bool holds = true;
  auto lower = value("lower", "N"), exact = value("exact", "N");
  auto prod = value("product", "N"), sdp = value("sdp", "N");
  auto check = [&](const char* name, std::optional<double> lo, std::optional<double> hi, double tol) {
    if (!lo || !hi) return;
    const bool ok = *lo <= *hi + tol;
    sw[name] = ok;
    holds = holds && ok;
  };
  check("lower<=exact", lower, exact, 1e-8);
  check("exact<=product", exact, prod, 1e-8);
  check("exact<=sdp", exact, sdp, 1e-6);
  check("lower<=product", lower, prod, 1e-8);
  sw["holds"] = holds;
  j["sandwich"] = sw;
  return j;
}

}  // namespace fgneg
