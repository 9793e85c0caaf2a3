#include "modquad/cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "modquad/errors.hpp"
#include "modquad/experiments.hpp"
#include "parallel.hpp"

namespace modquad {

namespace {

constexpr const char* kVersion = "0.1.0";

}  // namespace

Json to_json(const ExperimentManifest& m) {
  return Json{{"command", m.command},       {"parameters", m.parameters}, {"seed", m.seed},
              {"budgets", m.budgets},       {"workers", m.workers},       {"output_path", m.output_path},
              {"dry_run", m.dry_run}};
}

ExperimentManifest manifest_from_json(const Json& j) {
  try {
    ExperimentManifest m;
    m.command = j.at("command").get<std::string>();
    m.parameters = j.value("parameters", Json::object());
    m.seed = j.value("seed", std::uint64_t{1});
    m.budgets = j.value("budgets", Json::object());
    m.workers = j.value("workers", 0u);
    m.output_path = j.value("output_path", std::string{});
    m.dry_run = j.value("dry_run", false);
    if (!m.parameters.is_object()) throw PreconditionError("manifest \"parameters\" must be an object");
    if (!m.budgets.is_object()) throw PreconditionError("manifest \"budgets\" must be an object");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
}

Json to_json(const RunReport& r) {
  return Json{{"manifest", to_json(r.manifest)}, {"results", r.results}, {"timings", r.timings}, {"versions", r.versions}};
}

Json default_budgets() {
  return Json{{"histogram_max_n", 30},
              {"diagonals", 20'000'000},
              {"samples", 2'000},
              {"search", std::uint64_t{1} << 34},
              {"davenport_states", 5'000'000},
              {"weyl_differences", 43'046'721},
              {"clique_nodes", 50'000'000},
              {"exact_limit", 1024},
              {"solve_max_n", 40}};
}

Json resolve_budgets(const ExperimentManifest& manifest) {
  Json b = default_budgets();
  for (const auto& [key, value] : manifest.budgets.items()) {
    if (!b.contains(key)) throw PreconditionError("unknown budget \"" + key + "\"");
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0))
      throw PreconditionError("budget \"" + key + "\" must be a nonnegative integer");
    b[key] = value;
  }
  return b;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "eval",     "histogram",    "check-or",  "expsum", "identities", "weyl",   "rank",   "brank",
      "rigidity", "davenport",    "solve-linear", "search-or", "mvf", "ramsey", "dichotomy-experiment"};
  return names;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const BudgetExceeded*>(&e)) return 2;
  if (dynamic_cast<const PreconditionError*>(&e)) return 3;
  return 1;
}

namespace {

struct Context {
  const ExperimentManifest& manifest;
  Json budgets;
  unsigned workers;

  const Json& params() const { return manifest.parameters; }
  bool dry() const { return manifest.dry_run; }
  std::uint64_t budget(const char* key) const { return budgets.at(key).get<std::uint64_t>(); }

  std::optional<std::int64_t> int_param(const char* key) const {
    if (!params().contains(key)) return std::nullopt;
    const Json& v = params().at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) {
      try {
        std::size_t used = 0;
        const auto x = std::stoll(v.get<std::string>(), &used);
        if (used == v.get<std::string>().size()) return x;
      } catch (const std::exception&) {
      }
    }
    throw PreconditionError(std::string("parameter \"") + key + "\" must be an integer");
  }

  std::optional<std::string> str_param(const char* key) const {
    if (!params().contains(key)) return std::nullopt;
    const Json& v = params().at(key);
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  bool flag_param(const char* key) const { return params().value(key, false); }

  std::int64_t require_int(const char* key) const {
    auto v = int_param(key);
    if (!v) throw PreconditionError(std::string("missing parameter \"") + key + "\"");
    return *v;
  }

  std::optional<std::size_t> n_param() const {
    auto n = int_param("n");
    if (!n) return std::nullopt;
    if (*n < 0) throw PreconditionError("n must be nonnegative");
    return static_cast<std::size_t>(*n);
  }

  std::int64_t modulus_param(std::int64_t fallback = 0) const {
    const auto m = int_param("modulus");
    if (!m && fallback == 0) throw PreconditionError("missing parameter \"modulus\"");
    const std::int64_t v = m.value_or(fallback);
    if (v < 2) throw PreconditionError("modulus must be at least 2");
    return v;
  }

  QuadPoly parse_one(const Json& item) const {
    QuadPoly f = item.is_object() ? poly_from_json(item) : parse_poly(item.get<std::string>(), n_param());
    if (auto m = int_param("modulus"); m && *m != f.modulus().value()) {
      throw PreconditionError("--modulus " + std::to_string(*m) + " disagrees with the polynomial's modulus " +
                              std::to_string(f.modulus().value()));
    }
    return f;
  }

  std::vector<QuadPoly> polys() const {
    if (!params().contains("poly")) throw PreconditionError("missing parameter \"poly\"");
    const Json& p = params().at("poly");
    std::vector<QuadPoly> out;
    if (p.is_array()) {
      for (const auto& item : p) out.push_back(parse_one(item));
    } else {
      out.push_back(parse_one(p));
    }
    if (out.empty()) throw PreconditionError("no polynomial given");
    return out;
  }

  QuadPoly poly() const { return polys().front(); }

  ZmMatrix matrix() const {
    const Json& p = params().at("matrix");
    if (p.is_object()) return matrix_from_json(p);
    std::string text = p.get<std::string>();
    if (text.find('{') == std::string::npos) text = read_file(text);
    try {
      return matrix_from_json(Json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid matrix JSON: ") + e.what());
    }
  }

  HistogramOptions hist_options() const {
    return HistogramOptions{.max_n = static_cast<std::size_t>(budget("histogram_max_n")), .workers = workers};
  }
};

Json dry_report(const Context& ctx, Json validated) {
  return Json{{"dry_run", true}, {"validated", std::move(validated)}, {"budgets", ctx.budgets}};
}

Json poly_summary(const QuadPoly& f) { return Json{{"text", format_poly(f)}, {"poly", to_json(f)}}; }

Json cmd_eval(const Context& ctx) {
  const QuadPoly f = ctx.poly();
  const auto point_text = ctx.str_param("point");
  if (!point_text) throw PreconditionError("missing parameter \"point\"");
  std::vector<std::uint8_t> x;
  for (char c : *point_text) {
    if (c == '0' || c == '1') x.push_back(static_cast<std::uint8_t>(c - '0'));
    else if (c != ',' && c != ' ') throw PreconditionError("point must be a string of 0/1 digits");
  }
  if (x.size() != f.n())
    throw PreconditionError("point has " + std::to_string(x.size()) + " coordinates, expected " + std::to_string(f.n()));
  if (ctx.dry()) return dry_report(ctx, Json{{"poly", format_poly(f)}, {"point", *point_text}});
  return Json{{"poly", to_json(f)}, {"point", x}, {"value", f.evaluate(x)}};
}

Json histogram_record(const QuadPoly& f, const ResidueHistogram& h) {
  Json e = Json::array();
  for (std::int64_t j = 0; j < h.modulus; ++j) {
    const auto v = exp_sum(h, j);
    e.push_back({{"j", j}, {"magnitude", v.magnitude()}});
  }
  Json rec = poly_summary(f);
  rec["zeros"] = h.zeros();
  rec["counts"] = h.counts;
  rec["exp_sums"] = e;
  return rec;
}

Json cmd_histogram(const Context& ctx) {
  const auto fs = ctx.polys();
  if (ctx.dry()) {
    Json v = Json::array();
    for (const auto& f : fs) v.push_back(format_poly(f));
    return dry_report(ctx, Json{{"polys", v}});
  }
  Json records = Json::array();
  for (const auto& f : fs) records.push_back(histogram_record(f, residue_histogram(f, ctx.hist_options())));
  return Json{{"records", records}};
}

Json cmd_check_or(const Context& ctx) {
  const auto fs = ctx.polys();
  if (ctx.dry()) {
    Json v = Json::array();
    for (const auto& f : fs) v.push_back(format_poly(f));
    return dry_report(ctx, Json{{"polys", v}});
  }
  Json records = Json::array();
  bool all = true;
  for (const auto& f : fs) {
    const auto h = residue_histogram(f, ctx.hist_options());
    const bool ok = f.constant() == 0 && h.zeros() == 1;
    all = all && ok;
    Json rec = poly_summary(f);
    rec["result"] = ok;
    rec["zeros"] = h.zeros();
    rec["points"] = h.total();
    records.push_back(rec);
  }
  return Json{{"result", all}, {"records", records}};
}

Json cmd_expsum(const Context& ctx) {
  const QuadPoly f = ctx.poly();
  const auto j = ctx.int_param("j");
  if (ctx.dry()) return dry_report(ctx, Json{{"poly", format_poly(f)}, {"j", j ? Json(*j) : Json("all")}});
  const auto h = residue_histogram(f, ctx.hist_options());
  Json values = Json::array();
  const std::int64_t m = f.modulus().value();
  for (std::int64_t k = 0; k < m; ++k) {
    if (j && f.modulus().reduce(*j) != k) continue;
    const auto v = exp_sum(h, k);
    values.push_back({{"j", k}, {"real", v.real}, {"imag", v.imag}, {"magnitude", v.magnitude()}});
  }
  return Json{{"poly", to_json(f)}, {"values", values}};
}

Json cmd_identities(const Context& ctx) {
  if (ctx.params().contains("poly")) {
    const QuadPoly f = ctx.poly();
    if (ctx.dry()) return dry_report(ctx, Json{{"poly", format_poly(f)}});
    const std::int64_t m = f.modulus().value();
    Json rows = Json::array();
    double max_ct = 0.0, max_split = 0.0;
    for (std::int64_t m1 = 1; m1 <= m; ++m1) {
      if (m % m1 != 0) continue;
      const auto r = verify_counting_identities(f, m1, m / m1, ctx.hist_options());
      max_ct = std::max(max_ct, r.residual_ct);
      max_split = std::max(max_split, r.residual_split);
      rows.push_back({{"m1", r.m1},
                      {"m2", r.m2},
                      {"zero_fraction", r.zero_fraction},
                      {"residual_ct", r.residual_ct},
                      {"residual_split", r.residual_split}});
    }
    return Json{{"poly", to_json(f)}, {"factorizations", rows}, {"max_residual_ct", max_ct},
                {"max_residual_split", max_split}, {"passed", std::max(max_ct, max_split) < 1e-9}};
  }
  IdentitySweepOptions o;
  o.seed = ctx.manifest.seed;
  if (auto v = ctx.int_param("count")) o.count = static_cast<std::size_t>(*v);
  if (auto v = ctx.int_param("max_n")) o.max_n = static_cast<std::size_t>(*v);
  if (auto v = ctx.int_param("n")) o.max_n = static_cast<std::size_t>(*v);
  if (auto v = ctx.int_param("min_m")) o.min_m = *v;
  if (auto v = ctx.int_param("max_m")) o.max_m = *v;
  if (auto v = ctx.int_param("modulus")) o.min_m = o.max_m = *v;
  if (o.min_m < 2 || o.max_m < o.min_m) throw PreconditionError("need 2 <= min_m <= max_m");
  if (o.max_n < 1) throw PreconditionError("max_n must be at least 1");
  if (o.max_n > ctx.budget("histogram_max_n"))
    throw BudgetExceeded("max_n " + std::to_string(o.max_n) + " exceeds the histogram budget");
  if (ctx.dry())
    return dry_report(ctx, Json{{"count", o.count}, {"max_n", o.max_n}, {"min_m", o.min_m}, {"max_m", o.max_m}});
  const auto r = identity_sweep(o);
  return Json{{"polynomials", r.polynomials},
              {"factorizations", r.factorizations},
              {"max_residual_ct", r.max_residual_ct},
              {"max_residual_split", r.max_residual_split},
              {"passed", std::max(r.max_residual_ct, r.max_residual_split) < 1e-9}};
}

Json cmd_weyl(const Context& ctx) {
  const QuadPoly f = ctx.poly();
  if (ctx.dry()) return dry_report(ctx, Json{{"poly", format_poly(f)}});
  WeylOptions o;
  o.max_differences = ctx.budget("weyl_differences");
  const auto r = weyl_difference_bound(f, o);
  return Json{{"poly", to_json(f)}, {"lhs_sq", r.lhs_sq}, {"rhs", r.rhs}, {"holds", r.lhs_sq <= r.rhs + 1e-12}};
}

Json matrix_rank_report(const ZmMatrix& a) {
  Json j{{"matrix", to_json(a)}, {"rank", rank(a)}};
  if (a.modulus().is_prime_power()) {
    j["row_shape"] = to_json(group_shape(a, Side::Row));
    j["column_shape"] = to_json(group_shape(a, Side::Column));
  }
  j["smith"] = to_json(smith_normal_form(a));
  return j;
}

Json cmd_rank(const Context& ctx) {
  if (ctx.params().contains("matrix")) {
    const ZmMatrix a = ctx.matrix();
    if (ctx.dry()) return dry_report(ctx, Json{{"matrix", to_json(a)}});
    return matrix_rank_report(a);
  }
  const QuadPoly f = ctx.poly();
  if (ctx.dry()) return dry_report(ctx, Json{{"poly", format_poly(f)}});
  const AssocMatrix assoc = assoc_matrix(f);
  Json j{{"poly", to_json(f)},
         {"assoc", matrix_rank_report(assoc.A)},
         {"effective_modulus", assoc.effective_modulus.value()},
         {"doubled", assoc.doubled}};
  try {
    j["form_rank"] = form_rank(f);
  } catch (const PreconditionError& e) {
    j["form_rank"] = nullptr;
    j["form_rank_note"] = e.what();
  }
  return j;
}

Json cmd_brank(const Context& ctx) {
  const QuadPoly f = ctx.poly();
  if (ctx.dry()) return dry_report(ctx, Json{{"poly", format_poly(f)}});
  BrankOptions o;
  o.exact_budget = ctx.budget("diagonals");
  o.samples = ctx.budget("samples");
  o.seed = ctx.manifest.seed;
  o.workers = ctx.workers;
  Json j{{"poly", to_json(f)}, {"bound", to_json(brank_upper(f, o))}};
  if (f.n() <= 4 && f.modulus().value() <= 4) {
    const auto w = brank_exact_tiny(f);
    j["exact"] = Json{{"rank", w.rank}, {"forms", w.forms}};
  }
  return j;
}

Json cmd_rigidity(const Context& ctx) {
  ZmMatrix a = ctx.params().contains("matrix") ? ctx.matrix() : assoc_matrix(ctx.poly()).A;
  if (!a.is_symmetric()) throw PreconditionError("rigidity needs a symmetric matrix");
  if (!a.modulus().is_prime_power()) throw PreconditionError("rigidity needs a prime-power modulus");
  if (ctx.dry()) return dry_report(ctx, Json{{"matrix", to_json(a)}});
  RigidityOptions o;
  o.exact_budget = ctx.budget("diagonals");
  o.samples = ctx.budget("samples");
  o.seed = ctx.manifest.seed;
  o.offdiag.seed = ctx.manifest.seed;
  o.workers = ctx.workers;
  const RigidityReport rep = min_diag_rank(a, o);
  const ConstructionResult c = low_rank_diagonal(a, o.offdiag);
  const ZmMatrix ad = a.plus_diagonal(c.diagonal.diagonal);
  return Json{{"matrix", to_json(a)},
              {"report", to_json(rep)},
              {"construction",
               {{"diagonal", c.diagonal.diagonal},
                {"free_indices", c.diagonal.free_indices},
                {"block", to_json(c.block)},
                {"retries", c.retries},
                {"rank", rank(ad)},
                {"bound", 4 * c.block.rank()}}}};
}

AbelianShape parse_shape(const Context& ctx) {
  if (!ctx.params().contains("shape")) throw PreconditionError("missing parameter \"shape\"");
  const Json& s = ctx.params().at("shape");
  AbelianShape g;
  if (s.is_array()) {
    for (const auto& v : s) g.factors.push_back(v.get<std::int64_t>());
  } else {
    std::stringstream ss(s.get<std::string>());
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        g.factors.push_back(std::stoll(tok));
      } catch (const std::exception&) {
        throw PreconditionError("shape must be a comma-separated list of cyclic orders");
      }
    }
  }
  for (auto d : g.factors)
    if (d < 2) throw PreconditionError("cyclic orders in a shape must be at least 2");
  return g;
}

Json cmd_davenport(const Context& ctx) {
  const AbelianShape g = parse_shape(ctx);
  if (ctx.dry()) return dry_report(ctx, Json{{"shape", g.factors}});
  DavenportOptions o;
  o.state_budget = ctx.budget("davenport_states");
  const auto d = davenport_exact(g, o);
  Json j = to_json(d);
  j["shape"] = g.factors;
  j["lower_bound"] = davenport_lower_bound(g);
  j["upper_bound"] = davenport_bound(g);
  j["within_bound"] = static_cast<double>(d.value) <= davenport_bound(g) + 1e-9;
  return j;
}

Json cmd_solve_linear(const Context& ctx) {
  if (!ctx.params().contains("system")) throw PreconditionError("missing parameter \"system\"");
  const Json& p = ctx.params().at("system");
  Json sj;
  if (p.is_object()) {
    sj = p;
  } else {
    std::string text = p.get<std::string>();
    if (text.find('{') == std::string::npos) text = read_file(text);
    try {
      sj = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid system JSON: ") + e.what());
    }
  }
  const LinearSystem sys = system_from_json(sj);
  const std::int64_t m = ctx.modulus_param(sj.value("m", std::int64_t{0}));
  if (sys.n > ctx.budget("solve_max_n")) throw BudgetExceeded("system has more variables than the solve budget");
  if (ctx.dry()) return dry_report(ctx, Json{{"system", to_json(sys)}, {"m", m}});
  DavenportOptions o;
  o.state_budget = ctx.budget("davenport_states");
  const auto rep = solution_bounds_check(sys, m, o);
  return Json{{"system", to_json(sys)}, {"count", rep.count}, {"bounds", to_json(rep)}};
}

Json cmd_search_or(const Context& ctx) {
  const auto n = ctx.n_param();
  if (!n) throw PreconditionError("missing parameter \"n\"");
  const std::int64_t m = ctx.modulus_param();
  OrSearchOptions o;
  const std::string restrict = ctx.str_param("restrict").value_or("all");
  if (restrict == "all") o.restriction = OrRestriction::All;
  else if (restrict == "symmetric") o.restriction = OrRestriction::Symmetric;
  else throw PreconditionError("restrict must be \"all\" or \"symmetric\"");
  const std::string mode = ctx.str_param("mode").value_or("first");
  if (mode == "first") o.mode = SearchMode::First;
  else if (mode == "count") o.mode = SearchMode::Count;
  else if (mode == "all") o.mode = SearchMode::All;
  else throw PreconditionError("mode must be \"first\", \"count\" or \"all\"");
  o.canonicalize = ctx.flag_param("canonicalize");
  o.budget = ctx.budget("search");
  o.workers = ctx.workers;
  if (ctx.dry())
    return dry_report(ctx, Json{{"n", *n}, {"m", m}, {"restrict", restrict}, {"mode", mode}, {"canonicalize", o.canonicalize}});
  const auto r = search_or_quadratics(*n, m, o);
  Json records = Json::array();
  for (const auto& f : r.found) records.push_back(poly_summary(f));
  return Json{{"n", *n}, {"m", m}, {"count", r.count}, {"candidate_space", r.candidate_space}, {"records", records}};
}

Json cmd_mvf(const Context& ctx) {
  const QuadPoly f = ctx.poly();
  const auto export_path = ctx.str_param("export");
  if (ctx.dry()) return dry_report(ctx, Json{{"poly", format_poly(f)}, {"export", export_path.value_or("")}});
  const MvfFamily fam = mvf_from_or_poly(f);
  const MvfVerification v = verify_mvf(fam, ctx.workers);
  if (export_path) {
    std::ofstream out(*export_path);
    if (!out) throw PreconditionError("cannot write " + *export_path);
    out << to_json(fam).dump() << '\n';
  }
  Json viol = v.violation ? Json{v.violation->first, v.violation->second} : Json(nullptr);
  return Json{{"poly", to_json(f)}, {"lists", fam.S.size()}, {"dim", fam.dim}, {"m", fam.modulus},
              {"ok", v.ok},        {"violation", viol},     {"products", v.products}};
}

QuadPoly widen(const QuadPoly& f, std::size_t n) {
  if (n < f.n()) throw PreconditionError("n is smaller than the polynomial's variable count");
  QuadPoly g(f.modulus(), n);
  g.set_constant(f.constant());
  for (std::size_t i = 0; i < f.n(); ++i) g.set_linear(i, f.linear(i));
  for (const auto& t : f.quad_terms()) g.set_quad(t.i, t.j, t.coef);
  return g;
}

Json cmd_ramsey(const Context& ctx) {
  auto fs = ctx.polys();
  std::size_t n = 0;
  for (const auto& f : fs) n = std::max(n, f.n());
  if (auto v = ctx.n_param()) n = *v;
  if (n > 14) throw BudgetExceeded("graph materialization supports n <= 14");
  for (auto& f : fs) f = widen(f, n);
  const auto export_path = ctx.str_param("export");
  if (ctx.dry()) {
    Json v = Json::array();
    for (const auto& f : fs) v.push_back(format_poly(f));
    return dry_report(ctx, Json{{"polys", v}, {"n", n}});
  }
  const CubeGraph g(n, fs);
  if (export_path) {
    std::ofstream out(*export_path);
    if (!out) throw PreconditionError("cannot write " + *export_path);
    g.write_dimacs(out);
  }
  const auto s = ramsey_graph_stats(g, ctx.budget("exact_limit"), ctx.budget("clique_nodes"));
  Json polys = Json::array();
  for (const auto& f : fs) polys.push_back(to_json(f));
  return Json{{"polys", polys},
              {"n", n},
              {"vertices", s.vertices},
              {"edges", s.edges},
              {"clique", to_json(s.clique)},
              {"independent", to_json(s.independent)}};
}

Json cmd_dichotomy(const Context& ctx) {
  DichotomyOptions o;
  o.seed = ctx.manifest.seed;
  o.workers = ctx.workers;
  if (auto v = ctx.int_param("count")) o.count = static_cast<std::size_t>(*v);
  if (auto v = ctx.n_param()) o.n = *v;
  if (auto v = ctx.int_param("modulus")) o.m = *v;
  if (auto v = ctx.int_param("high")) o.high_threshold = static_cast<std::size_t>(*v);
  if (auto v = ctx.int_param("low")) o.low_threshold = static_cast<std::size_t>(*v);
  if (o.m < 2 || !Modulus::of(o.m).is_prime_power()) throw PreconditionError("dichotomy sweep needs a prime-power modulus");
  if (o.n < 1 || o.n > ctx.budget("histogram_max_n")) throw BudgetExceeded("n outside the histogram budget");
  o.rigidity.samples = std::min<std::uint64_t>(ctx.budget("samples"), 64);
  if (ctx.dry())
    return dry_report(ctx, Json{{"count", o.count}, {"n", o.n}, {"m", o.m}, {"high", o.high_threshold},
                                {"low", o.low_threshold}});
  const auto r = dichotomy_sweep(o);
  Json records = Json::array();
  for (const auto& rec : r.records)
    records.push_back({{"planted_rank", rec.planted_rank},
                       {"min_rank_upper", rec.min_rank_upper},
                       {"offdiag_lower", rec.offdiag_lower},
                       {"magnitude", rec.magnitude}});
  return Json{{"count", o.count},       {"n", o.n},
              {"m", o.m},               {"low_count", r.low_count},
              {"high_count", r.high_count}, {"max_low", r.max_low},
              {"max_high", r.max_high}, {"separated", r.separated},
              {"records", records}};
}

const std::map<std::string, std::function<Json(const Context&)>>& handlers() {
  static const std::map<std::string, std::function<Json(const Context&)>> table = {
      {"eval", cmd_eval},         {"histogram", cmd_histogram}, {"check-or", cmd_check_or},
      {"expsum", cmd_expsum},     {"identities", cmd_identities}, {"weyl", cmd_weyl},
      {"rank", cmd_rank},         {"brank", cmd_brank},         {"rigidity", cmd_rigidity},
      {"davenport", cmd_davenport}, {"solve-linear", cmd_solve_linear}, {"search-or", cmd_search_or},
      {"mvf", cmd_mvf},           {"ramsey", cmd_ramsey},       {"dichotomy-experiment", cmd_dichotomy}};
  return table;
}

Json versions() {
  return Json{{"modquad", kVersion},
              {"compiler", __VERSION__},
              {"cxx_standard", __cplusplus},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"cli11", CLI11_VERSION}};
}

}  // namespace

RunReport run(const ExperimentManifest& manifest) {
  const auto& table = handlers();
  const auto it = table.find(manifest.command);
  if (it == table.end()) throw PreconditionError("unknown subcommand \"" + manifest.command + "\"");
  const auto start = std::chrono::steady_clock::now();
  Context ctx{manifest, resolve_budgets(manifest), detail::resolve_workers(manifest.workers)};
  RunReport report;
  report.manifest = manifest;
  report.results = it->second(ctx);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  report.timings = Json{{"seconds", elapsed.count()}, {"workers", ctx.workers}};
  report.versions = versions();
  return report;
}

namespace {

enum class OptKind { Int, Str, StrList, Flag };

struct OptSpec {
  const char* name;  // flag spelling without dashes
  const char* key;   // parameter key
  OptKind kind;
  const char* help;
};

const std::map<std::string, std::vector<OptSpec>>& extra_options() {
  static const std::map<std::string, std::vector<OptSpec>> table = {
      {"eval", {{"point", "point", OptKind::Str, "cube point as 0/1 digits, x1 first"}}},
      {"expsum", {{"j", "j", OptKind::Int, "frequency j (default: all)"}}},
      {"identities",
       {{"count", "count", OptKind::Int, "number of random polynomials (without --poly)"},
        {"max-n", "max_n", OptKind::Int, "largest n in the random sweep"},
        {"min-m", "min_m", OptKind::Int, "smallest modulus in the random sweep"},
        {"max-m", "max_m", OptKind::Int, "largest modulus in the random sweep"}}},
      {"rank", {{"matrix", "matrix", OptKind::Str, "matrix JSON text or file"}}},
      {"rigidity", {{"matrix", "matrix", OptKind::Str, "symmetric matrix JSON text or file"}}},
      {"davenport", {{"shape", "shape", OptKind::Str, "cyclic orders, e.g. 2,2,4"}}},
      {"solve-linear", {{"system", "system", OptKind::Str, "linear system JSON text or file"}}},
      {"search-or",
       {{"restrict", "restrict", OptKind::Str, "all | symmetric"},
        {"mode", "mode", OptKind::Str, "first | count | all"},
        {"canonicalize", "canonicalize", OptKind::Flag, "deduplicate under variable permutations"}}},
      {"mvf", {{"export", "export", OptKind::Str, "write the family as JSON to this path"}}},
      {"ramsey", {{"export", "export", OptKind::Str, "write the graph in DIMACS edge format"}}},
      {"dichotomy-experiment",
       {{"count", "count", OptKind::Int, "number of random quadratics"},
        {"high", "high", OptKind::Int, "high-rank bucket threshold"},
        {"low", "low", OptKind::Int, "low-rank bucket threshold"}}},
  };
  return table;
}

const std::vector<OptSpec>& common_options() {
  static const std::vector<OptSpec> specs = {
      {"modulus", "modulus", OptKind::Int, "modulus m"},
      {"n", "n", OptKind::Int, "number of variables"},
      {"poly", "poly", OptKind::StrList, "polynomial text, JSON, or file (repeatable)"},
  };
  return specs;
}

struct Bound {
  CLI::Option* option;
  const OptSpec* spec;
};

struct SubcommandState {
  CLI::App* app = nullptr;
  std::vector<Bound> bound;
  std::map<std::string, std::int64_t> ints;
  std::map<std::string, std::string> strs;
  std::map<std::string, std::vector<std::string>> lists;
  std::map<std::string, bool> flags;
  std::map<std::string, std::uint64_t> budget_values;
  std::vector<std::pair<std::string, CLI::Option*>> budget_opts;
  std::uint64_t seed = 1;
  CLI::Option* seed_opt = nullptr;
  unsigned workers = 0;
  std::string json_out;
  bool dry_run = false;
};

void bind(SubcommandState& st, const OptSpec& spec) {
  const std::string flag = std::string("--") + spec.name;
  CLI::Option* opt = nullptr;
  switch (spec.kind) {
    case OptKind::Int: opt = st.app->add_option(flag, st.ints[spec.key], spec.help); break;
    case OptKind::Str: opt = st.app->add_option(flag, st.strs[spec.key], spec.help); break;
    case OptKind::StrList: opt = st.app->add_option(flag, st.lists[spec.key], spec.help); break;
    case OptKind::Flag: opt = st.app->add_flag(flag, st.flags[spec.key], spec.help); break;
  }
  st.bound.push_back({opt, &spec});
}

ExperimentManifest to_manifest(const std::string& command, const SubcommandState& st) {
  ExperimentManifest m;
  m.command = command;
  for (const auto& b : st.bound) {
    if (b.option->count() == 0) continue;
    const std::string key = b.spec->key;
    switch (b.spec->kind) {
      case OptKind::Int: m.parameters[key] = st.ints.at(key); break;
      case OptKind::Str: m.parameters[key] = st.strs.at(key); break;
      case OptKind::StrList: {
        const auto& v = st.lists.at(key);
        m.parameters[key] = v.size() == 1 ? Json(v.front()) : Json(v);
        break;
      }
      case OptKind::Flag: m.parameters[key] = st.flags.at(key); break;
    }
  }
  for (const auto& [key, opt] : st.budget_opts)
    if (opt->count() > 0) m.budgets[key] = st.budget_values.at(key);
  m.seed = st.seed;
  m.workers = st.workers;
  m.output_path = st.json_out;
  m.dry_run = st.dry_run;
  return m;
}

void print_summary(const RunReport& r, std::ostream& err) {
  err << "modquad " << r.manifest.command << (r.manifest.dry_run ? " (dry run)" : "") << '\n';
  for (const auto& [key, value] : r.results.items()) {
    if (value.is_primitive()) err << "  " << key << ": " << value.dump() << '\n';
    else if (value.is_array()) err << "  " << key << ": " << value.size() << " entries\n";
  }
  err << "  time: " << r.timings.at("seconds").get<double>() << " s\n";
}

int emit(const RunReport& r, std::ostream& out, std::ostream& err) {
  const Json report = to_json(r);
  if (r.results.contains("records") && r.results.at("records").is_array()) {
    for (const auto& rec : r.results.at("records"))
      out << Json{{"command", r.manifest.command}, {"record", rec}}.dump() << '\n';
  }
  out << report.dump() << '\n';
  if (!r.manifest.output_path.empty()) {
    std::ofstream f(r.manifest.output_path);
    if (!f) {
      err << "error: cannot write " << r.manifest.output_path << '\n';
      return 3;
    }
    f << report.dump(2) << '\n';
  }
  print_summary(r, err);
  return 0;
}

const std::map<std::string, std::string>& subcommand_descriptions() {
  static const std::map<std::string, std::string> d = {
      {"eval", "evaluate a polynomial at one cube point"},
      {"histogram", "count cube points by residue of f"},
      {"check-or", "test whether f weakly represents OR (zero only at the origin)"},
      {"expsum", "exact exponential sums E e_m(j f) over the cube"},
      {"identities", "check the counting identities for one polynomial or a random sweep"},
      {"weyl", "compare |E e_m(f)|^2 with the Weyl differencing bound"},
      {"rank", "rank and group shape of a matrix, or of the form matrix of a polynomial"},
      {"brank", "bounds on the boolean rank of a polynomial"},
      {"rigidity", "minimum rank of A + D over diagonals D, with the off-diagonal certificate"},
      {"davenport", "Davenport constant of a finite abelian group"},
      {"solve-linear", "count boolean solutions of a modular linear system and compare with bounds"},
      {"search-or", "enumerate quadratic OR representations for given n and m"},
      {"mvf", "build and verify the matching vector family of an OR polynomial"},
      {"ramsey", "clique and independence numbers of the cube graph defined by polynomials"},
      {"dichotomy-experiment", "random sweep relating diagonal rigidity to exponential-sum size"}};
  return d;
}

}  // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic polynomials over Z_m on the boolean cube: OR representations, exponential sums, "
               "matrix rigidity and zero-sum problems."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::map<std::string, SubcommandState> states;
  const Json budgets = default_budgets();
  for (const auto& name : subcommands()) {
    SubcommandState& st = states[name];
    st.app = app.add_subcommand(name, subcommand_descriptions().at(name));
    for (const auto& spec : common_options()) bind(st, spec);
    if (auto it = extra_options().find(name); it != extra_options().end())
      for (const auto& spec : it->second) bind(st, spec);
    st.seed_opt = st.app->add_option("--seed", st.seed, "seed for randomized steps");
    st.app->add_option("--workers", st.workers, "worker threads (0 = available parallelism)");
    st.app->add_option("--json-out", st.json_out, "also write the report to this path");
    st.app->add_flag("--dry-run", st.dry_run, "validate inputs and print the resolved budgets");
    for (const auto& [key, value] : budgets.items()) {
      std::string flag = "--budget-" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      st.budget_values[key] = value.get<std::uint64_t>();
      st.budget_opts.emplace_back(key, st.app->add_option(flag, st.budget_values[key],
                                                          "budget (default " + value.dump() + ")"));
    }
  }

  std::string manifest_path;
  bool run_dry = false;
  std::string run_out;
  CLI::App* run_app = app.add_subcommand("run", "execute an experiment manifest (JSON file)");
  run_app->add_option("manifest", manifest_path, "manifest path")->required();
  run_app->add_flag("--dry-run", run_dry, "validate only");
  run_app->add_option("--json-out", run_out, "also write the report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentManifest manifest;
    if (run_app->parsed()) {
      Json j;
      try {
        j = Json::parse(read_file(manifest_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid manifest JSON: ") + e.what());
      }
      // A saved report carries its manifest under "manifest".
      if (j.is_object() && j.contains("manifest") && !j.contains("command")) j = j.at("manifest");
      manifest = manifest_from_json(j);
      if (run_dry) manifest.dry_run = true;
      if (!run_out.empty()) manifest.output_path = run_out;
    } else {
      for (const auto& [name, st] : states)
        if (st.app->parsed()) manifest = to_manifest(name, st);
    }
    return emit(run(manifest), out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace modquad
