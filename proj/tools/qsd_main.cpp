#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsd/aep.hpp"
#include "qsd/divergences.hpp"
#include "qsd/error.hpp"
#include "qsd/io.hpp"
#include "qsd/measured.hpp"
#include "qsd/resource.hpp"
#include "qsd/set_divergence.hpp"
#include "qsd/stein.hpp"

using namespace qsd;

namespace {

// everything a run needs beyond the subcommand payload; identical configs
// replay byte-identically
struct RunConfig {
  unsigned seed = 17;
  std::vector<std::string> tol_overrides;
  std::string out;
  bool allow_heuristic = false;
  Tolerances tol;
};

void resolve_tolerances(RunConfig& cfg) {
  cfg.tol = default_tolerances();
  for (const auto& kv : cfg.tol_overrides) {
    auto pos = kv.find('=');
    if (pos == std::string::npos)
      throw precondition_error("tolerance override '" + kv + "' is not name=value");
    const std::string name = kv.substr(0, pos);
    const std::string rest = kv.substr(pos + 1);
    char* end = nullptr;
    double val = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str() || *end != '\0')
      throw precondition_error("tolerance override '" + kv + "' has no numeric value");
    if (!cfg.tol.set(name, val)) throw precondition_error("unknown tolerance '" + name + "'");
  }
}

void emit(const RunConfig& cfg, std::string text) {
  if (text.empty() || text.back() != '\n') text += '\n';
  if (cfg.out.empty())
    std::cout << text;
  else
    save_text(text, cfg.out);
}

// heuristic results are suppressed unless explicitly allowed
void gate_heuristic(const RunConfig& cfg, bool heuristic) {
  if (heuristic && !cfg.allow_heuristic)
    throw convergence_error("result is heuristic; rerun with --allow-heuristic", 0.0);
}

Json num_or_null(double v, bool infinite) {
  if (infinite || !std::isfinite(v)) return nullptr;
  return v;
}

std::string num_str(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

Json interval_json(const Interval& iv) { return Json{{"lo", iv.lo}, {"hi", iv.hi}}; }

Json setdiv_json(const SetDivergenceResult& r) {
  Json doc;
  doc["value"] = num_or_null(r.value, r.infinite);
  doc["dual_value"] = num_or_null(r.dual_value, r.infinite);
  doc["gap"] = num_or_null(r.gap, r.infinite);
  doc["infinite"] = r.infinite;
  doc["heuristic"] = r.heuristic;
  doc["iterations"] = r.iterations;
  return doc;
}

double need_alpha(const CLI::Option* opt, double alpha, const std::string& kind) {
  if (opt->count() == 0) throw precondition_error("--alpha is required for kind '" + kind + "'");
  return alpha;
}

double need_eps(const CLI::Option* opt, double eps, const std::string& kind) {
  if (opt->count() == 0) throw precondition_error("--eps is required for kind '" + kind + "'");
  return eps;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"one-shot and finite-blocklength divergences between sets of quantum states"};
  app.require_subcommand(0, 1);

  RunConfig cfg;
  bool show_tols = false;
  app.add_option("--seed", cfg.seed, "seed for sampled validators and audits");
  app.add_option("--tol", cfg.tol_overrides, "tolerance override name=value (repeatable)");
  app.add_option("--out", cfg.out, "write the document to this path instead of stdout");
  app.add_flag("--allow-heuristic", cfg.allow_heuristic,
               "emit heuristic results instead of exiting with code 3");
  app.add_flag("--tolerances", show_tols, "print the tolerance table and exit");

  // div: divergences between two fixed states
  auto* div = app.add_subcommand("div", "pairwise divergence, emits a single JSON number");
  div->fallthrough();
  std::string div_kind;
  double div_alpha = 0.0, div_eps = 0.0;
  std::vector<std::string> div_files;
  div->add_option("--kind", div_kind,
                  "umegaki|petz|sandwiched|dmin|dmax|dmax-smoothed|measured|measured-alpha|dhypo")
      ->required();
  auto* div_alpha_opt = div->add_option("--alpha", div_alpha, "Renyi order");
  auto* div_eps_opt = div->add_option("--eps", div_eps, "error parameter");
  div->add_option("files", div_files, "rho.json sigma.json")->expected(2)->required();

  // setdiv: divergences between two sets
  auto* sd = app.add_subcommand("setdiv", "set divergence with primal/dual bracket");
  sd->fallthrough();
  std::string sd_op;
  double sd_alpha = 0.0, sd_eps = 0.0;
  std::vector<std::string> sd_files;
  sd->add_option("--op", sd_op, "umegaki|measured|measured-alpha|petz|sandwiched|dmax|dhypo")
      ->required();
  auto* sd_alpha_opt = sd->add_option("--alpha", sd_alpha, "Renyi order");
  auto* sd_eps_opt = sd->add_option("--eps", sd_eps, "error parameter");
  sd->add_option("files", sd_files, "A.json B.json")->expected(2)->required();

  // aep: sandwich table
  auto* aep = app.add_subcommand("aep", "per-copy sandwich bounds table");
  aep->fallthrough();
  int aep_m_max = 2;
  std::vector<std::string> aep_files;
  aep->add_option("--m-max", aep_m_max, "largest block size");
  aep->add_option("files", aep_files, "A.json B.json")->expected(2)->required();

  // stein: hypothesis-testing table as CSV
  auto* st = app.add_subcommand("stein", "finite-blocklength Stein table (CSV)");
  st->fallthrough();
  double st_eps = 0.0;
  int st_n_max = 3;
  std::vector<std::string> st_files;
  st->add_option("--eps", st_eps, "type-I error budget")->required();
  st->add_option("--n-max", st_n_max, "largest block size");
  st->add_option("files", st_files, "A.json B.json")->expected(2)->required();

  // rate: resource conversion rate interval
  auto* rt = app.add_subcommand("rate", "conversion rate interval");
  rt->fallthrough();
  int rt_m_max = 2;
  std::string rt_free_b;
  std::vector<std::string> rt_files;
  rt->add_option("--m-max", rt_m_max, "largest block size");
  rt->add_option("--free-b", rt_free_b, "separate free set for the target system");
  rt->add_option("files", rt_files, "A.json B.json F.json")->expected(3)->required();

  // validate: structural assumptions report
  auto* va = app.add_subcommand("validate", "family assumption report");
  va->fallthrough();
  std::string va_family, va_file;
  int va_d = 2, va_m = 2, va_k = 1;
  va->add_option("--family", va_family, "named base set: incoherent|mana");
  va->add_option("--d", va_d, "local dimension for a named family");
  va->add_option("--m", va_m, "first level");
  va->add_option("--k", va_k, "second level");
  va->add_option("file", va_file, "set descriptor (alternative to --family)");

  // protocol: build and audit a measure-and-prepare conversion map
  auto* pr = app.add_subcommand("protocol", "build + audit an rng conversion protocol");
  pr->fallthrough();
  int pr_n = 1, pr_m = 1, pr_budget = 8;
  double pr_eps = 0.0, pr_delta = 1.0;
  std::vector<std::string> pr_files;
  pr->add_option("--n", pr_n, "source block size");
  pr->add_option("--m", pr_m, "target block size");
  pr->add_option("--eps", pr_eps, "transformation error budget")->required();
  pr->add_option("--delta", pr_delta, "generation budget exponent");
  pr->add_option("--budget", pr_budget, "audit sample budget");
  pr->add_option("files", pr_files, "A.json F.json B.json")->expected(3)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  resolve_tolerances(cfg);

  if (show_tols) {
    Json rows = Json::array();
    for (const auto& entry : cfg.tol.table())
      rows.push_back(Json{{"name", entry.name}, {"value", entry.value}, {"what", entry.what}});
    emit(cfg, rows.dump(2));
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }

  if (div->parsed()) {
    DensityOperator a = state_from_json(load_json(div_files[0]), cfg.tol);
    DensityOperator b = state_from_json(load_json(div_files[1]), cfg.tol);
    double value = 0.0;
    bool infinite = false;
    if (div_kind == "umegaki") {
      auto r = umegaki(a, b, cfg.tol);
      value = r.value, infinite = r.infinite;
    } else if (div_kind == "petz") {
      auto r = petz(need_alpha(div_alpha_opt, div_alpha, div_kind), a, b, cfg.tol);
      value = r.value, infinite = r.infinite;
    } else if (div_kind == "sandwiched") {
      auto r = sandwiched(need_alpha(div_alpha_opt, div_alpha, div_kind), a, b, cfg.tol);
      value = r.value, infinite = r.infinite;
    } else if (div_kind == "dmin") {
      auto r = dmin(a, b, cfg.tol);
      value = r.value, infinite = r.infinite;
    } else if (div_kind == "dmax") {
      auto r = dmax(a, b, cfg.tol);
      value = r.value, infinite = r.infinite;
    } else if (div_kind == "dmax-smoothed") {
      auto r = dmax_smoothed(need_eps(div_eps_opt, div_eps, div_kind), a, b,
                             SmoothingBall::purified, cfg.tol);
      value = r.value, infinite = r.infinite;
    } else if (div_kind == "measured") {
      auto r = dm(a, b, cfg.tol);
      value = r.value, infinite = r.infinite;
    } else if (div_kind == "measured-alpha") {
      auto r = dm_alpha(need_alpha(div_alpha_opt, div_alpha, div_kind), a, b, cfg.tol);
      value = r.value, infinite = r.infinite;
    } else if (div_kind == "dhypo") {
      auto r = beta_and_dhypo(need_eps(div_eps_opt, div_eps, div_kind), a, b, cfg.tol);
      value = r.dh.value, infinite = r.dh.infinite;
    } else {
      throw precondition_error("unknown divergence kind '" + div_kind + "'");
    }
    emit(cfg, num_or_null(value, infinite).dump());
    return 0;
  }

  if (sd->parsed()) {
    StateSet a = set_from_json(load_json(sd_files[0]), cfg.tol);
    StateSet b = set_from_json(load_json(sd_files[1]), cfg.tol);
    SetDivergenceResult r;
    if (sd_op == "umegaki")
      r = d_sets(a, b, cfg.tol);
    else if (sd_op == "measured")
      r = dm_sets(a, b, cfg.tol);
    else if (sd_op == "measured-alpha")
      r = dm_alpha_sets(need_alpha(sd_alpha_opt, sd_alpha, sd_op), a, b, cfg.tol);
    else if (sd_op == "petz")
      r = petz_sets(need_alpha(sd_alpha_opt, sd_alpha, sd_op), a, b, cfg.tol);
    else if (sd_op == "sandwiched")
      r = sandwiched_sets(need_alpha(sd_alpha_opt, sd_alpha, sd_op), a, b, cfg.tol);
    else if (sd_op == "dmax")
      r = dmax_sets(a, b, cfg.tol);
    else if (sd_op == "dhypo")
      r = dhypo_sets(need_eps(sd_eps_opt, sd_eps, sd_op), a, b, cfg.tol);
    else
      throw precondition_error("unknown set divergence '" + sd_op + "'");
    gate_heuristic(cfg, r.heuristic);
    emit(cfg, setdiv_json(r).dump(2));
    return 0;
  }

  if (aep->parsed()) {
    SetFamily afam(set_from_json(load_json(aep_files[0]), cfg.tol));
    SetFamily bfam(set_from_json(load_json(aep_files[1]), cfg.tol));
    Json rows = Json::array();
    for (int m = 1; m <= aep_m_max; ++m) {
      AepBounds row = aep_sandwich(afam, bfam, m, cfg.tol);
      gate_heuristic(cfg, row.heuristic);
      rows.push_back(Json{{"m", row.m},
                          {"lower", row.lower},
                          {"upper", row.upper},
                          {"gap_guarantee", row.gap_guarantee},
                          {"heuristic", row.heuristic}});
    }
    emit(cfg, rows.dump(2));
    return 0;
  }

  if (st->parsed()) {
    SetFamily afam(set_from_json(load_json(st_files[0]), cfg.tol));
    SetFamily bfam(set_from_json(load_json(st_files[1]), cfg.tol));
    auto rows = stein_table(afam, bfam, st_eps, st_n_max, cfg.tol);
    std::vector<std::vector<std::string>> body;
    for (const auto& row : rows)
      body.push_back({std::to_string(row.n), num_str(row.dh_per_n), num_str(row.floor),
                      num_str(row.ceiling)});
    emit(cfg, to_csv({"n", "dh_per_n", "floor", "ceiling"}, body));
    return 0;
  }

  if (rt->parsed()) {
    SetFamily afam(set_from_json(load_json(rt_files[0]), cfg.tol));
    SetFamily bfam(set_from_json(load_json(rt_files[1]), cfg.tol));
    SetFamily ffam(set_from_json(load_json(rt_files[2]), cfg.tol));
    RateBounds rb =
        rt_free_b.empty()
            ? rate_bounds(afam, bfam, ffam, rt_m_max, cfg.tol)
            : rate_bounds(afam, bfam, ffam, SetFamily(set_from_json(load_json(rt_free_b), cfg.tol)),
                          rt_m_max, cfg.tol);
    Json doc;
    doc["numerator"] = interval_json(rb.numerator);
    doc["denominator"] = interval_json(rb.denominator);
    doc["rate_interval"] = interval_json(rb.rate_interval);
    emit(cfg, doc.dump(2));
    return 0;
  }

  if (va->parsed()) {
    StateSet base = [&]() -> StateSet {
      if (!va_family.empty() && !va_file.empty())
        throw precondition_error("give either --family or a descriptor file, not both");
      if (va_family == "incoherent") return StateSet::incoherent(va_d);
      if (va_family == "mana") return StateSet::mana(va_d);
      if (!va_family.empty())
        throw precondition_error("unknown named family '" + va_family + "'");
      if (va_file.empty()) throw precondition_error("need --family or a descriptor file");
      return set_from_json(load_json(va_file), cfg.tol);
    }();
    AssumptionReport rep = validate_assumptions(SetFamily(base), va_m, va_k, 3, cfg.seed, cfg.tol);
    Json doc;
    doc["permutation_ok"] = rep.permutation_ok;
    doc["tensor_ok"] = rep.tensor_ok;
    doc["submultiplicative_ok"] = rep.submultiplicative_ok;
    doc["all_ok"] = rep.all_ok();
    doc["violations"] = rep.violations;
    emit(cfg, doc.dump(2));
    return 0;
  }

  if (pr->parsed()) {
    SetFamily afam(set_from_json(load_json(pr_files[0]), cfg.tol));
    SetFamily ffam(set_from_json(load_json(pr_files[1]), cfg.tol));
    SetFamily bfam(set_from_json(load_json(pr_files[2]), cfg.tol));
    ProtocolMap p = build_rng_protocol(afam, ffam, bfam, pr_n, pr_m, pr_eps, pr_delta, cfg.tol);
    AuditReport rep =
        protocol_audit(p, afam, bfam, ffam, pr_n, pr_m, pr_budget, cfg.seed, cfg.tol);
    gate_heuristic(cfg, rep.heuristic);
    Json doc;
    doc["test"] = Json{{"type1", p.test.type1}, {"type2", p.test.type2}};
    doc["delta_target"] = p.delta_target;
    doc["trans_error"] = rep.trans_error;
    doc["rng_violation"] = rep.rng_violation;
    doc["heuristic"] = rep.heuristic;
    emit(cfg, doc.dump(2));
    return 0;
  }

  std::cerr << app.help();
  return 2;
}

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const convergence_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const precondition_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
