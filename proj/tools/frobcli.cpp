#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "frob/geometry.hpp"
#include "frob/parallel.hpp"
#include "frob/gw.hpp"
#include "frob/pr.hpp"
#include "frob/schlesinger.hpp"
#include "frob/super.hpp"

using nlohmann::json;
using namespace frob;

namespace {

json jc(cplx z) { return json::array({z.real(), z.imag()}); }
cplx pc(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json jvec(const VectorXcd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(jc(v[i]));
  return a;
}
VectorXcd pvec(const json& j) {
  VectorXcd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = pc(j[i]);
  return v;
}
json jmat(const MatrixXcd& m) {  // row-major
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int k = 0; k < m.cols(); ++k) a.push_back(jc(m(i, k)));
  return a;
}
MatrixXcd pmat(const json& j, int n) {
  MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = pc(j.at(i * n + k));
  return m;
}

cplx parse_cplx_flag(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) return {std::stod(s), 0.0};
  return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

json system_to_json(const SchlesingerSystem& s) {
  json j;
  j["m"] = s.m;
  j["u"] = jvec(s.u);
  j["g"] = jmat(s.g);
  j["A"] = json::array();
  for (const auto& a : s.A) j["A"].push_back(jmat(a));
  j["e"] = jvec(s.e);
  j["D"] = s.D;
  j["special"] = s.special_built;
  return j;
}

SchlesingerSystem system_from_json(const json& j) {
  SchlesingerSystem s;
  s.m = j.at("m").get<int>();
  s.u = pvec(j.at("u"));
  s.g = pmat(j.at("g"), s.m);
  for (const auto& a : j.at("A")) s.A.push_back(pmat(a, s.m));
  if (j.contains("e")) {
    s.e = pvec(j.at("e"));
    s.has_identity = true;
  }
  if (j.contains("D")) s.D = j.at("D").get<double>();
  if (j.contains("special")) s.special_built = j.at("special").get<bool>();
  s.W = MatrixXcd::Zero(s.m, s.m);
  for (const auto& a : s.A) s.W += a;
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorKind::ParseError, std::string("bad json in ") + path + ": " + e.what());
  }
  return j;
}

IntegrationPath path_from_json(const json& j, double guard_rel) {
  IntegrationPath p;
  p.guard_rel = guard_rel;
  for (const auto& w : j) p.waypoints.push_back(pvec(w));
  if (p.waypoints.size() < 2)
    fail(ErrorKind::ParseError, "path needs at least two waypoints");
  return p;
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream f(out);
    f << j.dump(2) << "\n";
  }
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidParameter:
    case ErrorKind::InvalidData:
    case ErrorKind::OrderError:
      return 2;
    default:
      return 3;
  }
}

// --config FILE: a JSON object mirroring the command line, e.g.
// {"schlesinger": {"integrate": {"system": "s.json", "path": "p.json"}}}.
// Values become --key value pairs; true booleans become bare flags.
std::vector<std::string> args_from_config(const std::string& file) {
  json j = read_json_file(file);
  std::vector<std::string> args;
  std::function<void(const json&)> walk = [&](const json& node) {
    std::vector<std::pair<std::string, json>> subs;
    for (auto it = node.begin(); it != node.end(); ++it) {
      if (it.value().is_object()) {
        subs.emplace_back(it.key(), it.value());
        continue;
      }
      if (it.value().is_boolean()) {
        if (it.value().get<bool>()) args.push_back("--" + it.key());
      } else if (it.value().is_string()) {
        args.push_back("--" + it.key());
        args.push_back(it.value().get<std::string>());
      } else {
        args.push_back("--" + it.key());
        args.push_back(it.value().dump());
      }
    }
    for (auto& [name, sub] : subs) {
      args.push_back(name);
      walk(sub);
    }
  };
  if (!j.is_object()) fail(ErrorKind::ParseError, "config must be an object");
  walk(j);
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  // a config file replaces the rest of the command line
  std::vector<std::string> argstore;
  std::vector<char*> argptrs;
  for (int i = 0; i < argc; ++i) {
    if (std::string(argv[i]) == "--config" && i + 1 < argc) {
      try {
        argstore = args_from_config(argv[i + 1]);
      } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      argstore.insert(argstore.begin(), argv[0]);
      for (auto& s : argstore) argptrs.push_back(s.data());
      argc = int(argptrs.size());
      argv = argptrs.data();
      break;
    }
  }

  CLI::App app{"semisimple Frobenius manifolds and Schlesinger systems"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware)");
  std::uint64_t seed = 0x5eed5eedULL;
  app.add_option("--seed", seed, "probe seed for spectral splittings");

  // ---- gw ----
  auto* gw_cmd = app.add_subcommand("gw", "quantum cohomology tables");
  int gw_r = 2, gw_dmax = 3;
  bool gw_check = false;
  std::string gw_out;
  gw_cmd->add_option("--r", gw_r, "projective dimension")->required();
  gw_cmd->add_option("--dmax", gw_dmax, "truncation degree")->required();
  gw_cmd->add_flag("--check", gw_check, "verify all associativity identities");
  gw_cmd->add_option("--out,-o", gw_out, "output csv (default stdout)");

  // ---- pr ----
  auto* pr_cmd = app.add_subcommand("pr", "projective-space closed forms");
  auto* pr_verify = pr_cmd->add_subcommand("verify", "cross-validate closed forms");
  int prv_r = 2;
  std::string prv_x0 = "0.3", prv_x1 = "-0.7", prv_out;
  double prv_tol = 1e-8;
  pr_verify->add_option("--r", prv_r)->required();
  pr_verify->add_option("--x0", prv_x0, "RE,IM");
  pr_verify->add_option("--x1", prv_x1, "RE,IM");
  pr_verify->add_option("--tol", prv_tol);
  pr_verify->add_option("--out,-o", prv_out);
  auto* pr_chart = pr_cmd->add_subcommand("chart", "canonical chart export");
  int prc_r = 2, prc_dmax = 1;
  std::string prc_x0 = "0.3", prc_x1 = "-0.7", prc_out;
  pr_chart->add_option("--r", prc_r)->required();
  pr_chart->add_option("--x0", prc_x0, "RE,IM");
  pr_chart->add_option("--x1", prc_x1, "RE,IM");
  pr_chart->add_option("--dmax", prc_dmax, "instanton truncation degree");
  pr_chart->add_option("--out,-o", prc_out);
  auto* pr_spec = pr_cmd->add_subcommand("spectrum", "spectrum of W");
  int prs_r = 2;
  std::string prs_out;
  pr_spec->add_option("--r", prs_r)->required();
  pr_spec->add_option("--out,-o", prs_out);

  // ---- schlesinger ----
  auto* sch = app.add_subcommand("schlesinger", "isomonodromic flows");
  auto* sch_init = sch->add_subcommand("init", "special initial data for P^r");
  int si_r = 2;
  std::string si_x0 = "0", si_x1 = "0", si_out;
  sch_init->add_option("--r", si_r)->required();
  sch_init->add_option("--x0", si_x0);
  sch_init->add_option("--x1", si_x1);
  sch_init->add_option("--out,-o", si_out);

  auto* sch_int = sch->add_subcommand("integrate", "integrate along a path");
  std::string in_sys, in_path, in_traj, in_out;
  double in_tol = 1e-10, in_guard = 1e-3;
  sch_int->add_option("--system", in_sys)->required();
  sch_int->add_option("--path", in_path)->required();
  sch_int->add_option("--traj", in_traj, "trajectory jsonl output");
  sch_int->add_option("--out,-o", in_out, "final system output");
  sch_int->add_option("--tol", in_tol);
  sch_int->add_option("--guard", in_guard, "guard band / min initial gap");

  auto* sch_tau = sch->add_subcommand("tau", "tau function along a path");
  std::string tau_sys, tau_path, tau_out;
  double tau_tol = 1e-10, tau_guard = 1e-3;
  sch_tau->add_option("--system", tau_sys)->required();
  sch_tau->add_option("--path", tau_path)->required();
  sch_tau->add_option("--out,-o", tau_out);
  sch_tau->add_option("--tol", tau_tol);
  sch_tau->add_option("--guard", tau_guard);

  auto* sch_check = sch->add_subcommand("check", "classify a solution");
  std::string chk_sys, chk_out;
  double chk_tol = 1e-8;
  sch_check->add_option("--system", chk_sys)->required();
  sch_check->add_option("--tol", chk_tol);
  sch_check->add_option("--out,-o", chk_out);

  auto* sch_rec = sch->add_subcommand("reconstruct", "metric data from the flow");
  std::string rec_sys, rec_out;
  sch_rec->add_option("--system", rec_sys)->required();
  sch_rec->add_option("--out,-o", rec_out);

  // ---- super ----
  auto* sup = app.add_subcommand("super", "Frobenius supermanifold checks");
  auto* sup_check = sup->add_subcommand("check", "residuals of a potential");
  std::string sc_psi, sc_which = "all", sc_out, sc_u;
  double sc_tol = 1e-9, sc_D = 0.0;
  int sc_n = 2;
  sup_check->add_option("--n", sc_n)->required();
  sup_check->add_option("--psi", sc_psi)->required();
  sup_check->add_option("--which", sc_which,
                        "comma list: de,tnabla,flat_e,flat_eps,euler,orth,all");
  sup_check->add_option("--u", sc_u, "point, comma-separated re:im entries");
  sup_check->add_option("--tol", sc_tol);
  sup_check->add_option("--D", sc_D, "conformal weight for the Euler check");
  sup_check->add_option("--out,-o", sc_out);

  auto* sup_ns = sup->add_subcommand("ns", "Neveu-Schwarz relations");
  int ns_n = 3, ns_amax = 4, ns_imax2 = 7;
  std::string ns_out;
  sup_ns->add_option("--n", ns_n);
  sup_ns->add_option("--amax", ns_amax);
  sup_ns->add_option("--imax2", ns_imax2, "twice the largest half-integer index");
  sup_ns->add_option("--out,-o", ns_out);

  auto* sup_red = sup->add_subcommand("reduce", "body reduction comparison");
  std::string red_out;
  double red_D = 0.5, red_kappa = 0.3;
  sup_red->add_option("--D", red_D);
  sup_red->add_option("--kappa", red_kappa);
  sup_red->add_option("--out,-o", red_out);

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_worker_threads(threads);

  try {
    if (gw_cmd->parsed()) {
      gw::GWTable table = gw::compute_gw_table(gw_r, gw_dmax);
      std::ostringstream csv;
      gw::write_csv(table, csv);
      if (gw_out.empty() || gw_out == "-") std::cout << csv.str();
      else std::ofstream(gw_out) << csv.str();
      if (gw_check) {
        auto rep = gw::wdvv_residual_exact(table, gw_dmax);
        if (rep.violated) {
          std::cerr << "associativity violated at degree " << rep.degree
                    << " monomial " << gw::multiset_to_string(rep.monomial)
                    << "\n";
          return 1;
        }
        std::cerr << "associativity identities hold through degree " << gw_dmax
                  << "\n";
      }
      return 0;
    }

    if (pr_verify->parsed()) {
      auto rep = pr::cross_validate(prv_r, parse_cplx_flag(prv_x0),
                                    parse_cplx_flag(prv_x1), prv_tol, 1,
                                    false, seed);
      json j{{"u_dev", rep.u_dev},
             {"eta_dev", rep.eta_dev},
             {"v_dev", rep.v_dev},
             {"special_ok", rep.special_ok}};
      emit(j, prv_out);
      bool ok = rep.u_dev <= prv_tol && rep.eta_dev <= prv_tol &&
                rep.v_dev <= prv_tol && rep.special_ok;
      return ok ? 0 : 1;
    }
    if (pr_chart->parsed()) {
      auto field = make_qh_field(prc_r, prc_dmax);
      VectorXcd x = VectorXcd::Zero(prc_r + 1);
      x[0] = parse_cplx_flag(prc_x0);
      x[1] = parse_cplx_flag(prc_x1);
      FrobeniusPoint p = build_point(field, x);
      ProbePolicy policy;
      policy.seed = seed;
      CanonicalChart chart = semisimple_split(p, policy);
      if (prc_out.empty() || prc_out == "-") std::cout << chart_to_json(chart) << "\n";
      else std::ofstream(prc_out) << chart_to_json(chart) << "\n";
      return 0;
    }
    if (pr_spec->parsed()) {
      auto rep = pr::spectrum_checks(prs_r);
      json j{{"eigenvalues", jvec(rep.eigenvalues)},
             {"spectrum_dev", rep.spectrum_dev},
             {"zero_in_spectrum", rep.zero_in_spectrum},
             {"row_sum_dev", rep.row_sum_dev}};
      emit(j, prs_out);
      return rep.spectrum_dev < 1e-10 && rep.row_sum_dev < 1e-12 ? 0 : 1;
    }

    if (sch_init->parsed()) {
      SchlesingerSystem s = pr::schlesinger_from_closed_forms(
          si_r, parse_cplx_flag(si_x0), parse_cplx_flag(si_x1));
      pr::ClosedForms cf = pr::closed_forms(si_r, parse_cplx_flag(si_x0),
                                            parse_cplx_flag(si_x1));
      json j = system_to_json(s);
      j["v"] = jmat(cf.v);
      j["eta"] = jvec(cf.eta);
      emit(j, si_out);
      return 0;
    }
    if (sch_int->parsed()) {
      SchlesingerSystem s = system_from_json(read_json_file(in_sys));
      IntegrationPath path = path_from_json(read_json_file(in_path), in_guard);
      IntegrateOptions opts;
      opts.rtol = in_tol;
      opts.atol = in_tol * 1e-2;
      opts.record = !in_traj.empty();
      Trajectory traj = integrate(s, path, opts);
      std::cerr << "monitors: conservation " << traj.max_conservation
                << " rank1 " << traj.max_rank1_defect << " quad "
                << traj.max_quad_defect << "\n";
      if (!in_traj.empty()) {
        std::ofstream f(in_traj);
        for (const auto& st : traj.steps) {
          json rec{{"t", st.t}, {"u", jvec(st.u)}};
          rec["A"] = json::array();
          for (const auto& a : st.A) rec["A"].push_back(jmat(a));
          rec["monitors"] = json{{"conservation", st.conservation},
                                 {"rank1", st.rank1_defect},
                                 {"quad", st.quad_defect}};
          f << rec.dump() << "\n";
        }
      }
      emit(system_to_json(s), in_out);
      return 0;
    }
    if (sch_tau->parsed()) {
      SchlesingerSystem s = system_from_json(read_json_file(tau_sys));
      IntegrationPath path = path_from_json(read_json_file(tau_path), tau_guard);
      IntegrateOptions opts;
      opts.rtol = tau_tol;
      opts.atol = tau_tol * 1e-2;
      TauReport rep = tau(s, path, opts);
      json j{{"logtau", jc(rep.logtau)},
             {"tau", jc(rep.tau)},
             {"closedness", rep.closedness}};
      emit(j, tau_out);
      return 0;
    }
    if (sch_check->parsed()) {
      SchlesingerSystem s = system_from_json(read_json_file(chk_sys));
      auto rep = check_solution(s, chk_tol);
      json j{{"is_special", rep.is_special},
             {"is_strict_special", rep.is_strict_special},
             {"has_identity", rep.has_identity},
             {"special_residual", rep.special_residual},
             {"strict_residual", rep.strict_residual},
             {"identity_residual", rep.identity_residual},
             {"weight_D", rep.weight_D},
             {"strict_route", rep.strict_route}};
      emit(j, chk_out);
      return rep.is_special ? 0 : 1;
    }
    if (sch_rec->parsed()) {
      SchlesingerSystem s = system_from_json(read_json_file(rec_sys));
      auto rep = reconstruct_frobenius(s);
      json j{{"eta", jvec(rep.eta)},
             {"symmetry_residual", rep.symmetry_residual},
             {"euler_residual", rep.euler_residual},
             {"t_shift", rep.t_shift}};
      emit(j, rec_out);
      return 0;
    }

    if (sup_check->parsed()) {
      std::ifstream in(sc_psi);
      if (!in) fail(ErrorKind::ParseError, "cannot open " + sc_psi);
      std::stringstream buf;
      buf << in.rdbuf();
      PsiSpec psi = psi_from_json(buf.str());
      if (psi.n != sc_n)
        fail(ErrorKind::ParseError, "psi file dimension differs from --n");
      VectorXcd u = VectorXcd::Zero(sc_n);
      if (!sc_u.empty()) {
        std::stringstream ss(sc_u);
        std::string part;
        int k = 0;
        while (std::getline(ss, part, ',') && k < sc_n) {
          auto colon = part.find(':');
          u[k++] = colon == std::string::npos
                       ? cplx(std::stod(part), 0.0)
                       : cplx(std::stod(part.substr(0, colon)),
                              std::stod(part.substr(colon + 1)));
        }
      } else {
        for (int k = 0; k < sc_n; ++k) u[k] = cplx(0.3 + 0.2 * k, -0.1 * k);
      }
      std::vector<super::SuperEq> which;
      auto want = [&](const std::string& key) {
        return sc_which == "all" || sc_which.find(key) != std::string::npos;
      };
      if (want("de")) which.push_back(super::SuperEq::DarbouxEgoroff);
      if (want("tnabla")) which.push_back(super::SuperEq::TnablaFlat);
      if (want("flat_e")) which.push_back(super::SuperEq::FlatIdentityE);
      if (want("flat_eps")) which.push_back(super::SuperEq::FlatIdentityEps);
      if (want("euler")) which.push_back(super::SuperEq::Euler);
      if (want("orth")) which.push_back(super::SuperEq::Orthogonality);
      auto rep = super::super_residuals(psi, u, which, sc_D);
      json j;
      for (const auto& [k, v] : rep.values) j[k] = v;
      for (const auto& k : rep.vacuous) j[k] = "vacuous";
      emit(j, sc_out);
      return rep.max() <= sc_tol ? 0 : 1;
    }
    if (sup_ns->parsed()) {
      double res = super::ns_representation_check(ns_n, ns_amax, ns_imax2);
      json j{{"max_residual", res}};
      emit(j, ns_out);
      return res == 0.0 ? 0 : 1;
    }
    if (sup_red->parsed()) {
      auto fix = super::crafted_super_schlesinger_n2(red_D, red_kappa);
      auto rep = super::super_schlesinger_residual(2, fix.a_fields, fix.u0);
      json j{{"off_diag", rep.off_diag},
             {"diag", rep.diag},
             {"body_reduction", rep.body_reduction}};
      emit(j, red_out);
      return rep.body_reduction <= 1e-12 ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
