// sepvar: separable-web analysis of natural Hamiltonians on flat
// pseudo-Euclidean spaces and low-dimensional constant-curvature spheres.
#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "sepweb/bekm.hpp"
#include "sepweb/classify.hpp"
#include "sepweb/hamlab.hpp"
#include "sepweb/jsonio.hpp"
#include "sepweb/webs.hpp"

using namespace sepweb;

namespace {

PseudoSpace parse_space(const std::string& name) {
  if (name == "E2") return PseudoSpace::flat(2, 0);
  if (name == "E2_1") return PseudoSpace::flat(2, 1);
  if (name == "E3") return PseudoSpace::flat(3, 0);
  if (name == "E3_1") return PseudoSpace::flat(3, 1);
  if (name == "E4") return PseudoSpace::flat(4, 0);
  if (name == "dS2") return PseudoSpace::sphere(3, 1, 1.0);
  if (name == "S2") return PseudoSpace::sphere(3, 0, 1.0);
  throw std::invalid_argument("unknown space '" + name + "'");
}

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

PotentialPtr make_potential(const std::string& spec, const PseudoSpace& space) {
  try {
    return builtin_potential(spec, space);
  } catch (const std::invalid_argument&) {
    return parse_potential(spec, space);
  }
}

std::uint64_t seed_from_env(std::uint64_t cli_seed, bool seed_given) {
  if (seed_given) return cli_seed;
  if (const char* env = std::getenv("SEPVAR_SEED")) return std::strtoull(env, nullptr, 10);
  return cli_seed;
}

Box default_box(const std::string& potential, const PseudoSpace& space, const Vec* center,
                double half_width) {
  Vec c = Vec::Zero(space.n);
  if (center) c = *center;
  else if (potential == "calogero-moser") c << 0.0, 1.3, 2.6;
  else if (potential == "morosi-tondo") c << 0.2, 0.1, 0.6;
  return Box::centered(c, half_width);
}

void emit(const std::string& json, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << json << "\n";
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  f << json << "\n";
}

void write_blocks(JsonWriter& w, const std::vector<JordanBlock>& blocks) {
  w.key("blocks").begin_array();
  for (const auto& b : blocks) {
    w.begin_object();
    w.kv("size", b.size);
    w.kv("sign", b.sign);
    w.kv("re", b.lambda.real());
    w.kv("im", b.lambda.imag());
    w.end_object();
  }
  w.end_array();
}

void write_tree(JsonWriter& w, const SeparationTree& t) {
  w.begin_object();
  w.kv("kind", t.kind == SeparationTree::Kind::Benenti
                   ? "benenti"
                   : (t.kind == SeparationTree::Kind::Warped ? "warped" : "fail"));
  if (t.kind == SeparationTree::Kind::Fail) {
    w.kv("reason", t.fail_reason);
    w.end_object();
    return;
  }
  w.kv("class", t.class_key);
  w.kv("chart", t.chart);
  if (t.chart_a > 0) w.kv("chart_a", t.chart_a);
  w.key("leaves").begin_array();
  for (const auto& l : t.leaves) w.value(l);
  w.end_array();
  if (t.fiber) {
    w.kv("split", t.central_split ? "central" : "axis");
    w.key("fiber");
    write_tree(w, *t.fiber);
  }
  w.end_object();
}

int cmd_classify(const std::string& space_name, const std::string& A_str,
                 const std::string& w_str, double m, double tol, const std::string& out) {
  PseudoSpace s = parse_space(space_name);
  const int n = s.n;
  Mat A = Mat::Zero(n, n);
  if (!A_str.empty() && A_str != "0") {
    std::vector<double> a = parse_csv_doubles(A_str);
    if (static_cast<int>(a.size()) == n * (n + 1) / 2) {
      int k = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) A(i, j) = A(j, i) = a[k++];
    } else if (static_cast<int>(a.size()) == n) {
      for (int i = 0; i < n; ++i) A(i, i) = a[i];
    } else {
      throw std::invalid_argument("--A wants n diagonal or n(n+1)/2 upper-triangle entries");
    }
  }
  Vec wv = Vec::Zero(n);
  if (!w_str.empty() && w_str != "0") {
    std::vector<double> ws = parse_csv_doubles(w_str);
    if (static_cast<int>(ws.size()) != n) throw std::invalid_argument("--w wants n entries");
    for (int i = 0; i < n; ++i) wv[i] = ws[i];
  }
  ConcircularTensor L(s, A, wv, m);
  CanonicalClass cls = classify_ct(L, tol);
  JsonWriter w;
  w.begin_object();
  w.kv("schema", 1);
  w.kv("tag", ct_class_name(cls.tag));
  if (cls.index) w.kv("index", *cls.index);
  if (cls.sign) w.kv("sign", *cls.sign);
  write_blocks(w, cls.blocks);
  if (cls.tag != CtClass::DegenerateNullAxial) {
    w.key("normalization").begin_object();
    w.kv("a", cls.reduction.a);
    w.kv("b", cls.reduction.b);
    w.kv("shift", cls.reduction.shift);
    w.end_object();
  }
  w.end_object();
  emit(w.str(), out);
  return 0;
}

int cmd_solve_kbd(const std::string& potential, const std::string& space_name,
                  std::uint64_t seed, double svd_tol, const std::string& center_str,
                  const std::string& out) {
  PseudoSpace s = parse_space(space_name);
  PotentialPtr V = make_potential(potential, s);
  Vec center;
  const Vec* cptr = nullptr;
  if (!center_str.empty()) {
    std::vector<double> c = parse_csv_doubles(center_str);
    center = Eigen::Map<Vec>(c.data(), c.size());
    cptr = &center;
  }
  Box box = default_box(potential, s, cptr, 0.5);
  KbdOptions opts;
  opts.seed = seed;
  opts.svd_tol = svd_tol;
  KbdSolution sol = kbd_solve(V, box, opts);
  JsonWriter w;
  w.begin_object();
  w.kv("schema", 1);
  w.kv("seed", seed);
  w.kv("dim", static_cast<int>(sol.basis.size()));
  w.kv("includes_trivial", sol.includes_trivial);
  w.key("singular_values").begin_array();
  for (double v : sol.singular_values) w.value(v);
  w.end_array();
  w.key("basis").begin_array();
  for (const auto& L : sol.basis) {
    w.begin_object();
    w.kv("A", L.A);
    w.kv("w", L.w);
    w.kv("m", L.m);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  emit(w.str(), out);
  return 0;
}

int cmd_separate(const std::string& potential, const std::string& space_name, bool exhaustive,
                 std::uint64_t seed, const std::string& center_str, const std::string& dot_path,
                 const std::string& out) {
  PseudoSpace s = parse_space(space_name);
  PotentialPtr V = make_potential(potential, s);
  Vec center;
  const Vec* cptr = nullptr;
  if (!center_str.empty()) {
    std::vector<double> c = parse_csv_doubles(center_str);
    center = Eigen::Map<Vec>(c.data(), c.size());
    cptr = &center;
  }
  Box box = default_box(potential, s, cptr, 0.5);
  BekmOptions opts;
  opts.exhaustive = exhaustive;
  opts.seed = seed;
  BekmResult res = bekm_separate(V, box, opts);
  bool any = false;
  for (const auto& t : res.trees) any = any || t.resolved();
  JsonWriter w;
  w.begin_object();
  w.kv("schema", 1);
  w.kv("seed", seed);
  w.kv("kbd_dim", static_cast<int>(res.kbd.basis.size()));
  w.key("branches").begin_array();
  for (const auto& t : res.trees) write_tree(w, t);
  w.end_array();
  w.key("diagnostics").begin_array();
  for (const auto& d : res.diagnostics) w.value(d);
  w.end_array();
  w.end_object();
  emit(w.str(), out);
  if (!dot_path.empty() && !res.trees.empty()) {
    std::ofstream f(dot_path, std::ios::binary);
    f << tree_to_dot(res.trees.front());
  }
  return any ? 0 : 3;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--params wants key=value");
    out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return out;
}

std::string case_for(const std::string& space_name, const std::string& case_arg) {
  // numeric shorthand: --case 4 with --space E2_1 means E21.case4
  if (case_arg.find('.') != std::string::npos) return case_arg;
  if (space_name == "E2_1") return "E21.case" + case_arg;
  if (space_name == "dS2") return "DS2.case" + case_arg;
  if (space_name == "AdS2") return "ADS2.case" + case_arg;
  if (space_name == "E2") return "E2." + case_arg;
  throw std::invalid_argument("cannot resolve case '" + case_arg + "' for space " + space_name);
}

int cmd_web(const std::string& action, const std::string& space_name,
            const std::string& case_arg, const std::vector<std::string>& params_kv,
            int samples, int density, std::uint64_t seed, const std::string& out) {
  if (action == "list") {
    JsonWriter w;
    w.begin_object();
    w.kv("schema", 1);
    w.kv("space", space_name);
    w.key("cases").begin_array();
    for (const std::string& id : catalog_cases(space_name)) {
      WebChart c = make_chart(id);
      w.begin_object();
      w.kv("id", id);
      w.kv("title", c.title);
      w.kv("regions", static_cast<int>(c.regions.size()));
      w.end_object();
    }
    w.end_array();
    w.end_object();
    emit(w.str(), out);
    return 0;
  }
  WebChart chart = make_chart(case_for(space_name, case_arg), parse_params(params_kv));
  if (action == "verify") {
    WebVerifyReport rep = web_verify(chart, samples, seed);
    bool pass = rep.metric_rel_err < 1e-6 && rep.ct_offdiag < 1e-8 &&
                rep.sphere_resid < 1e-10 && rep.inverse_err < 1e-8;
    JsonWriter w;
    w.begin_object();
    w.kv("schema", 1);
    w.kv("case", chart.case_id);
    w.kv("samples", rep.samples);
    w.kv("metric_rel_err", rep.metric_rel_err);
    w.kv("ct_offdiag", rep.ct_offdiag);
    w.kv("sphere_resid", rep.sphere_resid);
    w.kv("inverse_err", rep.inverse_err);
    w.kv("gates", "metric<1e-6, ct<1e-8, quadric<1e-10, inverse<1e-8");
    w.kv("pass", pass);
    w.end_object();
    emit(w.str(), out);
    return pass ? 0 : 2;
  }
  if (action == "plot") {
    std::string svg = emit_web_svg(chart, density);
    emit(svg, out.empty() ? chart.case_id + ".svg" : out);
    return 0;
  }
  if (action == "csv") {
    std::ostringstream os;
    os << "region,u,v";
    for (int i = 0; i < chart.space.n; ++i) os << ",p" << i;
    os << "\n";
    std::mt19937_64 rng(seed);
    for (const auto& r : chart.regions)
      for (int k = 0; k < samples; ++k) {
        auto [u, v] = region_sample(r, rng);
        Vec p = r.map(u, v);
        os << r.label << "," << JsonWriter::format_double(u) << ","
           << JsonWriter::format_double(v);
        for (int i = 0; i < p.size(); ++i) os << "," << JsonWriter::format_double(p[i]);
        os << "\n";
      }
    emit(os.str(), out);
    return 0;
  }
  throw std::invalid_argument("web: unknown action '" + action + "'");
}

int cmd_verify_integrals(const std::string& system, std::uint64_t seed, double T, double dt,
                         const std::string& traj_csv, const std::string& out) {
  PseudoSpace s = system == "morosi-tondo" ? PseudoSpace::flat(3, 1) : PseudoSpace::flat(3, 0);
  PotentialPtr V = make_potential(system, s);
  Box box = default_box(system, s, nullptr, 0.5);
  BekmOptions bo;
  bo.seed = seed;
  BekmResult res = bekm_separate(V, box, bo);
  if (res.trees.empty() || !res.trees.front().resolved())
    throw std::runtime_error("verify-integrals: system did not separate");
  std::vector<PolySym2Field> ks = ks_space(res.trees.front(), box, seed + 5);
  std::vector<FirstIntegral> Fs;
  for (const auto& K : ks) Fs.push_back(first_integral(K, V, box.lo));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> un(-0.3, 0.3);
  double brackets_max = 0.0;
  double sigma_min = 1e300;
  for (int t = 0; t < 20; ++t) {
    Vec q(s.n), p(s.n);
    for (int i = 0; i < s.n; ++i) {
      q[i] = 0.5 * (box.lo[i] + box.hi[i]) + un(rng);
      p[i] = un(rng);
    }
    PhasePoint z{q, p};
    try {
      V->eval(q);
    } catch (...) {
      continue;
    }
    for (size_t a = 0; a < Fs.size(); ++a)
      for (size_t b = a + 1; b < Fs.size(); ++b)
        brackets_max = std::max(brackets_max, std::fabs(poisson_bracket(Fs[a], Fs[b], z)));
    sigma_min = std::min(sigma_min, independence_sigma_min(Fs, z));
  }

  std::vector<double> drifts;
  Trajectory last;
  for (int k = 0; k < 5; ++k) {
    Vec q(s.n), p(s.n);
    for (int i = 0; i < s.n; ++i) {
      q[i] = 0.5 * (box.lo[i] + box.hi[i]) + un(rng);
      p[i] = un(rng);
    }
    Trajectory traj = integrate_trajectory(V, s, {q, p}, T, dt);
    if (traj.truncated || traj.z.size() < 10) {
      --k;  // resample deterministic continuation
      continue;
    }
    double worst = 0.0;
    for (const auto& F : Fs) worst = std::max(worst, conservation_drift(F, traj));
    drifts.push_back(worst);
    last = traj;
  }
  if (!traj_csv.empty()) {
    std::ofstream f(traj_csv, std::ios::binary);
    f << "t";
    for (int i = 0; i < s.n; ++i) f << ",q" << i;
    for (int i = 0; i < s.n; ++i) f << ",p" << i;
    f << "\n";
    for (size_t k = 0; k < last.z.size(); ++k) {
      f << JsonWriter::format_double(last.t[k]);
      for (int i = 0; i < s.n; ++i) f << "," << JsonWriter::format_double(last.z[k].q[i]);
      for (int i = 0; i < s.n; ++i) f << "," << JsonWriter::format_double(last.z[k].p[i]);
      f << "\n";
    }
  }
  JsonWriter w;
  w.begin_object();
  w.kv("schema", 1);
  w.kv("seed", seed);
  w.kv("system", system);
  w.kv("n_integrals", static_cast<int>(Fs.size()));
  w.kv("brackets_max", brackets_max);
  w.key("drifts").begin_array();
  for (double d : drifts) w.value(d);
  w.end_array();
  w.kv("independence_sigma_min", sigma_min);
  bool pass = brackets_max < 1e-6 && sigma_min > 1e-6;
  for (double d : drifts) pass = pass && d < 1e-6;
  w.kv("pass", pass);
  w.end_object();
  emit(w.str(), out);
  return pass ? 0 : 2;
}

int cmd_fixtures(const std::string& dir) {
  // regenerate the golden fixtures deterministically
  int rc = 0;
  rc |= cmd_solve_kbd("calogero-moser", "E3", 1, 1e-9, "", dir + "/calogero_kbd.json");
  rc |= cmd_separate("calogero-moser", "E3", true, 1, "", "", dir + "/calogero_separate.json");
  rc |= cmd_solve_kbd("morosi-tondo", "E3_1", 1, 1e-9, "", dir + "/morosi_kbd.json");
  rc |= cmd_separate("morosi-tondo", "E3_1", true, 1, "", "", dir + "/morosi_separate.json");
  // web verification summary
  JsonWriter w;
  w.begin_object();
  w.kv("schema", 1);
  w.key("charts").begin_array();
  for (const std::string& sp : {"E2", "E2_1", "dS2"})
    for (const std::string& id : catalog_cases(sp)) {
      WebChart c = make_chart(id);
      WebVerifyReport rep = web_verify(c, 20, 1);
      w.begin_object();
      w.kv("id", id);
      w.kv("metric_lt_1e6", rep.metric_rel_err < 1e-6);
      w.kv("ct_lt_1e8", rep.ct_offdiag < 1e-8);
      w.kv("metric_rel_err", rep.metric_rel_err);
      w.kv("ct_offdiag", rep.ct_offdiag);
      w.end_object();
    }
  w.end_array();
  w.end_object();
  emit(w.str(), dir + "/webs.json");
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"separable webs of natural Hamiltonians on constant-curvature spaces"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker cap (evaluation is single-process)");

  std::string space = "E2_1", A_str = "0", w_str = "0", out;
  double m = 0.0, tol = 1e-10;
  auto* classify = app.add_subcommand("classify", "canonical form of a concircular tensor");
  classify->add_option("--space", space)->required();
  classify->add_option("--A", A_str, "diagonal or upper-triangle entries");
  classify->add_option("--w", w_str);
  classify->add_option("--m", m);
  classify->add_option("--tol", tol)->check(CLI::Range(1e-14, 1e-4));
  classify->add_option("-o,--out", out);

  std::string potential, center;
  std::uint64_t seed = 1;
  bool seed_given = false;
  double svd_tol = 1e-9;
  auto* kbd = app.add_subcommand("solve-kbd", "compatibility nullspace for a potential");
  kbd->add_option("--potential", potential)->required();
  kbd->add_option("--space", space)->required();
  kbd->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  kbd->add_option("--svd-tol", svd_tol)->check(CLI::Range(1e-13, 1e-4));
  kbd->add_option("--center", center);
  kbd->add_option("-o,--out", out);

  bool exhaustive = false;
  std::string dot_path;
  auto* sep = app.add_subcommand("separate", "run the recursive separation search");
  sep->add_option("--potential", potential)->required();
  sep->add_option("--space", space)->required();
  sep->add_flag("--exhaustive", exhaustive);
  sep->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  sep->add_option("--center", center);
  sep->add_option("--dot", dot_path);
  sep->add_option("-o,--out", out);

  std::string web_action, case_arg = "1";
  std::vector<std::string> params_kv;
  int samples = 100, density = 12;
  auto* web = app.add_subcommand("web", "separable-web catalog: list | verify | plot | csv");
  web->add_option("action", web_action)->required();
  web->add_option("--space", space);
  web->add_option("--case", case_arg);
  web->add_option("--params", params_kv);
  web->add_option("--samples", samples)->check(CLI::Range(1, 100000));
  web->add_option("--density", density)->check(CLI::Range(1, 200));
  web->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  web->add_option("-o,--out", out);

  std::string system = "calogero-moser", traj_csv;
  double T = 5.0, dt = 1e-3;
  auto* vi = app.add_subcommand("verify-integrals", "first-integral checks for a worked system");
  vi->add_option("--system", system)->required();
  vi->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  vi->add_option("--T", T)->check(CLI::Range(0.0, 100.0));
  vi->add_option("--dt", dt)->check(CLI::Range(1e-6, 1.0));
  vi->add_option("--trajectory-csv", traj_csv);
  vi->add_option("-o,--out", out);

  std::string fixtures_dir = "fixtures";
  auto* fx = app.add_subcommand("fixtures", "regenerate golden fixtures");
  fx->add_option("--dir", fixtures_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    std::uint64_t sd = seed_from_env(seed, seed_given);
    if (classify->parsed()) return cmd_classify(space, A_str, w_str, m, tol, out);
    if (kbd->parsed()) return cmd_solve_kbd(potential, space, sd, svd_tol, center, out);
    if (sep->parsed())
      return cmd_separate(potential, space, exhaustive, sd, center, dot_path, out);
    if (web->parsed())
      return cmd_web(web_action, space, case_arg, params_kv, samples, density, sd, out);
    if (vi->parsed()) return cmd_verify_integrals(system, sd, T, dt, traj_csv, out);
    if (fx->parsed()) return cmd_fixtures(fixtures_dir);
  } catch (const ClassifyError& e) {
    std::cerr << "classification error: " << e.what() << "\n";
    return 2;
  } catch (const AmbiguousSpectrumError& e) {
    std::cerr << "spectrum ambiguity: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
