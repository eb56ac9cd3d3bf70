#include "procat/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

namespace procat {

namespace {

struct Outcome3 {
  Outcome outcome;
  Json evidence;
};

using Handler = std::function<Outcome3(const Workspace&, const std::vector<std::string>&, const CliOptions&)>;

void arity(const std::vector<std::string>& args, std::size_t lo, std::size_t hi, const std::string& usage) {
  if (args.size() < lo || args.size() > hi) throw Error("Usage", "usage: " + usage);
}

Outcome3 from_verdict(const Verdict& v) { return {v.outcome, v.evidence}; }

Json check_json(const JCheck& c) {
  Json ev = c.verdict.evidence;
  ev["classification"] = {{"commutative", c.commutative}, {"simple", c.simple}, {"level", c.level}};
  return ev;
}

bool is_level_morphism(const JMorphism& f) {
  return f.source().index().same_as(f.target().index()) && f.index_fn().is_identity();
}

// The level morphism is-iso works on: f itself, or its reindexed form.
LevelPair iso_subject(const JMorphism& f, const Limits& limits, Json& route) {
  if (is_level_morphism(f)) {
    route = "level";
    return LevelPair::from(f);
  }
  const ReindexResult r = reindex(f, limits);
  if (!r.level_ok.is_holds() || !r.square.is_holds() || !r.i_iso.is_holds() || !r.j_iso.is_holds())
    throw Error("Inconclusive", "reindexing could not be verified: " + r.to_json().dump());
  route = "reindexed";
  return LevelPair::from(r.level);
}

Radius parse_radius(const std::string& spec) {
  const IndexPoset w = IndexPoset::omega();
  const IndexFunction g = parse_affine(spec, w, w);
  const AffineTerm t = g.affine_map()->front();
  return {t.src < 0 ? 0 : t.mul, t.add};
}

const ProReflectivePair& pick_pair(const Workspace& ws, const CliOptions& opt) {
  if (opt.pair) return ws.pair(*opt.pair);
  return ws.sole_pair();
}

Obj pair_object(const ProReflectivePair& p, const std::string& name) { return p.category().parse_object(name); }

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"validate",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 0, 0, "validate <workspace>");
         Json decls = Json::array();
         Outcome acc = Outcome::Holds;
         for (const auto& [kind, name] : ws.declarations()) {
           Json d = {{"kind", kind}, {"name", name}};
           if (kind == "system") {
             const Verdict v = check_system(ws.system(name), opt.limits);
             d["laws"] = to_string(v.outcome);
             acc = meet(acc, v.outcome);
           }
           decls.push_back(d);
         }
         return Outcome3{acc, {{"declarations", decls}}};
       }},
      {"check-jmorphism",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 1, 1, "check-jmorphism <workspace> <f>");
         const JCheck c = check_jmorphism(ws.jmorphism(args[0]), opt.limits);
         return Outcome3{c.verdict.outcome, check_json(c)};
       }},
      {"compose",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 2, 2, "compose <workspace> <g> <f>");
         const JMorphism h = compose_jmorphisms(ws.jmorphism(args[0]), ws.jmorphism(args[1]));
         const JCheck c = check_jmorphism(h, opt.limits);
         return Outcome3{c.verdict.outcome, {{"composite", h.to_json()}, {"check", check_json(c)}}};
       }},
      {"equivalent",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 2, 2, "equivalent <workspace> <a> <b>");
         return from_verdict(equivalent_jmorphisms(ws.jmorphism(args[0]), ws.jmorphism(args[1]), opt.limits));
       }},
      {"simplify",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 1, 1, "simplify <workspace> <f>");
         const SimplifyResult r = simplify(ws.jmorphism(args[0]), opt.limits);
         return Outcome3{meet(r.simple.outcome, r.equivalent.outcome),
                         {{"simplified", r.morphism.to_json()}, {"simple", to_json(r.simple)}, {"equivalent", to_json(r.equivalent)}}};
       }},
      {"reindex",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 1, 1, "reindex <workspace> <f>");
         const ReindexResult r = reindex(ws.jmorphism(args[0]), opt.limits);
         const Outcome o = meet(meet(r.level_ok.outcome, r.square.outcome), meet(r.i_iso.outcome, r.j_iso.outcome));
         return Outcome3{o, r.to_json()};
       }},
      {"is-iso",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 1, 1, "is-iso <workspace> <f>");
         Json route;
         const LevelPair lp = iso_subject(ws.jmorphism(args[0]), opt.limits, route);
         const MoritaResult m = morita_check(lp, opt.limits);
         Json ev = m.verdict.evidence;
         ev["route"] = route;
         if (m.witness) {
           const JMorphism g = morita_inverse(lp, *m.witness, opt.limits);
           ev["inverse"] = g.to_json();
         }
         return Outcome3{m.verdict.outcome, ev};
       }},
      {"hom-classes",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 3, 3, "hom-classes <workspace> <X> <Y> <J>");
         const auto classes = hom_classes(ws.system(args[0]), ws.system(args[1]), ws.poset(args[2]), opt.limits);
         Json list = Json::array();
         for (const auto& c : classes) list.push_back({{"representative", c.representative.to_json()}, {"members", c.members}});
         return Outcome3{Outcome::Holds, {{"count", classes.size()}, {"classes", list}}};
       }},
      {"transfer",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 2, 2, "transfer <workspace> <f> <phi>");
         const JMorphism t = transfer(ws.jmorphism(args[0]), ws.map(args[1]), opt.limits);
         const JCheck c = check_jmorphism(t, opt.limits);
         return Outcome3{c.verdict.outcome, {{"transferred", t.to_json()}, {"check", check_json(c)}}};
       }},
      {"collapse",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 1, 1, "collapse <workspace> <f>");
         const JMorphism p = collapse_to_pro(ws.jmorphism(args[0]));
         const JCheck c = check_jmorphism(p, opt.limits);
         return Outcome3{c.verdict.outcome, {{"collapsed", p.to_json()}, {"check", check_json(c)}}};
       }},
      {"shape-eq",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 2, 3, "shape-eq <workspace> <P> <Q> [J]");
         const ProReflectivePair& p = pick_pair(ws, opt);
         const IndexPoset J = args.size() == 3 ? ws.poset(args[2]) : IndexPoset::singleton();
         return from_verdict(same_shape_on_D(p, pair_object(p, args[0]), pair_object(p, args[1]), J, opt.limits));
       }},
      {"expand-check",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 1, 1, "expand-check <workspace> <X>");
         const ProReflectivePair& p = pick_pair(ws, opt);
         return from_verdict(check_expansion(p, p.expansion(pair_object(p, args[0]))));
       }},
      {"lift",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 1, 1, "lift <workspace> <H>");
         const Cone& h = ws.cone(args[0]);
         const ProReflectivePair& p = ws.pair(h.pair);
         const JShapeMorphism f = lift_system_morphism(p, h.x, h.y, h.components, opt.limits);
         const Verdict v = verify_lift(p, f, h.components, opt.limits);
         return Outcome3{v.outcome, {{"lift", f.to_json()}, {"components", v.evidence}}};
       }},
      {"tower-iso",
       [](const Workspace& ws, const std::vector<std::string>& args, const CliOptions& opt) {
         arity(args, 1, 1, "tower-iso <workspace> <f> --gamma <spec>");
         if (!opt.gamma) throw Error("Usage", "tower-iso needs --gamma, e.g. --gamma j");
         return from_verdict(tower_iso_check(ws.jmorphism(args[0]), parse_radius(*opt.gamma), opt.limits));
       }},
  };
  return table;
}

int exit_for(Outcome o) {
  switch (o) {
    case Outcome::Holds: return 0;
    case Outcome::Fails: return 1;
    default: return 2;
  }
}

int exit_for_error(const std::string& kind) {
  return kind == "BudgetExceeded" || kind == "Inconclusive" || kind == "Overflow" ? 2 : 1;
}

// Re-verifies the witnesses recorded in an earlier report; other commands are
// re-run and their evidence compared.
Json replay(const Workspace& ws, const std::string& command, const std::vector<std::string>& args, const Json& old,
            const Json& fresh, const CliOptions& opt) {
  const Json& ev = old.at("evidence");
  const std::string verdict = old.at("verdict").get<std::string>();
  auto result = [](bool ok, const std::string& method, Json detail = Json::object()) {
    Json r = {{"verified", ok}, {"method", method}};
    if (!detail.empty()) r["detail"] = detail;
    return r;
  };
  if (command == "check-jmorphism" && verdict == "Holds") {
    const JMorphism& f = ws.jmorphism(args[0]);
    const auto& L = f.source().index();
    const auto& M = f.target().index();
    for (const auto& p : ev.at("pairs")) {
      const Verdict v = verify_pair_witness(f, M.parse(p.at("mu").get<std::string>()), M.parse(p.at("mu_prime").get<std::string>()),
                                            L.parse(p.at("lambda").get<std::string>()), f.J().parse(p.at("j").get<std::string>()),
                                            opt.limits);
      if (!v.is_holds()) return result(false, "pair witnesses", p);
    }
    return result(true, "pair witnesses");
  }
  if (command == "equivalent" && verdict == "Holds") {
    const JMorphism& a = ws.jmorphism(args[0]);
    const JMorphism& b = ws.jmorphism(args[1]);
    const auto& X = a.source();
    const auto& L = X.index();
    const auto& M = a.target().index();
    for (const auto& e : ev.at("indices")) {
      const Elem mu = M.parse(e.at("mu").get<std::string>());
      const Elem lam = L.parse(e.at("lambda").get<std::string>());
      const Elem la = a.index_fn()(mu), lb = b.index_fn()(mu);
      if (!L.leq(la, lam) || !L.leq(lb, lam)) return result(false, "index witnesses", e);
      const Verdict v = tail_equal_from(a.family(mu).after(X.bond(la, lam)), b.family(mu).after(X.bond(lb, lam)),
                                        a.J().parse(e.at("j").get<std::string>()), opt.limits);
      if (!v.is_holds()) return result(false, "index witnesses", e);
    }
    return result(true, "index witnesses");
  }
  if (command == "is-iso" && verdict == "Holds") {
    Json route;
    const LevelPair lp = iso_subject(ws.jmorphism(args[0]), opt.limits, route);
    const Verdict v = verify_witness(lp, parse_witness(lp, ev));
    return result(v.is_holds(), "morita witness", v.evidence);
  }
  const bool same = fresh.at("verdict") == old.at("verdict") && fresh.at("evidence") == ev;
  return result(same, "re-run comparison");
}

}  // namespace

const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : handlers()) out.push_back(k);
    return out;
  }();
  return names;
}

CliResult run_command(const std::string& command, const std::filesystem::path& workspace,
                      const std::vector<std::string>& args, const CliOptions& options) {
  Json report = {{"schema", kReportSchema}, {"command", command}, {"args", args}};
  CliResult out;
  try {
    auto it = handlers().find(command);
    if (it == handlers().end()) throw Error("Usage", "unknown command '" + command + "'");
    const Workspace ws = Workspace::load(workspace);
    const Outcome3 r = it->second(ws, args, options);
    report["verdict"] = to_string(r.outcome);
    report["evidence"] = r.evidence;
    out.exit_code = exit_for(r.outcome);
    if (options.replay) {
      std::ifstream in(*options.replay);
      if (!in) throw Error("UnresolvedReference", "cannot read replay file " + options.replay->string());
      const Json old = Json::parse(in);
      if (old.value("schema", "") != kReportSchema || old.value("command", "") != command || old.value("args", Json()) != Json(args))
        throw Error("Malformed", "replay report does not match this command");
      const Json rep = replay(ws, command, args, old, report, options);
      report["replay"] = rep;
      if (!rep.at("verified").get<bool>()) out.exit_code = 1;
    }
  } catch (const WorkspaceError& e) {
    report["verdict"] = "Error";
    report["error"] = {{"kind", e.kind()}, {"message", e.detail()}, {"file", e.file()}, {"line", e.line()}, {"column", e.column()}};
    out.exit_code = exit_for_error(e.kind());
  } catch (const Error& e) {
    report["verdict"] = "Error";
    report["error"] = {{"kind", e.kind()}, {"message", e.what()}};
    out.exit_code = exit_for_error(e.kind());
  } catch (const Json::exception& e) {
    report["verdict"] = "Error";
    report["error"] = {{"kind", "Malformed"}, {"message", e.what()}};
    out.exit_code = 1;
  }
  out.report = report;
  return out;
}

std::string render_text(const Json& report) {
  std::ostringstream os;
  os << report.at("command").get<std::string>();
  for (const auto& a : report.at("args")) os << ' ' << a.get<std::string>();
  os << ": " << report.at("verdict").get<std::string>() << '\n';
  if (report.contains("error")) {
    const Json& e = report.at("error");
    os << "error (" << e.at("kind").get<std::string>() << "): ";
    if (e.contains("line"))
      os << e.at("file").get<std::string>() << ':' << e.at("line").get<int>() << ':' << e.at("column").get<int>() << ": ";
    os << e.at("message").get<std::string>() << '\n';
  }
  if (report.contains("evidence")) os << report.at("evidence").dump(2) << '\n';
  if (report.contains("replay")) os << "replay: " << report.at("replay").dump() << '\n';
  return os.str();
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Decision procedures for J-morphisms, pro-categories and J-shape"};
  std::string command, workspace;
  std::vector<std::string> args;
  CliOptions opt;
  if (const char* env = std::getenv(kHorizonEnv)) {
    try {
      opt.limits.horizon = std::stoll(env);
    } catch (const std::exception&) {
      std::cerr << "ignoring malformed " << kHorizonEnv << '\n';
    }
  }
  std::string replay_path, gamma, pair;
  std::string names;
  for (const auto& c : cli_commands()) names += (names.empty() ? "" : ", ") + c;
  app.add_option("command", command, "One of: " + names)->required();
  app.add_option("workspace", workspace, "Workspace file")->required();
  app.add_option("args", args, "Command arguments");
  app.add_flag("--json", opt.json, "Print the structured report");
  app.add_option("--replay", replay_path, "Re-verify the witnesses of an earlier --json report");
  app.add_option("--horizon", opt.limits.horizon, "Search horizon (default 64 or $PROCAT_HORIZON)");
  app.add_option("--budget", opt.limits.budget, "Search budget in candidate visits");
  app.add_option("--gamma", gamma, "Commutativity radius for tower-iso, e.g. 'j' or '2*j+1'");
  app.add_option("--pair", pair, "Pro-reflective pair for shape commands");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (!replay_path.empty()) opt.replay = replay_path;
  if (!gamma.empty()) opt.gamma = gamma;
  if (!pair.empty()) opt.pair = pair;
  if (opt.limits.horizon <= 0 || opt.limits.budget <= 0) {
    std::cerr << "horizon and budget must be positive\n";
    return 1;
  }
  const CliResult r = run_command(command, workspace, args, opt);
  if (opt.json) std::cout << r.report.dump(2) << '\n';
  else std::cout << render_text(r.report);
  return r.exit_code;
}

}  // namespace procat
