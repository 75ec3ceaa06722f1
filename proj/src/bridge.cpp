#include "loopf/bridge.hpp"

#include <functional>

namespace loopf::bridge {

using namespace loopf;
using namespace loopf::flang;
using namespace loopf::types;
using arith::FoPtr;
using ilang::CK;
using ilang::Command;
using ilang::EK;
using ilang::SK;

// -------------------------------------------------------------------- star

namespace {

Pattern pattern_of(const std::vector<std::string>& names) {
  if (names.empty()) return Pattern::unit();
  if (names.size() == 1) return Pattern::name(names[0]);
  return Pattern::tuple(names);
}

FP vars_tuple(const std::vector<std::string>& names) {
  if (names.empty()) return f_unit();
  std::vector<FP> vs;
  for (const auto& n : names) vs.push_back(f_var(n));
  return f_tuple(std::move(vs));
}

}  // namespace

FP star_expr(const EP& e) {
  switch (e->k) {
    case EK::Var:
      return f_var(e->name);
    case EK::Star:
      return f_unit();
    case EK::Num:
      return f_num(e->num);
    case EK::Tuple: {
      std::vector<FP> comps;
      for (const auto& c : e->comps) comps.push_back(star_expr(c));
      return f_tuple(std::move(comps));
    }
    case EK::CallccConst:
      return f_callcc();
    case EK::ThrowConst:
      return f_throw();
    case EK::Proc: {
      FP body = star_seq(e->body, e->outs);
      std::map<std::string, FP> init;
      for (const auto& z : e->outs) init[z] = f_unit();
      body = f_subst(body, init);
      FP lam = f_lam(pattern_of(e->ins), body);
      // carry the declared dependent type across as an ascription
      bool full = e->in_types.size() == e->ins.size() &&
                  e->out_types.size() == e->outs.size();
      for (const auto& t : e->in_types) full = full && t != nullptr;
      for (const auto& t : e->out_types) full = full && t != nullptr;
      if (full && !e->in_types.empty()) {
        std::vector<DF> ins, outs;
        for (const auto& t : e->in_types) ins.push_back(star_type(t));
        for (const auto& t : e->out_types) outs.push_back(star_type(t));
        return f_ascribe(lam, df_forall(e->ivars, pack_df(ins), pack_df(outs)));
      }
      return lam;
    }
  }
  return f_unit();
}

FP star_seq(const SP& s, const std::vector<std::string>& outs) {
  switch (s->k) {
    case SK::Empty:
      return vars_tuple(outs);
    case SK::Cst:
      return f_let(Pattern::name(s->name), star_expr(s->init),
                   star_seq(s->rest, outs));
    case SK::Var: {
      FP rest = star_seq(s->rest, outs);
      return f_subst(rest, {{s->name, star_expr(s->init)}});
    }
    case SK::Cmd:
      break;
  }
  const Command& c = *s->cmd;
  FP rest = star_seq(s->rest, outs);
  switch (c.k) {
    case CK::Assign:
      return f_let(pattern_of(c.targets), star_expr(c.src), rest);
    case CK::Inc:
      return f_let(Pattern::name(c.var), f_app(f_succ_const(), f_var(c.var)), rest);
    case CK::Dec:
      return f_let(Pattern::name(c.var), f_pred(f_var(c.var)), rest);
    case CK::Call: {
      std::vector<FP> args;
      for (const auto& a : c.args) args.push_back(star_expr(a));
      FP call = f_app(star_expr(c.callee), f_tuple(std::move(args)));
      return f_let(pattern_of(c.call_outs), call, rest);
    }
    case CK::Block:
      return f_let(pattern_of(c.annot), star_seq(c.body, c.annot), rest);
    case CK::For: {
      FP step = f_lam(Pattern::name(c.loop_var),
                      f_lam(pattern_of(c.annot), star_seq(c.body, c.annot)));
      std::optional<std::string> mv;
      DF motive;
      if (c.inv_var && !c.invariant.empty()) {
        // the motive needs one component per annotated mutable, in order
        std::map<std::string, types::DI> inv(c.invariant.begin(), c.invariant.end());
        bool full = true;
        std::vector<DF> comps;
        for (const auto& x : c.annot) {
          auto it = inv.find(x);
          if (it == inv.end()) {
            full = false;
            break;
          }
          comps.push_back(star_type(it->second));
        }
        if (full) {
          mv = *c.inv_var;
          motive = pack_df(comps);
        }
      }
      FP loop = f_rec(star_expr(c.bound), vars_tuple(c.annot), std::move(step), mv,
                      std::move(motive));
      return f_let(pattern_of(c.annot), std::move(loop), rest);
    }
    case CK::SubstHint: {
      std::vector<std::string> names;
      std::vector<DF> tys;
      for (const auto& [x, t] : c.hint_items) {
        names.push_back(x);
        tys.push_back(star_type(t));
      }
      FP ev = c.hint_ev ? star_expr(c.hint_ev) : (c.hint_label ? f_unit() : nullptr);
      FP node = f_subst_node(vars_tuple(names), ev, c.hint_hole, pack_df(tys),
                             c.hint_label);
      return f_let(pattern_of(names), std::move(node), rest);
    }
    case CK::Label:
    case CK::Jump:
      throw ilang::DesugarError{"labels/jumps must be desugared before star"};
  }
  return rest;
}

FP star_state(const ilang::State& st, const std::vector<std::string>& outs) {
  FP t = star_seq(st.seq, outs);
  std::map<std::string, FP> env;
  for (const auto& [x, w] : st.store.items) env[x] = star_expr(w);
  return f_subst(t, env);
}

// ----------------------------------------------------------------- diamond

std::size_t l_arity(const FP& t) {
  if (t->k == FK::Let) return l_arity(t->sub[1]);
  if (t->k == FK::Tuple) return t->sub.size();
  return 1;
}

namespace {

// inject a simple type into the dependent grammar (kappa returns it);
// used only so the procedures diamond introduces carry annotations the
// simple checker can consume
types::DI di_of_si(const types::SI& t) {
  switch (t->k) {
    case types::SIK::Nat: return di_nat(arith::fo_zero());
    case types::SIK::Unit: return di_top();
    case types::SIK::Bottom: return di_bottom();
    case types::SIK::Atom: return di_atom(t->atom);
    case types::SIK::Tuple: {
      std::vector<types::DI> cs;
      for (const auto& c : t->comps) cs.push_back(di_of_si(c));
      return di_exists({}, std::move(cs));
    }
    case types::SIK::Proc: {
      std::vector<types::DI> ins, outs;
      for (const auto& c : t->ins) ins.push_back(di_of_si(c));
      for (const auto& c : t->outs) outs.push_back(di_of_si(c));
      return di_proc({}, std::move(ins), std::move(outs));
    }
  }
  return di_top();
}

types::DI proc_param_type(const SfMap* tys, const FP& node, std::size_t idx,
                          std::size_t arity, bool in_side) {
  if (!tys) return nullptr;
  auto it = tys->find(node.get());
  if (it == tys->end()) return nullptr;
  const types::SF& fty = it->second;
  if (fty->k != types::SFK::Arrow) return nullptr;
  auto comps = in_side ? unpack_sf(fty->a) : unpack_sf(fty->b);
  if (comps.size() != arity) {
    if (arity != 1) return nullptr;
    comps = {in_side ? fty->a : fty->b};  // one slot holding a tuple
  }
  if (idx >= arity) return nullptr;
  return di_of_si(diamond_type(comps[idx]));
}

std::vector<std::string> fresh_names(flang::FreshGen& g, const std::string& base,
                                     std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(g.fresh(base));
  return out;
}

SP assigns(const std::vector<std::string>& targets, const std::vector<EP>& vals,
           SP rest) {
  for (std::size_t i = targets.size(); i-- > 0;)
    rest = ilang::s_cmd(ilang::c_assign({targets[i]}, vals[i]), rest);
  return rest;
}

SP csts(const std::vector<std::string>& names, const std::vector<std::string>& from,
        SP rest) {
  for (std::size_t i = names.size(); i-- > 0;)
    rest = ilang::s_cst(names[i], ilang::e_var(from[i]), rest);
  return rest;
}

// the L_n width of a term: by type when available, else syntactic
std::size_t width_of(const FP& t, const SfMap* tys) {
  if (tys) {
    auto it = tys->find(t.get());
    if (it != tys->end()) return unpack_sf(it->second).size();
  }
  return l_arity(t);
}

// bind the let pattern xs from the intermediate mutables zs
SP bind_pattern(const std::vector<std::string>& xs, const std::vector<std::string>& zs,
                SP rest) {
  if (xs.size() == zs.size()) return csts(xs, zs, std::move(rest));
  if (xs.size() == 1) {
    std::vector<EP> comps;
    for (const auto& z : zs) comps.push_back(ilang::e_var(z));
    return ilang::s_cst(xs[0], ilang::e_tuple(std::move(comps)), std::move(rest));
  }
  throw NotMonadic{"pattern arity does not match the component width"};
}

}  // namespace

EP diamond_value(const FP& v, flang::FreshGen& g, const SfMap* tys) {
  switch (v->k) {
    case FK::Unit:
      return ilang::e_star();
    case FK::Zero:
      return ilang::e_num(0);
    case FK::Succ: {
      if (v->sub[0]->k != FK::Zero) throw NotMonadic{"successor of a non-zero value"};
      return ilang::e_num(v->count);
    }
    case FK::Var:
      return ilang::e_var(v->name);
    case FK::Callcc:
      return ilang::e_callcc();
    case FK::Throw:
      return ilang::e_throw();
    case FK::SuccConst: {
      // eta-expanded: proc (in x; out z) { var w := x; inc(w); cst y = w; z := y; }
      std::string x = g.fresh("x"), z = g.fresh("z"), w = g.fresh("z"),
                  y = g.fresh("y");
      SP body = ilang::s_var(
          w, ilang::e_var(x),
          ilang::s_cmd(ilang::c_inc(w),
                       ilang::s_cst(y, ilang::e_var(w),
                                    ilang::s_cmd(ilang::c_assign({z}, ilang::e_var(y)),
                                                 ilang::s_empty()))));
      return ilang::e_proc({}, {x}, {z}, body);
    }
    case FK::Tuple: {
      std::vector<EP> comps;
      for (const auto& c : v->sub) comps.push_back(diamond_value(c, g, tys));
      return ilang::e_tuple(std::move(comps));
    }
    case FK::Lam: {
      std::size_t n = width_of(v->sub[0], tys);
      std::vector<std::string> outs = fresh_names(g, "z", n);
      std::vector<std::string> ins;
      switch (v->pat.k) {
        case Pattern::K::Name:
        case Pattern::K::Tuple:
          ins = v->pat.names;
          break;
        case Pattern::K::Unit:
          break;
      }
      std::vector<types::DI> in_tys, out_tys;
      bool have = tys && tys->count(v.get());
      if (have) {
        for (std::size_t i = 0; i < ins.size(); ++i)
          in_tys.push_back(proc_param_type(tys, v, i, ins.size(), true));
        for (std::size_t i = 0; i < n; ++i)
          out_tys.push_back(proc_param_type(tys, v, i, n, false));
        for (const auto& t : in_tys)
          if (!t) have = false;
        for (const auto& t : out_tys)
          if (!t) have = false;
      }
      SP body = diamond_term(v->sub[0], outs, g, tys);
      if (have)
        return ilang::e_proc({}, ins, outs, body, in_tys, out_tys);
      return ilang::e_proc({}, ins, outs, body);
    }
    default:
      throw NotMonadic{"not a value of V: " + f_show(v)};
  }
}

SP diamond_term(const FP& t, const std::vector<std::string>& outs,
                flang::FreshGen& g, const SfMap* tys) {
  // (w)_r = r := w
  if (in_V(t)) {
    if (t->k == FK::Tuple && t->sub.size() == outs.size() && outs.size() > 1) {
      SP rest = ilang::s_empty();
      for (std::size_t i = outs.size(); i-- > 0;)
        rest = ilang::s_cmd(
            ilang::c_assign({outs[i]}, diamond_value(t->sub[i], g, tys)), rest);
      return rest;
    }
    // a single value (possibly tuple typed) assigned to the whole out vector
    return ilang::s_cmd(ilang::c_assign(outs, diamond_value(t, g, tys)),
                        ilang::s_empty());
  }
  if (t->k != FK::Let) throw NotMonadic{"not in L: " + f_show(t)};
  const FP& u = t->sub[0];
  const Pattern& pat = t->pat;
  auto names_of = [&](const Pattern& p) -> std::vector<std::string> {
    if (p.k == Pattern::K::Unit) return {};
    return p.names;
  };

  // let x = v in u'
  if (in_V(u)) {
    if (pat.k != Pattern::K::Name) {
      // let (x1..xn) = v in u' : bind components through fresh mutables
      std::vector<std::string> xs = names_of(pat);
      std::vector<std::string> zs = fresh_names(g, "z", xs.size());
      std::vector<EP> vals;
      if (u->k == FK::Tuple && u->sub.size() == xs.size()) {
        for (const auto& c : u->sub) vals.push_back(diamond_value(c, g, tys));
      } else {
        throw NotMonadic{"tuple let over a non-tuple value"};
      }
      SP rest = csts(xs, zs, diamond_term(t->sub[1], outs, g, tys));
      SP mid = assigns(zs, vals, rest);
      for (std::size_t i = zs.size(); i-- > 0;)
        mid = ilang::s_var(zs[i], ilang::e_star(), mid);
      return mid;
    }
    return ilang::s_cst(pat.names[0], diamond_value(u, g, tys),
                        diamond_term(t->sub[1], outs, g, tys));
  }

  // let x = succ(v) / pred(v) in u'
  if ((u->k == FK::App && u->sub[0]->k == FK::SuccConst && in_V(u->sub[1])) ||
      (u->k == FK::Pred && in_V(u->sub[0]))) {
    bool is_succ = u->k == FK::App;
    const FP& arg = is_succ ? u->sub[1] : u->sub[0];
    if (pat.k != Pattern::K::Name) throw NotMonadic{"succ/pred binds one name"};
    std::string z = g.fresh("z");
    SP rest = ilang::s_cst(pat.names[0], ilang::e_var(z),
                           diamond_term(t->sub[1], outs, g, tys));
    SP op = ilang::s_cmd(is_succ ? ilang::c_inc(z) : ilang::c_dec(z), rest);
    return ilang::s_var(z, diamond_value(arg, g, tys), op);
  }

  // let x... = v v' in u'
  if (u->k == FK::App && in_V(u->sub[0]) && in_V(u->sub[1])) {
    std::vector<std::string> xs = names_of(pat);
    std::size_t n = tys ? width_of(u, tys) : std::max<std::size_t>(xs.size(), 1);
    std::vector<std::string> zs = fresh_names(g, "z", n);
    std::vector<EP> args;
    std::size_t an = width_of(u->sub[1], tys);
    if (u->sub[1]->k == FK::Tuple && u->sub[1]->sub.size() == an) {
      for (const auto& a : u->sub[1]->sub) args.push_back(diamond_value(a, g, tys));
    } else if (an == 1 || u->sub[1]->k != FK::Tuple) {
      args.push_back(diamond_value(u->sub[1], g, tys));
    } else {
      throw NotMonadic{"call argument width mismatch"};
    }
    SP rest = bind_pattern(xs, zs, diamond_term(t->sub[1], outs, g, tys));
    SP call =
        ilang::s_cmd(ilang::c_call(diamond_value(u->sub[0], g, tys), args, zs), rest);
    for (std::size_t i = zs.size(); i-- > 0;)
      call = ilang::s_var(zs[i], ilang::e_star(), call);
    return call;
  }

  // let x... = rec(v, v', fn i => fn ys => body) in u'
  if (u->k == FK::Rec && in_V(u->sub[0]) && in_V(u->sub[1])) {
    const FP& step = u->sub[2];
    if (step->k != FK::Lam || step->sub[0]->k != FK::Lam)
      throw NotMonadic{"rec step is not a double lambda"};
    const Pattern& ypat = step->sub[0]->pat;
    std::vector<std::string> ys = names_of(ypat);
    std::vector<std::string> xs = names_of(pat);
    std::size_t n = tys ? width_of(u, tys) : std::max<std::size_t>(ys.size(), 1);
    std::vector<std::string> zs = fresh_names(g, "z", n);
    std::vector<EP> inits;
    if (u->sub[1]->k == FK::Tuple && u->sub[1]->sub.size() == n) {
      for (const auto& b : u->sub[1]->sub) inits.push_back(diamond_value(b, g, tys));
    } else if (n == 1) {
      inits.push_back(diamond_value(u->sub[1], g, tys));
    } else {
      throw NotMonadic{"rec base is not a matching tuple"};
    }
    // loop body: cst y = z; (body)_z
    SP loop = bind_pattern(ys, zs, diamond_term(step->sub[0]->sub[0], zs, g, tys));
    std::optional<std::string> iv;
    std::vector<std::pair<std::string, types::DI>> invariant;
    if (t->sub[0]->motive && t->sub[0]->motive_var) {
      auto comps = unpack_df(t->sub[0]->motive);
      if (comps.size() == zs.size()) {
        iv = *t->sub[0]->motive_var;
        for (std::size_t i = 0; i < zs.size(); ++i)
          invariant.emplace_back(zs[i], diamond_type(comps[i]));
      }
    }
    SP rest = bind_pattern(xs, zs, diamond_term(t->sub[1], outs, g, tys));
    SP body = ilang::s_cmd(
        ilang::c_for(step->pat.names[0], diamond_value(u->sub[0], g, tys), loop, zs,
                     iv, invariant),
        rest);
    for (std::size_t i = zs.size(); i-- > 0;)
      body = ilang::s_var(zs[i], inits[i], body);
    return body;
  }

  // let x... = t' in u' with t' in L
  if (in_L(u)) {
    std::vector<std::string> xs = names_of(pat);
    std::size_t n = tys ? width_of(u, tys) : std::max<std::size_t>(xs.size(), 1);
    std::vector<std::string> zs = fresh_names(g, "z", n);
    SP rest = bind_pattern(xs, zs, diamond_term(t->sub[1], outs, g, tys));
    SP block = ilang::s_cmd(ilang::c_block(diamond_term(u, zs, g, tys), zs), rest);
    for (std::size_t i = zs.size(); i-- > 0;)
      block = ilang::s_var(zs[i], ilang::e_star(), block);
    return block;
  }
  throw NotMonadic{"not in L: " + f_show(t)};
}

// --------------------------------------------------------------- simulation

SimulationReport check_simulation(SP s, Store mu, const std::vector<std::string>& outs,
                                  long long fuel, long long per_step_cap) {
  SimulationReport rep;
  ilang::State st{std::move(s), std::move(mu)};
  FP cur = erase(star_state(st, outs));
  for (long long step = 0; step < fuel; ++step) {
    auto r = ilang::i_step(st);
    if (r.status == ilang::IStatus::AtEmpty) {
      rep.pass = true;
      rep.total_steps = step;
      return rep;
    }
    if (r.status == ilang::IStatus::Stuck) {
      rep.error = "imperative step stuck: " + r.why;
      return rep;
    }
    FP target = erase(star_state(r.state, outs));
    FP probe = cur;
    FP target_canon = let_normalize(target);
    bool matched = false;
    long long used = 0;
    for (long long k = 0; k <= per_step_cap; ++k) {
      if (f_alpha_eq(let_normalize(probe), target_canon)) {
        matched = true;
        used = k;
        break;
      }
      auto fs = f_step(probe);
      if (fs.status != StepStatus::Stepped) break;
      probe = fs.term;
    }
    if (!matched) {
      rep.error = "SimulationFailure after imperative step " + std::to_string(step) +
                  "\n  source image: " + f_show(cur) +
                  "\n  target image: " + f_show(target);
      return rep;
    }
    rep.steps.push_back({ilang::i_show(st.seq).substr(0, 32), used});
    rep.max_f_steps = std::max(rep.max_f_steps, used);
    cur = target;
    st = std::move(r.state);
  }
  rep.error = "fuel exhausted";
  return rep;
}

// --------------------------------------------------------------- retraction

RetractionReport check_retraction(const FP& t, long long fuel) {
  RetractionReport rep;
  if (!in_L(t)) {
    rep.error = "input not in L";
    return rep;
  }
  flang::FreshGen g;
  g.avoid(t);
  std::size_t n = l_arity(t);
  std::vector<std::string> rs;
  for (std::size_t i = 0; i < n; ++i) rs.push_back(g.fresh("r"));
  SP imp;
  try {
    imp = diamond_term(t, rs, g);
  } catch (const NotMonadic& e) {
    rep.error = "NotMonadic: " + e.message;
    return rep;
  }
  FP back = erase(star_seq(imp, rs));
  auto n1 = f_normalize(back, fuel);
  auto n2 = f_normalize(erase(t), fuel);
  if (n1.status != RunStatus::Value || n2.status != RunStatus::Value) {
    rep.error = "FuelExhausted while normalizing";
    return rep;
  }
  rep.normal_lhs = n1.term;
  rep.normal_rhs = n2.term;
  if (!f_alpha_eq(n1.term, n2.term)) {
    rep.error = "Counterexample: " + f_show(n1.term) + "  vs  " + f_show(n2.term);
    return rep;
  }
  // numerals and unit round-trip exactly (Props 2.19 / 2.20)
  if (t->k == FK::Unit || (t->k == FK::Succ && t->sub[0]->k == FK::Zero) ||
      t->k == FK::Zero) {
    FP exact = star_expr(diamond_value(t, g));
    if (!f_equal_raw(exact, t)) {
      rep.error = "numeral/unit round trip is not exact";
      return rep;
    }
  }
  rep.pass = true;
  return rep;
}

// ------------------------------------------------------------ representation

RepresentsReport check_represents(const EP& p, const std::string& fsym,
                                  const arith::EqSystem& E,
                                  const std::vector<std::vector<arith::Nat>>& inputs,
                                  long long fuel) {
  RepresentsReport rep;
  FP pstar = erase(star_expr(p));
  for (const auto& in : inputs) {
    // imperative run
    SP call;
    {
      std::vector<EP> args;
      for (const auto& n : in) args.push_back(ilang::e_num(n));
      call = ilang::s_cst("p", p,
                          ilang::s_cmd(ilang::c_call(ilang::e_var("p"), args, {"r"}),
                                       ilang::s_empty()));
    }
    Store mu;
    mu.extend("r", ilang::e_star());
    auto ir = ilang::i_run(call, mu, fuel);
    if (ir.status != ilang::IRunStatus::Done) {
      rep.error = "i-run failed: " + ir.why;
      return rep;
    }
    const EP* rv = ir.store.lookup("r");
    if (!rv || (*rv)->k != EK::Num) {
      rep.error = "i-run produced a non-numeral";
      return rep;
    }
    // oracle
    std::vector<FoPtr> fo_args;
    for (const auto& n : in) fo_args.push_back(arith::fo_num(n));
    auto oe = arith::fo_eval(E, arith::fo_app(fsym, fo_args), fuel);
    if (oe.status != arith::EvalStatus::Value) {
      rep.error = "fo-eval failed on " + fsym;
      return rep;
    }
    // functional run
    std::vector<FP> fargs;
    for (const auto& n : in) fargs.push_back(f_num(n));
    auto fr = f_eval(f_app(pstar, f_tuple(std::move(fargs))), fuel);
    if (fr.status != RunStatus::Value) {
      rep.error = "f-eval of p* failed";
      return rep;
    }
    arith::Nat imp_val = (*rv)->num;
    auto oracle_val = arith::fo_numeral_value(oe.term);
    auto fun_val = fr.term->k == FK::Zero
                       ? arith::Nat(0)
                       : (fr.term->k == FK::Succ && fr.term->sub[0]->k == FK::Zero
                              ? fr.term->count
                              : arith::Nat(-1));
    if (!oracle_val || imp_val != *oracle_val || fun_val != *oracle_val) {
      std::string shown;
      for (const auto& n : in) shown += n.str() + " ";
      rep.error = "Mismatch at " + shown + ": imperative " + imp_val.str() +
                  ", functional " + fun_val.str() + ", oracle " + oracle_val->str();
      return rep;
    }
    ++rep.cases;
  }
  rep.pass = true;
  return rep;
}

}  // namespace loopf::bridge
