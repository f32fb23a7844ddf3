#include "ebm2/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ebm2/errors.hpp"
#include "json.hpp"

namespace ebm2 {
namespace {

using json = nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reader over one JSON object that remembers which keys were consumed.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string key(const std::string& k) const { return join(path_, k); }

  const json* get(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  void num(const std::string& k, double& out) {
    if (const json* v = get(k)) {
      if (!v->is_number()) throw ConfigError(key(k), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(key(k), "must be finite");
    }
  }
  void integer(const std::string& k, int& out) {
    if (const json* v = get(k)) {
      if (!v->is_number_integer()) throw ConfigError(key(k), "expected an integer");
      out = v->get<int>();
    }
  }
  void integer(const std::string& k, long& out) {
    if (const json* v = get(k)) {
      if (!v->is_number_integer()) throw ConfigError(key(k), "expected an integer");
      out = v->get<long>();
    }
  }
  void u64(const std::string& k, std::uint64_t& out) {
    if (const json* v = get(k)) {
      if (!v->is_number_unsigned()) throw ConfigError(key(k), "expected an unsigned integer");
      out = v->get<std::uint64_t>();
    }
  }
  void boolean(const std::string& k, bool& out) {
    if (const json* v = get(k)) {
      if (!v->is_boolean()) throw ConfigError(key(k), "expected true or false");
      out = v->get<bool>();
    }
  }
  void str(const std::string& k, std::string& out) {
    if (const json* v = get(k)) {
      if (!v->is_string()) throw ConfigError(key(k), "expected a string");
      out = v->get<std::string>();
    }
  }
  void numbers(const std::string& k, std::vector<double>& out) {
    if (const json* v = get(k)) {
      if (!v->is_array()) throw ConfigError(key(k), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        if (!e.is_number())
          throw ConfigError(key(k) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(e.get<double>());
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const char* what) {
  if (!ok) throw ConfigError(key, what);
}

Coalbedo parse_coalbedo(const json& j, const std::string& path) {
  Obj o(j, path);
  std::string kind = "constant";
  o.str("kind", kind);
  Coalbedo b;
  if (kind == "constant") {
    double v = 0.0;
    o.num("value", v);
    require(v >= 0.0, o.key("value"), "must be >= 0");
    b = Coalbedo::constant(v);
  } else if (kind == "ramp") {
    double lo = 0.0, hi = 1.0, tl = 0.0, th = 1.0;
    o.num("beta_min", lo);
    o.num("beta_max", hi);
    o.num("t_low", tl);
    o.num("t_high", th);
    require(lo >= 0.0, o.key("beta_min"), "must be >= 0");
    require(hi >= lo, o.key("beta_max"), "must be >= beta_min");
    require(th > tl, o.key("t_high"), "must exceed t_low");
    b = Coalbedo::ramp(lo, hi, tl, th);
  } else {
    throw ConfigError(o.key("kind"), "expected \"constant\" or \"ramp\"");
  }
  o.finish();
  return b;
}

json coalbedo_json(const Coalbedo& b) {
  if (b.kind == Coalbedo::Kind::constant) return {{"kind", "constant"}, {"value", b.beta_min}};
  return {{"kind", "ramp"},     {"beta_min", b.beta_min}, {"beta_max", b.beta_max},
          {"t_low", b.t_low}, {"t_high", b.t_high}};
}

void parse_model(RunConfig& c, const json& j) {
  Obj o(j, "model");
  ModelParams& p = c.params;
  o.num("gamma_a", p.gamma_a);
  o.num("gamma_s", p.gamma_s);
  o.num("kappa_a", p.kappa_a);
  o.num("kappa_s", p.kappa_s);
  o.num("sigma_b", p.sigma_b);
  o.num("eps_a", p.eps_a);
  o.num("lambda", p.lambda);
  o.boolean("decoupled", p.decoupled);
  std::string terms = "full";
  o.str("terms", terms);
  o.finish();
  if (terms == "full") c.terms = ReactionTerms::full;
  else if (terms == "coupling_only") c.terms = ReactionTerms::coupling_only;
  else if (terms == "none") c.terms = ReactionTerms::none;
  else throw ConfigError("model.terms", "expected \"full\", \"coupling_only\" or \"none\"");

  for (auto [k, v] : {std::pair{"gamma_a", p.gamma_a}, {"gamma_s", p.gamma_s},
                      {"kappa_a", p.kappa_a}, {"kappa_s", p.kappa_s}, {"sigma_b", p.sigma_b}})
    require(v > 0.0, join("model", k), "must be > 0");
  require(p.decoupled ? p.eps_a >= 0.0 : p.eps_a > 0.0, "model.eps_a",
          p.decoupled ? "must be >= 0" : "must be > 0");
  require(p.lambda >= 0.0, "model.lambda", "must be >= 0");
}

void parse_forcing(RunConfig& c, const json& j) {
  Obj o(j, "forcing");
  if (const json* q = o.get("q")) {
    Obj qo(*q, "forcing.q");
    std::string kind = "constant";
    qo.str("kind", kind);
    qo.num("q0", c.q.q0);
    if (kind == "constant") {
      c.q.kind = QShape::Kind::constant;
    } else if (kind == "p2") {
      c.q.kind = QShape::Kind::p2;
      qo.num("s2", c.q.s2);
      require(c.q.s2 >= -1.0 && c.q.s2 <= 2.0, "forcing.q.s2", "must lie in [-1, 2] so q >= 0");
    } else if (kind == "bump") {
      c.q.kind = QShape::Kind::bump;
      qo.num("center", c.q.center);
      qo.num("width", c.q.width);
      require(c.q.width > 0.0, "forcing.q.width", "must be > 0");
    } else {
      throw ConfigError("forcing.q.kind", "expected \"constant\", \"p2\" or \"bump\"");
    }
    qo.finish();
    require(c.q.q0 >= 0.0, "forcing.q.q0", "must be >= 0");
  }
  if (const json* r = o.get("r")) {
    Obj ro(*r, "forcing.r");
    std::string kind = "constant";
    ro.str("kind", kind);
    ro.num("r0", c.r0);
    if (kind == "constant") {
      c.r_kind = Forcing::RKind::constant;
    } else if (kind == "sinusoidal") {
      c.r_kind = Forcing::RKind::sinusoidal;
      ro.num("delta", c.r_delta);
      ro.num("omega", c.r_omega);
      require(c.r_delta >= 0.0 && c.r_delta < 1.0, "forcing.r.delta", "must lie in [0, 1)");
    } else {
      throw ConfigError("forcing.r.kind", "expected \"constant\" or \"sinusoidal\"");
    }
    ro.finish();
    require(c.r0 > 0.0, "forcing.r.r0", "must be > 0");
  }
  if (const json* b = o.get("beta_a")) c.beta_a = parse_coalbedo(*b, "forcing.beta_a");
  if (const json* b = o.get("beta_s")) c.beta_s = parse_coalbedo(*b, "forcing.beta_s");
  o.finish();
}

void parse_ic(RunConfig& c, const json& j) {
  Obj o(j, "ic");
  std::string kind = "constant";
  o.str("kind", kind);
  IcConfig& ic = c.ic;
  if (kind == "constant") {
    ic.kind = IcConfig::Kind::constant;
    o.num("t_a", ic.t_a);
    o.num("t_s", ic.t_s);
  } else if (kind == "legendre-coeffs") {
    ic.kind = IcConfig::Kind::legendre_coeffs;
    o.numbers("t_a", ic.coeffs_a);
    o.numbers("t_s", ic.coeffs_s);
    require(ic.coeffs_a.size() <= std::size_t(c.n_modes), "ic.t_a", "more coefficients than modes");
    require(ic.coeffs_s.size() <= std::size_t(c.n_modes), "ic.t_s", "more coefficients than modes");
  } else if (kind == "random") {
    ic.kind = IcConfig::Kind::random;
    require(o.has("seed"), "ic.seed", "random initial data need an explicit seed");
    o.u64("seed", ic.seed);
    o.num("mean_a", ic.random.mean_a);
    o.num("mean_s", ic.random.mean_s);
    o.num("mean_jitter", ic.random.mean_jitter);
    o.num("amp", ic.random.amp);
    o.integer("max_mode", ic.random.max_mode);
    if (o.has("floor")) {
      double f = 0.0;
      o.num("floor", f);
      ic.random.floor = f;
    }
    require(ic.random.max_mode >= 0, "ic.max_mode", "must be >= 0");
  } else {
    throw ConfigError("ic.kind", "expected \"constant\", \"legendre-coeffs\" or \"random\"");
  }
  o.finish();
}

void parse_run(RunConfig& c, const json& j) {
  Obj o(j, "run");
  StepControls& s = c.controls;
  o.num("t_max", c.t_max);
  o.num("dt_init", s.dt_init);
  o.num("rel_tol", s.rel_tol);
  o.num("dt_min", s.dt_min);
  o.num("blowup_threshold", s.blowup_threshold);
  o.num("record_every", s.record_every);
  o.integer("sup_eval", s.sup_eval);
  o.integer("max_steps", s.max_steps);
  o.finish();
  require(c.t_max > 0.0, "run.t_max", "must be > 0");
  require(s.dt_init > 0.0, "run.dt_init", "must be > 0");
  require(s.rel_tol > 0.0, "run.rel_tol", "must be > 0");
  require(s.dt_min > 0.0 && s.dt_min < s.dt_init, "run.dt_min", "must lie in (0, dt_init)");
  require(s.blowup_threshold > 0.0, "run.blowup_threshold", "must be > 0");
  require(s.record_every > 0.0, "run.record_every", "must be > 0");
  require(s.sup_eval >= 64, "run.sup_eval", "must be >= 64");
  require(s.max_steps > 0, "run.max_steps", "must be > 0");
}

void parse_outputs(RunConfig& c, const json& j) {
  Obj o(j, "outputs");
  o.str("dir", c.outputs.dir);
  if (const json* f = o.get("formats")) {
    if (!f->is_array()) throw ConfigError("outputs.formats", "expected an array of strings");
    c.outputs.formats.clear();
    for (std::size_t i = 0; i < f->size(); ++i) {
      const json& e = (*f)[i];
      const std::string k = "outputs.formats[" + std::to_string(i) + "]";
      if (!e.is_string()) throw ConfigError(k, "expected a string");
      const auto s = e.get<std::string>();
      if (s != "coeffs" && s != "nodal" && s != "energy")
        throw ConfigError(k, "expected \"coeffs\", \"nodal\" or \"energy\"");
      c.outputs.formats.push_back(s);
    }
  }
  o.integer("nodal_points", c.outputs.nodal_points);
  o.finish();
  require(c.outputs.nodal_points >= 2, "outputs.nodal_points", "must be >= 2");
}

RunConfig parse_json(const json& root) {
  Obj o(root, "");
  RunConfig c;
  const json* schema = o.get("schema");
  if (!schema) throw ConfigError("schema", "missing (expected 1)");
  if (!schema->is_number_integer() || schema->get<int>() != kConfigSchema)
    throw ConfigError("schema", "unsupported version (expected 1)");

  if (const json* g = o.get("grid")) {
    Obj go(*g, "grid");
    go.integer("n_modes", c.n_modes);
    go.integer("n_quad", c.n_quad);
    go.finish();
    require(c.n_modes >= 1 && c.n_modes <= 512, "grid.n_modes", "must lie in [1, 512]");
    require(c.n_quad == 0 || c.n_quad >= SpectralGrid::min_quad(c.n_modes), "grid.n_quad",
            "too few quadrature nodes for the quartic nonlinearity");
  }
  if (const json* m = o.get("model")) parse_model(c, *m);
  if (const json* f = o.get("forcing")) parse_forcing(c, *f);
  if (const json* i = o.get("ic")) parse_ic(c, *i);
  if (const json* r = o.get("run")) parse_run(c, *r);
  if (const json* out = o.get("outputs")) parse_outputs(c, *out);
  o.boolean("expect_blowup", c.expect_blowup);
  o.finish();

  // Backstop: whatever the per-key checks missed.
  const auto grid = c.make_grid();
  const auto v = validate(c.params, c.make_forcing(grid));
  if (!v.empty()) {
    std::string msg;
    for (const auto& s : v) msg += (msg.empty() ? "" : "; ") + s;
    throw ConfigError("model", msg);
  }
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["schema"] = kConfigSchema;
  j["grid"] = {{"n_modes", c.n_modes}, {"n_quad", c.n_quad}};
  const ModelParams& p = c.params;
  const char* terms = c.terms == ReactionTerms::full            ? "full"
                      : c.terms == ReactionTerms::coupling_only ? "coupling_only"
                                                                : "none";
  j["model"] = {{"gamma_a", p.gamma_a}, {"gamma_s", p.gamma_s}, {"kappa_a", p.kappa_a},
                {"kappa_s", p.kappa_s}, {"sigma_b", p.sigma_b}, {"eps_a", p.eps_a},
                {"lambda", p.lambda},   {"decoupled", p.decoupled}, {"terms", terms}};
  json q;
  switch (c.q.kind) {
    case QShape::Kind::constant: q = {{"kind", "constant"}, {"q0", c.q.q0}}; break;
    case QShape::Kind::p2: q = {{"kind", "p2"}, {"q0", c.q.q0}, {"s2", c.q.s2}}; break;
    case QShape::Kind::bump:
      q = {{"kind", "bump"}, {"q0", c.q.q0}, {"center", c.q.center}, {"width", c.q.width}};
      break;
    case QShape::Kind::nodal: throw ConfigError("forcing.q", "nodal shapes are not serializable");
  }
  json r = c.r_kind == Forcing::RKind::constant
               ? json{{"kind", "constant"}, {"r0", c.r0}}
               : json{{"kind", "sinusoidal"}, {"r0", c.r0}, {"delta", c.r_delta},
                      {"omega", c.r_omega}};
  j["forcing"] = {{"q", q}, {"r", r}, {"beta_a", coalbedo_json(c.beta_a)},
                  {"beta_s", coalbedo_json(c.beta_s)}};
  switch (c.ic.kind) {
    case IcConfig::Kind::constant:
      j["ic"] = {{"kind", "constant"}, {"t_a", c.ic.t_a}, {"t_s", c.ic.t_s}};
      break;
    case IcConfig::Kind::legendre_coeffs:
      j["ic"] = {{"kind", "legendre-coeffs"}, {"t_a", c.ic.coeffs_a}, {"t_s", c.ic.coeffs_s}};
      break;
    case IcConfig::Kind::random: {
      const auto& rs = c.ic.random;
      j["ic"] = {{"kind", "random"},  {"seed", c.ic.seed},   {"mean_a", rs.mean_a},
                 {"mean_s", rs.mean_s}, {"mean_jitter", rs.mean_jitter}, {"amp", rs.amp},
                 {"max_mode", rs.max_mode}};
      if (rs.floor) j["ic"]["floor"] = *rs.floor;
      break;
    }
  }
  const StepControls& s = c.controls;
  j["run"] = {{"t_max", c.t_max},
              {"dt_init", s.dt_init},
              {"rel_tol", s.rel_tol},
              {"dt_min", s.dt_min},
              {"blowup_threshold", s.blowup_threshold},
              {"record_every", s.record_every},
              {"sup_eval", s.sup_eval},
              {"max_steps", s.max_steps}};
  j["outputs"] = {{"dir", c.outputs.dir},
                  {"formats", c.outputs.formats},
                  {"nodal_points", c.outputs.nodal_points}};
  j["expect_blowup"] = c.expect_blowup;
  return j;
}

}  // namespace

GridPtr RunConfig::make_grid() const { return SpectralGrid::make(n_modes, n_quad); }

Forcing RunConfig::make_forcing(const GridPtr& grid) const {
  Forcing f = Forcing::make(grid, q);
  f.r_kind = r_kind;
  f.r0 = r0;
  f.r_delta = r_delta;
  f.r_omega = r_omega;
  f.beta_a = beta_a;
  f.beta_s = beta_s;
  return f;
}

Model RunConfig::make_model(const GridPtr& grid) const {
  return Model(params, make_forcing(grid), terms);
}

StateVec RunConfig::make_ic(const GridPtr& grid) const {
  switch (ic.kind) {
    case IcConfig::Kind::constant: return StateVec::constant(grid, ic.t_a, ic.t_s);
    case IcConfig::Kind::legendre_coeffs: {
      StateVec s(grid);
      std::copy(ic.coeffs_a.begin(), ic.coeffs_a.end(), s.t_a.coeffs.begin());
      std::copy(ic.coeffs_s.begin(), ic.coeffs_s.end(), s.t_s.coeffs.begin());
      return s;
    }
    case IcConfig::Kind::random: {
      std::mt19937_64 rng(ic.seed);
      return random_state(grid, rng, ic.random);
    }
  }
  throw ConfigError("ic.kind", "unknown");
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("JSON parse error: ") + e.what());
  }
  return parse_json(root);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

void set_parameter(RunConfig& cfg, const std::string& path, double value) {
  json j = to_json(cfg);
  json::json_pointer ptr("/" + [&] {
    std::string p = path;
    for (char& ch : p)
      if (ch == '.') ch = '/';
    return p;
  }());
  if (!j.contains(ptr) || !j[ptr].is_number())
    throw ConfigError(path, "not a numeric configuration parameter");
  if (j[ptr].is_number_integer()) {
    if (value != std::floor(value)) throw ConfigError(path, "expected an integer value");
    if (j[ptr].is_number_unsigned() && value >= 0.0)
      j[ptr] = static_cast<std::uint64_t>(value);
    else
      j[ptr] = static_cast<long>(value);
  } else {
    j[ptr] = value;
  }
  cfg = parse_json(j);
}

}  // namespace ebm2
