#include "grtree/attach_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "grtree/errors.hpp"
#include "json.hpp"

namespace grtree {

using nlohmann::json;

const char* to_string(AttachKind k) {
  switch (k) {
    case AttachKind::uniform: return "uniform";
    case AttachKind::affine: return "affine";
    case AttachKind::sublinear: return "sublinear";
    case AttachKind::constant: return "constant";
    case AttachKind::custom_table: return "custom-table";
  }
  return "?";
}

const char* to_string(TableExtension e) {
  return e == TableExtension::hold_last_value ? "hold-last-value" : "reject";
}

static double require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(name) + " must be positive and finite");
  return x;
}

AttachmentFunction AttachmentFunction::uniform(double scale) {
  AttachmentFunction f;
  f.kind_ = AttachKind::uniform;
  f.scale_ = require_positive(scale, "scale");
  f.f_star_ = scale;
  f.lin_c_ = scale;
  f.lin_b_ = 0.0;  // f(i) = scale <= scale * i for i >= 1
  f.limsup_ = 0.0;
  f.sup_ = scale;
  return f;
}

AttachmentFunction AttachmentFunction::affine(double beta, double scale) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("affine beta must be >= 0");
  AttachmentFunction f;
  f.kind_ = AttachKind::affine;
  f.beta_ = beta;
  f.scale_ = require_positive(scale, "scale");
  f.f_star_ = scale * (1.0 + beta);
  f.lin_c_ = scale;
  f.lin_b_ = scale * beta;
  f.limsup_ = scale;
  return f;
}

AttachmentFunction AttachmentFunction::sublinear(double alpha, double scale) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("sublinear alpha must lie in (0, 1)");
  AttachmentFunction f;
  f.kind_ = AttachKind::sublinear;
  f.alpha_ = alpha;
  f.scale_ = require_positive(scale, "scale");
  f.f_star_ = scale;  // i^alpha is non-decreasing with f(1) = 1
  f.lin_c_ = scale;
  f.lin_b_ = 0.0;  // i^alpha <= i for i >= 1
  f.limsup_ = 0.0;
  return f;
}

AttachmentFunction AttachmentFunction::constant(double c, double scale) {
  AttachmentFunction f;
  f.kind_ = AttachKind::constant;
  f.const_ = require_positive(c, "constant value");
  f.scale_ = require_positive(scale, "scale");
  double v = c * scale;
  f.f_star_ = v;
  f.lin_c_ = v;
  f.lin_b_ = 0.0;
  f.limsup_ = 0.0;
  f.sup_ = v;
  return f;
}

AttachmentFunction AttachmentFunction::custom_table(std::vector<double> values, TableExtension ext,
                                                    double scale) {
  if (values.empty()) throw ConfigError("custom table must have at least one value");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("custom table values must be finite and >= 0");
  }
  AttachmentFunction f;
  f.kind_ = AttachKind::custom_table;
  f.table_ = std::move(values);
  f.ext_ = ext;
  f.scale_ = require_positive(scale, "scale");
  f.compute_custom_metadata();
  return f;
}

void AttachmentFunction::compute_custom_metadata() {
  std::size_t m = table_.size();
  table_suffix_min_.assign(m, 0.0);
  table_suffix_max_.assign(m, 0.0);
  double lo = table_.back(), hi = table_.back();
  for (std::size_t j = m; j-- > 0;) {
    lo = std::min(lo, table_[j]);
    hi = std::max(hi, table_[j]);
    table_suffix_min_[j] = lo;
    table_suffix_max_[j] = hi;
  }
  // Beyond the table: hold-last repeats table_.back(); reject has no values,
  // so the table extrema already cover everything that can be evaluated.
  f_star_ = scale_ * table_suffix_min_[0];
  sup_ = scale_ * table_suffix_max_[0];
  lin_c_ = std::max(scale_ * table_suffix_max_[0], std::numeric_limits<double>::min());
  lin_b_ = 0.0;  // f(i) <= max <= max * i
  limsup_ = 0.0;
}

double AttachmentFunction::evaluate(std::uint64_t i) const {
  if (i == 0) throw ConfigError("attachment function argument must be >= 1");
  switch (kind_) {
    case AttachKind::uniform: return scale_;
    case AttachKind::affine: return scale_ * (static_cast<double>(i) + beta_);
    case AttachKind::sublinear: return scale_ * std::pow(static_cast<double>(i), alpha_);
    case AttachKind::constant: return scale_ * const_;
    case AttachKind::custom_table:
      if (i <= table_.size()) return scale_ * table_[i - 1];
      if (ext_ == TableExtension::hold_last_value) return scale_ * table_.back();
      throw std::domain_error("custom table evaluated past its end under reject extension");
  }
  throw InternalError("unreachable attachment kind");
}

double AttachmentFunction::suffix_inf(std::uint64_t k) const {
  switch (kind_) {
    case AttachKind::uniform: return scale_;
    case AttachKind::affine: return evaluate(k + 1);
    case AttachKind::sublinear: return evaluate(k + 1);
    case AttachKind::constant: return scale_ * const_;
    case AttachKind::custom_table:
      if (k >= table_.size()) return scale_ * table_.back();
      return std::min(scale_ * table_suffix_min_[k], scale_ * table_.back());
  }
  throw InternalError("unreachable attachment kind");
}

double AttachmentFunction::suffix_sup(std::uint64_t k) const {
  switch (kind_) {
    case AttachKind::uniform: return scale_;
    case AttachKind::affine: return std::numeric_limits<double>::infinity();
    case AttachKind::sublinear: return std::numeric_limits<double>::infinity();
    case AttachKind::constant: return scale_ * const_;
    case AttachKind::custom_table:
      if (k >= table_.size()) return scale_ * table_.back();
      return std::max(scale_ * table_suffix_max_[k], scale_ * table_.back());
  }
  throw InternalError("unreachable attachment kind");
}

void AttachmentFunction::declare_metadata(std::optional<double> f_star,
                                          std::optional<std::pair<double, double>> linear_bound,
                                          std::optional<double> limsup_bound,
                                          std::optional<double> sup_bound) {
  if (f_star) f_star_ = *f_star;
  if (linear_bound) {
    lin_c_ = linear_bound->first;
    lin_b_ = linear_bound->second;
  }
  if (limsup_bound) limsup_ = *limsup_bound;
  if (sup_bound) sup_ = *sup_bound;
}

static void check_known_keys(const json& obj, std::initializer_list<const char*> keys,
                             const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) {
      if (it.key() == k) { known = true; break; }
    }
    if (!known) throw ConfigError(std::string("unknown field \"") + it.key() + "\" in " + where);
  }
}

std::string AttachmentFunction::to_json() const {
  json params;
  params["scale"] = scale_;
  switch (kind_) {
    case AttachKind::uniform: break;
    case AttachKind::affine: params["beta"] = beta_; break;
    case AttachKind::sublinear: params["alpha"] = alpha_; break;
    case AttachKind::constant: params["c"] = const_; break;
    case AttachKind::custom_table:
      params["values"] = table_;
      params["extension"] = to_string(ext_);
      break;
  }
  json j;
  j["kind"] = to_string(kind_);
  j["params"] = params;
  j["f_star"] = f_star_;
  j["linear_bound"] = {lin_c_, lin_b_};
  j["limsup_bound"] = limsup_;
  if (sup_) j["sup_bound"] = *sup_;
  return j.dump();
}

AttachmentFunction AttachmentFunction::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model must be a JSON object");
  check_known_keys(j, {"kind", "params", "f_star", "linear_bound", "limsup_bound", "sup_bound"},
                   "model");
  for (const char* req : {"kind", "params", "f_star", "linear_bound", "limsup_bound"}) {
    if (!j.contains(req)) throw ConfigError(std::string("model is missing field \"") + req + "\"");
  }
  std::string kind = j.at("kind").get<std::string>();
  const json& params = j.at("params");
  if (!params.is_object()) throw ConfigError("model params must be a JSON object");
  double scale = params.value("scale", 1.0);

  AttachmentFunction f;
  if (kind == "uniform") {
    check_known_keys(params, {"scale"}, "params");
    f = uniform(scale);
  } else if (kind == "affine") {
    check_known_keys(params, {"beta", "scale"}, "params");
    f = affine(params.at("beta").get<double>(), scale);
  } else if (kind == "sublinear") {
    check_known_keys(params, {"alpha", "scale"}, "params");
    f = sublinear(params.at("alpha").get<double>(), scale);
  } else if (kind == "constant") {
    check_known_keys(params, {"c", "scale"}, "params");
    f = constant(params.at("c").get<double>(), scale);
  } else if (kind == "custom-table") {
    check_known_keys(params, {"values", "extension", "scale"}, "params");
    std::string ext = params.at("extension").get<std::string>();
    TableExtension e;
    if (ext == "hold-last-value") e = TableExtension::hold_last_value;
    else if (ext == "reject") e = TableExtension::reject;
    else throw ConfigError("extension must be \"hold-last-value\" or \"reject\"");
    f = custom_table(params.at("values").get<std::vector<double>>(), e, scale);
  } else {
    throw ConfigError("unknown model kind \"" + kind + "\"");
  }

  auto lb = j.at("linear_bound");
  if (!lb.is_array() || lb.size() != 2) throw ConfigError("linear_bound must be a [C, b] pair");
  f.declare_metadata(j.at("f_star").get<double>(),
                     std::make_pair(lb[0].get<double>(), lb[1].get<double>()),
                     j.at("limsup_bound").get<double>(),
                     j.contains("sup_bound") ? std::optional<double>(j.at("sup_bound").get<double>())
                                             : std::nullopt);
  return f;
}

static std::string trim_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string AttachmentFunction::slug() const {
  std::string s;
  switch (kind_) {
    case AttachKind::uniform: s = "uniform"; break;
    case AttachKind::affine: s = "affine" + trim_number(beta_); break;
    case AttachKind::sublinear: s = "sublinear" + trim_number(alpha_); break;
    case AttachKind::constant: s = "constant" + trim_number(const_); break;
    case AttachKind::custom_table: s = "custom" + std::to_string(table_.size()); break;
  }
  if (scale_ != 1.0) s += "x" + trim_number(scale_);
  return s;
}

bool AttachmentFunction::operator==(const AttachmentFunction& o) const {
  return kind_ == o.kind_ && scale_ == o.scale_ && beta_ == o.beta_ && alpha_ == o.alpha_ &&
         const_ == o.const_ && table_ == o.table_ && ext_ == o.ext_ && f_star_ == o.f_star_ &&
         lin_c_ == o.lin_c_ && lin_b_ == o.lin_b_ && limsup_ == o.limsup_ && sup_ == o.sup_;
}

std::vector<std::uint64_t> validation_probe_grid() {
  std::vector<std::uint64_t> grid;
  for (std::uint64_t i = 1; i <= 64; ++i) grid.push_back(i);
  double p = 1.0;
  for (int j = 1; j <= 35; ++j) {
    p *= 1.5;
    grid.push_back(static_cast<std::uint64_t>(std::llround(p)));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::string ValidationReport::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks) {
    json cj;
    cj["name"] = c.name;
    cj["passed"] = c.passed;
    if (c.witness) cj["witness"] = *c.witness;
    if (!c.note.empty()) cj["note"] = c.note;
    checks_json.push_back(cj);
  }
  json j;
  j["passed"] = passed;
  j["checks"] = checks_json;
  return j.dump();
}

ValidationReport validate(const AttachmentFunction& f) {
  ValidationReport report;
  auto add = [&report](ValidationCheck c) {
    report.passed = report.passed && c.passed;
    report.checks.push_back(std::move(c));
  };

  std::vector<std::uint64_t> grid = validation_probe_grid();
  std::vector<std::uint64_t> idx;
  std::vector<double> val;
  bool truncated = false;
  for (std::uint64_t i : grid) {
    try {
      val.push_back(f.evaluate(i));
      idx.push_back(i);
    } catch (const std::domain_error&) {
      truncated = true;
      break;
    }
  }

  {
    ValidationCheck c{"extension_total", true, std::nullopt, ""};
    if (!f.total()) {
      c.note = "reject extension: probes limited to the table (" +
               std::to_string(f.table().size()) + " entries)";
      (void)truncated;
    }
    add(std::move(c));
  }

  {
    ValidationCheck c{"f_star_positive", f.f_star() > 0.0, std::nullopt, ""};
    if (!c.passed) c.note = "declared f_star = " + std::to_string(f.f_star());
    add(std::move(c));
  }

  {
    ValidationCheck c{"positivity", true, std::nullopt, ""};
    for (std::size_t t = 0; t < idx.size(); ++t) {
      if (!(val[t] > 0.0)) {
        c.passed = false;
        c.witness = idx[t];
        break;
      }
    }
    add(std::move(c));
  }

  {
    ValidationCheck c{"f_star_floor", true, std::nullopt, ""};
    for (std::size_t t = 0; t < idx.size(); ++t) {
      if (val[t] < f.f_star() * (1.0 - 1e-12)) {
        c.passed = false;
        c.witness = idx[t];
        break;
      }
    }
    add(std::move(c));
  }

  {
    auto [lc, lb] = f.linear_bound();
    ValidationCheck c{"linear_bound", true, std::nullopt, ""};
    for (std::size_t t = 0; t < idx.size(); ++t) {
      double bound = lc * static_cast<double>(idx[t]) + lb;
      if (val[t] > bound * (1.0 + 1e-12) + 1e-300) {
        c.passed = false;
        c.witness = idx[t];
        break;
      }
    }
    add(std::move(c));
  }

  {
    // limsup f(i)/i <= L cannot be decided from finitely many probes; instead
    // require the excess ratio s(i) = max(0, f(i) - L*i - b)/i to decay along
    // the grid tail. Linear-or-worse growth above L*i keeps s(i) flat or
    // rising and is flagged; any genuinely sublinear excess passes.
    auto [lc, lb] = f.linear_bound();
    (void)lc;
    ValidationCheck c{"limsup_bound_consistent", true, std::nullopt, ""};
    auto excess = [&](std::size_t t) {
      double s = val[t] - f.limsup_bound() * static_cast<double>(idx[t]) - lb;
      return std::max(0.0, s) / static_cast<double>(idx[t]);
    };
    if (idx.size() >= 8 && idx.back() >= 512) {
      std::size_t last = idx.size() - 1;
      std::uint64_t ref_target = idx[last] / 8;
      std::size_t ref = 0;
      for (std::size_t t = 0; t < idx.size(); ++t) {
        if (idx[t] <= ref_target) ref = t;
      }
      double s_ref = excess(ref), s_last = excess(last);
      if (s_last > std::max(0.9 * s_ref, 1e-9)) {
        c.passed = false;
        c.witness = idx[last];
        c.note = "excess ratio above declared limsup_bound does not decay";
      }
    } else {
      c.note = "insufficient probe range; deferred";
    }
    add(std::move(c));
  }

  if (f.sup_bound()) {
    ValidationCheck c{"sup_bound", true, std::nullopt, ""};
    for (std::size_t t = 0; t < idx.size(); ++t) {
      if (val[t] > *f.sup_bound() * (1.0 + 1e-12)) {
        c.passed = false;
        c.witness = idx[t];
        break;
      }
    }
    add(std::move(c));
  }

  return report;
}

}  // namespace grtree
