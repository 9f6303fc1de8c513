#include "nsplan/causal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "nsplan/errors.hpp"

namespace nsplan {

namespace {

std::size_t row_index(const std::vector<std::size_t>& sizes, const std::vector<std::size_t>& values) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) idx = idx * sizes[k] + values[k];
  return idx;
}

Cpt random_cpt(std::mt19937_64& rng, std::vector<std::size_t> parents, std::size_t size, double min_prob) {
  Cpt cpt{std::move(parents), size, {}};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double free_mass = 1.0 - min_prob * static_cast<double>(size);
  for (std::size_t r = 0; r < cpt.row_count(); ++r) {
    std::vector<double> draw(size);
    double sum = 0.0;
    for (auto& x : draw) {
      x = unit(rng) + 1e-12;
      sum += x;
    }
    for (double x : draw) cpt.probs.push_back(min_prob + free_mass * x / sum);
  }
  return cpt;
}

Cpt point_mass(std::vector<std::size_t> parents, std::size_t size, std::size_t value) {
  Cpt cpt{std::move(parents), size, {}};
  for (std::size_t r = 0; r < cpt.row_count(); ++r) {
    for (std::size_t v = 0; v < size; ++v) cpt.probs.push_back(v == value ? 1.0 : 0.0);
  }
  return cpt;
}

void check_support(const std::optional<std::size_t>& value, std::size_t size, const char* name) {
  if (value && *value >= size) {
    throw ContractError(std::string("do(") + name + "=" + std::to_string(*value) + ") is outside the support of size " +
                        std::to_string(size));
  }
}

Cpt cpt_from_json(const nlohmann::json& tables, const char* key, std::vector<std::size_t> parents, std::size_t size) {
  if (!tables.contains(key) || !tables[key].is_array()) {
    throw ConfigError(key, "missing table");
  }
  Cpt cpt{std::move(parents), size, {}};
  for (const auto& v : tables[key]) {
    if (!v.is_number()) throw ConfigError(key, "table entries must be numbers");
    cpt.probs.push_back(v.get<double>());
  }
  if (cpt.probs.size() != cpt.row_count() * size) {
    throw ConfigError(key, "expected " + std::to_string(cpt.row_count() * size) + " entries, got " +
                               std::to_string(cpt.probs.size()));
  }
  return cpt;
}

}  // namespace

std::size_t Cpt::row_count() const {
  std::size_t rows = 1;
  for (auto s : parent_sizes) rows *= s;
  return rows;
}

double Cpt::at(const std::vector<std::size_t>& parents, std::size_t value) const {
  return probs[row_index(parent_sizes, parents) * size + value];
}

void Cpt::validate(const char* name) const {
  if (size == 0) throw ContractError(std::string(name) + ": empty support");
  if (probs.size() != row_count() * size) throw ContractError(std::string(name) + ": table has wrong size");
  for (std::size_t r = 0; r < row_count(); ++r) {
    double sum = 0.0;
    for (std::size_t v = 0; v < size; ++v) {
      double x = probs[r * size + v];
      if (!(x >= 0.0)) throw ContractError(std::string(name) + ": negative entry");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ContractError(std::string(name) + ": row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
}

void DiscreteScm::validate() const {
  d.validate("D");
  t.validate("T|D");
  s_prev.validate("S_prev|T,D");
  p.validate("P|T,S_prev");
  s.validate("S|P,T,S_prev,D");
  auto expect = [](const Cpt& c, std::vector<std::size_t> parents, const char* name) {
    if (c.parent_sizes != parents) throw ContractError(std::string(name) + ": parent supports do not match");
  };
  expect(d, {}, "D");
  expect(t, {nd()}, "T|D");
  expect(s_prev, {nt(), nd()}, "S_prev|T,D");
  expect(p, {nt(), nsp()}, "P|T,S_prev");
  expect(s, {np(), nt(), nsp(), nd()}, "S|P,T,S_prev,D");
}

DiscreteScm DiscreteScm::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("supports") || !j.contains("tables")) {
    throw ConfigError("scm", "expected {\"supports\": ..., \"tables\": ...}");
  }
  const auto& sup = j["supports"];
  auto size = [&](const char* name, std::size_t fallback) -> std::size_t {
    if (!sup.contains(name)) {
      if (fallback) return fallback;
      throw ConfigError(name, "missing support size");
    }
    return sup[name].get<std::size_t>();
  };
  std::size_t nd = size("D", 0), nt = size("T", 0), nsp = size("S_prev", 1), np = size("P", 0), ns = size("S", 0);
  const auto& tables = j["tables"];
  DiscreteScm scm;
  scm.d = cpt_from_json(tables, "D", {}, nd);
  scm.t = cpt_from_json(tables, "T|D", {nd}, nt);
  if (tables.contains("S_prev|T,D")) {
    scm.s_prev = cpt_from_json(tables, "S_prev|T,D", {nt, nd}, nsp);
  } else if (nsp == 1) {
    scm.s_prev = point_mass({nt, nd}, 1, 0);
  } else {
    throw ConfigError("S_prev|T,D", "missing table");
  }
  scm.p = cpt_from_json(tables, "P|T,S_prev", {nt, nsp}, np);
  scm.s = cpt_from_json(tables, "S|P,T,S_prev,D", {np, nt, nsp, nd}, ns);
  try {
    scm.validate();
  } catch (const ContractError& e) {
    throw ConfigError("scm", e.what());
  }
  return scm;
}

DiscreteScm DiscreteScm::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scm", "cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scm", std::string("invalid JSON: ") + e.what());
  }
}

nlohmann::json DiscreteScm::to_json() const {
  return {{"supports", {{"D", nd()}, {"T", nt()}, {"S_prev", nsp()}, {"P", np()}, {"S", ns()}}},
          {"tables",
           {{"D", d.probs}, {"T|D", t.probs}, {"S_prev|T,D", s_prev.probs}, {"P|T,S_prev", p.probs},
            {"S|P,T,S_prev,D", s.probs}}}};
}

std::vector<double> surgery_distribution(const DiscreteScm& scm, const DoAssignment& a, ScmVariable target) {
  check_support(a.t, scm.nt(), "T");
  check_support(a.s_prev, scm.nsp(), "S_prev");
  check_support(a.p, scm.np(), "P");
  auto mech = [](const std::optional<std::size_t>& value, std::size_t v, double natural) {
    if (!value) return natural;
    return v == *value ? 1.0 : 0.0;
  };
  std::size_t out_size = 0;
  switch (target) {
    case ScmVariable::kD: out_size = scm.nd(); break;
    case ScmVariable::kT: out_size = scm.nt(); break;
    case ScmVariable::kSPrev: out_size = scm.nsp(); break;
    case ScmVariable::kP: out_size = scm.np(); break;
    case ScmVariable::kS: out_size = scm.ns(); break;
  }
  std::vector<double> out(out_size, 0.0);
  for (std::size_t d = 0; d < scm.nd(); ++d) {
    double pd = scm.d.at({}, d);
    for (std::size_t t = 0; t < scm.nt(); ++t) {
      double pt = pd * mech(a.t, t, scm.t.at({d}, t));
      if (pt == 0.0) continue;
      for (std::size_t sp = 0; sp < scm.nsp(); ++sp) {
        double psp = pt * mech(a.s_prev, sp, scm.s_prev.at({t, d}, sp));
        if (psp == 0.0) continue;
        for (std::size_t p = 0; p < scm.np(); ++p) {
          double pp = psp * mech(a.p, p, scm.p.at({t, sp}, p));
          if (pp == 0.0) continue;
          for (std::size_t s = 0; s < scm.ns(); ++s) {
            double joint = pp * scm.s.at({p, t, sp, d}, s);
            std::size_t idx = 0;
            switch (target) {
              case ScmVariable::kD: idx = d; break;
              case ScmVariable::kT: idx = t; break;
              case ScmVariable::kSPrev: idx = sp; break;
              case ScmVariable::kP: idx = p; break;
              case ScmVariable::kS: idx = s; break;
            }
            out[idx] += joint;
          }
        }
      }
    }
  }
  return out;
}

double ObservationalJoint::at(std::size_t t, std::size_t sp, std::size_t p, std::size_t s) const {
  return probs[((t * nsp + sp) * np + p) * ns + s];
}

ObservationalJoint observational_joint(const DiscreteScm& scm) {
  ObservationalJoint j{scm.nt(), scm.nsp(), scm.np(), scm.ns(), {}};
  j.probs.assign(j.nt * j.nsp * j.np * j.ns, 0.0);
  for (std::size_t d = 0; d < scm.nd(); ++d) {
    for (std::size_t t = 0; t < j.nt; ++t) {
      for (std::size_t sp = 0; sp < j.nsp; ++sp) {
        for (std::size_t p = 0; p < j.np; ++p) {
          for (std::size_t s = 0; s < j.ns; ++s) {
            j.probs[((t * j.nsp + sp) * j.np + p) * j.ns + s] += scm.d.at({}, d) * scm.t.at({d}, t) *
                                                                 scm.s_prev.at({t, d}, sp) *
                                                                 scm.p.at({t, sp}, p) * scm.s.at({p, t, sp, d}, s);
          }
        }
      }
    }
  }
  return j;
}

namespace {

double mass_ts(const ObservationalJoint& j, std::size_t t, std::size_t sp) {
  double m = 0.0;
  for (std::size_t p = 0; p < j.np; ++p) {
    for (std::size_t s = 0; s < j.ns; ++s) m += j.at(t, sp, p, s);
  }
  return m;
}

double mass_tsp(const ObservationalJoint& j, std::size_t t, std::size_t sp, std::size_t p) {
  double m = 0.0;
  for (std::size_t s = 0; s < j.ns; ++s) m += j.at(t, sp, p, s);
  return m;
}

std::string event(std::size_t t, std::size_t sp) {
  return "T=" + std::to_string(t) + ", S_prev=" + std::to_string(sp);
}

// sum_{t,s'} pi(S|p,t,s') pi(t,s')
std::vector<double> adjust_over_ts(const ObservationalJoint& j, std::size_t p) {
  std::vector<double> out(j.ns, 0.0);
  for (std::size_t t = 0; t < j.nt; ++t) {
    for (std::size_t sp = 0; sp < j.nsp; ++sp) {
      double w = mass_ts(j, t, sp);
      if (w == 0.0) continue;
      double m = mass_tsp(j, t, sp, p);
      if (m == 0.0) throw ZeroProbabilityError("P=" + std::to_string(p) + ", " + event(t, sp));
      for (std::size_t s = 0; s < j.ns; ++s) out[s] += j.at(t, sp, p, s) / m * w;
    }
  }
  return out;
}

}  // namespace

std::vector<double> conditional_s(const ObservationalJoint& j, std::size_t t, std::size_t sp) {
  double m = mass_ts(j, t, sp);
  if (m == 0.0) throw ZeroProbabilityError(event(t, sp));
  std::vector<double> out(j.ns, 0.0);
  for (std::size_t p = 0; p < j.np; ++p) {
    for (std::size_t s = 0; s < j.ns; ++s) out[s] += j.at(t, sp, p, s) / m;
  }
  return out;
}

std::vector<double> conditional_p(const ObservationalJoint& j, std::size_t t, std::size_t sp) {
  double m = mass_ts(j, t, sp);
  if (m == 0.0) throw ZeroProbabilityError(event(t, sp));
  std::vector<double> out(j.np, 0.0);
  for (std::size_t p = 0; p < j.np; ++p) out[p] = mass_tsp(j, t, sp, p) / m;
  return out;
}

std::vector<double> frontdoor_estimate(const ObservationalJoint& j, const DoAssignment& a) {
  check_support(a.t, j.nt, "T");
  check_support(a.s_prev, j.nsp, "S_prev");
  check_support(a.p, j.np, "P");
  if (a.p && !a.t && !a.s_prev) return adjust_over_ts(j, *a.p);
  if (a.p || !a.t) throw ContractError("frontdoor_estimate: intervene on (T, S_prev) or on P alone");
  if (!a.s_prev && j.nsp != 1) throw ContractError("frontdoor_estimate: S_prev must be set in the temporal case");
  std::size_t t0 = *a.t;
  std::size_t sp0 = a.s_prev.value_or(0);
  auto p_given = conditional_p(j, t0, sp0);
  std::vector<double> out(j.ns, 0.0);
  for (std::size_t p = 0; p < j.np; ++p) {
    if (p_given[p] == 0.0) continue;
    auto inner = adjust_over_ts(j, p);
    for (std::size_t s = 0; s < j.ns; ++s) out[s] += p_given[p] * inner[s];
  }
  return out;
}

DiscreteScm random_scm(std::mt19937_64& rng, const RandomScmOptions& options) {
  if (options.max_support < 2) throw ContractError("random_scm: max_support must be >= 2");
  std::uniform_int_distribution<std::size_t> card(2, options.max_support);
  std::size_t nd = card(rng), nt = card(rng), np = card(rng), ns = card(rng);
  std::size_t nsp = options.temporal ? card(rng) : 1;
  if (options.min_prob * static_cast<double>(options.max_support) >= 1.0) {
    throw ContractError("random_scm: min_prob too large for the support size");
  }
  DiscreteScm scm;
  scm.d = random_cpt(rng, {}, nd, options.min_prob);
  scm.t = random_cpt(rng, {nd}, nt, options.min_prob);
  scm.s_prev = options.temporal ? random_cpt(rng, {nt, nd}, nsp, options.min_prob) : point_mass({nt, nd}, 1, 0);
  scm.p = random_cpt(rng, {nt, nsp}, np, options.min_prob);
  // S sees only (P, D): draw per (p, d) and copy across (t, s_prev).
  Cpt s_pd = random_cpt(rng, {np, nd}, ns, options.min_prob);
  scm.s = Cpt{{np, nt, nsp, nd}, ns, {}};
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t sp = 0; sp < nsp; ++sp) {
        for (std::size_t d = 0; d < nd; ++d) {
          for (std::size_t s = 0; s < ns; ++s) scm.s.probs.push_back(s_pd.at({p, d}, s));
        }
      }
    }
  }
  return scm;
}

DiscreteScm confounded_example() {
  DiscreteScm scm;
  scm.d = Cpt{{}, 2, {0.5, 0.5}};
  scm.t = Cpt{{2}, 2, {0.9, 0.1, 0.1, 0.9}};
  scm.s_prev = point_mass({2, 2}, 1, 0);
  scm.p = Cpt{{2, 1}, 2, {0.9, 0.1, 0.1, 0.9}};
  scm.s = Cpt{{2, 2, 1, 2}, 2, {}};
  for (std::size_t p = 0; p < 2; ++p) {
    for (std::size_t t = 0; t < 2; ++t) {
      for (std::size_t d = 0; d < 2; ++d) {
        double s1 = 0.1 + 0.4 * static_cast<double>(p) + 0.4 * static_cast<double>(d);
        scm.s.probs.push_back(1.0 - s1);
        scm.s.probs.push_back(s1);
      }
    }
  }
  return scm;
}

nlohmann::json FrontdoorCheck::to_json() const {
  return {{"trials", trials},
          {"max_frontdoor_error", max_frontdoor_error},
          {"max_front1_error", max_front1_error},
          {"max_front2_error", max_front2_error},
          {"passed", passed()}};
}

FrontdoorCheck run_frontdoor_trials(std::size_t trials, std::uint64_t seed, const RandomScmOptions& options) {
  std::mt19937_64 rng(seed);
  FrontdoorCheck check;
  auto gap = [](const std::vector<double>& a, const std::vector<double>& b) {
    double g = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
    return g;
  };
  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto scm = random_scm(rng, options);
    auto joint = observational_joint(scm);
    for (std::size_t t = 0; t < scm.nt(); ++t) {
      for (std::size_t sp = 0; sp < scm.nsp(); ++sp) {
        DoAssignment a{t, sp, std::nullopt};
        check.max_frontdoor_error =
            std::max(check.max_frontdoor_error, gap(frontdoor_estimate(joint, a), surgery_distribution(scm, a)));
        check.max_front1_error = std::max(
            check.max_front1_error, gap(surgery_distribution(scm, a, ScmVariable::kP), conditional_p(joint, t, sp)));
      }
    }
    for (std::size_t p = 0; p < scm.np(); ++p) {
      DoAssignment a{std::nullopt, std::nullopt, p};
      check.max_front2_error =
          std::max(check.max_front2_error, gap(frontdoor_estimate(joint, a), surgery_distribution(scm, a)));
    }
    ++check.trials;
  }
  return check;
}

}  // namespace nsplan
