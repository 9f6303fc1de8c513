#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nsplan {

/// Conditional probability table. Rows are indexed by parent values in
/// row-major order (first parent slowest); each row is a distribution over
/// `size` values.
struct Cpt {
  std::vector<std::size_t> parent_sizes;
  std::size_t size = 0;
  std::vector<double> probs;

  std::size_t row_count() const;
  double at(const std::vector<std::size_t>& parents, std::size_t value) const;
  /// Throws ContractError unless every row is a distribution (1e-12).
  void validate(const char* name) const;
};

/// Discrete SCM over D (unobserved), T, S_prev, P, S with edges D->T,
/// D->S_prev, T->S_prev, T->P, S_prev->P, D->S and P->S (plus optional
/// T->S and S_prev->S through the table). A one-valued S_prev is the
/// non-temporal case.
struct DiscreteScm {
  Cpt d;       // P(D)
  Cpt t;       // P(T | D)
  Cpt s_prev;  // P(S_prev | T, D)
  Cpt p;       // P(P | T, S_prev)
  Cpt s;       // P(S | P, T, S_prev, D)

  std::size_t nd() const { return d.size; }
  std::size_t nt() const { return t.size; }
  std::size_t nsp() const { return s_prev.size; }
  std::size_t np() const { return p.size; }
  std::size_t ns() const { return s.size; }

  void validate() const;

  /// {"supports": {"D", "T", "S_prev", "P", "S"}, "tables": {"D", "T|D",
  /// "S_prev|T,D", "P|T,S_prev", "S|P,T,S_prev,D"}} with flat row-major
  /// arrays. S_prev may be omitted (one value).
  static DiscreteScm from_json(const nlohmann::json& j);
  static DiscreteScm load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct DoAssignment {
  std::optional<std::size_t> t;
  std::optional<std::size_t> s_prev;
  std::optional<std::size_t> p;
};

enum class ScmVariable { kD, kT, kSPrev, kP, kS };

/// Ground-truth interventional marginal by graph surgery and exact
/// enumeration. Throws ContractError for out-of-support assignments.
std::vector<double> surgery_distribution(const DiscreteScm& scm, const DoAssignment& assignment,
                                         ScmVariable target = ScmVariable::kS);

/// Observational joint over (T, S_prev, P, S) with D summed out.
struct ObservationalJoint {
  std::size_t nt = 0, nsp = 0, np = 0, ns = 0;
  std::vector<double> probs;

  double at(std::size_t t, std::size_t sp, std::size_t p, std::size_t s) const;
};

ObservationalJoint observational_joint(const DiscreteScm& scm);

/// P(S | T = t, S_prev = sp) from the joint.
std::vector<double> conditional_s(const ObservationalJoint& joint, std::size_t t, std::size_t sp);
/// P(P | T = t, S_prev = sp) from the joint.
std::vector<double> conditional_p(const ObservationalJoint& joint, std::size_t t, std::size_t sp);

/// Front-door estimate from observational data only.
///   do(T, S_prev): sum_p pi(p|T,S_prev) sum_{t,s'} pi(S|p,t,s') pi(t,s')
///   do(P):         sum_{t,s'} pi(S|P,t,s') pi(t,s')
/// do(T) alone is accepted when S_prev has one value. Throws
/// ZeroProbabilityError naming an event whose conditional is needed but has
/// zero mass.
std::vector<double> frontdoor_estimate(const ObservationalJoint& joint, const DoAssignment& assignment);

struct RandomScmOptions {
  std::size_t max_support = 4;
  bool temporal = true;
  double min_prob = 0.01;
};

/// Random SCM satisfying the front-door criterion: S depends on (P, D)
/// only, every entry >= min_prob.
DiscreteScm random_scm(std::mt19937_64& rng, const RandomScmOptions& options = {});

/// D ~ Bern(0.5); T copies D w.p. 0.9; P copies T w.p. 0.9;
/// P(S=1 | P, D) = 0.1 + 0.4 P + 0.4 D.
DiscreteScm confounded_example();

struct FrontdoorCheck {
  std::size_t trials = 0;
  /// Largest elementwise gap between front-door and surgery over all trials
  /// and all interventions tried.
  double max_frontdoor_error = 0.0;
  /// pi(P|do T) by surgery vs pi(P|T) observed.
  double max_front1_error = 0.0;
  /// pi(S|do P) by surgery vs the do(P) adjustment.
  double max_front2_error = 0.0;

  bool passed(double tolerance = 1e-9) const {
    return max_frontdoor_error <= tolerance && max_front1_error <= tolerance && max_front2_error <= tolerance;
  }
  nlohmann::json to_json() const;
};

FrontdoorCheck run_frontdoor_trials(std::size_t trials, std::uint64_t seed, const RandomScmOptions& options = {});

}  // namespace nsplan
