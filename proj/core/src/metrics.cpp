#include "nsplan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan {

namespace {

using Counts = std::map<std::vector<std::string>, std::size_t>;

Counts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  Counts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t clipped_overlap(const Counts& pred, const Counts& ref) {
  std::size_t overlap = 0;
  for (const auto& [gram, count] : pred) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

std::vector<Vector> embed_tokens(const std::vector<std::string>& tokens, const EmbeddingProvider& provider) {
  return provider.embed_batch(tokens);
}

double mean_best_cosine(const std::vector<Vector>& from, const std::vector<Vector>& to) {
  double sum = 0.0;
  for (const auto& a : from) {
    double best = -1.0;
    for (const auto& b : to) best = std::max(best, cosine(a, b));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "-"; }

}  // namespace

double sentence_bleu(std::string_view pred, std::string_view ref) {
  auto p = word_tokens(pred);
  auto r = word_tokens(ref);
  if (p.empty()) return 0.0;
  const std::size_t order = std::min<std::size_t>(4, p.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= order; ++n) {
    auto pc = ngram_counts(p, n);
    double total = static_cast<double>(p.size() - n + 1);
    double matches = static_cast<double>(clipped_overlap(pc, ngram_counts(r, n)));
    log_sum += std::log(std::max(matches, kBleuEpsilon) / total);
  }
  double bp = 1.0;
  if (p.size() < r.size()) bp = std::exp(1.0 - static_cast<double>(r.size()) / static_cast<double>(p.size()));
  return std::clamp(bp * std::exp(log_sum / static_cast<double>(order)), 0.0, 1.0);
}

RougeScore rouge1(std::string_view pred, std::string_view ref) {
  auto p = word_tokens(pred);
  auto r = word_tokens(ref);
  RougeScore s;
  if (p.empty() || r.empty()) return s;
  double overlap = static_cast<double>(clipped_overlap(ngram_counts(p, 1), ngram_counts(r, 1)));
  if (overlap == 0.0) return s;
  s.precision = overlap / static_cast<double>(p.size());
  s.recall = overlap / static_cast<double>(r.size());
  s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

double rouge1_f1(std::string_view pred, std::string_view ref) { return rouge1(pred, ref).f1; }

WmdResult wmd(std::string_view pred, std::string_view ref, const EmbeddingProvider& provider) {
  auto bag = [](std::string_view text, std::vector<std::string>& tokens, std::vector<double>& mass) {
    std::map<std::string, std::size_t> counts;
    auto words = word_tokens(text);
    for (const auto& w : words) ++counts[w];
    for (const auto& [w, c] : counts) {
      tokens.push_back(w);
      mass.push_back(static_cast<double>(c) / static_cast<double>(words.size()));
    }
  };
  WmdResult out;
  bag(pred, out.pred_tokens, out.pred_mass);
  bag(ref, out.ref_tokens, out.ref_mass);
  if (out.pred_tokens.empty() || out.ref_tokens.empty()) throw ContractError("wmd: both texts need at least one word");

  auto pe = embed_tokens(out.pred_tokens, provider);
  auto re = embed_tokens(out.ref_tokens, provider);
  std::vector<std::vector<double>> cost(pe.size(), std::vector<double>(re.size()));
  for (std::size_t i = 0; i < pe.size(); ++i) {
    for (std::size_t j = 0; j < re.size(); ++j) {
      cost[i][j] = out.pred_tokens[i] == out.ref_tokens[j] ? 0.0 : euclidean_distance(pe[i], re[j]);
    }
  }
  out.plan = solve_transport(out.pred_mass, out.ref_mass, cost);
  out.distance = std::max(0.0, out.plan.cost);
  out.similarity = 1.0 / (1.0 + out.distance);
  return out;
}

double embed_match_f1(std::string_view pred, std::string_view ref, const EmbeddingProvider& provider) {
  auto p = word_tokens(pred);
  auto r = word_tokens(ref);
  if (p.empty() || r.empty()) throw ContractError("embed_match_f1: both texts need at least one word");
  auto pe = embed_tokens(p, provider);
  auto re = embed_tokens(r, provider);
  double precision = (mean_best_cosine(pe, re) + 1.0) / 2.0;
  double recall = (mean_best_cosine(re, pe) + 1.0) / 2.0;
  if (precision + recall == 0.0) return 0.0;
  return std::clamp(2.0 * precision * recall / (precision + recall), 0.0, 1.0);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ContractError("pearson: length mismatch");
  if (xs.size() < 2) throw ContractError("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SampleMetrics evaluate_plans(std::string id, const std::vector<std::string>& pred, const std::vector<std::string>& ref,
                             const EmbeddingProvider& provider) {
  SampleMetrics m;
  m.id = std::move(id);
  auto p = join_steps(pred);
  auto r = join_steps(ref);
  m.s_bleu = sentence_bleu(p, r);
  m.rouge1_f1 = rouge1_f1(p, r);
  if (!word_tokens(p).empty() && !word_tokens(r).empty()) {
    auto w = wmd(p, r, provider);
    m.wmd_distance = w.distance;
    m.wmd_similarity = w.similarity;
    m.embed_match_f1 = embed_match_f1(p, r, provider);
  }
  return m;
}

MetricReport MetricReport::from_samples(std::vector<SampleMetrics> samples) {
  MetricReport report;
  report.samples = std::move(samples);
  report.count = report.samples.size();
  std::size_t defined = 0;
  for (const auto& s : report.samples) {
    report.means.s_bleu += s.s_bleu;
    report.means.rouge1_f1 += s.rouge1_f1;
    if (s.wmd_distance) {
      ++defined;
      report.means.wmd_distance += *s.wmd_distance;
      report.means.wmd_similarity += *s.wmd_similarity;
      report.means.embed_match_f1 += *s.embed_match_f1;
    }
  }
  report.undefined_embedding = report.count - defined;
  if (report.count > 0) {
    report.means.s_bleu /= static_cast<double>(report.count);
    report.means.rouge1_f1 /= static_cast<double>(report.count);
  }
  if (defined > 0) {
    report.means.wmd_distance /= static_cast<double>(defined);
    report.means.wmd_similarity /= static_cast<double>(defined);
    report.means.embed_match_f1 /= static_cast<double>(defined);
  }
  return report;
}

nlohmann::json MetricReport::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  nlohmann::json j;
  j["samples"] = nlohmann::json::array();
  for (const auto& s : samples) {
    j["samples"].push_back({{"id", s.id},
                            {"s_bleu", s.s_bleu},
                            {"rouge1_f1", s.rouge1_f1},
                            {"wmd_distance", opt(s.wmd_distance)},
                            {"wmd_similarity", opt(s.wmd_similarity)},
                            {"embed_match_f1", opt(s.embed_match_f1)}});
  }
  j["means"] = {{"s_bleu", means.s_bleu},
                {"rouge1_f1", means.rouge1_f1},
                {"wmd_distance", means.wmd_distance},
                {"wmd_similarity", means.wmd_similarity},
                {"embed_match_f1", means.embed_match_f1}};
  j["count"] = count;
  j["undefined_embedding"] = undefined_embedding;
  return j;
}

std::string MetricReport::to_text() const {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"id", "s_bleu", "rouge1_f1", "wmd_distance", "wmd_similarity", "embed_match_f1"});
  for (const auto& s : samples) {
    rows.push_back({s.id, fmt(s.s_bleu), fmt(s.rouge1_f1), fmt(s.wmd_distance), fmt(s.wmd_similarity),
                    fmt(s.embed_match_f1)});
  }
  rows.push_back({"mean", fmt(means.s_bleu), fmt(means.rouge1_f1), fmt(means.wmd_distance),
                  fmt(means.wmd_similarity), fmt(means.embed_match_f1)});
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace nsplan
