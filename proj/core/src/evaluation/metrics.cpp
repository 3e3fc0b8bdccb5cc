#include "vc/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace vc::evaluation {

double iou(const data::Box& a, const data::Box& b) {
  const double iw = std::max(0.0, std::min(a.x_br, b.x_br) - std::max(a.x_tl, b.x_tl));
  const double ih = std::max(0.0, std::min(a.y_br, b.y_br) - std::max(a.y_tl, b.y_tl));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngrams(std::span<const std::string> s, std::size_t k) {
  std::map<Ngram, std::size_t> out;
  if (s.size() < k) return out;
  for (std::size_t i = 0; i + k <= s.size(); ++i) ++out[Ngram(s.begin() + static_cast<std::ptrdiff_t>(i),
                                                              s.begin() + static_cast<std::ptrdiff_t>(i + k))];
  return out;
}

// (clipped matches, candidate n-gram total)
std::pair<std::size_t, std::size_t> clipped(std::span<const std::string> cand,
                                            std::span<const std::vector<std::string>> refs, std::size_t k) {
  const auto c = ngrams(cand, k);
  std::map<Ngram, std::size_t> max_ref;
  for (const auto& r : refs)
    for (const auto& [g, n] : ngrams(r, k)) max_ref[g] = std::max(max_ref[g], n);
  std::size_t matched = 0, total = 0;
  for (const auto& [g, n] : c) {
    total += n;
    auto it = max_ref.find(g);
    if (it != max_ref.end()) matched += std::min(n, it->second);
  }
  return {matched, total};
}

std::size_t closest_ref_len(std::size_t c, std::span<const std::vector<std::string>> refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t l) { return l > c ? l - c : c - l; };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  return best;
}

double combine(std::span<const std::size_t> matched, std::span<const std::size_t> total, std::size_t n,
               std::size_t c, std::size_t r) {
  if (c == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (matched[k] == 0 || total[k] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[k]) / static_cast<double>(total[k]));
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum / static_cast<double>(n));
}

}  // namespace

double bleu_n(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references,
              std::size_t n) {
  if (n == 0) throw DomainError("bleu_n: n must be positive");
  if (references.empty()) throw DomainError("bleu_n: no references");
  if (candidate.empty()) return 0.0;
  std::vector<std::size_t> m(n), t(n);
  for (std::size_t k = 0; k < n; ++k) std::tie(m[k], t[k]) = clipped(candidate, references, k + 1);
  return combine(m, t, n, candidate.size(), closest_ref_len(candidate.size(), references));
}

CorpusBleu::CorpusBleu(std::size_t max_n) : max_n_(max_n), matched_(max_n), total_(max_n) {
  if (max_n == 0) throw DomainError("CorpusBleu: n must be positive");
}

void CorpusBleu::add(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references) {
  if (references.empty()) throw DomainError("CorpusBleu: no references");
  for (std::size_t k = 0; k < max_n_; ++k) {
    const auto [m, t] = clipped(candidate, references, k + 1);
    matched_[k] += m;
    total_[k] += t;
  }
  candidate_len_ += candidate.size();
  reference_len_ += closest_ref_len(candidate.size(), references);
  ++pairs_;
}

double CorpusBleu::score(std::size_t n) const {
  if (n == 0 || n > max_n_) throw DomainError("CorpusBleu: n outside 1.." + std::to_string(max_n_));
  return combine(matched_, total_, n, candidate_len_, reference_len_);
}

Bucket EvalReport::at_least(std::size_t min_regions) const {
  Bucket b;
  b.regions = min_regions;
  for (const auto& [n, x] : buckets)
    if (n >= min_regions) {
      b.count += x.count;
      b.correct += x.correct;
    }
  return b;
}

namespace {
void record(EvalReport& r, const data::Scene& scene, const data::ExpressionRecord& e, std::size_t picked,
            double threshold) {
  const bool ok = picked < scene.regions.size() &&
                  iou(scene.regions[picked].box, scene.regions[*e.referent].box) > threshold;
  auto& b = r.buckets[scene.regions.size()];
  b.regions = scene.regions.size();
  ++b.count;
  ++r.samples;
  if (ok) {
    ++b.correct;
    ++r.correct;
  }
}
}  // namespace

EvalReport grounding_accuracy(const data::Dataset& ds, const std::string& split, const RegionPicker& pick,
                              double threshold) {
  EvalReport r;
  r.split = split;
  for (const auto* e : ds.split(split)) {
    if (!e->referent) continue;
    const auto& scene = ds.scene_of(*e);
    record(r, scene, *e, pick(scene, *e), threshold);
  }
  return r;
}

EvalReport grounding_accuracy(const Model& model, const data::Dataset& ds, const std::string& split,
                              double threshold, const ReportSinks& sinks) {
  EvalReport r;
  r.split = split;
  r.head = head_name(model.config().head);
  for (const auto* e : ds.split(split)) {
    const auto& scene = ds.scene_of(*e);
    const auto p = predict(model, scene, *e);
    if (sinks.grounding) write_grounding_rows(*sinks.grounding, e->id, scene, p.scores);
    if (sinks.context) write_context_rows(*sinks.context, e->id, scene, p.scores);
    if (sinks.attention) language::write_attention_csv(*sinks.attention, e->id, e->tokens, p.attention);
    if (e->referent) record(r, scene, *e, p.scores.argmax, threshold);
  }
  return r;
}

void write_grounding_header(std::ostream& os) {
  os << "expression_id,region_id,s_theta,s_phi,s_omega,total,posterior,is_argmax\n";
}

void write_grounding_rows(std::ostream& os, std::int64_t expression_id, const data::Scene& scene,
                          const comprehension::GroundingScores& s) {
  auto cell = [](const std::vector<double>& v, std::size_t i) {
    char buf[40];
    if (i >= v.size()) return std::string();
    std::snprintf(buf, sizeof buf, "%.6f", v[i]);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < scene.regions.size(); ++i)
    os << expression_id << ',' << scene.regions[i].id << ',' << cell(s.s_theta, i) << ',' << cell(s.s_phi, i) << ','
       << cell(s.s_omega, i) << ',' << cell(s.total, i) << ',' << cell(s.posterior, i) << ','
       << (i == s.argmax ? 1 : 0) << '\n';
}

void write_context_header(std::ostream& os) { os << "expression_id,region_id,rank,context_region_id,beta\n"; }

void write_context_rows(std::ostream& os, std::int64_t expression_id, const data::Scene& scene,
                        const comprehension::GroundingScores& s, double min_beta) {
  if (s.beta.size() <= s.argmax) return;
  const auto& beta = s.beta[s.argmax];
  std::vector<std::size_t> idx(beta.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return beta[a] > beta[b]; });
  char buf[40];
  for (std::size_t r = 0; r < idx.size() && r < 3; ++r) {
    if (beta[idx[r]] <= min_beta) break;
    std::snprintf(buf, sizeof buf, "%.6f", beta[idx[r]]);
    os << expression_id << ',' << scene.regions[s.argmax].id << ',' << r + 1 << ',' << scene.regions[idx[r]].id << ','
       << buf << '\n';
  }
}

void write_report_csv(std::ostream& os, const EvalReport& r, bool header) {
  if (header) os << "split,head,bucket,count,correct,accuracy\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", r.accuracy());
  os << r.split << ',' << r.head << ",all," << r.samples << ',' << r.correct << ',' << buf << '\n';
  for (const auto& [n, b] : r.buckets) {
    std::snprintf(buf, sizeof buf, "%.6f", b.accuracy());
    os << r.split << ',' << r.head << ',' << n << ',' << b.count << ',' << b.correct << ',' << buf << '\n';
  }
}

}  // namespace vc::evaluation
