#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vc/data/dataset.hpp"
#include "vc/model.hpp"

namespace vc::evaluation {

double iou(const data::Box& a, const data::Box& b);

// Sentence BLEU-n: clipped n-gram precisions up to n, geometric mean, brevity
// penalty against the closest reference length. Empty candidate gives 0.
double bleu_n(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references,
              std::size_t n);

// Corpus-level BLEU-n (counts pooled over all pairs before the mean).
class CorpusBleu {
 public:
  explicit CorpusBleu(std::size_t max_n = 2);
  void add(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references);
  double score(std::size_t n) const;
  std::size_t size() const { return pairs_; }

 private:
  std::size_t max_n_;
  std::vector<std::size_t> matched_, total_;
  std::size_t candidate_len_ = 0, reference_len_ = 0, pairs_ = 0;
};

struct Bucket {
  std::size_t regions = 0;
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

struct EvalReport {
  std::string split;
  std::string head;
  std::size_t samples = 0;
  std::size_t correct = 0;
  std::map<std::size_t, Bucket> buckets;  // keyed by region count
  std::optional<double> bleu1, bleu2;

  double accuracy() const { return samples ? static_cast<double>(correct) / static_cast<double>(samples) : 0.0; }
  // Pooled accuracy over scenes with at least `min_regions` regions.
  Bucket at_least(std::size_t min_regions) const;
};

// Chooses a region index for an expression.
using RegionPicker = std::function<std::size_t(const data::Scene&, const data::ExpressionRecord&)>;

// Fraction of referent-annotated expressions whose picked region overlaps
// the ground-truth box with IoU strictly greater than `threshold`.
EvalReport grounding_accuracy(const data::Dataset& ds, const std::string& split, const RegionPicker& pick,
                              double threshold = 0.5);

// Optional per-expression dumps written during model evaluation.
struct ReportSinks {
  std::ostream* grounding = nullptr;  // expression_id,region_id,s_theta,s_phi,s_omega,total,posterior,is_argmax
  std::ostream* context = nullptr;    // expression_id,region_id,rank,context_region_id,beta
  std::ostream* attention = nullptr;  // expression_id,cue,token,weight
};

EvalReport grounding_accuracy(const Model& model, const data::Dataset& ds, const std::string& split,
                              double threshold = 0.5, const ReportSinks& sinks = {});

void write_grounding_header(std::ostream& os);
void write_grounding_rows(std::ostream& os, std::int64_t expression_id, const data::Scene& scene,
                          const comprehension::GroundingScores& s);
void write_context_header(std::ostream& os);
// Up to three context regions with beta > min_beta for the predicted region.
void write_context_rows(std::ostream& os, std::int64_t expression_id, const data::Scene& scene,
                        const comprehension::GroundingScores& s, double min_beta = 0.1);

// "split,head,bucket,count,correct,accuracy" with an "all" row first.
void write_report_csv(std::ostream& os, const EvalReport& r, bool header = true);

}  // namespace vc::evaluation
