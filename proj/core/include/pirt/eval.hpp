#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pirt/linalg.hpp"
#include "pirt/losses.hpp"

namespace pirt {

// Exact cosine-similarity retrieval index. With self_exclusion the queries are
// the references themselves and query i never retrieves reference i.
struct RetrievalIndex {
  Matrix references;  // m x d
  std::vector<std::int64_t> reference_labels;
  Matrix queries;     // q x d
  std::vector<std::int64_t> query_labels;
  bool self_exclusion = false;

  // Queries = references (CUB / Cars / SOP protocol).
  static RetrievalIndex self_retrieval(Matrix embeddings, std::vector<std::int64_t> labels);
  // Disjoint query and gallery sets (In-Shop protocol).
  static RetrievalIndex query_gallery(Matrix queries, std::vector<std::int64_t> query_labels,
                                      Matrix gallery, std::vector<std::int64_t> gallery_labels);

  std::size_t num_queries() const noexcept { return query_labels.size(); }

  void validate() const;
};

// Reference indices by descending cosine similarity to query `query`; ties go
// to the lower reference index.
std::vector<std::size_t> rank_neighbors(const RetrievalIndex& index, std::size_t query);

struct QueryMetrics {
  std::size_t relevant = 0;  // R, same-class references
  double p_at_1 = 0.0;
  double map_at_r = 0.0;
};

struct MetricReport {
  double p_at_1 = 0.0;
  double map_at_r = 0.0;
  std::vector<QueryMetrics> per_query;
};

double precision_at_1(const RetrievalIndex& index);

// MAP@R: per query, (1/R) sum_{i<=R} P(i), where P(i) is the precision at i
// when the i-th neighbor is relevant and 0 otherwise.
double map_at_r(const RetrievalIndex& index);

// Both metrics with per-query values. Throws NoRelevantReference if some
// query has no same-class reference.
MetricReport evaluate(const RetrievalIndex& index);

void write_metric_report(const std::string& path, const MetricReport& report);
void write_per_query_csv(const std::string& path, const RetrievalIndex& index,
                         const MetricReport& report);

struct ProxyStats {
  double so_penalty = 0.0;
  double max_offdiag_cosine = 0.0;   // max |cos| over distinct proxy pairs
  double mean_offdiag_cosine = 0.0;  // mean |cos| over distinct proxy pairs
  double min_norm = 0.0;
  double max_norm = 0.0;
};

ProxyStats proxy_stats(const ProxyMatrix& proxies);

}  // namespace pirt
