#include "pirt/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "pirt/csv.hpp"
#include "pirt/error.hpp"

namespace pirt {

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

RetrievalIndex RetrievalIndex::self_retrieval(Matrix embeddings,
                                              std::vector<std::int64_t> labels) {
  RetrievalIndex index;
  index.queries = embeddings;
  index.query_labels = labels;
  index.references = std::move(embeddings);
  index.reference_labels = std::move(labels);
  index.self_exclusion = true;
  return index;
}

RetrievalIndex RetrievalIndex::query_gallery(Matrix queries,
                                             std::vector<std::int64_t> query_labels,
                                             Matrix gallery,
                                             std::vector<std::int64_t> gallery_labels) {
  RetrievalIndex index;
  index.queries = std::move(queries);
  index.query_labels = std::move(query_labels);
  index.references = std::move(gallery);
  index.reference_labels = std::move(gallery_labels);
  index.self_exclusion = false;
  return index;
}

void RetrievalIndex::validate() const {
  if (references.rows() != reference_labels.size() || queries.rows() != query_labels.size()) {
    throw Error(ErrorCode::ShapeMismatch, "retrieval index row and label counts differ");
  }
  if (references.cols() != queries.cols() && !queries.empty() && !references.empty()) {
    throw Error(ErrorCode::DimensionMismatch,
                "query width " + std::to_string(queries.cols()) + " vs reference width " +
                    std::to_string(references.cols()));
  }
  if (self_exclusion && queries.rows() != references.rows()) {
    throw Error(ErrorCode::InvalidArgument,
                "self exclusion needs queries and references to be the same set");
  }
}

namespace {

struct Scored {
  double score;
  std::size_t ref;
};

bool better(const Scored& a, const Scored& b) {
  return a.score > b.score || (a.score == b.score && a.ref < b.ref);
}

std::vector<Scored> score_query(const RetrievalIndex& index, std::size_t query) {
  auto q = index.queries.row(query);
  if (l2_norm(q) == 0.0) {
    throw Error(ErrorCode::ZeroVector, "query " + std::to_string(query) + " is zero");
  }
  std::vector<Scored> scored;
  scored.reserve(index.references.rows());
  for (std::size_t j = 0; j < index.references.rows(); ++j) {
    if (index.self_exclusion && j == query) continue;
    scored.push_back({cosine_similarity(q, index.references.row(j)), j});
  }
  return scored;
}

QueryMetrics query_metrics(const RetrievalIndex& index, std::size_t query, bool need_relevant) {
  std::vector<Scored> scored = score_query(index, query);
  if (scored.empty()) {
    throw Error(ErrorCode::NoEligibleReference,
                "query " + std::to_string(query) + " has no reference to retrieve");
  }
  const std::int64_t label = index.query_labels[query];
  QueryMetrics m;
  for (const Scored& s : scored) {
    if (index.reference_labels[s.ref] == label) ++m.relevant;
  }
  if (need_relevant && m.relevant == 0) {
    throw Error(ErrorCode::NoRelevantReference,
                "query " + std::to_string(query) + " (label " + std::to_string(label) +
                    ") has no same-class reference");
  }
  const std::size_t depth = std::max<std::size_t>(m.relevant, 1);
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(depth),
                    scored.end(), better);

  m.p_at_1 = index.reference_labels[scored.front().ref] == label ? 1.0 : 0.0;
  if (m.relevant > 0) {
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < m.relevant; ++i) {
      if (index.reference_labels[scored[i].ref] == label) {
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
      }
    }
    m.map_at_r = sum / static_cast<double>(m.relevant);
  }
  return m;
}

double mean_of(const std::vector<QueryMetrics>& per_query, double QueryMetrics::*field) {
  double sum = 0.0;
  for (const QueryMetrics& m : per_query) sum += m.*field;
  return per_query.empty() ? 0.0 : sum / static_cast<double>(per_query.size());
}

}  // namespace

std::vector<std::size_t> rank_neighbors(const RetrievalIndex& index, std::size_t query) {
  index.validate();
  if (query >= index.num_queries()) {
    throw Error(ErrorCode::InvalidArgument, "query index " + std::to_string(query) + " out of range");
  }
  std::vector<Scored> scored = score_query(index, query);
  std::sort(scored.begin(), scored.end(), better);
  std::vector<std::size_t> order(scored.size());
  std::transform(scored.begin(), scored.end(), order.begin(),
                 [](const Scored& s) { return s.ref; });
  return order;
}

double precision_at_1(const RetrievalIndex& index) {
  index.validate();
  std::vector<QueryMetrics> per_query;
  per_query.reserve(index.num_queries());
  for (std::size_t q = 0; q < index.num_queries(); ++q) {
    per_query.push_back(query_metrics(index, q, false));
  }
  return mean_of(per_query, &QueryMetrics::p_at_1);
}

double map_at_r(const RetrievalIndex& index) {
  return evaluate(index).map_at_r;
}

MetricReport evaluate(const RetrievalIndex& index) {
  index.validate();
  MetricReport report;
  report.per_query.reserve(index.num_queries());
  for (std::size_t q = 0; q < index.num_queries(); ++q) {
    report.per_query.push_back(query_metrics(index, q, true));
  }
  report.p_at_1 = mean_of(report.per_query, &QueryMetrics::p_at_1);
  report.map_at_r = mean_of(report.per_query, &QueryMetrics::map_at_r);
  return report;
}

void write_metric_report(const std::string& path, const MetricReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << "metric,value\n";
  out << "p_at_1," << format_number(report.p_at_1) << '\n';
  out << "map_at_r," << format_number(report.map_at_r) << '\n';
  out << "num_queries," << report.per_query.size() << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed on '" + path + "'");
}

void write_per_query_csv(const std::string& path, const RetrievalIndex& index,
                         const MetricReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << "query,label,r,p_at_1,map_at_r\n";
  for (std::size_t q = 0; q < report.per_query.size(); ++q) {
    const QueryMetrics& m = report.per_query[q];
    out << q << ',' << index.query_labels[q] << ',' << m.relevant << ','
        << format_number(m.p_at_1) << ',' << format_number(m.map_at_r) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed on '" + path + "'");
}

ProxyStats proxy_stats(const ProxyMatrix& proxies) {
  const std::size_t r = proxies.cols();
  if (r == 0) throw Error(ErrorCode::InvalidArgument, "no proxies");
  const Matrix gram = gram_matrix(proxies);

  ProxyStats stats;
  stats.so_penalty = so_penalty(proxies).value;
  Vec norms(r);
  for (std::size_t j = 0; j < r; ++j) {
    norms[j] = std::sqrt(gram(j, j));
    if (norms[j] == 0.0) {
      throw Error(ErrorCode::ZeroVector, "proxy " + std::to_string(j) + " is zero");
    }
  }
  stats.min_norm = *std::min_element(norms.begin(), norms.end());
  stats.max_norm = *std::max_element(norms.begin(), norms.end());

  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      const double c = std::min(1.0, std::abs(gram(i, j)) / (norms[i] * norms[j]));
      stats.max_offdiag_cosine = std::max(stats.max_offdiag_cosine, c);
      sum += c;
      ++pairs;
    }
  }
  stats.mean_offdiag_cosine = pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
  return stats;
}

}  // namespace pirt
