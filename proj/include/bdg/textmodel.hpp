#pragma once

// Text models for bug reports: TF-IDF vectorizer, one-vs-rest hinge
// classifier trained with SGD, collapsed-Gibbs topic model, and the
// fixing-cost tables derived from them. Everything is seed-deterministic.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "bdg/jsonl.hpp"
#include "bdg/rng.hpp"

namespace bdg {

// Lowercase, split on non-alphanumeric bytes, drop tokens shorter than two
// characters and tokens that are digits only.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  bool all_digits = true;
  auto flush = [&] {
    if (cur.size() >= 2 && !all_digits) out.push_back(cur);
    cur.clear();
    all_digits = true;
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
      if (!std::isdigit(c)) all_digits = false;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

// Sparse vector sorted by feature index.
using SparseVec = std::vector<std::pair<int, double>>;

class TfidfVectorizer {
 public:
  void fit(const std::vector<std::string>& docs) {
    vocab_.clear();
    idf_.clear();
    std::map<std::string, int> df;
    for (const std::string& doc : docs) {
      std::set<std::string> seen;
      for (const std::string& tok : tokenize(doc)) seen.insert(tok);
      for (const std::string& tok : seen) ++df[tok];
    }
    int next = 0;
    for (const auto& [tok, _] : df) vocab_[tok] = next++;  // sorted token order
    idf_.resize(vocab_.size());
    const double n = static_cast<double>(docs.size());
    for (const auto& [tok, count] : df) {
      idf_[vocab_.at(tok)] = std::log((1.0 + n) / (1.0 + count)) + 1.0;
    }
  }

  // Raw term counts weighted by idf, L2-normalized. Tokens outside the
  // fitted vocabulary are ignored.
  SparseVec transform(const std::string& text) const {
    std::map<int, double> tf;
    for (const std::string& tok : tokenize(text)) {
      auto it = vocab_.find(tok);
      if (it != vocab_.end()) tf[it->second] += 1.0;
    }
    SparseVec vec;
    vec.reserve(tf.size());
    double norm = 0.0;
    for (const auto& [idx, count] : tf) {
      const double w = count * idf_[idx];
      vec.emplace_back(idx, w);
      norm += w * w;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (auto& [_, w] : vec) w /= norm;
    }
    return vec;
  }

  std::size_t vocab_size() const { return vocab_.size(); }

  double idf_of(const std::string& token) const {
    auto it = vocab_.find(token);
    return it == vocab_.end() ? 0.0 : idf_[it->second];
  }

 private:
  std::map<std::string, int> vocab_;
  std::vector<double> idf_;
};

// Linear one-vs-rest classifier with hinge loss, trained by SGD with the
// 1/(lambda*t) step schedule. Training order is a seeded shuffle, so equal
// seeds give equal models.
class LinearModel {
 public:
  void fit(const std::vector<SparseVec>& xs, const std::vector<int>& ys, int n_classes,
           int epochs = 20, double lambda = 1e-4, std::uint64_t seed = 1) {
    if (xs.size() != ys.size() || xs.empty()) throw DataError("classifier needs labeled samples");
    n_classes_ = n_classes;
    int dim = 0;
    for (const SparseVec& x : xs) {
      if (!x.empty()) dim = std::max(dim, x.back().first + 1);
    }
    dim_ = dim;
    w_.assign(n_classes_, std::vector<double>(dim_, 0.0));
    b_.assign(n_classes_, 0.0);

    const int first = ys.front();
    single_class_ = std::all_of(ys.begin(), ys.end(), [&](int y) { return y == first; });
    if (single_class_) {
      constant_class_ = first;
      return;
    }

    Rng rng(seed);
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::int64_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const SparseVec& x = xs[i];
        for (int c = 0; c < n_classes_; ++c) {
          const double target = ys[i] == c ? 1.0 : -1.0;
          const double margin = target * (dot(c, x) + b_[c]);
          const double keep = 1.0 - eta * lambda;  // == 1 - 1/t
          for (double& w : w_[c]) w *= keep;
          if (margin < 1.0) {
            for (const auto& [idx, v] : x) w_[c][idx] += eta * target * v;
            b_[c] += eta * target;
          }
        }
      }
    }
  }

  double score(const SparseVec& x, int c) const {
    if (single_class_) return c == constant_class_ ? 1.0 : 0.0;
    return dot(c, x) + b_[c];
  }

  std::vector<double> scores(const SparseVec& x) const {
    std::vector<double> out(n_classes_);
    for (int c = 0; c < n_classes_; ++c) out[c] = score(x, c);
    return out;
  }

  // Ties resolve to the lowest class index.
  int predict(const SparseVec& x) const {
    if (single_class_) return constant_class_;
    int best = 0;
    double best_score = score(x, 0);
    for (int c = 1; c < n_classes_; ++c) {
      const double s = score(x, c);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    return best;
  }

  bool single_class() const { return single_class_; }
  int n_classes() const { return n_classes_; }

 private:
  double dot(int c, const SparseVec& x) const {
    double s = 0.0;
    const std::vector<double>& w = w_[c];
    for (const auto& [idx, v] : x) {
      if (idx < dim_) s += w[idx] * v;
    }
    return s;
  }

  int n_classes_ = 0;
  int dim_ = 0;
  bool single_class_ = false;
  int constant_class_ = 0;
  std::vector<std::vector<double>> w_;
  std::vector<double> b_;
};

// Latent topic model fitted with collapsed Gibbs sampling.
class TopicModel {
 public:
  struct Params {
    int topics = 20;
    double alpha = -1.0;  // negative means 50 / topics
    double beta = 0.01;
    int iterations = 500;
    std::uint64_t seed = 1;
  };

  void fit(const std::vector<std::string>& docs, const Params& params) {
    k_ = params.topics;
    beta_ = params.beta;
    alpha_ = params.alpha < 0.0 ? 50.0 / static_cast<double>(k_) : params.alpha;
    seed_ = params.seed;

    vocab_.clear();
    std::set<std::string> tokens;
    std::vector<std::vector<std::string>> toks(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
      toks[d] = tokenize(docs[d]);
      tokens.insert(toks[d].begin(), toks[d].end());
    }
    int next = 0;
    for (const std::string& tok : tokens) vocab_[tok] = next++;
    const int v = static_cast<int>(vocab_.size());

    std::vector<std::vector<int>> corpus(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (const std::string& tok : toks[d]) corpus[d].push_back(vocab_.at(tok));
    }

    n_kw_.assign(k_, std::vector<std::int64_t>(v, 0));
    n_k_.assign(k_, 0);
    std::vector<std::vector<std::int64_t>> n_dk(docs.size(), std::vector<std::int64_t>(k_, 0));
    std::vector<std::vector<int>> z(docs.size());

    Rng rng(seed_);
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      z[d].resize(corpus[d].size());
      for (std::size_t i = 0; i < corpus[d].size(); ++i) {
        const int k = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(k_)));
        z[d][i] = k;
        ++n_dk[d][k];
        ++n_kw_[k][corpus[d][i]];
        ++n_k_[k];
      }
    }

    std::vector<double> p(k_);
    for (int iter = 0; iter < params.iterations; ++iter) {
      for (std::size_t d = 0; d < corpus.size(); ++d) {
        for (std::size_t i = 0; i < corpus[d].size(); ++i) {
          const int w = corpus[d][i];
          const int old = z[d][i];
          --n_dk[d][old];
          --n_kw_[old][w];
          --n_k_[old];
          double total = 0.0;
          for (int k = 0; k < k_; ++k) {
            total += (static_cast<double>(n_dk[d][k]) + alpha_) *
                     (static_cast<double>(n_kw_[k][w]) + beta_) /
                     (static_cast<double>(n_k_[k]) + beta_ * v);
            p[k] = total;
          }
          const double u = rng.uniform() * total;
          int pick = 0;
          while (pick < k_ - 1 && p[pick] <= u) ++pick;
          z[d][i] = pick;
          ++n_dk[d][pick];
          ++n_kw_[pick][w];
          ++n_k_[pick];
        }
      }
    }
  }

  // Most likely topic for a new document, via Gibbs fold-in with the fitted
  // word counts frozen. Returns -1 when no token is in the vocabulary.
  int dominant_topic(const std::string& text) const {
    std::vector<int> words;
    for (const std::string& tok : tokenize(text)) {
      auto it = vocab_.find(tok);
      if (it != vocab_.end()) words.push_back(it->second);
    }
    if (words.empty() || k_ == 0) return -1;
    const int v = static_cast<int>(vocab_.size());
    Rng rng(seed_ ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::int64_t> m_k(k_, 0);
    std::vector<int> z(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      z[i] = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(k_)));
      ++m_k[z[i]];
    }
    std::vector<double> p(k_);
    for (int iter = 0; iter < kFoldInIterations; ++iter) {
      for (std::size_t i = 0; i < words.size(); ++i) {
        const int w = words[i];
        --m_k[z[i]];
        double total = 0.0;
        for (int k = 0; k < k_; ++k) {
          total += (static_cast<double>(m_k[k]) + alpha_) *
                   (static_cast<double>(n_kw_[k][w]) + beta_) /
                   (static_cast<double>(n_k_[k]) + beta_ * v);
          p[k] = total;
        }
        const double u = rng.uniform() * total;
        int pick = 0;
        while (pick < k_ - 1 && p[pick] <= u) ++pick;
        z[i] = pick;
        ++m_k[pick];
      }
    }
    int best = 0;
    for (int k = 1; k < k_; ++k) {
      if (m_k[k] > m_k[best]) best = k;
    }
    return best;
  }

  // Word probabilities for one topic, in vocabulary order; sums to 1.
  std::vector<double> word_distribution(int k) const {
    const int v = static_cast<int>(vocab_.size());
    std::vector<double> out(v);
    const double denom = static_cast<double>(n_k_[k]) + beta_ * v;
    for (int w = 0; w < v; ++w) {
      out[w] = (static_cast<double>(n_kw_[k][w]) + beta_) / denom;
    }
    return out;
  }

  int topics() const { return k_; }
  std::size_t vocab_size() const { return vocab_.size(); }

  static constexpr int kFoldInIterations = 50;

 private:
  int k_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.01;
  std::uint64_t seed_ = 1;
  std::map<std::string, int> vocab_;
  std::vector<std::vector<std::int64_t>> n_kw_;
  std::vector<std::int64_t> n_k_;
};

// Mean fixing time in days, bucketed by developer and topic, with a
// fallback chain for unseen combinations:
// (dev, topic) -> dev mean -> topic mean -> corpus mean.
class CostModel {
 public:
  struct Sample {
    std::string developer;
    int topic = -1;
    double fixing_days = 0.0;
  };

  void fit(const std::vector<Sample>& samples) {
    if (samples.empty()) throw DataError("cost model needs at least one fixing-time sample");
    pair_.clear();
    dev_.clear();
    topic_.clear();
    double total = 0.0;
    std::map<std::pair<std::string, int>, std::pair<double, int>> pair_acc;
    std::map<std::string, std::pair<double, int>> dev_acc;
    std::map<int, std::pair<double, int>> topic_acc;
    for (const Sample& s : samples) {
      total += s.fixing_days;
      auto& p = pair_acc[{s.developer, s.topic}];
      p.first += s.fixing_days;
      ++p.second;
      auto& d = dev_acc[s.developer];
      d.first += s.fixing_days;
      ++d.second;
      if (s.topic >= 0) {
        auto& t = topic_acc[s.topic];
        t.first += s.fixing_days;
        ++t.second;
      }
    }
    corpus_mean_ = total / static_cast<double>(samples.size());
    for (const auto& [key, acc] : pair_acc) pair_[key] = acc.first / acc.second;
    for (const auto& [key, acc] : dev_acc) dev_[key] = acc.first / acc.second;
    for (const auto& [key, acc] : topic_acc) topic_[key] = acc.first / acc.second;
  }

  double cost(const std::string& dev, int topic) const {
    auto p = pair_.find({dev, topic});
    if (p != pair_.end()) return p->second;
    auto d = dev_.find(dev);
    if (d != dev_.end()) return d->second;
    return topic_cost(topic);
  }

  double topic_cost(int topic) const {
    auto t = topic_.find(topic);
    return t != topic_.end() ? t->second : corpus_mean_;
  }

  double corpus_mean() const { return corpus_mean_; }

 private:
  std::map<std::pair<std::string, int>, double> pair_;
  std::map<std::string, double> dev_;
  std::map<int, double> topic_;
  double corpus_mean_ = 0.0;
};

// Gaussian cost draw around a median, floored at half a day.
inline double gaussian_cost(double median, double sigma, Rng& rng) {
  const double v = sigma == 0.0 ? median : median + sigma * rng.normal();
  return std::max(v, 0.5);
}

}  // namespace bdg
