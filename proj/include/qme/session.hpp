#pragma once

// Interactive elicitation sessions for a human oracle. Each session re-runs
// the deterministic elicitation against the answers given so far; the first
// unanswered comparison becomes the pending query. After elicitation, a fixed
// number of seeded evaluation pairs measure how often the elicited metric
// agrees with the answerer.

#include "qme/fair.hpp"
#include "qme/metrics.hpp"
#include "qme/oracle.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace qme {

enum class SessionMode { kLinear, kQuadratic, kFair };
enum class Phase { kEliciting, kEvaluating, kDone };

SessionMode parse_session_mode(const std::string& name);
std::string to_string(SessionMode mode);
std::string to_string(Phase phase);

inline constexpr double kHumanTolerance = 0.05;
inline constexpr int kEvaluationQueries = 15;

struct SessionConfig {
  SessionMode mode = SessionMode::kQuadratic;
  int k = 2;
  int groups = 2;  ///< fair mode only
  double rho = 0.2;
  std::optional<double> varrho;
  double epsilon = kHumanTolerance;
  std::optional<Vector> priors;  ///< class priors; uniform when absent
  std::optional<GroupModel> tau;  ///< fair mode; uniform when absent
  std::uint64_t seed = 0;         ///< evaluation pairs
  int evaluation_queries = kEvaluationQueries;

  Vector class_priors() const;
  GroupModel group_model() const;
  QpmeConfig qpme() const;
};

void validate(const SessionConfig& cfg);

/// Out-of-100 counts for one rate vector. Diagonal rates fix only the
/// correct and incorrect count of each class; for two classes these are
/// TP, FN, TN and FP with class 1 positive.
struct ConfusionRendering {
  Vector correct;    ///< 100 pi_i r_i
  Vector incorrect;  ///< 100 pi_i (1 - r_i)
  Vector actual_totals;
  Vector predicted_totals;  ///< two classes only
  Vector rates;
};

ConfusionRendering render_confusion(const Vector& priors, const Vector& rates);

/// Class priors within group g: tau^g_i pi_i, renormalized.
Vector group_priors(const Vector& priors, const GroupModel& gm, int group);

struct QueryView {
  std::size_t id = 0;
  Phase phase = Phase::kEliciting;
  Matrix left;  ///< one column per group; a single column otherwise
  Matrix right;
};

struct SessionResult {
  std::optional<MetricDocument> metric;  ///< empty when elicitation failed
  std::string error;
  std::size_t elicitation_queries = 0;
  std::size_t evaluation_queries = 0;
  double match = 0.0;  ///< percentage of evaluation answers matched
};

/// "0.125 TN + 0.875 TP" for a binary linear metric with weights scaled to
/// sum to one in absolute value; empty otherwise.
std::string weight_string(const QuadraticMetric& m);

class Session {
 public:
  explicit Session(SessionConfig cfg);

  const SessionConfig& config() const { return cfg_; }
  Phase phase() const;
  /// Empty once the session is done.
  std::optional<QueryView> next_query() const;
  /// prefer_left answers "left is better". Rejects anything but the pending
  /// query id with kStaleQuery and leaves the session unchanged.
  void answer(std::size_t query_id, bool prefer_left);
  /// Throws kNotReady before the session is done.
  SessionResult result() const;
  Transcript transcript() const;

 private:
  void advance();

  SessionConfig cfg_;
  mutable std::mutex mutex_;
  std::vector<int> answers_;  ///< elicitation responses, in query order
  std::vector<bool> evaluation_answers_;
  std::vector<std::pair<Matrix, Matrix>> evaluation_pairs_;
  std::optional<std::pair<Matrix, Matrix>> pending_;
  Phase phase_ = Phase::kEliciting;
  Transcript transcript_;
  std::optional<MetricDocument> metric_;
  std::string error_;
};

class SessionManager {
 public:
  /// Returns the new session id.
  std::string create(const SessionConfig& cfg);
  /// Throws kNotFound for unknown ids.
  std::shared_ptr<Session> get(const std::string& id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace qme
