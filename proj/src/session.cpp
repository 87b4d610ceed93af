#include "qme/session.hpp"

#include "qme/experiments.hpp"
#include "qme/lpme.hpp"
#include "qme/qpme.hpp"

#include <cmath>
#include <cstdio>

namespace qme {

SessionMode parse_session_mode(const std::string& name) {
  if (name == "linear") return SessionMode::kLinear;
  if (name == "quadratic") return SessionMode::kQuadratic;
  if (name == "fair") return SessionMode::kFair;
  throw Error(ErrorCode::kInvalidArgument, "unknown session mode: " + name);
}

std::string to_string(SessionMode mode) {
  switch (mode) {
    case SessionMode::kLinear:
      return "linear";
    case SessionMode::kQuadratic:
      return "quadratic";
    case SessionMode::kFair:
      return "fair";
  }
  return "quadratic";
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::kEliciting:
      return "eliciting";
    case Phase::kEvaluating:
      return "evaluating";
    case Phase::kDone:
      return "done";
  }
  return "done";
}

Vector SessionConfig::class_priors() const {
  return priors ? *priors : Vector::Constant(k, 1.0 / k);
}

GroupModel SessionConfig::group_model() const {
  if (tau) return *tau;
  GroupModel gm;
  gm.tau.assign(static_cast<std::size_t>(groups), Vector::Constant(k, 1.0 / groups));
  return gm;
}

QpmeConfig SessionConfig::qpme() const {
  QpmeConfig q;
  q.rho = rho;
  q.varrho = varrho;
  q.epsilon = epsilon;
  return q;
}

void validate(const SessionConfig& cfg) {
  require(cfg.k >= 2, ErrorCode::kInvalidArgument, "session: k must be >= 2");
  require(cfg.evaluation_queries >= 0, ErrorCode::kInvalidArgument,
          "session: evaluation_queries must be non-negative");
  require(cfg.rho > 0.0 && cfg.rho <= 1.0 / cfg.k &&
              cfg.rho <= 1.0 - 1.0 / cfg.k,
          ErrorCode::kInvalidArgument,
          "session: rho must keep the ball inside the unit box");
  if (cfg.mode == SessionMode::kLinear) {
    validate(LpmeConfig{cfg.epsilon, 3,
                        {Vector::Constant(cfg.k, 1.0 / cfg.k), cfg.rho}});
  } else {
    validate(cfg.qpme(), cfg.k);
  }
  if (cfg.priors) {
    require_same_size(cfg.priors->size(), cfg.k, "session priors");
    require((cfg.priors->array() > 0.0).all() &&
                std::abs(cfg.priors->sum() - 1.0) < 1e-6,
            ErrorCode::kInvalidArgument,
            "session: priors must be positive and sum to one");
  }
  if (cfg.mode == SessionMode::kFair) {
    require(cfg.groups >= 2, ErrorCode::kInvalidArgument,
            "session: fair mode needs at least two groups");
    const GroupModel gm = cfg.group_model();
    validate(gm);
    require(gm.groups() == cfg.groups, ErrorCode::kDimensionMismatch,
            "session: tau group count differs from m");
    require_same_size(gm.dim(), cfg.k, "session tau");
  }
}

ConfusionRendering render_confusion(const Vector& priors, const Vector& rates) {
  require_same_size(rates.size(), priors.size(), "render_confusion");
  auto round1 = [](double x) { return std::round(10.0 * x) / 10.0; };
  ConfusionRendering out;
  out.rates = rates;
  out.correct = (100.0 * priors.array() * rates.array()).unaryExpr(round1);
  out.incorrect =
      (100.0 * priors.array() * (1.0 - rates.array())).unaryExpr(round1);
  out.actual_totals = (100.0 * priors).unaryExpr(round1);
  if (rates.size() == 2) {
    // Predicted positive = TP + FP, predicted negative = FN + TN.
    out.predicted_totals.resize(2);
    out.predicted_totals(0) =
        round1(100.0 * (priors(0) * rates(0) + priors(1) * (1.0 - rates(1))));
    out.predicted_totals(1) =
        round1(100.0 * (priors(0) * (1.0 - rates(0)) + priors(1) * rates(1)));
  }
  return out;
}

Vector group_priors(const Vector& priors, const GroupModel& gm, int group) {
  const Vector& t = gm.tau.at(static_cast<std::size_t>(group));
  require_same_size(t.size(), priors.size(), "group_priors");
  const Vector w = t.cwiseProduct(priors);
  return w / w.sum();
}

std::string weight_string(const QuadraticMetric& m) {
  if (m.dim() != 2 || m.B.norm() != 0.0) return "";
  const double total = m.a.cwiseAbs().sum();
  if (total == 0.0) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f TN + %.3f TP", m.a(1) / total,
                m.a(0) / total);
  return buf;
}

namespace {

struct PendingQuery {
  Matrix r1;
  Matrix r2;
};

class ReplayOracle final : public RateOracle {
 public:
  ReplayOracle(const std::vector<int>& answers, Eigen::Index k)
      : answers_(answers), k_(k) {}

  int compare(const Vector& r1, const Vector& r2) override {
    if (next_ < answers_.size()) return answers_[next_++];
    throw PendingQuery{r1, r2};
  }
  Eigen::Index dim() const override { return k_; }

 private:
  const std::vector<int>& answers_;
  Eigen::Index k_;
  std::size_t next_ = 0;
};

class ReplayGroupOracle final : public GroupOracle {
 public:
  ReplayGroupOracle(const std::vector<int>& answers, Eigen::Index k, int m)
      : answers_(answers), k_(k), m_(m) {}

  int compare(const GroupRateProfile& r1, const GroupRateProfile& r2) override {
    if (next_ < answers_.size()) return answers_[next_++];
    throw PendingQuery{r1, r2};
  }
  Eigen::Index dim() const override { return k_; }
  int groups() const override { return m_; }

 private:
  const std::vector<int>& answers_;
  Eigen::Index k_;
  int m_;
  std::size_t next_ = 0;
};

MetricDocument elicit(const SessionConfig& cfg, const std::vector<int>& answers) {
  const Vector o = Vector::Constant(cfg.k, 1.0 / cfg.k);
  switch (cfg.mode) {
    case SessionMode::kLinear: {
      ReplayOracle oracle(answers, cfg.k);
      const LpmeResult r = lpme(LpmeConfig{cfg.epsilon, 3, {o, cfg.rho}}, oracle);
      return {QuadraticMetric{r.weights, Matrix::Zero(cfg.k, cfg.k)}, std::nullopt};
    }
    case SessionMode::kQuadratic: {
      ReplayOracle oracle(answers, cfg.k);
      return {qpme(cfg.qpme(), oracle).metric, std::nullopt};
    }
    case SessionMode::kFair: {
      ReplayGroupOracle oracle(answers, cfg.k, cfg.groups);
      const GroupModel gm = cfg.group_model();
      FairConfig fc;
      fc.qpme = cfg.qpme();
      return {fair_qpme(fc, oracle, gm).metric, gm};
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown session mode");
}

// True when the elicited metric prefers the left profile.
bool prefers_left(const MetricDocument& doc, const Matrix& left,
                  const Matrix& right) {
  if (const auto* q = std::get_if<QuadraticMetric>(&doc.metric)) {
    return eval_quadratic(*q, Vector(left.col(0))) >
           eval_quadratic(*q, Vector(right.col(0)));
  }
  const auto& fm = std::get<FairQuadraticMetric>(doc.metric);
  return eval_fair(fm, left, *doc.groups) < eval_fair(fm, right, *doc.groups);
}

}  // namespace

Session::Session(SessionConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  const int columns = cfg_.mode == SessionMode::kFair ? cfg_.groups : 1;
  const int n = cfg_.evaluation_queries;
  const auto points = sample_ball({Vector::Constant(cfg_.k, 1.0 / cfg_.k), cfg_.rho},
                                  2 * n * columns, cfg_.seed);
  for (int i = 0; i < n; ++i) {
    Matrix left(cfg_.k, columns), right(cfg_.k, columns);
    for (int g = 0; g < columns; ++g) {
      left.col(g) = points[static_cast<std::size_t>((2 * i) * columns + g)];
      right.col(g) = points[static_cast<std::size_t>((2 * i + 1) * columns + g)];
    }
    evaluation_pairs_.emplace_back(std::move(left), std::move(right));
  }
  advance();
}

void Session::advance() {
  if (phase_ == Phase::kEliciting) {
    try {
      metric_ = elicit(cfg_, answers_);
      pending_.reset();
      phase_ = Phase::kEvaluating;
    } catch (const PendingQuery& q) {
      pending_ = std::make_pair(q.r1, q.r2);
      return;
    } catch (const Error& e) {
      error_ = e.what();
      pending_.reset();
      phase_ = Phase::kDone;
      return;
    }
  }
  if (phase_ == Phase::kEvaluating) {
    if (evaluation_answers_.size() < evaluation_pairs_.size()) {
      pending_ = evaluation_pairs_[evaluation_answers_.size()];
    } else {
      pending_.reset();
      phase_ = Phase::kDone;
    }
  }
}

Phase Session::phase() const {
  std::lock_guard lock(mutex_);
  return phase_;
}

std::optional<QueryView> Session::next_query() const {
  std::lock_guard lock(mutex_);
  if (phase_ == Phase::kDone || !pending_) return std::nullopt;
  return QueryView{answers_.size() + evaluation_answers_.size(), phase_,
                   pending_->first, pending_->second};
}

void Session::answer(std::size_t query_id, bool prefer_left) {
  std::lock_guard lock(mutex_);
  const std::size_t current = answers_.size() + evaluation_answers_.size();
  require(phase_ != Phase::kDone && pending_ && query_id == current,
          ErrorCode::kStaleQuery,
          "query " + std::to_string(query_id) + " is not pending");
  if (phase_ == Phase::kEliciting) {
    const int response = prefer_left ? 1 : 0;
    transcript_.append(pending_->first, pending_->second, response);
    answers_.push_back(response);
  } else {
    evaluation_answers_.push_back(prefer_left);
  }
  advance();
}

SessionResult Session::result() const {
  std::lock_guard lock(mutex_);
  require(phase_ == Phase::kDone, ErrorCode::kNotReady,
          "session is still " + to_string(phase_));
  SessionResult r;
  r.metric = metric_;
  r.error = error_;
  r.elicitation_queries = answers_.size();
  r.evaluation_queries = evaluation_answers_.size();
  if (metric_ && !evaluation_answers_.empty()) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < evaluation_answers_.size(); ++i) {
      const auto& [left, right] = evaluation_pairs_[i];
      agree += prefers_left(*metric_, left, right) == evaluation_answers_[i];
    }
    r.match = 100.0 * static_cast<double>(agree) /
              static_cast<double>(evaluation_answers_.size());
  }
  return r;
}

Transcript Session::transcript() const {
  std::lock_guard lock(mutex_);
  return transcript_;
}

std::string SessionManager::create(const SessionConfig& cfg) {
  auto session = std::make_shared<Session>(cfg);
  std::lock_guard lock(mutex_);
  std::string id = "s" + std::to_string(next_id_++);
  sessions_.emplace(id, std::move(session));
  return id;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  require(it != sessions_.end(), ErrorCode::kNotFound,
          "unknown session: " + id);
  return it->second;
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace qme
