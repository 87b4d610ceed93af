#include "qme/oracle.hpp"

#include "json_util.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace qme {

NoiseMode parse_noise_mode(const std::string& name) {
  if (name == "truthful") return NoiseMode::kTruthful;
  if (name == "flip") return NoiseMode::kFlip;
  if (name == "seeded_random" || name == "random") {
    return NoiseMode::kSeededRandom;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown noise mode: " + name);
}

std::string to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::kTruthful:
      return "truthful";
    case NoiseMode::kFlip:
      return "flip";
    case NoiseMode::kSeededRandom:
      return "seeded_random";
  }
  return "truthful";
}

NoisyDecision::NoisyDecision(NoiseConfig noise)
    : noise_(noise), rng_(noise.seed) {
  require(noise.epsilon >= 0.0, ErrorCode::kInvalidArgument,
          "noise band must be non-negative");
}

int NoisyDecision::operator()(double u1, double u2) {
  if (u1 == u2) return 0;
  const int truth = u1 > u2 ? 1 : 0;
  if (std::abs(u1 - u2) > noise_.epsilon) return truth;
  switch (noise_.mode) {
    case NoiseMode::kTruthful:
      return truth;
    case NoiseMode::kFlip:
      return 1 - truth;
    case NoiseMode::kSeededRandom:
      return std::bernoulli_distribution(0.5)(rng_) ? 1 : 0;
  }
  return truth;
}

SimulatedOracle::SimulatedOracle(QuadraticMetric metric, NoiseConfig noise)
    : metric_(std::move(metric)), decide_(noise) {
  require_same_size(metric_.B.rows(), metric_.dim(), "SimulatedOracle B");
  require_same_size(metric_.B.cols(), metric_.dim(), "SimulatedOracle B");
}

int SimulatedOracle::compare(const Vector& r1, const Vector& r2) {
  require_same_size(r1.size(), dim(), "compare");
  require_same_size(r2.size(), dim(), "compare");
  return decide_(eval_quadratic(metric_, r1), eval_quadratic(metric_, r2));
}

FairOracle::FairOracle(FairQuadraticMetric metric, GroupModel groups,
                       NoiseConfig noise)
    : metric_(std::move(metric)), groups_(std::move(groups)), decide_(noise) {
  validate(metric_);
  validate(groups_);
  require(groups_.groups() == metric_.groups, ErrorCode::kDimensionMismatch,
          "FairOracle: group counts differ");
  require_same_size(groups_.dim(), metric_.dim(), "FairOracle tau");
}

int FairOracle::compare(const GroupRateProfile& r1,
                        const GroupRateProfile& r2) {
  return decide_(-eval_fair(metric_, r1, groups_),
                 -eval_fair(metric_, r2, groups_));
}

GroupRateProfile restricted_profile(const Vector& s, const Vector& o,
                                    const std::vector<int>& sigma,
                                    int groups) {
  require_same_size(s.size(), o.size(), "restricted_profile");
  GroupRateProfile profile = o.replicate(1, groups);
  for (int g : sigma) profile.col(g) = s;
  return profile;
}

RestrictedOracle::RestrictedOracle(GroupOracle& base, std::vector<int> sigma,
                                   Vector o)
    : base_(base), sigma_(std::move(sigma)), o_(std::move(o)) {
  const int m = base_.groups();
  require(!sigma_.empty() && static_cast<int>(sigma_.size()) < m,
          ErrorCode::kInvalidArgument,
          "restrict_fair: sigma must be a proper non-empty subset");
  for (int g : sigma_) {
    require(g >= 0 && g < m, ErrorCode::kInvalidArgument,
            "restrict_fair: group index out of range");
  }
  require_same_size(o_.size(), base_.dim(), "restrict_fair");
}

int RestrictedOracle::compare(const Vector& s1, const Vector& s2) {
  require_same_size(s1.size(), dim(), "compare");
  require_same_size(s2.size(), dim(), "compare");
  return base_.compare(restricted_profile(s1, o_, sigma_, base_.groups()),
                       restricted_profile(s2, o_, sigma_, base_.groups()));
}

bool QueryRecord::operator==(const QueryRecord& other) const {
  return index == other.index && response == other.response &&
         r1.rows() == other.r1.rows() && r1.cols() == other.r1.cols() &&
         r2.rows() == other.r2.rows() && r2.cols() == other.r2.cols() &&
         r1 == other.r1 && r2 == other.r2;
}

Transcript::Transcript(const Transcript& other) {
  std::lock_guard lock(other.mutex_);
  records_ = other.records_;
}

Transcript& Transcript::operator=(const Transcript& other) {
  if (this == &other) return *this;
  std::vector<QueryRecord> copy = other.records();
  std::lock_guard lock(mutex_);
  records_ = std::move(copy);
  return *this;
}

void Transcript::append(const Matrix& r1, const Matrix& r2, int response) {
  const double now =
      std::chrono::duration<double>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  std::lock_guard lock(mutex_);
  records_.push_back({records_.size(), r1, r2, response, now});
}

std::size_t Transcript::count() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::vector<QueryRecord> Transcript::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

namespace {

// Plain rates are stored flat; group profiles as one array per group.
detail::json rates_json(const Matrix& r) {
  if (r.cols() == 1) return detail::to_json_array(Vector(r.col(0)));
  return detail::to_json_array(Matrix(r.transpose()));
}

Matrix rates_from_json(const detail::json& j) {
  if (!j.empty() && j.at(0).is_array()) {
    return detail::matrix_from_json(j).transpose();
  }
  return detail::vector_from_json(j);
}

}  // namespace

std::string Transcript::to_jsonl() const {
  std::ostringstream out;
  for (const QueryRecord& rec : records()) {
    detail::json j;
    j["index"] = rec.index;
    j["r1"] = rates_json(rec.r1);
    j["r2"] = rates_json(rec.r2);
    j["response"] = rec.response;
    j["timestamp"] = rec.timestamp;
    out << j.dump() << '\n';
  }
  return out.str();
}

Transcript Transcript::from_jsonl(const std::string& text) {
  Transcript t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = detail::json::parse(line);
      QueryRecord rec;
      rec.index = j.at("index").get<std::size_t>();
      rec.r1 = rates_from_json(j.at("r1"));
      rec.r2 = rates_from_json(j.at("r2"));
      rec.response = j.at("response").get<int>();
      rec.timestamp = j.value("timestamp", 0.0);
      require(t.records_.empty() || rec.index > t.records_.back().index,
              ErrorCode::kInvalidArgument,
              "transcript indices must be strictly increasing");
      t.records_.push_back(std::move(rec));
    } catch (const detail::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("malformed transcript line: ") + e.what());
    }
  }
  return t;
}

void Transcript::save(const std::string& path) const {
  detail::write_file(path, to_jsonl());
}

bool Transcript::operator==(const Transcript& other) const {
  return records() == other.records();
}

int TranscribingOracle::compare(const Vector& r1, const Vector& r2) {
  const int response = inner_.compare(r1, r2);
  transcript_.append(r1, r2, response);
  return response;
}

int TranscribingGroupOracle::compare(const GroupRateProfile& r1,
                                     const GroupRateProfile& r2) {
  const int response = inner_.compare(r1, r2);
  transcript_.append(r1, r2, response);
  return response;
}

}  // namespace qme
