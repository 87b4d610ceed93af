#pragma once

// Pairwise comparators. compare(x, y) returns 1 when x is strictly preferred
// and 0 otherwise (ties included).

#include "qme/metrics.hpp"
#include "qme/types.hpp"

#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <vector>

namespace qme {

class RateOracle {
 public:
  virtual ~RateOracle() = default;
  virtual int compare(const Vector& r1, const Vector& r2) = 0;
  virtual Eigen::Index dim() const = 0;
};

class GroupOracle {
 public:
  virtual ~GroupOracle() = default;
  virtual int compare(const GroupRateProfile& r1,
                      const GroupRateProfile& r2) = 0;
  virtual Eigen::Index dim() const = 0;
  virtual int groups() const = 0;
};

enum class NoiseMode { kTruthful, kFlip, kSeededRandom };

struct NoiseConfig {
  double epsilon = 0.0;  ///< answers are only guaranteed outside this band
  NoiseMode mode = NoiseMode::kTruthful;
  std::uint64_t seed = 0;
};

NoiseMode parse_noise_mode(const std::string& name);
std::string to_string(NoiseMode mode);

/// Applies the noise band to a pair of utilities (higher is better).
class NoisyDecision {
 public:
  explicit NoisyDecision(NoiseConfig noise);
  int operator()(double u1, double u2);
  const NoiseConfig& config() const { return noise_; }

 private:
  NoiseConfig noise_;
  std::mt19937_64 rng_;
};

class SimulatedOracle final : public RateOracle {
 public:
  explicit SimulatedOracle(QuadraticMetric metric, NoiseConfig noise = {});

  int compare(const Vector& r1, const Vector& r2) override;
  Eigen::Index dim() const override { return metric_.dim(); }
  const QuadraticMetric& metric() const { return metric_; }

 private:
  QuadraticMetric metric_;
  NoisyDecision decide_;
};

/// Prefers the profile with lower fair cost.
class FairOracle final : public GroupOracle {
 public:
  FairOracle(FairQuadraticMetric metric, GroupModel groups,
             NoiseConfig noise = {});

  int compare(const GroupRateProfile& r1, const GroupRateProfile& r2) override;
  Eigen::Index dim() const override { return metric_.dim(); }
  int groups() const override { return metric_.groups; }
  const FairQuadraticMetric& metric() const { return metric_; }
  const GroupModel& group_model() const { return groups_; }

 private:
  FairQuadraticMetric metric_;
  GroupModel groups_;
  NoisyDecision decide_;
};

/// Profile with rate s for the groups in sigma and o for the rest.
GroupRateProfile restricted_profile(const Vector& s, const Vector& o,
                                    const std::vector<int>& sigma, int groups);

/// Rate oracle over the groups in sigma; remaining groups are pinned to o.
class RestrictedOracle final : public RateOracle {
 public:
  RestrictedOracle(GroupOracle& base, std::vector<int> sigma, Vector o);

  int compare(const Vector& s1, const Vector& s2) override;
  Eigen::Index dim() const override { return base_.dim(); }
  const std::vector<int>& sigma() const { return sigma_; }

 private:
  GroupOracle& base_;
  std::vector<int> sigma_;
  Vector o_;
};

struct QueryRecord {
  std::size_t index = 0;
  Matrix r1;  ///< one column per group; a single column for plain rates
  Matrix r2;
  int response = 0;
  double timestamp = 0.0;  ///< seconds since the epoch

  /// Timestamps are excluded.
  bool operator==(const QueryRecord& other) const;
};

/// Append-only; appends are serialized.
class Transcript {
 public:
  Transcript() = default;
  Transcript(const Transcript& other);
  Transcript& operator=(const Transcript& other);

  void append(const Matrix& r1, const Matrix& r2, int response);
  std::size_t count() const;
  std::vector<QueryRecord> records() const;

  std::string to_jsonl() const;
  static Transcript from_jsonl(const std::string& text);
  void save(const std::string& path) const;

  bool operator==(const Transcript& other) const;

 private:
  mutable std::mutex mutex_;
  std::vector<QueryRecord> records_;
};

class TranscribingOracle final : public RateOracle {
 public:
  TranscribingOracle(RateOracle& inner, Transcript& transcript)
      : inner_(inner), transcript_(transcript) {}

  int compare(const Vector& r1, const Vector& r2) override;
  Eigen::Index dim() const override { return inner_.dim(); }

 private:
  RateOracle& inner_;
  Transcript& transcript_;
};

class TranscribingGroupOracle final : public GroupOracle {
 public:
  TranscribingGroupOracle(GroupOracle& inner, Transcript& transcript)
      : inner_(inner), transcript_(transcript) {}

  int compare(const GroupRateProfile& r1, const GroupRateProfile& r2) override;
  Eigen::Index dim() const override { return inner_.dim(); }
  int groups() const override { return inner_.groups(); }

 private:
  GroupOracle& inner_;
  Transcript& transcript_;
};

}  // namespace qme
