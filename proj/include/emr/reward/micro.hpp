#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "emr/reward/reward.hpp"

namespace emr::reward {

/// The toy micro-language: a class body of `void name ( ) { ... }` methods
/// whose statements are `field ++ ;`, `field -- ;`, `callee ( ) ;`, or a
/// trailing `return ;`. Fields are implicitly declared.
struct MicroLanguage {
  std::set<std::string> fields;
  /// Fields p0..p{n-1} and q0..q{n-1}.
  static MicroLanguage with_slots(int n);
};

/// Stand-in for compilation in micro mode: true iff the snippet parses cleanly
/// and satisfies the typing rules above (declared callees, declared fields,
/// unique method names). `diagnostic` receives the first violation.
bool micro_well_formed(std::string_view code, const MicroLanguage& lang, std::string* diagnostic = nullptr);

class MicroRewardOracle final : public RewardOracle {
 public:
  MicroRewardOracle(RewardWeights weights, MicroLanguage lang, detect::DetectConfig detect_config = {});
  RewardBreakdown score(std::string_view before, std::string_view generated) const override;
  const RewardWeights& weights() const override { return weights_; }

 private:
  RewardWeights weights_;
  MicroLanguage lang_;
  detect::DetectConfig detect_config_;
};

}  // namespace emr::reward
