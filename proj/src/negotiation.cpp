#include "migrado/negotiation.hpp"

namespace migrado {

QValue match_quality(const MediaType& type, const AcceptHeader& accept, const ObsolescencePolicy& policy) {
  if (accept.is_absent()) return QValue::one();

  const bool obsolete = policy.contains(type);
  const MediaRange* best = nullptr;
  for (const auto& range : accept.ranges()) {
    if (!range.covers(type)) continue;
    if (range.kind != MediaRange::Kind::exact) {
      if (obsolete) continue;
    } else if (range.q.is_zero()) {
      return QValue::zero();
    }
    if (best == nullptr || range.specificity() > best->specificity()) best = &range;
  }
  return best ? best->q : QValue::zero();
}

}  // namespace migrado
