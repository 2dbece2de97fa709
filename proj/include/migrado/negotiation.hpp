#pragma once

#include "migrado/media_type.hpp"

namespace migrado {

/// Quality a stored media type earns under a client's Accept header and the
/// server's obsolescence policy.
///
/// - An absent header accepts everything at q=1; a present but empty one
///   accepts nothing.
/// - The most specific covering range wins; equal specificity goes to the
///   earliest range in the header.
/// - An exact range covering `type` with q=0 is a hard rejection, whatever
///   else the header says.
/// - Obsolete types are invisible to `*/*` and `type/*` ranges.
QValue match_quality(const MediaType& type, const AcceptHeader& accept, const ObsolescencePolicy& policy);

inline bool is_acceptable(const MediaType& type, const AcceptHeader& accept, const ObsolescencePolicy& policy) {
  return !match_quality(type, accept, policy).is_zero();
}

}  // namespace migrado
