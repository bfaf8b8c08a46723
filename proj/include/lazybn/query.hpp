#pragma once

#include <string_view>

#include "lazybn/potential.hpp"

namespace lazybn {

/// Message-computation algorithm. Fixed for a whole propagation run.
enum class BackendKind { VE, SPI, AR };

std::string_view to_string(BackendKind kind);
/// Accepts "ve", "spi", "ar" (case-sensitive); throws ValidationError("unknown backend").
BackendKind parse_backend(std::string_view name);

/// Q = (potentials, target, evidence). Potentials are already instantiated.
struct Query {
  DecomposedPotential potentials;
  VarSet target;
  Evidence evidence;
};

/// Throws DomainError if the target meets the evidence or a factor still mentions an observed variable.
void check_query(const Query& q);

}  // namespace lazybn
