#include "lazybn/query.hpp"

#include <string>

#include "lazybn/error.hpp"

namespace lazybn {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::VE:
      return "ve";
    case BackendKind::SPI:
      return "spi";
    case BackendKind::AR:
      return "ar";
  }
  return "?";
}

BackendKind parse_backend(std::string_view name) {
  if (name == "ve") return BackendKind::VE;
  if (name == "spi") return BackendKind::SPI;
  if (name == "ar") return BackendKind::AR;
  throw ValidationError("unknown backend '" + std::string(name) + "'");
}

void check_query(const Query& q) {
  for (VarId t : q.target) {
    if (q.evidence.contains(t)) throw DomainError("target variable " + std::to_string(t) + " is observed");
  }
  for (const auto& f : q.potentials) {
    for (VarId v : f->domain()) {
      if (q.evidence.contains(v)) throw DomainError("factor mentions observed variable " + std::to_string(v));
    }
  }
}

}  // namespace lazybn
